//! Minimal reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records every operation applied to [`Var`] handles; calling
//! [`Tape::backward`] replays the record in reverse and accumulates exact
//! gradients for every node, including leaves bound to shared parameter
//! tensors. The op set is deliberately small: just what a transformer
//! denoiser and its kinematic losses need. All arithmetic is 64-bit and the
//! evaluation order is fixed, so forward values and gradients are
//! bit-reproducible.

use std::sync::Arc;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must match shape");
        Mat { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn scalar(v: f64) -> Self {
        Mat::from_vec(1, 1, vec![v])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · other`
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul inner dims");
        let (m, p, n) = (self.rows, self.cols, other.cols);
        let mut out = Mat::zeros(m, n);
        for i in 0..m {
            let arow = &self.data[i * p..(i + 1) * p];
            let orow = &mut out.data[i * n..(i + 1) * n];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for j in 0..n {
                    orow[j] += aik * brow[j];
                }
            }
        }
        out
    }

    /// `self · otherᵀ`
    pub fn matmul_transb(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "matmul_transb inner dims");
        let (m, p, n) = (self.rows, self.cols, other.rows);
        let mut out = Mat::zeros(m, n);
        for i in 0..m {
            let arow = &self.data[i * p..(i + 1) * p];
            for j in 0..n {
                let brow = &other.data[j * p..(j + 1) * p];
                let mut acc = 0.0;
                for k in 0..p {
                    acc += arow[k] * brow[k];
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }

    /// `selfᵀ · other`
    pub fn matmul_transa(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "matmul_transa inner dims");
        let (p, m, n) = (self.rows, self.cols, other.cols);
        let mut out = Mat::zeros(m, n);
        for i in 0..p {
            let arow = &self.data[i * m..(i + 1) * m];
            let brow = &other.data[i * n..(i + 1) * n];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let orow = &mut out.data[k * n..(k + 1) * n];
                for j in 0..n {
                    orow[j] += aik * brow[j];
                }
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Mat) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Value {
    Owned(Mat),
    Shared(Arc<Mat>),
}

impl Value {
    fn as_mat(&self) -> &Mat {
        match self {
            Value::Owned(m) => m,
            Value::Shared(m) => m,
        }
    }
}

enum Op {
    Leaf,
    Matmul { a: usize, b: usize },
    MatmulTransB { a: usize, b: usize },
    Add { a: usize, b: usize },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Div { a: usize, b: usize },
    Scale { a: usize, k: f64 },
    AddScalar { a: usize },
    AddRow { a: usize, row: usize },
    MulRow { a: usize, row: usize },
    DivCol { a: usize, col: usize },
    SelectRow { a: usize, r: usize },
    SliceCols { a: usize, start: usize },
    SliceRows { a: usize, start: usize },
    ConcatCols { parts: Vec<usize> },
    SumAll { a: usize },
    MeanAll { a: usize },
    SumCols { a: usize },
    SumRows { a: usize },
    SoftmaxRows { a: usize },
    LayerNormRows { a: usize, eps: f64 },
    Silu { a: usize },
    SqrtEps { a: usize },
}

/// Records a computation as a flat list of nodes.
pub struct Tape {
    values: Vec<Value>,
    ops: Vec<Op>,
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            values: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: Var) -> &Mat {
        self.values[v.0].as_mat()
    }

    fn push(&mut self, value: Mat, op: Op) -> Var {
        self.values.push(Value::Owned(value));
        self.ops.push(op);
        Var(self.values.len() - 1)
    }

    /// Bind an owned matrix as a leaf (input, constant, or parameter).
    pub fn leaf(&mut self, m: Mat) -> Var {
        self.push(m, Op::Leaf)
    }

    /// Bind a shared tensor without copying its data.
    pub fn leaf_shared(&mut self, m: Arc<Mat>) -> Var {
        self.values.push(Value::Shared(m));
        self.ops.push(Op::Leaf);
        Var(self.values.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul(self.value(b));
        self.push(v, Op::Matmul { a: a.0, b: b.0 })
    }

    /// `a · bᵀ`
    pub fn matmul_transb(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul_transb(self.value(b));
        self.push(v, Op::MatmulTransB { a: a.0, b: b.0 })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |x, y| x + y);
        self.push(v, Op::Add { a: a.0, b: b.0 })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |x, y| x - y);
        self.push(v, Op::Sub { a: a.0, b: b.0 })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |x, y| x * y);
        self.push(v, Op::Mul { a: a.0, b: b.0 })
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |x, y| x / y);
        self.push(v, Op::Div { a: a.0, b: b.0 })
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let am = self.value(a);
        let v = Mat::from_vec(am.rows, am.cols, am.data.iter().map(|x| x * k).collect());
        self.push(v, Op::Scale { a: a.0, k })
    }

    pub fn add_scalar(&mut self, a: Var, k: f64) -> Var {
        let am = self.value(a);
        let v = Mat::from_vec(am.rows, am.cols, am.data.iter().map(|x| x + k).collect());
        self.push(v, Op::AddScalar { a: a.0 })
    }

    /// Broadcast-add a `1×C` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (am, rm) = (self.value(a), self.value(row));
        assert_eq!(rm.rows, 1);
        assert_eq!(am.cols, rm.cols);
        let mut v = am.clone();
        for r in 0..v.rows {
            for c in 0..v.cols {
                v.data[r * v.cols + c] += rm.data[c];
            }
        }
        self.push(v, Op::AddRow { a: a.0, row: row.0 })
    }

    /// Broadcast-multiply every row of `a` by a `1×C` row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        let (am, rm) = (self.value(a), self.value(row));
        assert_eq!(rm.rows, 1);
        assert_eq!(am.cols, rm.cols);
        let mut v = am.clone();
        for r in 0..v.rows {
            for c in 0..v.cols {
                v.data[r * v.cols + c] *= rm.data[c];
            }
        }
        self.push(v, Op::MulRow { a: a.0, row: row.0 })
    }

    /// Divide each row of `a` by the matching entry of an `R×1` column.
    pub fn div_col(&mut self, a: Var, col: Var) -> Var {
        let (am, cm) = (self.value(a), self.value(col));
        assert_eq!(cm.cols, 1);
        assert_eq!(am.rows, cm.rows);
        let mut v = am.clone();
        for r in 0..v.rows {
            let d = cm.data[r];
            for c in 0..v.cols {
                v.data[r * v.cols + c] /= d;
            }
        }
        self.push(v, Op::DivCol { a: a.0, col: col.0 })
    }

    /// Extract row `r` as a `1×C` matrix.
    pub fn select_row(&mut self, a: Var, r: usize) -> Var {
        let am = self.value(a);
        let v = Mat::from_vec(1, am.cols, am.row(r).to_vec());
        self.push(v, Op::SelectRow { a: a.0, r })
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let am = self.value(a);
        assert!(start + len <= am.cols);
        let mut v = Mat::zeros(am.rows, len);
        for r in 0..am.rows {
            v.data[r * len..(r + 1) * len]
                .copy_from_slice(&am.data[r * am.cols + start..r * am.cols + start + len]);
        }
        self.push(v, Op::SliceCols { a: a.0, start })
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Var {
        let am = self.value(a);
        assert!(start + len <= am.rows);
        let v = Mat::from_vec(
            len,
            am.cols,
            am.data[start * am.cols..(start + len) * am.cols].to_vec(),
        );
        self.push(v, Op::SliceRows { a: a.0, start })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.value(parts[0]).rows;
        let total: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut v = Mat::zeros(rows, total);
        let mut off = 0;
        for p in parts {
            let pm = self.value(*p);
            assert_eq!(pm.rows, rows);
            for r in 0..rows {
                v.data[r * total + off..r * total + off + pm.cols]
                    .copy_from_slice(pm.row(r));
            }
            off += pm.cols;
        }
        self.push(
            v,
            Op::ConcatCols {
                parts: parts.iter().map(|p| p.0).collect(),
            },
        )
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s: f64 = self.value(a).data.iter().sum();
        self.push(Mat::scalar(s), Op::SumAll { a: a.0 })
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let n = am.data.len() as f64;
        let s: f64 = am.data.iter().sum();
        self.push(Mat::scalar(s / n), Op::MeanAll { a: a.0 })
    }

    /// Row sums, producing `R×1`.
    pub fn sum_cols(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let mut v = Mat::zeros(am.rows, 1);
        for r in 0..am.rows {
            v.data[r] = am.row(r).iter().sum();
        }
        self.push(v, Op::SumCols { a: a.0 })
    }

    /// Column sums, producing `1×C`.
    pub fn sum_rows(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let mut v = Mat::zeros(1, am.cols);
        for r in 0..am.rows {
            for c in 0..am.cols {
                v.data[c] += am.data[r * am.cols + c];
            }
        }
        self.push(v, Op::SumRows { a: a.0 })
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let mut v = am.clone();
        for r in 0..v.rows {
            let row = &mut v.data[r * v.cols..(r + 1) * v.cols];
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
        self.push(v, Op::SoftmaxRows { a: a.0 })
    }

    /// Per-row layer normalization without learned affine (modulation is a
    /// separate op).
    pub fn layer_norm_rows(&mut self, a: Var, eps: f64) -> Var {
        let am = self.value(a);
        let mut v = am.clone();
        let n = am.cols as f64;
        for r in 0..v.rows {
            let row = &mut v.data[r * v.cols..(r + 1) * v.cols];
            let mean = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let rstd = 1.0 / (var + eps).sqrt();
            for x in row.iter_mut() {
                *x = (*x - mean) * rstd;
            }
        }
        self.push(v, Op::LayerNormRows { a: a.0, eps })
    }

    pub fn silu(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let v = Mat::from_vec(
            am.rows,
            am.cols,
            am.data.iter().map(|&x| x * sigmoid(x)).collect(),
        );
        self.push(v, Op::Silu { a: a.0 })
    }

    /// Elementwise `sqrt(x + eps)`; the shift keeps the derivative finite at 0.
    pub fn sqrt_eps(&mut self, a: Var, eps: f64) -> Var {
        let am = self.value(a);
        let v = Mat::from_vec(
            am.rows,
            am.cols,
            am.data.iter().map(|&x| (x + eps).sqrt()).collect(),
        );
        self.push(v, Op::SqrtEps { a: a.0 })
    }

    fn zip(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Mat {
        let (am, bm) = (self.value(a), self.value(b));
        assert_eq!(am.rows, bm.rows, "elementwise rows");
        assert_eq!(am.cols, bm.cols, "elementwise cols");
        Mat::from_vec(
            am.rows,
            am.cols,
            am.data
                .iter()
                .zip(bm.data.iter())
                .map(|(&x, &y)| f(x, y))
                .collect(),
        )
    }

    /// Accumulate gradients of a scalar node with respect to every node.
    ///
    /// Returns one gradient per tape node (zero where the node does not
    /// influence `loss`), indexable by `Var`.
    pub fn backward(&self, loss: Var) -> Grads {
        let lm = self.value(loss);
        assert_eq!((lm.rows, lm.cols), (1, 1), "backward target must be scalar");
        let mut grads: Vec<Option<Mat>> = (0..self.values.len()).map(|_| None).collect();
        grads[loss.0] = Some(Mat::scalar(1.0));

        for idx in (0..self.ops.len()).rev() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            self.backward_node(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Grads { grads }
    }

    fn backward_node(&self, idx: usize, g: &Mat, grads: &mut [Option<Mat>]) {
        let acc = |grads: &mut [Option<Mat>], node: usize, contrib: Mat| {
            match &mut grads[node] {
                Some(existing) => existing.add_assign(&contrib),
                slot @ None => *slot = Some(contrib),
            }
        };
        match &self.ops[idx] {
            Op::Leaf => {}
            Op::Matmul { a, b } => {
                let (am, bm) = (self.values[*a].as_mat(), self.values[*b].as_mat());
                acc(grads, *a, g.matmul_transb(bm));
                acc(grads, *b, am.matmul_transa(g));
            }
            Op::MatmulTransB { a, b } => {
                let (am, bm) = (self.values[*a].as_mat(), self.values[*b].as_mat());
                acc(grads, *a, g.matmul(bm));
                acc(grads, *b, g.matmul_transa(am));
            }
            Op::Add { a, b } => {
                acc(grads, *a, g.clone());
                acc(grads, *b, g.clone());
            }
            Op::Sub { a, b } => {
                acc(grads, *a, g.clone());
                let neg = Mat::from_vec(g.rows, g.cols, g.data.iter().map(|x| -x).collect());
                acc(grads, *b, neg);
            }
            Op::Mul { a, b } => {
                let (am, bm) = (self.values[*a].as_mat(), self.values[*b].as_mat());
                let da = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data.iter().zip(bm.data.iter()).map(|(x, y)| x * y).collect(),
                );
                let db = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data.iter().zip(am.data.iter()).map(|(x, y)| x * y).collect(),
                );
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::Div { a, b } => {
                let (am, bm) = (self.values[*a].as_mat(), self.values[*b].as_mat());
                let da = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data.iter().zip(bm.data.iter()).map(|(x, y)| x / y).collect(),
                );
                let mut db = Mat::zeros(g.rows, g.cols);
                for i in 0..g.data.len() {
                    db.data[i] = -g.data[i] * am.data[i] / (bm.data[i] * bm.data[i]);
                }
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::Scale { a, k } => {
                let da = Mat::from_vec(g.rows, g.cols, g.data.iter().map(|x| x * k).collect());
                acc(grads, *a, da);
            }
            Op::AddScalar { a } => acc(grads, *a, g.clone()),
            Op::AddRow { a, row } => {
                acc(grads, *a, g.clone());
                let mut dr = Mat::zeros(1, g.cols);
                for r in 0..g.rows {
                    for c in 0..g.cols {
                        dr.data[c] += g.data[r * g.cols + c];
                    }
                }
                acc(grads, *row, dr);
            }
            Op::MulRow { a, row } => {
                let (am, rm) = (self.values[*a].as_mat(), self.values[*row].as_mat());
                let mut da = Mat::zeros(g.rows, g.cols);
                let mut dr = Mat::zeros(1, g.cols);
                for r in 0..g.rows {
                    for c in 0..g.cols {
                        let gv = g.data[r * g.cols + c];
                        da.data[r * g.cols + c] = gv * rm.data[c];
                        dr.data[c] += gv * am.data[r * g.cols + c];
                    }
                }
                acc(grads, *a, da);
                acc(grads, *row, dr);
            }
            Op::DivCol { a, col } => {
                let (am, cm) = (self.values[*a].as_mat(), self.values[*col].as_mat());
                let mut da = Mat::zeros(g.rows, g.cols);
                let mut dc = Mat::zeros(g.rows, 1);
                for r in 0..g.rows {
                    let d = cm.data[r];
                    for c in 0..g.cols {
                        let gv = g.data[r * g.cols + c];
                        da.data[r * g.cols + c] = gv / d;
                        dc.data[r] -= gv * am.data[r * g.cols + c] / (d * d);
                    }
                }
                acc(grads, *a, da);
                acc(grads, *col, dc);
            }
            Op::SelectRow { a, r } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(am.rows, am.cols);
                da.data[r * am.cols..(r + 1) * am.cols].copy_from_slice(&g.data);
                acc(grads, *a, da);
            }
            Op::SliceCols { a, start } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(am.rows, am.cols);
                for r in 0..g.rows {
                    for c in 0..g.cols {
                        da.data[r * am.cols + start + c] = g.data[r * g.cols + c];
                    }
                }
                acc(grads, *a, da);
            }
            Op::SliceRows { a, start } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(am.rows, am.cols);
                da.data[start * am.cols..start * am.cols + g.data.len()]
                    .copy_from_slice(&g.data);
                acc(grads, *a, da);
            }
            Op::ConcatCols { parts } => {
                let mut off = 0;
                for p in parts {
                    let pm = self.values[*p].as_mat();
                    let mut dp = Mat::zeros(pm.rows, pm.cols);
                    for r in 0..pm.rows {
                        dp.data[r * pm.cols..(r + 1) * pm.cols]
                            .copy_from_slice(&g.data[r * g.cols + off..r * g.cols + off + pm.cols]);
                    }
                    acc(grads, *p, dp);
                    off += pm.cols;
                }
            }
            Op::SumAll { a } => {
                let am = self.values[*a].as_mat();
                let da = Mat::from_vec(am.rows, am.cols, vec![g.data[0]; am.data.len()]);
                acc(grads, *a, da);
            }
            Op::MeanAll { a } => {
                let am = self.values[*a].as_mat();
                let v = g.data[0] / am.data.len() as f64;
                let da = Mat::from_vec(am.rows, am.cols, vec![v; am.data.len()]);
                acc(grads, *a, da);
            }
            Op::SumCols { a } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(am.rows, am.cols);
                for r in 0..am.rows {
                    for c in 0..am.cols {
                        da.data[r * am.cols + c] = g.data[r];
                    }
                }
                acc(grads, *a, da);
            }
            Op::SumRows { a } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(am.rows, am.cols);
                for r in 0..am.rows {
                    da.data[r * am.cols..(r + 1) * am.cols].copy_from_slice(&g.data);
                }
                acc(grads, *a, da);
            }
            Op::SoftmaxRows { a } => {
                let s = self.values[idx].as_mat();
                let mut da = Mat::zeros(g.rows, g.cols);
                for r in 0..g.rows {
                    let srow = s.row(r);
                    let grow = &g.data[r * g.cols..(r + 1) * g.cols];
                    let dot: f64 = srow.iter().zip(grow.iter()).map(|(x, y)| x * y).sum();
                    for c in 0..g.cols {
                        da.data[r * g.cols + c] = srow[c] * (grow[c] - dot);
                    }
                }
                acc(grads, *a, da);
            }
            Op::LayerNormRows { a, eps } => {
                let am = self.values[*a].as_mat();
                let n = am.cols as f64;
                let mut da = Mat::zeros(g.rows, g.cols);
                for r in 0..g.rows {
                    let xrow = am.row(r);
                    let grow = &g.data[r * g.cols..(r + 1) * g.cols];
                    let mean = xrow.iter().sum::<f64>() / n;
                    let var = xrow.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                    let rstd = 1.0 / (var + eps).sqrt();
                    let gmean = grow.iter().sum::<f64>() / n;
                    let mut gx_mean = 0.0;
                    for c in 0..am.cols {
                        gx_mean += grow[c] * (xrow[c] - mean) * rstd;
                    }
                    gx_mean /= n;
                    for c in 0..am.cols {
                        let xhat = (xrow[c] - mean) * rstd;
                        da.data[r * g.cols + c] = rstd * (grow[c] - gmean - xhat * gx_mean);
                    }
                }
                acc(grads, *a, da);
            }
            Op::Silu { a } => {
                let am = self.values[*a].as_mat();
                let mut da = Mat::zeros(g.rows, g.cols);
                for i in 0..g.data.len() {
                    let x = am.data[i];
                    let s = sigmoid(x);
                    da.data[i] = g.data[i] * (s + x * s * (1.0 - s));
                }
                acc(grads, *a, da);
            }
            Op::SqrtEps { a } => {
                let out = self.values[idx].as_mat();
                let mut da = Mat::zeros(g.rows, g.cols);
                for i in 0..g.data.len() {
                    da.data[i] = g.data[i] * 0.5 / out.data[i];
                }
                acc(grads, *a, da);
            }
        }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

/// Gradients produced by [`Tape::backward`], indexable by [`Var`].
pub struct Grads {
    grads: Vec<Option<Mat>>,
}

impl Grads {
    /// Gradient of the loss with respect to `v`, if `v` influenced it.
    pub fn get(&self, v: Var) -> Option<&Mat> {
        self.grads[v.0].as_ref()
    }

    /// Gradient of `v`, or a zero matrix of the given shape.
    pub fn get_or_zeros(&self, v: Var, rows: usize, cols: usize) -> Mat {
        match &self.grads[v.0] {
            Some(m) => m.clone(),
            None => Mat::zeros(rows, cols),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// Builds an expression exercising every op, returning the scalar loss.
    fn composite_loss(tape: &mut Tape, leaves: &[Var]) -> Var {
        let (a, b, row, col) = (leaves[0], leaves[1], leaves[2], leaves[3]);
        let m1 = tape.matmul(a, b); // 3x4 · 4x3 = 3x3
        let m2 = tape.matmul_transb(m1, m1); // 3x3
        let ln = tape.layer_norm_rows(m2, 1e-5);
        let sm = tape.softmax_rows(ln);
        let mr = tape.mul_row(sm, row);
        let ar = tape.add_row(mr, row);
        let dc = tape.div_col(ar, col);
        let sl = tape.slice_cols(dc, 1, 2);
        let sr = tape.slice_rows(sl, 0, 2);
        let cc = tape.concat_cols(&[sl, dc]);
        let su = tape.silu(cc);
        let sc = tape.sum_cols(su);
        let sq = tape.sqrt_eps(sc, 1e-6);
        let s1 = tape.sum_all(sq);
        let srw = tape.sum_rows(sr);
        let sel = tape.select_row(srw, 0);
        let prod = tape.mul(sel, sel);
        let quot = tape.div(sel, prod);
        let s2 = tape.mean_all(quot);
        let d = tape.sub(s1, s2);
        let e = tape.scale(d, 0.7);
        let f = tape.add_scalar(e, 0.3);
        let g = tape.add(f, s2);
        tape.mul(g, g)
    }

    fn eval_composite(mats: &[Mat]) -> f64 {
        let mut tape = Tape::new();
        let leaves: Vec<Var> = mats.iter().map(|m| tape.leaf(m.clone())).collect();
        let loss = composite_loss(&mut tape, &leaves);
        tape.value(loss).data[0]
    }

    #[test]
    fn composite_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mats = vec![
            rand_mat(&mut rng, 3, 4),
            rand_mat(&mut rng, 4, 3),
            Mat::from_fn(1, 3, |_, _| rng.gen_range(0.5..1.5)),
            Mat::from_fn(3, 1, |_, _| rng.gen_range(0.5..1.5)),
        ];
        let mut tape = Tape::new();
        let leaves: Vec<Var> = mats.iter().map(|m| tape.leaf(m.clone())).collect();
        let loss = composite_loss(&mut tape, &leaves);
        let grads = tape.backward(loss);

        let h = 1e-6;
        for (li, leaf) in leaves.iter().enumerate() {
            let g = grads.get(*leaf).expect("leaf must have a gradient");
            for i in 0..mats[li].data.len() {
                let mut plus = mats.clone();
                plus[li].data[i] += h;
                let mut minus = mats.clone();
                minus[li].data[i] -= h;
                let fd = (eval_composite(&plus) - eval_composite(&minus)) / (2.0 * h);
                let ad = g.data[i];
                let denom = fd.abs().max(ad.abs()).max(1e-8);
                assert!(
                    ((fd - ad) / denom).abs() < 1e-5,
                    "leaf {li} entry {i}: fd={fd} ad={ad}"
                );
            }
        }
    }

    #[test]
    fn shared_leaves_reuse_storage() {
        let shared = Arc::new(Mat::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let mut tape = Tape::new();
        let a = tape.leaf_shared(shared.clone());
        let b = tape.leaf_shared(shared.clone());
        let c = tape.matmul(a, b);
        let loss = tape.sum_all(c);
        let grads = tape.backward(loss);
        // d(sum(A·A))/dA via both operands; check against finite differences.
        let h = 1e-6;
        for i in 0..4 {
            let mut m = (*shared).clone();
            m.data[i] += h;
            let up = {
                let mut t = Tape::new();
                let x = t.leaf(m.clone());
                let y = t.matmul(x, x);
                let l = t.sum_all(y);
                t.value(l).data[0]
            };
            m.data[i] -= 2.0 * h;
            let dn = {
                let mut t = Tape::new();
                let x = t.leaf(m.clone());
                let y = t.matmul(x, x);
                let l = t.sum_all(y);
                t.value(l).data[0]
            };
            let fd = (up - dn) / (2.0 * h);
            let total = grads.get(a).unwrap().data[i] + grads.get(b).unwrap().data[i];
            assert!((fd - total).abs() < 1e-6, "entry {i}: fd={fd} ad={total}");
        }
    }

    #[test]
    fn matmul_agrees_with_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rand_mat(&mut rng, 5, 7);
        let b = rand_mat(&mut rng, 7, 4);
        let c = a.matmul(&b);
        for i in 0..5 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..7 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                assert!((c.get(i, j) - acc).abs() < 1e-12);
            }
        }
        let ct = a.matmul_transb(&b.matmul_transa(&Mat::from_fn(7, 7, |r, c| {
            if r == c {
                1.0
            } else {
                0.0
            }
        })));
        // b·I = b, so a·(bᵀ·I)ᵀ... sanity: matmul_transb(a, bᵀ-shaped) not
        // meaningful here; just check transa against naive.
        let _ = ct;
        let d = a.matmul_transa(&a); // 7x7 = aᵀ·a
        for i in 0..7 {
            for j in 0..7 {
                let mut acc = 0.0;
                for k in 0..5 {
                    acc += a.get(k, i) * a.get(k, j);
                }
                assert!((d.get(i, j) - acc).abs() < 1e-12);
            }
        }
    }
}
