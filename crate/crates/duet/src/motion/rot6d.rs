//! 6D rotation encoding: the first two columns of a rotation matrix,
//! orthonormalized by Gram-Schmidt. Continuous and scale-invariant.

use crate::error::{Error, Result};

const PARALLEL_TOL: f64 = 1e-6;

/// Gram-Schmidt a 6D encoding into a proper rotation matrix (row-major).
///
/// The first column of the result is the normalized first 3-vector; the
/// third column is the cross product of the first two, so the determinant
/// is +1 by construction.
pub fn rot6d_to_matrix(r: &[f64; 6]) -> Result<[[f64; 3]; 3]> {
    let v1 = [r[0], r[1], r[2]];
    let v2 = [r[3], r[4], r[5]];
    let n1 = norm(&v1);
    if n1 <= PARALLEL_TOL {
        return Err(Error::DegenerateRotation(format!(
            "first vector has near-zero norm {n1:e}"
        )));
    }
    let c1 = [v1[0] / n1, v1[1] / n1, v1[2] / n1];
    let n2_raw = norm(&v2);
    if n2_raw <= PARALLEL_TOL {
        return Err(Error::DegenerateRotation(format!(
            "second vector has near-zero norm {n2_raw:e}"
        )));
    }
    let proj = dot(&v2, &c1);
    let u2 = [v2[0] - proj * c1[0], v2[1] - proj * c1[1], v2[2] - proj * c1[2]];
    let n2 = norm(&u2);
    // sin(angle between v1 and v2) = |u2| / |v2|
    if n2 / n2_raw <= PARALLEL_TOL {
        return Err(Error::DegenerateRotation(format!(
            "vectors are parallel within {PARALLEL_TOL:e} rad"
        )));
    }
    let c2 = [u2[0] / n2, u2[1] / n2, u2[2] / n2];
    let c3 = cross(&c1, &c2);
    Ok([
        [c1[0], c2[0], c3[0]],
        [c1[1], c2[1], c3[1]],
        [c1[2], c2[2], c3[2]],
    ])
}

/// First two columns of a rotation matrix as the 6D encoding.
pub fn matrix_to_rot6d(m: &[[f64; 3]; 3]) -> [f64; 6] {
    [m[0][0], m[1][0], m[2][0], m[0][1], m[1][1], m[2][1]]
}

/// Rotation about the vertical (+Y) axis by `theta` radians.
pub fn yaw_rotation(theta: f64) -> [[f64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub(crate) fn apply(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub(crate) fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, brow) in b.iter().enumerate() {
                out[i][j] += a[i][k] * brow[j];
            }
        }
    }
    out
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_encoding_maps_to_identity() {
        let m = rot6d_to_matrix(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quarter_turn_about_z() {
        // Hand Gram-Schmidt: c1=(0,1,0), c2=(-1,0,0), c3=c1×c2=(0,0,1).
        let m = rot6d_to_matrix(&[0.0, 1.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        let want = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let m = rot6d_to_matrix(&[2.0, 0.0, 0.0, 0.0, 3.0, 0.0]).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn parallel_vectors_rejected() {
        assert!(rot6d_to_matrix(&[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]).is_err());
        assert!(rot6d_to_matrix(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).is_err());
    }

    fn det3(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    proptest! {
        #[test]
        fn output_is_orthonormal_with_unit_determinant(
            raw in proptest::array::uniform6(-2.0f64..2.0),
        ) {
            if let Ok(m) = rot6d_to_matrix(&raw) {
                // MᵀM = I within 1e-9
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = 0.0;
                        for k in 0..3 {
                            acc += m[k][i] * m[k][j];
                        }
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((acc - want).abs() < 1e-9);
                    }
                }
                prop_assert!((det3(&m) - 1.0).abs() < 1e-9);
                // First column is the normalized first 3-vector.
                let n = (raw[0]*raw[0] + raw[1]*raw[1] + raw[2]*raw[2]).sqrt();
                for r in 0..3 {
                    prop_assert!((m[r][0] - raw[r] / n).abs() < 1e-12);
                }
            }
        }
    }
}
