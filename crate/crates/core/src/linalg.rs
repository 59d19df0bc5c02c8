//! Small dense kernels on row-major `f64` buffers.

use crate::error::{Error, Result};

/// Relative pivot floor below which a Cholesky factorization is reported as degenerate.
const PIVOT_FLOOR: f64 = 1e-14;

/// In-place lower Cholesky factor of the `n x n` SPD matrix in `a`. Only the
/// lower triangle is read and written.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        let scale = a[j * n + j].abs().max(1.0);
        if d.is_nan() || d <= PIVOT_FLOOR * scale {
            return Err(Error::NumericalDegeneracy(format!(
                "Cholesky pivot {d:e} at position {j} of {n}"
            )));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    Ok(())
}

/// Solves `L X = B` in place, `L` the `n x n` lower factor from
/// [`cholesky_in_place`], `B` an `n x m` row-major block.
pub fn forward_solve(l: &[f64], n: usize, b: &mut [f64], m: usize) {
    for i in 0..n {
        let d = l[i * n + i];
        for c in 0..m {
            let mut v = b[i * m + c];
            for k in 0..i {
                v -= l[i * n + k] * b[k * m + c];
            }
            b[i * m + c] = v / d;
        }
    }
}

/// Determinant of an SPD matrix through its Cholesky factor.
pub fn spd_determinant(a: &[f64], n: usize) -> Result<f64> {
    let mut f = a.to_vec();
    cholesky_in_place(&mut f, n)?;
    Ok((0..n).map(|i| f[i * n + i] * f[i * n + i]).product())
}

/// Product `A B` of square `n x n` matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_of_known_matrix() {
        let mut a = vec![4.0, 0.0, 2.0, 5.0];
        cholesky_in_place(&mut a, 2).unwrap();
        assert_eq!(a[0], 2.0);
        assert_eq!(a[2], 1.0);
        assert_eq!(a[3], 2.0);
        assert!((spd_determinant(&[4.0, 2.0, 2.0, 5.0], 2).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_degenerate() {
        let mut a = vec![1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            cholesky_in_place(&mut a, 2),
            Err(Error::NumericalDegeneracy(_))
        ));
    }

    #[test]
    fn forward_solve_inverts_factor() {
        let mut l = vec![4.0, 0.0, 2.0, 5.0];
        cholesky_in_place(&mut l, 2).unwrap();
        let mut b = vec![2.0, 3.0];
        forward_solve(&l, 2, &mut b, 1);
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert!((b[1] - 1.0).abs() < 1e-15);
    }
}
