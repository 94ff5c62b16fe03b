//! Small dense symmetric-positive-definite solves.
//!
//! All systems in this crate are M x M with M <= 64 and SPD by construction
//! (HH^T + reg I), so a plain Cholesky factorization is enough.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular Cholesky factor of an SPD matrix.
///
/// Fails with [`Error::SingularMatrix`] on a non-positive pivot, which is how
/// a singular `HH^T` at zero regularization surfaces.
pub fn cholesky<S: Real>(a: &ArrayView2<S>) -> Result<Array2<S>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimMismatch {
            what: "cholesky input",
            expected: n,
            got: a.ncols(),
        });
    }
    let mut l = Array2::<S>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= S::zero() || !s.is_finite() {
                    return Err(Error::SingularMatrix);
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `A x = b` given the Cholesky factor `l` of `A`.
pub fn chol_solve_vec<S: Real>(l: &Array2<S>, b: &ArrayView1<S>) -> Array1<S> {
    let n = l.nrows();
    let mut x = b.to_owned();
    // forward: L z = b
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    // backward: L^T x = z
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `A X = B` column-by-column given the Cholesky factor of `A`.
pub fn chol_solve_mat<S: Real>(l: &Array2<S>, b: &ArrayView2<S>) -> Array2<S> {
    let mut out = Array2::<S>::zeros(b.raw_dim());
    for (j, col) in b.columns().into_iter().enumerate() {
        let x = chol_solve_vec(l, &col);
        out.column_mut(j).assign(&x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Real;
    use ndarray::array;

    #[test]
    fn solves_spd_system() {
        let a = array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let b = array![1.0, -2.0, 0.3];
        let l = cholesky(&a.view()).unwrap();
        let x = chol_solve_vec(&l, &b.view());
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v: &f64| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let a = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3, -1
        assert!(matches!(
            cholesky(&a.view()),
            Err(crate::error::Error::SingularMatrix)
        ));
    }

    #[test]
    fn rejects_singular_matrix() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(cholesky(&a.view()).is_err());
    }

    #[test]
    fn matrix_solve_matches_vector_solve() {
        let mut rng = crate::seeds::rng_from(3, &[]);
        let g: Array2<f64> = Array2::from_shape_fn((5, 5), |_| f64::std_normal(&mut rng));
        let a = g.dot(&g.t()) + Array2::<f64>::eye(5);
        let b: Array2<f64> = Array2::from_shape_fn((5, 3), |_| f64::std_normal(&mut rng));
        let l = cholesky(&a.view()).unwrap();
        let x = chol_solve_mat(&l, &b.view());
        for j in 0..3 {
            let xj = chol_solve_vec(&l, &b.column(j));
            assert!(x
                .column(j)
                .iter()
                .zip(xj.iter())
                .all(|(a, b)| (a - b).abs() < 1e-14));
        }
    }
}
