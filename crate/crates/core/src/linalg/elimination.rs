//! Gauss–Jordan elimination over any [`Scalar`].
//!
//! On exact scalars the pivot is the first nonzero entry of the column
//! (lowest row index), which keeps results reproducible. On floats the pivot
//! is the largest entry in magnitude and entries at or below `tol` (relative
//! to the largest entry of the input) are treated as zero.

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct RowEchelon<T> {
    /// Reduced row echelon form; pivot rows are normalized to a leading one.
    pub reduced: Matrix<T>,
    pub pivots: Vec<usize>,
}

impl<T: Scalar> RowEchelon<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn row_reduce<T: Scalar>(a: &Matrix<T>, tol: f64) -> RowEchelon<T> {
    let mut m = a.clone();
    let threshold = tol * a.max_abs().max(1.0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols() {
        if r == m.rows() {
            break;
        }
        let pivot = if T::EXACT {
            (r..m.rows()).find(|&i| !m[(i, c)].is_zero())
        } else {
            (r..m.rows())
                .filter(|&i| !m[(i, c)].is_negligible(threshold))
                .max_by(|&x, &y| {
                    m[(x, c)]
                        .abs()
                        .partial_cmp(&m[(y, c)].abs())
                        .unwrap()
                        // prefer the lower index on ties
                        .then(y.cmp(&x))
                })
        };
        let Some(p) = pivot else { continue };
        m.swap_rows(r, p);
        let inv = T::one() / m[(r, c)].clone();
        for x in m.row_mut(r).iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = m.row(r).to_vec();
        for i in 0..m.rows() {
            if i == r {
                continue;
            }
            let f = m[(i, c)].clone();
            if f.is_zero() {
                continue;
            }
            for (x, pr) in m.row_mut(i).iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * pr.clone();
            }
            if !T::EXACT {
                m[(i, c)] = T::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    RowEchelon { reduced: m, pivots }
}

pub fn rank<T: Scalar>(a: &Matrix<T>, tol: f64) -> usize {
    row_reduce(a, tol).rank()
}

/// Basis of `{x : A x = 0}`, one vector per free column, in the standard
/// form read off the reduced echelon matrix.
pub fn nullspace<T: Scalar>(a: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let ech = row_reduce(a, tol);
    let n = a.cols();
    let mut is_pivot = vec![false; n];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|&j| !is_pivot[j]) {
        let mut v = vec![T::zero(); n];
        v[free] = T::one();
        for (row, &p) in ech.pivots.iter().enumerate() {
            v[p] = -ech.reduced[(row, free)].clone();
        }
        basis.push(v);
    }
    basis
}

/// Basis of `{y : y A = 0}`.
pub fn left_nullspace<T: Scalar>(a: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    nullspace(&a.transpose(), tol)
}

/// Solves `A x = b` when consistent; returns one particular solution with
/// free variables set to zero.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T], tol: f64) -> Option<Vec<T>> {
    assert_eq!(a.rows(), b.len());
    let aug = Matrix::from_fn(a.rows(), a.cols() + 1, |i, j| {
        if j < a.cols() {
            a[(i, j)].clone()
        } else {
            b[i].clone()
        }
    });
    let ech = row_reduce(&aug, tol);
    if ech.pivots.last() == Some(&a.cols()) {
        return None;
    }
    let mut x = vec![T::zero(); a.cols()];
    for (row, &p) in ech.pivots.iter().enumerate() {
        x[p] = ech.reduced[(row, a.cols())].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn exact_rank_and_nullspace() {
        let a = Matrix::from_rows(&[
            vec![q(1, 1), q(2, 1), q(3, 1)],
            vec![q(2, 1), q(4, 1), q(6, 1)],
            vec![q(1, 1), q(0, 1), q(1, 1)],
        ]);
        assert_eq!(rank(&a, 0.0), 2);
        let ns = nullspace(&a, 0.0);
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(|x| x == &q(0, 1)));
    }

    #[test]
    fn float_rank_ignores_roundoff() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-15]]);
        assert_eq!(rank(&a, 1e-9), 1);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = Matrix::from_rows(&[vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]]);
        assert!(solve(&a, &[q(1, 1), q(3, 1)], 0.0).is_none());
        let x = solve(&a, &[q(1, 1), q(2, 1)], 0.0).unwrap();
        assert_eq!(a.mul_vec(&x), vec![q(1, 1), q(2, 1)]);
    }
}
