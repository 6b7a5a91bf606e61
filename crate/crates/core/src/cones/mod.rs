//! Finite-dimensional cone engine: the flex/stress dichotomy for a matrix,
//! nearest-point projection onto a polyhedral cone, separating functionals and
//! a brute-force double-dual oracle.

mod oracle;
mod projection;
pub mod simplex;

pub use oracle::{double_dual_oracle, double_dual_oracle_f64, dual_cone, DoubleDualReport, DualCone};
pub use projection::{cone_project, separating_functional, ConeProjection};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::ToleranceContext;
use crate::scalar::Scalar;
use simplex::{LpOutcome, StandardForm};

/// Relative pivot tolerance handed to the float simplex.
pub const LP_EPS: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "branch", content = "vector")]
pub enum Branch<T> {
    /// `u` with `Au ≥ 0` and `Au ≠ 0`.
    FlexDirection(Vec<T>),
    /// `μ ≥ 1` with `μA = 0`.
    PositiveLeftKernel(Vec<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyResult<T = f64> {
    pub branch: Branch<T>,
    pub certificate_residual: f64,
}

/// Finds `μ` with every entry ≥ 1 and `μA = 0`, scaled so that `min μ = 1`.
///
/// Posed as phase-1 feasibility in `ν = μ − 1 ≥ 0`: `Aᵀν = −Aᵀ1`.
pub fn strict_positive_left_kernel<T: Scalar>(a: &Matrix<T>) -> Option<Vec<T>> {
    let (m, k) = (a.rows(), a.cols());
    let at = a.transpose();
    let ones = vec![T::one(); m];
    let b: Vec<T> = a.left_mul(&ones).into_iter().map(|x| -x).collect();
    debug_assert_eq!(b.len(), k);
    let nu = simplex::feasible_point(&at, &b, LP_EPS)?;
    let mut mu: Vec<T> = nu.into_iter().map(|x| x + T::one()).collect();
    let min = mu.iter().cloned().fold(None::<T>, |acc, x| match acc {
        Some(a) if a <= x => Some(a),
        _ => Some(x),
    })?;
    if min > T::one() {
        for x in mu.iter_mut() {
            *x = x.clone() / min.clone();
        }
    }
    Some(mu)
}

/// Finds `u` with `Au ≥ 0` and some entry of `Au` at least 1, by maximizing
/// `Σ s` subject to `Au ≥ s`, `0 ≤ s ≤ 1`, `u` free.
pub fn flexible_direction<T: Scalar>(a: &Matrix<T>) -> Option<Vec<T>> {
    let (m, k) = (a.rows(), a.cols());
    // columns: u+ (k), u- (k), s (m), t (m), r (m)
    let n = 2 * k + 3 * m;
    let mut lp = Matrix::zeros(2 * m, n);
    let mut b = vec![T::zero(); 2 * m];
    for e in 0..m {
        for j in 0..k {
            let x = a[(e, j)].clone();
            if x.is_zero() {
                continue;
            }
            lp[(e, j)] = x.clone();
            lp[(e, k + j)] = -x;
        }
        lp[(e, 2 * k + e)] = -T::one();
        lp[(e, 2 * k + m + e)] = -T::one();
        lp[(m + e, 2 * k + e)] = T::one();
        lp[(m + e, 2 * k + 2 * m + e)] = T::one();
        b[m + e] = T::one();
    }
    let mut c = vec![T::zero(); n];
    for x in c.iter_mut().skip(2 * k).take(m) {
        *x = -T::one();
    }
    let LpOutcome::Optimal { x, value } = simplex::solve(&StandardForm { a: lp, b, c }, LP_EPS) else {
        return None;
    };
    // the optimum is either 0 or at least 1
    let threshold = if T::EXACT { T::zero() } else { T::from_f64(-0.5) };
    if value >= threshold {
        return None;
    }
    Some((0..k).map(|j| x[j].clone() - x[k + j].clone()).collect())
}

fn kernel_residual<T: Scalar>(a: &Matrix<T>, mu: &[T]) -> f64 {
    a.left_mul(mu).iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

/// Runs both programs and returns the branch that holds; disagreement of
/// the two programs is reported as an inconsistency.
pub fn dichotomy<T: Scalar>(a: &Matrix<T>, tol: &ToleranceContext) -> Result<DichotomyResult<T>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidArgument("dichotomy needs a nonempty matrix".into()));
    }
    let flex = flexible_direction(a).filter(|u| {
        let au: Vec<f64> = a.mul_vec(u).iter().map(|x| x.to_f64()).collect();
        au.iter().all(|&x| x >= -tol.cert_tol) && au.iter().cloned().fold(f64::MIN, f64::max) >= 10.0 * tol.cert_tol
    });
    let kernel = strict_positive_left_kernel(a).filter(|mu| {
        mu.iter().all(|x| x.to_f64() >= 1.0 - tol.cert_tol) && kernel_residual(a, mu) <= tol.cert_tol
    });
    match (flex, kernel) {
        (Some(u), None) => {
            let residual = a.mul_vec(&u).iter().map(|x| (-x.to_f64()).max(0.0)).fold(0.0, f64::max);
            Ok(DichotomyResult {
                branch: Branch::FlexDirection(u),
                certificate_residual: residual,
            })
        }
        (None, Some(mu)) => Ok(DichotomyResult {
            certificate_residual: kernel_residual(a, &mu),
            branch: Branch::PositiveLeftKernel(mu),
        }),
        (Some(_), Some(_)) => Err(Error::Inconsistent(
            "both a flexible direction and a positive left kernel vector were found".into(),
        )),
        (None, None) => Err(Error::Inconsistent(
            "neither a flexible direction nor a positive left kernel vector was found".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::elimination;
    use num_rational::BigRational;

    #[test]
    fn pair_rows_have_positive_kernel() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(strict_positive_left_kernel(&a), Some(vec![1.0, 1.0]));
        assert_eq!(flexible_direction(&a), None);
        let d = dichotomy(&a, &ToleranceContext::default()).unwrap();
        assert_eq!(d.branch, Branch::PositiveLeftKernel(vec![1.0, 1.0]));
    }

    #[test]
    fn single_row_flexes() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0]]);
        assert_eq!(strict_positive_left_kernel(&a), None);
        let u = flexible_direction(&a).unwrap();
        let au = a.mul_vec(&u);
        assert!(au[0] >= 1.0 - 1e-12);
        let d = dichotomy(&a, &ToleranceContext::default()).unwrap();
        assert!(matches!(d.branch, Branch::FlexDirection(_)));
    }

    #[test]
    fn exact_mode_matches() {
        let q = |x: i64| BigRational::from_integer(x.into());
        let a = Matrix::from_rows(&[vec![q(1), q(-1)], vec![q(-1), q(1)]]);
        let mu = strict_positive_left_kernel(&a).unwrap();
        assert_eq!(mu, vec![q(1), q(1)]);
        assert!(a.left_mul(&mu).iter().all(|x| *x == q(0)));
        let single = Matrix::from_rows(&[vec![q(1), q(-1)]]);
        let d = dichotomy(&single, &ToleranceContext::default()).unwrap();
        assert!(matches!(d.branch, Branch::FlexDirection(_)));
        assert_eq!(d.certificate_residual, 0.0);
    }

    #[test]
    fn zero_column_matrix_still_decides() {
        // rows that are all zero admit μ = 1
        let a = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        let d = dichotomy(&a, &ToleranceContext::default()).unwrap();
        assert_eq!(d.branch, Branch::PositiveLeftKernel(vec![1.0, 1.0]));
        assert_eq!(elimination::rank(&a, 1e-12), 0);
    }
}
