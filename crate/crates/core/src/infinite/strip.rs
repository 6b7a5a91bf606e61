//! Linear-programming check of the leftward drift of the strip's top row.
//!
//! With the lower two rows pinned, fixing the top x-velocity at column `k`
//! to `−a` forces every top joint to its right to move left by at least `a`.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::families::strip;
use crate::cones::simplex::{self, LpOutcome, StandardForm};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Framework, MemberKind};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub level: usize,
    pub bay: i64,
    pub a: f64,
    /// `(k′, max u_{k′,x})`; `None` when the maximum is unbounded.
    pub maxima: Vec<(i64, Option<f64>)>,
    pub holds: bool,
}

/// Maximizes the top x-velocity at column `target` subject to the member
/// constraints, rows 0 and 1 pinned and `u_{bay,x} = −a`.
fn max_top_velocity<T: Scalar>(f: &Framework, bay: i64, target: i64, a: &T, eps: f64) -> Result<Option<T>> {
    let top: Vec<usize> = (0..f.vertex_count()).filter(|&v| f.point(v)[1] == 2.0).collect();
    let slot = |v: usize| top.iter().position(|&t| t == v);
    let column = |k: i64| {
        top.iter()
            .position(|&t| f.point(t)[0] == k as f64)
            .ok_or_else(|| Error::InvalidArgument(format!("column {k} is outside the strip")))
    };
    let (bay_slot, target_slot) = (column(bay)?, column(target)?);
    let rows: Vec<_> = f
        .members()
        .iter()
        .filter(|m| slot(m.i).is_some() || slot(m.j).is_some())
        .collect();
    let vars = 4 * top.len();
    let n = vars + rows.len();
    let mut a_mat = Matrix::<T>::zeros(rows.len() + 1, n);
    let mut b = vec![T::zero(); rows.len() + 1];
    for (r, m) in rows.iter().enumerate() {
        let (p, q) = (f.point(m.i), f.point(m.j));
        // cables: −raw ≥ 0, struts: raw ≥ 0
        let sign = if m.kind == MemberKind::Cable { -1 } else { 1 };
        for (v, orient) in [(m.i, 1), (m.j, -1)] {
            if let Some(s) = slot(v) {
                for k in 0..2 {
                    let c = T::from_i64(sign * orient * (p[k] - q[k]) as i64);
                    let (plus, minus) = ((r, 4 * s + 2 * k), (r, 4 * s + 2 * k + 1));
                    a_mat[plus] = a_mat[plus].clone() + c.clone();
                    a_mat[minus] = a_mat[minus].clone() - c;
                }
            }
        }
        a_mat[(r, vars + r)] = -T::one();
    }
    let fix = rows.len();
    a_mat[(fix, 4 * bay_slot)] = T::one();
    a_mat[(fix, 4 * bay_slot + 1)] = -T::one();
    b[fix] = -a.clone();
    if b[fix] < T::zero() {
        for c in 0..n {
            let x = a_mat[(fix, c)].clone();
            a_mat[(fix, c)] = -x;
        }
        b[fix] = a.clone();
    }
    let mut c = vec![T::zero(); n];
    c[4 * target_slot] = -T::one();
    c[4 * target_slot + 1] = T::one();
    match simplex::solve(&StandardForm { a: a_mat, b, c }, eps) {
        LpOutcome::Optimal { value, .. } => Ok(Some(-value)),
        LpOutcome::Unbounded => Ok(None),
        LpOutcome::Infeasible => Err(Error::Inconsistent("strip velocity constraints are infeasible".into())),
    }
}

/// Runs the drift LP for every top column `k′ = bay + 1, …, level`.
pub fn strip_monotonicity(level: usize, bay: i64, a: f64, one_sided: bool, exact: bool) -> Result<MonotonicityReport> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument("the fixed leftward speed must be positive".into()));
    }
    let f = strip(level, one_sided);
    let targets: Vec<i64> = (bay + 1..=level as i64).collect();
    let maxima: Vec<(i64, Option<f64>)> = targets
        .par_iter()
        .map(|&k| {
            let value = if exact {
                let a = BigRational::from_float(a).ok_or_else(|| Error::InvalidArgument("non-finite speed".into()))?;
                max_top_velocity::<BigRational>(&f, bay, k, &a, 0.0)?.map(|v| v.to_f64())
            } else {
                max_top_velocity::<f64>(&f, bay, k, &a, crate::cones::LP_EPS)?
            };
            Ok((k, value))
        })
        .collect::<Result<_>>()?;
    let holds = maxima.iter().all(|(_, m)| m.is_some_and(|v| v <= -a + 1e-8));
    Ok(MonotonicityReport {
        level,
        bay,
        a,
        maxima,
        holds,
    })
}
