//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0`. The arithmetic is generic:
//! with an exact scalar the pivot tolerance is ignored and every comparison is
//! exact.

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// Standard-form program `min c·x`, `A x = b`, `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct StandardForm<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

struct Tableau<T> {
    /// `m` constraint rows followed by the objective row; the last column is the rhs.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    enterable: usize,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn rhs(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *x = x.clone() - f.clone() * pr.clone();
                }
            }
            row[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on the objective row; returns false if unbounded.
    fn optimize(&mut self) -> bool {
        let neg_eps = -self.eps.clone();
        loop {
            let obj = self.m();
            let Some(enter) = (0..self.enterable).find(|&j| self.rows[obj][j] < neg_eps) else {
                return true;
            };
            let rhs = self.rhs();
            let mut leave: Option<(usize, T)> = None;
            for i in 0..obj {
                let a = &self.rows[i][enter];
                if *a <= self.eps {
                    continue;
                }
                let ratio = self.rows[i][rhs].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, costs: &[T]) {
        let obj = self.m();
        let width = self.rows[0].len();
        let mut row = vec![T::zero(); width];
        for (j, c) in costs.iter().enumerate() {
            row[j] = c.clone();
        }
        for i in 0..obj {
            let cb = costs.get(self.basis[i]).cloned().unwrap_or_else(T::zero);
            if cb.is_zero() {
                continue;
            }
            for (x, a) in row.iter_mut().zip(&self.rows[i]) {
                *x = x.clone() - cb.clone() * a.clone();
            }
        }
        self.rows[obj] = row;
    }
}

/// Solves the program. `eps` is the float pivot and feasibility tolerance,
/// scaled by the largest input magnitude; exact scalars ignore it.
pub fn solve<T: Scalar>(lp: &StandardForm<T>, eps: f64) -> LpOutcome<T> {
    let m = lp.a.rows();
    let n = lp.a.cols();
    assert_eq!(lp.b.len(), m);
    assert_eq!(lp.c.len(), n);
    let scale = lp
        .a
        .max_abs()
        .max(lp.b.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max))
        .max(1.0);
    let eps_t = if T::EXACT { T::zero() } else { T::from_f64(eps * scale) };

    let mut rows = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = lp.b[i] < T::zero();
        let mut row = Vec::with_capacity(n + m + 1);
        for j in 0..n {
            let a = lp.a[(i, j)].clone();
            row.push(if flip { -a } else { a });
        }
        for k in 0..m {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        row.push(if flip { -lp.b[i].clone() } else { lp.b[i].clone() });
        rows.push(row);
    }
    rows.push(vec![T::zero(); n + m + 1]);
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        enterable: n,
        eps: eps_t.clone(),
    };

    // phase 1: minimize the sum of artificials
    let mut phase1 = vec![T::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = T::one();
    }
    t.set_objective(&phase1);
    t.optimize();
    let infeasibility = -t.rows[m][n + m].clone();
    let feas_tol = if T::EXACT {
        T::zero()
    } else {
        T::from_f64(eps * scale * (m.max(1) as f64))
    };
    if infeasibility > feas_tol {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out where possible
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        if let Some(j) = (0..n).find(|&j| {
            let a = t.rows[i][j].clone();
            a.abs() > eps_t
        }) {
            t.pivot(i, j);
        }
    }

    t.set_objective(&lp.c);
    if !t.optimize() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][n + m].clone();
        }
    }
    let value = x
        .iter()
        .zip(&lp.c)
        .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    LpOutcome::Optimal { x, value }
}

/// Feasibility only: some `x ≥ 0` with `A x = b`.
pub fn feasible_point<T: Scalar>(a: &Matrix<T>, b: &[T], eps: f64) -> Option<Vec<T>> {
    let lp = StandardForm {
        a: a.clone(),
        b: b.to_vec(),
        c: vec![T::zero(); a.cols()],
    };
    match solve(&lp, eps) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}
