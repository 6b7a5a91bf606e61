//! Symmetric stress of the nested-squares framework.
//!
//! The level-`K` stress space has dimension `K`. Averaging over the symmetry
//! group of the square leaves stresses that are constant on each square and
//! on each ring of connectors. Among those, the selected stress gives every
//! interior square the value of its inward connectors, which leaves a single
//! ray; it is normalized so that the outer square carries `−1`.

use std::collections::HashMap;

use serde::Serialize;

use super::families::dyadic_squares;
use crate::error::{Error, Result};
use crate::linalg::dense::{self, Svd};
use crate::linalg::Matrix;
use crate::model::{Framework, Member, StressField, ToleranceContext};
use crate::rigidity;

/// The dihedral group of the square as integer matrices.
const D4: [[i64; 4]; 8] = [
    [1, 0, 0, 1],
    [0, -1, 1, 0],
    [-1, 0, 0, -1],
    [0, 1, -1, 0],
    [1, 0, 0, -1],
    [-1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, -1, -1, 0],
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicStress {
    pub level: usize,
    /// Equilibrium stress of the level-`K` framework, outer square `−1`.
    pub stress: StressField,
    /// Value on the edges of square `k`, `k = 0..=K`.
    pub square_values: Vec<f64>,
    /// Value on the connectors from square `k` to `k + 1`, `k = 0..K`.
    pub connector_values: Vec<f64>,
    /// `x_k / x_{k−1}` for consecutive connector rings.
    pub ratios: Vec<f64>,
    pub fitted_ratio: f64,
    /// `max − min` of `ratios`.
    pub ratio_variation: f64,
    pub stress_dim: usize,
    pub symmetric_dim: usize,
    pub equilibrium_residual: f64,
    pub sign_consistent: bool,
    /// Ratio stated alongside the balance equation in the source text.
    pub stated_ratio: f64,
    /// Solution `a` of `a/8 + a/2 = 1/4`, evaluated as written.
    pub displayed_balance_solution: f64,
    pub distance_to_stated: f64,
    pub distance_to_displayed: f64,
}

/// Square index of each vertex (`4k + c` lies on square `k`).
fn square_of(v: usize) -> usize {
    v / 4
}

pub(crate) enum DyadicMember {
    Square(usize),
    Connector(usize),
}

pub(crate) fn classify(m: &Member) -> DyadicMember {
    let (a, b) = (square_of(m.i), square_of(m.j));
    if a == b {
        DyadicMember::Square(a)
    } else {
        DyadicMember::Connector(a.min(b))
    }
}

fn member_permutations(f: &Framework) -> Vec<Vec<usize>> {
    let key = |p: &[f64]| (p[0].to_bits(), p[1].to_bits());
    let by_position: HashMap<(u64, u64), usize> = (0..f.vertex_count()).map(|v| (key(&f.point(v)), v)).collect();
    D4.iter()
        .map(|g| {
            let image = |v: usize| {
                let p = f.point(v);
                let q = [
                    g[0] as f64 * p[0] + g[1] as f64 * p[1],
                    g[2] as f64 * p[0] + g[3] as f64 * p[1],
                ];
                by_position[&key(&q)]
            };
            f.members()
                .iter()
                .map(|m| {
                    f.member_index(&Member::new(image(m.i), image(m.j), m.kind))
                        .expect("symmetry maps members to members")
                })
                .collect()
        })
        .collect()
}

/// Least-squares slope of `ln y` against the index, as a ratio.
fn geometric_fit(values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

pub(crate) fn solve_level_uniform(level: usize, tol: &ToleranceContext) -> Result<DyadicStress> {
    if level == 0 {
        return Err(Error::Unsupported("level 0".into()));
    }
    let f = dyadic_squares(level);
    let m = f.member_count();
    let space = crate::prestress::stress_space(&f, tol);
    if space.dim() == 0 {
        return Err(Error::Inconsistent("empty stress space".into()));
    }
    let perms = member_permutations(&f);
    let averaged: Vec<Vec<f64>> = space
        .basis
        .iter()
        .map(|w| {
            (0..m)
                .map(|e| perms.iter().map(|p| w.values[p[e]]).sum::<f64>() / perms.len() as f64)
                .collect()
        })
        .collect();
    let symmetric = dense::gram_schmidt(&averaged, &[], 1e-8, usize::MAX);

    // interior square k (1 ≤ k < K) matches the connectors toward square k + 1
    let mut constraints = Matrix::zeros(level - 1, m);
    for (e, member) in f.members().iter().enumerate() {
        match classify(member) {
            DyadicMember::Square(k) if k >= 1 && k < level => constraints[(k - 1, e)] += 0.25,
            DyadicMember::Connector(k) if k >= 1 => constraints[(k - 1, e)] -= 0.25,
            _ => {}
        }
    }
    let reduced = Matrix::from_fn(level - 1, symmetric.len(), |r, c| dense::dot(constraints.row(r), &symmetric[c]));
    let null = if level == 1 {
        vec![vec![1.0; symmetric.len()]]
    } else {
        Svd::new(&reduced).null_space(tol.rank_tol)
    };
    if null.len() != 1 {
        return Err(Error::Inconsistent(format!(
            "expected a single symmetric level-uniform stress, found {}",
            null.len()
        )));
    }
    let mut values = vec![0.0; m];
    for (b, &c) in symmetric.iter().zip(&null[0]) {
        dense::axpy(c, b, &mut values);
    }
    let mut square_values = vec![0.0; level + 1];
    let mut connector_values = vec![0.0; level];
    let mut counts = (vec![0usize; level + 1], vec![0usize; level]);
    for (e, member) in f.members().iter().enumerate() {
        match classify(member) {
            DyadicMember::Square(k) => {
                square_values[k] += values[e];
                counts.0[k] += 1;
            }
            DyadicMember::Connector(k) => {
                connector_values[k] += values[e];
                counts.1[k] += 1;
            }
        }
    }
    let outer = square_values[0] / counts.0[0] as f64;
    if outer.abs() <= tol.cert_tol {
        return Err(Error::Inconsistent("selected stress vanishes on the outer square".into()));
    }
    let scale = -1.0 / outer;
    for (k, v) in square_values.iter_mut().enumerate() {
        *v *= scale / counts.0[k] as f64;
    }
    for (k, v) in connector_values.iter_mut().enumerate() {
        *v *= scale / counts.1[k] as f64;
    }
    let stress = StressField::new(values.iter().map(|x| x * scale).collect());
    let residual = dense::norm_inf(&rigidity::bar_rigidity_matrix(&f).left_apply(&stress.values));
    let ratios: Vec<f64> = connector_values.windows(2).map(|w| w[1] / w[0]).collect();
    let fitted_ratio = if connector_values.len() >= 2 {
        geometric_fit(&connector_values)
    } else {
        f64::NAN
    };
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let sign_consistent = square_values[1..].iter().chain(&connector_values).all(|&v| v > 0.0);
    let displayed = 0.25 / (1.0 / 8.0 + 1.0 / 2.0);
    Ok(DyadicStress {
        level,
        stress,
        square_values,
        connector_values,
        ratio_variation: if ratios.is_empty() { 0.0 } else { hi - lo },
        ratios,
        fitted_ratio,
        stress_dim: space.dim(),
        symmetric_dim: symmetric.len(),
        equilibrium_residual: residual,
        sign_consistent,
        stated_ratio: 0.8,
        displayed_balance_solution: displayed,
        distance_to_stated: (fitted_ratio - 0.8).abs(),
        distance_to_displayed: (fitted_ratio - displayed).abs(),
    })
}

/// Symmetric summable stress of the level-`K` nested squares, `K ≥ 3`.
pub fn solve_symmetric_stress(level: usize, tol: &ToleranceContext) -> Result<DyadicStress> {
    if level < 3 {
        return Err(Error::InvalidArgument("the symmetric stress solve needs level >= 3".into()));
    }
    solve_level_uniform(level, tol)
}
