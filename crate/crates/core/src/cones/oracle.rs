//! Finite-dimensional check of `C** = C` for a finitely generated cone.
//!
//! The dual cone `C* = {y : ⟨x_i, y⟩ ≥ 0}` is described by its lineality space
//! `span(X)^⊥` and its extreme rays inside `span(X)`, the latter found by
//! enumerating generator subsets whose orthogonal complement (within
//! `span(X)`) is a line. Membership in `C` itself is decided by an exact LP.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::simplex;
use crate::error::{Error, Result};
use crate::linalg::{dot, elimination, Matrix};

type Q = BigRational;

#[derive(Clone, Debug, PartialEq)]
pub struct DualCone {
    pub dimension: usize,
    /// Basis of `{y : ⟨x_i, y⟩ = 0 for all i}`.
    pub lineality: Vec<Vec<Q>>,
    /// Extreme rays of the pointed part, first nonzero entry scaled to ±1.
    pub rays: Vec<Vec<Q>>,
}

impl DualCone {
    /// `⟨x, y⟩ ≥ 0` for every `y ∈ C*`.
    pub fn pairs_nonnegatively(&self, x: &[Q]) -> bool {
        self.lineality.iter().all(|l| dot(l, x).is_zero()) && self.rays.iter().all(|r| !dot(r, x).is_negative())
    }
}

fn normalize(mut y: Vec<Q>) -> Vec<Q> {
    if let Some(first) = y.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        for x in y.iter_mut() {
            *x = x.clone() / first.clone();
        }
    }
    y
}

fn subsets(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..n {
        current.push(i);
        subsets(n, k, i + 1, current, out);
        current.pop();
    }
}

/// Generator description of the dual cone.
pub fn dual_cone(generators: &[Vec<Q>], dimension: usize) -> DualCone {
    if generators.is_empty() {
        let lineality = (0..dimension)
            .map(|i| (0..dimension).map(|j| Q::from_integer(((i == j) as i64).into())).collect())
            .collect();
        return DualCone {
            dimension,
            lineality,
            rays: Vec::new(),
        };
    }
    let x = Matrix::from_rows(generators);
    let lineality = elimination::nullspace(&x, 0.0);
    let r = dimension - lineality.len();
    let mut rays: Vec<Vec<Q>> = Vec::new();
    let mut chosen = Vec::new();
    subsets(generators.len(), r.saturating_sub(1), 0, &mut Vec::new(), &mut chosen);
    for s in chosen {
        let mut rows: Vec<Vec<Q>> = s.iter().map(|&i| generators[i].clone()).collect();
        rows.extend(lineality.iter().cloned());
        let null = if rows.is_empty() {
            (0..dimension)
                .map(|i| (0..dimension).map(|j| Q::from_integer(((i == j) as i64).into())).collect())
                .collect()
        } else {
            elimination::nullspace(&Matrix::from_rows(&rows), 0.0)
        };
        if null.len() != 1 {
            continue;
        }
        let y = null.into_iter().next().expect("one vector");
        let pairings: Vec<Q> = generators.iter().map(|g| dot(g, &y)).collect();
        let y = if pairings.iter().all(|p| !p.is_negative()) {
            y
        } else if pairings.iter().all(|p| !p.is_positive()) {
            y.into_iter().map(|v| -v).collect()
        } else {
            continue;
        };
        let y = normalize(y);
        if !rays.contains(&y) {
            rays.push(y);
        }
    }
    DualCone {
        dimension,
        lineality,
        rays,
    }
}

/// Exact membership `x ∈ C(X)`.
pub fn in_cone(generators: &[Vec<Q>], x: &[Q]) -> bool {
    if generators.is_empty() {
        return x.iter().all(|v| v.is_zero());
    }
    let a = Matrix::from_rows(generators).transpose();
    simplex::feasible_point(&a, x, 0.0).is_some()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleDualReport {
    pub dimension: usize,
    pub generator_count: usize,
    pub lineality_dim: usize,
    pub dual_rays: Vec<Vec<f64>>,
    pub trials: usize,
    pub inside: usize,
    pub outside: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub seed: u64,
}

impl DoubleDualReport {
    pub fn passed(&self) -> bool {
        self.disagreements == 0 && self.agreements == self.trials
    }
}

fn sample(generators: &[Vec<Q>], dimension: usize, trial: usize, seed: u64) -> Vec<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let int = |v: i64| Q::from_integer(v.into());
    let random_vector = |rng: &mut ChaCha8Rng| -> Vec<Q> { (0..dimension).map(|_| int(rng.random_range(-4..=4))).collect() };
    if generators.is_empty() || trial % 3 == 0 {
        return random_vector(&mut rng);
    }
    let mut x = vec![Q::zero(); dimension];
    for g in generators {
        if rng.random_bool(0.5) {
            let c = int(rng.random_range(0..=3));
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi = xi.clone() + c.clone() * gi.clone();
            }
        }
    }
    if trial % 3 == 2 {
        // nudge off the sampled point, often across the boundary
        let d = random_vector(&mut rng);
        let eighth = Q::new(1.into(), 8.into());
        for (xi, di) in x.iter_mut().zip(d) {
            *xi = xi.clone() + di * eighth.clone();
        }
    }
    x
}

/// Samples `trials` points and checks `x ∈ C ⇔ ⟨x, y⟩ ≥ 0 ∀ y ∈ C*`.
pub fn double_dual_oracle(generators: &[Vec<Q>], dimension: usize, trials: usize, seed: u64) -> Result<DoubleDualReport> {
    if dimension == 0 || dimension > 6 || generators.len() > 10 {
        return Err(Error::InvalidArgument(
            "double-dual oracle supports dimension 1..=6 and at most 10 generators".into(),
        ));
    }
    if let Some(g) = generators.iter().find(|g| g.len() != dimension) {
        return Err(Error::Dimension {
            expected: dimension,
            got: g.len(),
        });
    }
    let dual = dual_cone(generators, dimension);
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = sample(generators, dimension, t, seed);
            (in_cone(generators, &x), dual.pairs_nonnegatively(&x))
        })
        .collect();
    let inside = outcomes.iter().filter(|o| o.0).count();
    let agreements = outcomes.iter().filter(|o| o.0 == o.1).count();
    Ok(DoubleDualReport {
        dimension,
        generator_count: generators.len(),
        lineality_dim: dual.lineality.len(),
        dual_rays: dual
            .rays
            .iter()
            .map(|r| r.iter().map(crate::scalar::Scalar::to_f64).collect())
            .collect(),
        trials,
        inside,
        outside: trials - inside,
        agreements,
        disagreements: trials - agreements,
        seed,
    })
}

/// Float front end; each coordinate is taken at its exact binary value.
pub fn double_dual_oracle_f64(generators: &[Vec<f64>], dimension: usize, trials: usize, seed: u64) -> Result<DoubleDualReport> {
    let mut exact = Vec::with_capacity(generators.len());
    for g in generators {
        let row: Option<Vec<Q>> = g.iter().map(|&x| Q::from_float(x)).collect();
        exact.push(row.ok_or_else(|| Error::InvalidArgument("non-finite generator coordinate".into()))?);
    }
    double_dual_oracle(&exact, dimension, trials, seed)
}
