//! Seeded randomized suites for the cone and tensegrity certificates.
//!
//! Trial `t` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `t`, so
//! each trial is reproducible in isolation and trials run in parallel.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{self, Branch};
use crate::error::{Error, Result};
use crate::linalg::dense::{dot, norm};
use crate::linalg::Matrix;
use crate::model::{Coordinate, Framework, Member, Tensegrity, ToleranceContext};
use crate::scalar::Scalar;
use crate::tensegrity::{self, Arithmetic, Verdict};

/// Certificate tolerance used by the suites.
pub const SUITE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub kind: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub seed: u64,
    /// Up to ten failure descriptions, by trial.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn collect(kind: &str, seed: u64, outcomes: Vec<std::result::Result<(), String>>) -> Self {
        let failures: Vec<String> = outcomes
            .iter()
            .enumerate()
            .filter_map(|(t, o)| o.as_ref().err().map(|e| format!("trial {t}: {e}")))
            .collect();
        Self {
            kind: kind.to_string(),
            trials: outcomes.len(),
            passed: outcomes.len() - failures.len(),
            failed: failures.len(),
            seed,
            failures: failures.into_iter().take(10).collect(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Integer matrix with `1 ≤ m, k ≤ 6` and entries in `[−3, 3]`. Odd trials
/// plant a strictly positive left kernel vector.
pub fn random_dichotomy_matrix(seed: u64, trial: usize) -> Vec<Vec<i64>> {
    let mut rng = trial_rng(seed, trial);
    let m = rng.random_range(1..=6usize);
    let k = rng.random_range(1..=6usize);
    let mut rows: Vec<Vec<i64>> = (0..m).map(|_| (0..k).map(|_| rng.random_range(-3..=3)).collect()).collect();
    if trial % 2 == 1 && m >= 2 {
        let mut last = vec![0i64; k];
        for row in &rows[..m - 1] {
            let c = rng.random_range(1..=3);
            for (l, x) in last.iter_mut().zip(row) {
                *l -= c * x;
            }
        }
        rows[m - 1] = last;
    }
    rows
}

fn branch_name<T>(b: &Branch<T>) -> &'static str {
    match b {
        Branch::FlexDirection(_) => "flex",
        Branch::PositiveLeftKernel(_) => "kernel",
    }
}

fn verify_branch_f64(a: &Matrix<f64>, b: &Branch<f64>) -> std::result::Result<(), String> {
    match b {
        Branch::FlexDirection(u) => {
            let au = a.mul_vec(u);
            let scale = norm(u).max(1.0);
            if au.iter().any(|&x| x < -SUITE_TOL * scale) || au.iter().all(|&x| x <= SUITE_TOL * scale) {
                return Err(format!("flex certificate fails: Au = {au:?}"));
            }
        }
        Branch::PositiveLeftKernel(mu) => {
            let ma = a.left_mul(mu);
            if mu.iter().any(|&x| x < 1.0 - SUITE_TOL) || ma.iter().any(|x| x.abs() > SUITE_TOL) {
                return Err(format!("kernel certificate fails: mu = {mu:?}, muA = {ma:?}"));
            }
        }
    }
    Ok(())
}

fn verify_branch_exact(a: &Matrix<BigRational>, b: &Branch<BigRational>) -> std::result::Result<(), String> {
    let zero = BigRational::from_i64(0);
    let ok = match b {
        Branch::FlexDirection(u) => {
            let au = a.mul_vec(u);
            au.iter().all(|x| *x >= zero) && au.iter().any(|x| *x > zero)
        }
        Branch::PositiveLeftKernel(mu) => {
            mu.iter().all(|x| *x >= BigRational::from_i64(1)) && a.left_mul(mu).iter().all(|x| *x == zero)
        }
    };
    if ok {
        Ok(())
    } else {
        Err("exact certificate fails".into())
    }
}

/// Exactly one alternative holds, both arithmetic paths certify it, and the
/// branches agree.
pub fn dichotomy_trial(a: &[Vec<i64>], tol: &ToleranceContext) -> std::result::Result<(), String> {
    let af = Matrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j] as f64);
    let aq = Matrix::from_fn(a.len(), a[0].len(), |i, j| BigRational::from_i64(a[i][j]));
    let float = cones::dichotomy(&af, tol).map_err(|e| format!("float: {e}"))?;
    let exact = cones::dichotomy(&aq, tol).map_err(|e| format!("exact: {e}"))?;
    verify_branch_f64(&af, &float.branch)?;
    verify_branch_exact(&aq, &exact.branch)?;
    if branch_name(&float.branch) != branch_name(&exact.branch) {
        return Err(format!(
            "float branch {} disagrees with exact branch {}",
            branch_name(&float.branch),
            branch_name(&exact.branch)
        ));
    }
    Ok(())
}

pub fn dichotomy_suite(trials: usize, seed: u64, tol: &ToleranceContext) -> SuiteReport {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| dichotomy_trial(&random_dichotomy_matrix(seed, t), tol))
        .collect();
    SuiteReport::collect("dichotomy", seed, outcomes)
}

/// Generators (`1..=6` in dimension `2..=5`, integer entries in `[−3, 3]`)
/// and a target with entries in `[−5, 5]`.
pub fn random_projection_instance(seed: u64, trial: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = trial_rng(seed, trial);
    let dim = rng.random_range(2..=5usize);
    let count = rng.random_range(1..=6usize);
    let gens = (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-3..=3) as f64).collect())
        .collect();
    let w = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
    (gens, w)
}

/// Right-angle identity, nonnegativity on the generators and strict
/// separation of the target, all at [`SUITE_TOL`] relative to the data.
pub fn projection_trial(gens: &[Vec<f64>], w: &[f64], tol: &ToleranceContext) -> std::result::Result<(), String> {
    let p = cones::cone_project(gens, w, tol);
    let scale = norm(w).max(1.0) * gens.iter().map(|g| norm(g)).fold(1.0, f64::max);
    if p.coefficients.iter().any(|&c| c < 0.0) {
        return Err("negative generator weight".into());
    }
    if p.right_angle_defect().abs() > SUITE_TOL * scale {
        return Err(format!("right-angle defect {}", p.right_angle_defect()));
    }
    let y = &p.separating_normal;
    for g in gens {
        if dot(g, y) < -SUITE_TOL * scale {
            return Err(format!("generator pairs negatively: {}", dot(g, y)));
        }
    }
    if p.distance > 0.0 {
        let wy = dot(w, y);
        if wy >= 0.0 || (wy + p.distance * p.distance).abs() > SUITE_TOL * scale {
            return Err(format!("target not separated: <w,y> = {wy}, distance {}", p.distance));
        }
    }
    Ok(())
}

pub fn projection_suite(trials: usize, seed: u64, tol: &ToleranceContext) -> SuiteReport {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (g, w) = random_projection_instance(seed, t);
            projection_trial(&g, &w, tol)
        })
        .collect();
    SuiteReport::collect("projection", seed, outcomes)
}

/// Generators for the double-dual check: dimension `2..=4`, `1..=6`
/// integer generators with entries in `[−3, 3]`.
pub fn random_cone(seed: u64, trial: usize) -> (usize, Vec<Vec<BigRational>>) {
    let mut rng = trial_rng(seed, trial);
    let dim = rng.random_range(2..=4usize);
    let count = rng.random_range(1..=6usize);
    let gens = (0..count)
        .map(|_| (0..dim).map(|_| BigRational::from_i64(rng.random_range(-3..=3))).collect())
        .collect();
    (dim, gens)
}

/// Each trial draws a cone and checks membership against its dual on
/// `samples` points.
pub fn double_dual_suite(trials: usize, samples: usize, seed: u64) -> SuiteReport {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (dim, gens) = random_cone(seed, t);
            let report = cones::double_dual_oracle(&gens, dim, samples, seed ^ t as u64).map_err(|e| e.to_string())?;
            if report.passed() {
                Ok(())
            } else {
                Err(format!("{} membership disagreements", report.disagreements))
            }
        })
        .collect();
    SuiteReport::collect("doubledual", seed, outcomes)
}

/// A tensegrity with `3..=6` joints at distinct integer points of
/// `[−3, 3]²`; each pair is skipped, a cable, a strut or a cable-strut pair.
pub fn random_tensegrity(seed: u64, trial: usize) -> Tensegrity {
    let mut rng = trial_rng(seed, trial);
    loop {
        let n = rng.random_range(3..=6usize);
        let mut points: Vec<(i64, i64)> = Vec::with_capacity(n);
        while points.len() < n {
            let p = (rng.random_range(-3..=3), rng.random_range(-3..=3));
            if !points.contains(&p) {
                points.push(p);
            }
        }
        let mut members = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                match rng.random_range(0..10) {
                    0..=2 => {}
                    3..=5 => members.push(Member::cable(i, j)),
                    6..=8 => members.push(Member::strut(i, j)),
                    _ => {
                        members.push(Member::cable(i, j));
                        members.push(Member::strut(i, j));
                    }
                }
            }
        }
        if members.is_empty() {
            continue;
        }
        let vertices = points
            .iter()
            .map(|&(x, y)| vec![Coordinate::from(x), Coordinate::from(y)])
            .collect();
        if let Ok(t) = Framework::new(2, vertices, members).and_then(Tensegrity::new) {
            return t;
        }
    }
}

/// Direct-cone and certificate verdicts agree; a rigid certificate's stress
/// is proper, normalized and in equilibrium.
pub fn roth_whiteley_trial(t: &Tensegrity, tol: &ToleranceContext) -> std::result::Result<(), String> {
    let direct = tensegrity::first_order_rigidity_direct_with(t, tol, Arithmetic::Auto);
    let cert = tensegrity::roth_whiteley_certify_with(t, tol, Arithmetic::Auto).map_err(|e| e.to_string())?;
    if direct.verdict != cert.verdict {
        return Err(format!("direct {:?} vs certificate {:?}", direct.verdict, cert.verdict));
    }
    if cert.verdict == Verdict::FirstOrderRigid {
        let w = cert.proper_stress.as_ref().ok_or("rigid certificate without a stress")?;
        let min = w.values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if min < 1.0 - 1e-12 {
            return Err(format!("stress not normalized: min |w| = {min}"));
        }
        if !w.is_sign_admissible(t.members(), 0.0) {
            return Err("stress signs are not admissible".into());
        }
        let r = tensegrity::equilibrium_residual(t, w);
        if r > 1e-8 {
            return Err(format!("equilibrium residual {r}"));
        }
    }
    Ok(())
}

pub fn roth_whiteley_suite(trials: usize, seed: u64, tol: &ToleranceContext) -> SuiteReport {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| roth_whiteley_trial(&random_tensegrity(seed, t), tol))
        .collect();
    SuiteReport::collect("roth-whiteley", seed, outcomes)
}

/// Runs a suite by name: `dichotomy`, `projection`, `doubledual` or
/// `roth-whiteley`.
pub fn run_suite(kind: &str, trials: usize, seed: u64, tol: &ToleranceContext) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    match kind {
        "dichotomy" => Ok(dichotomy_suite(trials, seed, tol)),
        "projection" => Ok(projection_suite(trials, seed, tol)),
        "doubledual" | "double-dual" => Ok(double_dual_suite(trials, 30, seed)),
        "roth-whiteley" | "rw" => Ok(roth_whiteley_suite(trials, seed, tol)),
        _ => Err(Error::InvalidArgument(format!("unknown suite '{kind}'"))),
    }
}
