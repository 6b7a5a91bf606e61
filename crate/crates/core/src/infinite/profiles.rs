//! Level-by-level diagnostics: truncation residuals, weak pairings,
//! summability, stress energy and bounded prestress stability evidence.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sequence::{sequence_norm, SequenceSpace};
use super::{dyadic, generate, DecayClass, DictionaryField, Family, GeneratorSpec};
use crate::error::{Error, Result};
use crate::linalg::dense::{self, SymmetricEigen};
use crate::model::{Framework, StressField, ToleranceContext, VelocityField};
use crate::prestress::{self, PSState, SearchBudget};
use crate::rigidity;

/// Fitted ratios below this count as decay.
pub const DECAY_THRESHOLD: f64 = 0.95;

/// Least-squares fit of `ln |v_n|` against `n` over the last half of the
/// sequence, returned as `exp(slope)`. Zero entries are skipped.
pub fn fit_ratio(values: &[f64]) -> Option<f64> {
    let start = (values.len() / 2).min(values.len().saturating_sub(2));
    let pts: Vec<(f64, f64)> = values[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(k, v)| (k as f64, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayCheck {
    pub ratio: Option<f64>,
    pub decays: bool,
}

/// A sequence decays if it ends at exactly 0 or its fitted ratio is below
/// [`DECAY_THRESHOLD`].
pub fn decay_ratio(values: &[f64]) -> DecayCheck {
    match values.last() {
        None => DecayCheck {
            ratio: None,
            decays: false,
        },
        Some(&last) if last == 0.0 => DecayCheck {
            ratio: Some(0.0),
            decays: true,
        },
        Some(_) => {
            let ratio = fit_ratio(values);
            DecayCheck {
                ratio,
                decays: ratio.is_some_and(|r| r < DECAY_THRESHOLD),
            }
        }
    }
}

/// `Σ_e ω_e (p_i − p_j)·(u_i − u_j)`, i.e. `⟨ω R(G,p), u⟩`.
fn pairing(f: &Framework, stress: &StressField, u: &VelocityField) -> f64 {
    let d = f.dimension();
    dense::compensated_sum(f.members().iter().zip(&stress.values).map(|(m, w)| {
        let (p, q) = (f.point(m.i), f.point(m.j));
        let raw: f64 = (0..d).map(|k| (p[k] - q[k]) * (u.at(m.i)[k] - u.at(m.j)[k])).sum();
        w * raw
    }))
}

/// Extends a stress on the level-`n` members by zero to `outer`.
fn extend(inner: &Framework, stress: &StressField, outer: &Framework) -> Result<Vec<f64>> {
    let mut out = vec![0.0; outer.member_count()];
    for (m, &w) in inner.members().iter().zip(&stress.values) {
        let idx = outer
            .member_index(m)
            .ok_or_else(|| Error::Inconsistent(format!("member {} missing from the next level", m.label())))?;
        out[idx] = w;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub level: usize,
    /// `sup_v |r_v|_∞` of `r = |ω^(n)| R(G(p))` on the level-`n+1` joints.
    pub residual_sup: f64,
    /// Norm of `r` in the residual space.
    pub residual_norm: f64,
    /// Pairings with the family's default dictionary, in order.
    pub weak_pairings: Vec<f64>,
    pub partial_abs_sum: f64,
    pub partial_energy: f64,
    /// `min |ω^(n)_e|` over proper members of level `n − 1`.
    pub lower_bound_min: Option<f64>,
    /// `|ω^(n)_e| ≥ |ω^(n−1)_e| > 0` on proper level-`n − 1` members.
    pub lower_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualProfile {
    pub family: Family,
    pub residual_space: SequenceSpace,
    pub reports: Vec<TruncationReport>,
    pub residual_ratio: Option<f64>,
    pub strong_decay: bool,
    pub abs_sum_nondecreasing: bool,
    pub energy_nondecreasing: bool,
}

fn nondecreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
}

fn report_at(
    spec: &GeneratorSpec,
    level: usize,
    residual_space: SequenceSpace,
    dictionary: &[DictionaryField],
    tol: &ToleranceContext,
) -> Result<TruncationReport> {
    let inner = generate(spec, level)?.framework;
    let outer = generate(spec, level + 1)?.framework;
    let stress = spec.candidate_stress(level, tol)?;
    if !stress.is_sign_admissible(inner.members(), 0.0) {
        return Err(Error::Inconsistent("candidate stress is not sign-admissible".into()));
    }
    let extended = extend(&inner, &stress, &outer)?;
    let residual = rigidity::bar_rigidity_matrix(&outer).left_apply(&extended);
    let d = outer.dimension();
    let residual_norm = sequence_norm(&residual, d, residual_space)?;
    let residual_sup = dense::norm_inf(&residual);
    let weak_pairings = dictionary
        .iter()
        .map(|u| pairing(&inner, &stress, &u.evaluate(&inner)))
        .collect();
    let partial_abs_sum = dense::compensated_sum(stress.values.iter().map(|w| w.abs()));
    let partial_energy = prestress::stress_energy(inner.members(), d, &stress.values, &inner.placement());

    let (lower_bound_min, lower_bound_holds) = if level >= 2 {
        let prev_f = generate(spec, level - 1)?.framework;
        let prev = spec.candidate_stress(level - 1, tol)?;
        let mask = spec.proper_mask(level - 1)?;
        let mut min = f64::INFINITY;
        let mut holds = true;
        for ((m, w), proper) in prev_f.members().iter().zip(&prev.values).zip(mask) {
            if !proper {
                continue;
            }
            let idx = inner.member_index(m).expect("nested members");
            let now = stress.values[idx].abs();
            min = min.min(now);
            holds &= now > 0.0 && now >= w.abs() - 1e-12 * w.abs().max(1.0);
        }
        (Some(min), holds)
    } else {
        (None, true)
    };
    Ok(TruncationReport {
        level,
        residual_sup,
        residual_norm,
        weak_pairings,
        partial_abs_sum,
        partial_energy,
        lower_bound_min,
        lower_bound_holds,
    })
}

/// Residual of the truncated candidate stress on the next truncation, one
/// report per level. `residual_space` is the dual space in which residuals
/// are measured.
pub fn truncation_residual_profile(
    spec: &GeneratorSpec,
    levels: &[usize],
    residual_space: SequenceSpace,
    tol: &ToleranceContext,
) -> Result<ResidualProfile> {
    let dictionary = spec.default_dictionary();
    let reports: Vec<TruncationReport> = levels
        .par_iter()
        .map(|&n| report_at(spec, n, residual_space, &dictionary, tol))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = reports.iter().map(|r| r.residual_norm).collect();
    let check = decay_ratio(&norms);
    let abs: Vec<f64> = reports.iter().map(|r| r.partial_abs_sum).collect();
    let energy: Vec<f64> = reports.iter().map(|r| r.partial_energy).collect();
    Ok(ResidualProfile {
        family: spec.family,
        residual_space,
        reports,
        residual_ratio: check.ratio,
        strong_decay: check.decays,
        abs_sum_nondecreasing: nondecreasing(&abs),
        energy_nondecreasing: nondecreasing(&energy),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingSeries {
    pub name: String,
    pub class: DecayClass,
    /// Sup of the field over the joints added at each level.
    pub shell_sups: Vec<f64>,
    pub pairings: Vec<f64>,
    pub ratio: Option<f64>,
    pub decays: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakPairingProfile {
    pub family: Family,
    pub levels: Vec<usize>,
    pub series: Vec<PairingSeries>,
    pub weak_decay: bool,
}

fn check_declared_decay(field: &DictionaryField, shell_sups: &[f64]) -> Result<()> {
    let outside = |why: &str| {
        Err(Error::InvalidArgument(format!(
            "dictionary field '{}' lies outside the sequence space: {why}",
            field.name
        )))
    };
    let last = shell_sups.last().copied().unwrap_or(0.0);
    match field.class {
        DecayClass::Bounded => outside("declared bounded, not decaying"),
        DecayClass::Compact if shell_sups.len() >= 2 && last != 0.0 => outside("declared compact but nonzero on the outer shell"),
        DecayClass::C0 if shell_sups.len() >= 2 => {
            let max = shell_sups.iter().copied().fold(0.0, f64::max);
            if last == 0.0 || last <= 0.5 * max {
                Ok(())
            } else {
                outside("declared c0 but shell sups do not decay")
            }
        }
        _ => Ok(()),
    }
}

/// Pairings `⟨|ω^(n)| R(G(p)), u⟩` for each dictionary field and level.
/// Levels are processed in increasing order.
pub fn weak_pairing_profile(
    spec: &GeneratorSpec,
    levels: &[usize],
    dictionary: &[DictionaryField],
    tol: &ToleranceContext,
) -> Result<WeakPairingProfile> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let per_level: Vec<(Framework, StressField)> = levels
        .par_iter()
        .map(|&n| Ok((generate(spec, n)?.framework, spec.candidate_stress(n, tol)?)))
        .collect::<Result<_>>()?;
    let mut series = Vec::with_capacity(dictionary.len());
    for field in dictionary {
        let mut shell_sups = Vec::with_capacity(levels.len());
        let mut pairings = Vec::with_capacity(levels.len());
        let mut seen = 0;
        for (f, stress) in &per_level {
            let u = field.evaluate(f);
            let d = f.dimension();
            let shell = &u.values[seen * d..];
            shell_sups.push(dense::norm_inf(shell));
            seen = f.vertex_count();
            pairings.push(pairing(f, stress, &u));
        }
        check_declared_decay(field, &shell_sups)?;
        let check = decay_ratio(&pairings);
        series.push(PairingSeries {
            name: field.name.clone(),
            class: field.class,
            shell_sups,
            pairings,
            ratio: check.ratio,
            decays: check.decays,
        });
    }
    let weak_decay = series.iter().all(|s| s.decays);
    Ok(WeakPairingProfile {
        family: spec.family,
        levels,
        series,
        weak_decay,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub family: Family,
    pub levels: Vec<usize>,
    pub partial_abs_sums: Vec<f64>,
    pub tail_bounds: Vec<Option<f64>>,
    /// `[max partial, min(partial + tail)]` when every tail bound is known.
    pub limit_bracket: Option<(f64, f64)>,
    pub summable: bool,
}

pub fn summability_report(spec: &GeneratorSpec, levels: &[usize], tol: &ToleranceContext) -> Result<SummabilityReport> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let rows: Vec<(f64, Option<f64>)> = levels
        .par_iter()
        .map(|&n| {
            let w = spec.candidate_stress(n, tol)?;
            Ok((
                dense::compensated_sum(w.values.iter().map(|x| x.abs())),
                spec.tail_bound(n, tol)?,
            ))
        })
        .collect::<Result<_>>()?;
    let partial_abs_sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let tail_bounds: Vec<Option<f64>> = rows.iter().map(|r| r.1).collect();
    let limit_bracket = if !rows.is_empty() && tail_bounds.iter().all(Option::is_some) {
        let lo = partial_abs_sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hi = rows.iter().map(|(s, t)| s + t.unwrap()).fold(f64::INFINITY, f64::min);
        Some((lo, hi))
    } else {
        None
    };
    let tails_shrink = tail_bounds
        .windows(2)
        .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
    let summable = limit_bracket.is_some_and(|(lo, hi)| lo <= hi + 1e-12 * hi.abs().max(1.0)) && tails_shrink;
    Ok(SummabilityReport {
        family: spec.family,
        levels,
        partial_abs_sums,
        tail_bounds,
        limit_bracket,
        summable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EnergyVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub family: Family,
    pub levels: Vec<usize>,
    pub partial_energies: Vec<f64>,
    pub tail_bounds: Vec<Option<f64>>,
    /// Fitted ratio of successive increments `|E_n − E_{n−1}|`.
    pub increment_ratio: Option<f64>,
    pub verdict: EnergyVerdict,
}

pub fn infinite_energy_report(spec: &GeneratorSpec, levels: &[usize], tol: &ToleranceContext) -> Result<EnergyReport> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let rows: Vec<(f64, Option<f64>)> = levels
        .par_iter()
        .map(|&n| {
            let f = generate(spec, n)?.framework;
            let w = spec.candidate_stress(n, tol)?;
            let e = prestress::stress_energy(f.members(), f.dimension(), &w.values, &f.placement());
            Ok((e, spec.energy_tail_bound(n, tol)?))
        })
        .collect::<Result<_>>()?;
    let partial_energies: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let tail_bounds: Vec<Option<f64>> = rows.iter().map(|r| r.1).collect();
    let increments: Vec<f64> = partial_energies.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let increment_ratio = fit_ratio(&increments);
    let bracketed = !rows.is_empty()
        && tail_bounds.iter().all(Option::is_some)
        && rows.iter().all(|(e, t)| {
            let last = *partial_energies.last().unwrap();
            (last - e).abs() <= t.unwrap() + 1e-12 * last.abs().max(1.0)
        });
    let verdict = if bracketed {
        EnergyVerdict::Finite
    } else if increments.last().is_some_and(|&x| x > 0.0) && increment_ratio.is_some_and(|r| r >= DECAY_THRESHOLD) {
        EnergyVerdict::Divergent
    } else {
        EnergyVerdict::Inconclusive
    };
    Ok(EnergyReport {
        family: spec.family,
        levels,
        partial_energies,
        tail_bounds,
        increment_ratio,
        verdict,
    })
}

/// Partial stress energy in rational arithmetic, where the family has an
/// exact candidate stress and rational joints.
pub fn partial_energy_exact(spec: &GeneratorSpec, level: usize) -> Result<Option<BigRational>> {
    let f = generate(spec, level)?.framework;
    let (Some(w), Some(p)) = (spec.candidate_stress_exact(level)?, f.placement_as::<BigRational>()) else {
        return Ok(None);
    };
    Ok(Some(prestress::stress_energy(f.members(), f.dimension(), &w.values, &p)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BpsVerdict {
    BpsEvidence,
    NotSupported,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossTerm {
    pub a: String,
    pub b: String,
    pub value: f64,
    pub declared_orthogonal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BpsReport {
    pub family: Family,
    pub level: usize,
    pub verdict: BpsVerdict,
    pub reason: Option<String>,
    pub summable: bool,
    pub energy: EnergyVerdict,
    /// Equilibrium stress of the truncation used for the energy form.
    pub stress: Option<StressField>,
    pub flex_dim: usize,
    pub min_eigenvalue: Option<f64>,
    pub flex_energies: Vec<(String, f64)>,
    pub cross_terms: Vec<CrossTerm>,
    pub random_min_energy: Option<f64>,
    /// Prestress stability of the truncation, for the level-1 squares.
    pub ps_state: Option<PSState>,
}

const RANDOM_COMBINATIONS: usize = 16;

/// Energy of an equilibrium stress of the level-`n` truncation on its
/// nontrivial flexes, the family's named flexes and seeded random bounded
/// combinations of them.
pub fn bps_probe(spec: &GeneratorSpec, level: usize, tol: &ToleranceContext, seed: u64) -> Result<BpsReport> {
    let levels: Vec<usize> = (1..=level.max(2)).collect();
    let summable = summability_report(spec, &levels, tol)?.summable;
    let energy = infinite_energy_report(spec, &levels, tol)?.verdict;
    let mut report = BpsReport {
        family: spec.family,
        level,
        verdict: BpsVerdict::NotSupported,
        reason: None,
        summable,
        energy,
        stress: None,
        flex_dim: 0,
        min_eigenvalue: None,
        flex_energies: Vec::new(),
        cross_terms: Vec::new(),
        random_min_energy: None,
        ps_state: None,
    };
    if !summable {
        report.reason = Some("stress is not summable".into());
        return Ok(report);
    }
    if energy != EnergyVerdict::Finite {
        report.reason = Some("stress energy is not finite".into());
        return Ok(report);
    }
    let squares = match spec.family {
        Family::DyadicSquares => level,
        Family::SquareInSquare => 1,
        _ => {
            report.reason = Some("no equilibrium stress for the truncation".into());
            return Ok(report);
        }
    };
    let f = generate(spec, level)?.framework;
    let stress = dyadic::solve_level_uniform(squares, tol)?.stress;
    let omega = prestress::stress_matrix(&f, &stress)?;

    let flexes = rigidity::analyze_bars(&f, tol).flexes;
    report.flex_dim = flexes.dim();
    if !flexes.is_empty() {
        let form = prestress::reduced_flex_form(&f, &stress, &flexes.basis)?;
        report.min_eigenvalue = SymmetricEigen::new(&form).min();
    }

    let named = spec.candidate_flexes(level)?;
    for u in &named {
        report.flex_energies.push((u.name.clone(), prestress::energy_form(&f, &stress, &u.field)?));
    }
    let orthogonal = spec.orthogonal_pairs(&named);
    for a in 0..named.len() {
        for b in a + 1..named.len() {
            report.cross_terms.push(CrossTerm {
                a: named[a].name.clone(),
                b: named[b].name.clone(),
                value: omega.bilinear(&named[a].field.values, &named[b].field.values),
                declared_orthogonal: orthogonal.contains(&(a, b)),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_min = f64::INFINITY;
    for _ in 0..RANDOM_COMBINATIONS {
        let mut u = vec![0.0; f.dimension() * f.vertex_count()];
        for flex in &named {
            dense::axpy(rng.random_range(-1.0..1.0), &flex.field.values, &mut u);
        }
        random_min = random_min.min(omega.quadratic(&u));
    }
    if !named.is_empty() {
        report.random_min_energy = Some(random_min);
    }
    if spec.family == Family::SquareInSquare {
        let budget = SearchBudget {
            seed,
            ..SearchBudget::default()
        };
        report.ps_state = Some(prestress::prestress_stability(&f, tol, &budget)?.state);
    }

    let floor = 10.0 * tol.cert_tol;
    let orthogonal_ok = report.cross_terms.iter().filter(|c| c.declared_orthogonal).all(|c| c.value.abs() <= 1e-9);
    report.reason = if report.min_eigenvalue.is_some_and(|l| l < floor) {
        Some("energy form is not positive on the flex space".into())
    } else if report.flex_energies.iter().any(|(_, e)| *e < floor) {
        Some("a named flex has energy below threshold".into())
    } else if report.random_min_energy.is_some_and(|e| e < floor) {
        Some("a random combination has energy below threshold".into())
    } else if !orthogonal_ok {
        Some("declared orthogonal cross terms do not vanish".into())
    } else {
        None
    };
    if report.reason.is_none() {
        report.verdict = BpsVerdict::BpsEvidence;
    }
    report.stress = Some(stress);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformReport {
    pub family: Family,
    pub levels: Vec<usize>,
    pub max_degree: usize,
    pub max_length: f64,
    pub degree_bound: usize,
    pub length_bound: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

/// Measured degree and length maxima against the declared bounds.
pub fn uniform_structure_check(spec: &GeneratorSpec, levels: &[usize]) -> Result<UniformReport> {
    let mut max_degree = 0;
    let mut max_length: f64 = 0.0;
    for &n in levels {
        let f = generate(spec, n)?.framework;
        max_degree = max_degree.max(f.max_degree());
        max_length = max_length.max(f.max_length());
    }
    if max_degree > spec.degree_bound() {
        return Err(Error::Inconsistent(format!(
            "{} exceeds its degree bound: {max_degree} > {}",
            spec.family,
            spec.degree_bound()
        )));
    }
    if let Some(l) = spec.length_bound() {
        if max_length > l * (1.0 + 1e-12) {
            return Err(Error::Inconsistent(format!(
                "{} exceeds its length bound: {max_length} > {l}",
                spec.family
            )));
        }
    }
    let pass = spec.length_bound().is_some();
    Ok(UniformReport {
        family: spec.family,
        levels: levels.to_vec(),
        max_degree,
        max_length,
        degree_bound: spec.degree_bound(),
        length_bound: spec.length_bound(),
        pass,
        note: (!pass).then(|| "uniform structure fails: member lengths are unbounded".to_string()),
    })
}
