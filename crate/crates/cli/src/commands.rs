use std::collections::BTreeMap;
use std::path::Path;

use rigidity_core::infinite::{
    self, BpsReport, DyadicStress, EnergyVerdict, Family, GeneratorSpec, MonotonicityReport, SequenceSpace,
    TruncationReport, UniformReport,
};
use rigidity_core::prestress::{self, PSVerdict, SearchBudget, SecondDerivativeReport};
use rigidity_core::rigidity::{self, RigidityMatrix};
use rigidity_core::tensegrity::{self, Arithmetic, RigidityCertificate, Verdict};
use rigidity_core::{
    expand_to_cable_strut, parse_framework, to_canonical_json, validate, Exact, Framework, StressField,
    Tensegrity, ToleranceContext,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{json_line, render, AnalysisReport, CliError, Format, Tool, SCHEMA_VERSION};
use crate::svg::{self, Overlay};
use crate::{GlobalOpts, Mode};

fn load(path: &Path, tol: &ToleranceContext) -> Result<Framework, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let f = parse_framework(&text)?;
    let errors: Vec<_> = validate(&f, tol).into_iter().filter(|d| d.is_error()).collect();
    if !errors.is_empty() {
        return Err(rigidity_core::Error::Invalid(errors).into());
    }
    Ok(f)
}

/// The input as recorded in a report: where it came from and the framework
/// itself, so certificates can be re-verified from the report alone.
fn descriptor(source: String, f: &Framework) -> Result<Value, CliError> {
    let framework: Value =
        serde_json::from_str(&to_canonical_json(f)).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(json!({ "source": source, "framework": framework }))
}

fn arithmetic(g: &GlobalOpts) -> Arithmetic {
    if g.exact {
        Arithmetic::Exact
    } else {
        Arithmetic::Auto
    }
}

fn labelled(f: &Framework, w: &StressField) -> BTreeMap<String, f64> {
    f.members().iter().map(|m| m.label()).zip(w.values.iter().copied()).collect()
}

#[derive(Serialize)]
struct StressSummary {
    dim: usize,
    basis: Vec<BTreeMap<String, f64>>,
}

#[derive(Serialize)]
struct AnalyzeResult {
    mode: &'static str,
    dimension: usize,
    vertex_count: usize,
    member_count: usize,
    rank: usize,
    trivial_dim: usize,
    flex_dim: usize,
    /// Orthonormal nontrivial flexes of the bar framework, vertex-major.
    flexes: Vec<Vec<f64>>,
    stress_space: StressSummary,
    direct: RigidityCertificate,
    roth_whiteley: RigidityCertificate,
    verdict: Verdict,
    warnings: Vec<String>,
}

pub fn analyze(g: &GlobalOpts, path: &Path, mode: Mode) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let f = load(path, &tol)?;
    let warnings = validate(&f, &tol).iter().map(|d| d.to_string()).collect();
    let bars = f.bar_closure();
    let analysis = rigidity::analyze_bars(&bars, &tol);
    let space = prestress::stress_space(&bars, &tol);
    let t = match mode {
        Mode::Bar => expand_to_cable_strut(&bars),
        Mode::Tensegrity => Tensegrity::new(f.clone())?,
    };
    let direct = tensegrity::first_order_rigidity_direct_with(&t, &tol, arithmetic(g));
    let rw = tensegrity::roth_whiteley_certify_with(&t, &tol, arithmetic(g))?;
    if direct.verdict != rw.verdict {
        return Err(CliError::Inconsistent(format!(
            "direct cone says {:?}, Roth-Whiteley says {:?}",
            direct.verdict, rw.verdict
        )));
    }
    if mode == Mode::Bar && analysis.is_rigid() != (direct.verdict == Verdict::FirstOrderRigid) {
        return Err(CliError::Inconsistent(
            "rank rule and cable-strut expansion disagree".into(),
        ));
    }
    let result = AnalyzeResult {
        mode: match mode {
            Mode::Bar => "bar",
            Mode::Tensegrity => "tensegrity",
        },
        dimension: f.dimension(),
        vertex_count: f.vertex_count(),
        member_count: f.member_count(),
        rank: analysis.rank,
        trivial_dim: analysis.trivial_dim,
        flex_dim: analysis.flexes.dim(),
        flexes: analysis.flexes.basis.clone(),
        stress_space: StressSummary {
            dim: space.dim(),
            basis: space.basis.iter().map(|w| labelled(&bars, w)).collect(),
        },
        verdict: direct.verdict,
        direct,
        roth_whiteley: rw,
        warnings,
    };
    let input = descriptor(path.display().to_string(), &f)?;
    render(&AnalysisReport::new("analyze", input, g.seed, tol, result), g.format)
}

#[derive(Serialize)]
struct SecondDerivativeBlock {
    flex: usize,
    #[serde(flatten)]
    check: SecondDerivativeReport,
}

#[derive(Serialize)]
struct PrestressResult {
    members: Vec<String>,
    budget: SearchBudget,
    #[serde(flatten)]
    verdict: PSVerdict,
    /// Finite-difference validation of the energy form on each flex.
    second_derivative: Vec<SecondDerivativeBlock>,
}

pub fn prestress(g: &GlobalOpts, path: &Path, restarts: usize, iterations: usize) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let f = load(path, &tol)?;
    if !f.has_only_bars() {
        return Err(CliError::Input("prestress stability needs a bar framework".into()));
    }
    let budget = SearchBudget {
        restarts,
        iterations,
        seed: g.seed,
    };
    let verdict = prestress::prestress_stability(&f, &tol, &budget)?;
    let mut checks = Vec::new();
    if let Some(w) = &verdict.stress {
        let q = f.placement();
        for (k, u) in rigidity::flex_space(&f, &tol).basis.iter().enumerate() {
            let check = prestress::second_derivative_check(f.members(), f.dimension(), &w.values, &q, u, tol.fd_step);
            checks.push(SecondDerivativeBlock { flex: k, check });
        }
    }
    let result = PrestressResult {
        members: f.members().iter().map(|m| m.label()).collect(),
        budget,
        verdict,
        second_derivative: checks,
    };
    let input = descriptor(path.display().to_string(), &f)?;
    render(&AnalysisReport::new("prestress", input, g.seed, tol, result), g.format)
}

fn parse_family(name: &str) -> Result<Family, CliError> {
    name.parse::<Family>().map_err(CliError::from)
}

#[derive(Serialize)]
struct LevelLine<'a> {
    record: &'static str,
    schema_version: &'static str,
    family: Family,
    #[serde(flatten)]
    report: &'a TruncationReport,
}

#[derive(Serialize)]
struct SeriesSummary {
    name: String,
    ratio: Option<f64>,
    decays: bool,
}

#[derive(Serialize)]
struct DyadicSummary {
    level: usize,
    fitted_ratio: f64,
    ratio_variation: f64,
    stated_ratio: f64,
    displayed_balance_solution: f64,
    distance_to_stated: f64,
    distance_to_displayed: f64,
    sign_consistent: bool,
}

impl From<&DyadicStress> for DyadicSummary {
    fn from(s: &DyadicStress) -> Self {
        DyadicSummary {
            level: s.level,
            fitted_ratio: s.fitted_ratio,
            ratio_variation: s.ratio_variation,
            stated_ratio: s.stated_ratio,
            displayed_balance_solution: s.displayed_balance_solution,
            distance_to_stated: s.distance_to_stated,
            distance_to_displayed: s.distance_to_displayed,
            sign_consistent: s.sign_consistent,
        }
    }
}

#[derive(Serialize)]
struct InfiniteSummary {
    record: &'static str,
    schema_version: &'static str,
    tool: Tool,
    family: Family,
    one_sided: bool,
    seed: u64,
    tolerances: ToleranceContext,
    levels: usize,
    residual_space: String,
    residual_ratio: Option<f64>,
    strong_decay: bool,
    weak_decay: bool,
    dictionary: Vec<SeriesSummary>,
    summable: bool,
    limit_bracket: Option<(f64, f64)>,
    energy: EnergyVerdict,
    bps: BpsReport,
    uniform: UniformReport,
    dyadic: Option<DyadicSummary>,
    monotonicity: Option<MonotonicityReport>,
}

pub fn infinite(
    g: &GlobalOpts,
    family: &str,
    levels: usize,
    space: &str,
    one_sided: bool,
    bps_level: Option<usize>,
    bay: Option<i64>,
) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let family = parse_family(family)?;
    if levels == 0 {
        return Err(CliError::Input("--levels must be at least 1".into()));
    }
    let space: SequenceSpace = space.parse()?;
    let spec = GeneratorSpec::new(family).one_sided(one_sided);
    let range: Vec<usize> = (1..=levels).collect();
    let profile = infinite::truncation_residual_profile(&spec, &range, space, &tol)?;
    let weak = infinite::weak_pairing_profile(&spec, &range, &spec.default_dictionary(), &tol)?;
    let summability = infinite::summability_report(&spec, &range, &tol)?;
    let energy = infinite::infinite_energy_report(&spec, &range, &tol)?;
    let bps = infinite::bps_probe(&spec, bps_level.unwrap_or(levels.min(6)), &tol, g.seed)?;
    let uniform = infinite::uniform_structure_check(&spec, &range)?;
    let dyadic = match family {
        Family::DyadicSquares if levels >= 3 => {
            Some(DyadicSummary::from(&infinite::solve_symmetric_stress(levels, &tol)?))
        }
        _ => None,
    };
    let monotonicity = match family {
        Family::Strip if levels >= 2 => {
            let bay = bay.unwrap_or(5.min(levels as i64 - 1));
            Some(infinite::strip_monotonicity(levels, bay, 1.0, one_sided, g.exact)?)
        }
        _ => None,
    };
    let summary = InfiniteSummary {
        record: "summary",
        schema_version: SCHEMA_VERSION,
        tool: Tool::current(),
        family,
        one_sided,
        seed: g.seed,
        tolerances: tol,
        levels,
        residual_space: space.name(),
        residual_ratio: profile.residual_ratio,
        strong_decay: profile.strong_decay,
        weak_decay: weak.weak_decay,
        dictionary: weak
            .series
            .iter()
            .map(|s| SeriesSummary {
                name: s.name.clone(),
                ratio: s.ratio,
                decays: s.decays,
            })
            .collect(),
        summable: summability.summable,
        limit_bracket: summability.limit_bracket,
        energy: energy.verdict,
        bps,
        uniform,
        dyadic,
        monotonicity,
    };
    match g.format {
        Format::Json => {
            let mut out = String::new();
            for r in &profile.reports {
                out.push_str(&json_line(&LevelLine {
                    record: "truncation",
                    schema_version: SCHEMA_VERSION,
                    family,
                    report: r,
                })?);
                out.push('\n');
            }
            out.push_str(&json_line(&summary)?);
            out.push('\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out =
                String::from("level,residual_sup,residual_norm,partial_abs_sum,partial_energy,lower_bound_holds\n");
            for r in &profile.reports {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.level, r.residual_sup, r.residual_norm, r.partial_abs_sum, r.partial_energy, r.lower_bound_holds
                ));
            }
            out.push('\n');
            out.push_str(&render(&summary, Format::Csv)?);
            Ok(out)
        }
    }
}

/// Scales a stress so its smallest nonzero entry has modulus 1 and the
/// longest member is in tension.
fn display_stress(f: &Framework, w: &StressField, tol: f64) -> StressField {
    let min = w.values.iter().map(|x| x.abs()).filter(|&x| x > tol).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return w.clone();
    }
    let longest = (0..f.member_count())
        .max_by(|&a, &b| f.length(&f.members()[a]).total_cmp(&f.length(&f.members()[b])))
        .unwrap_or(0);
    let sign = if w.values[longest] > 0.0 { -1.0 } else { 1.0 };
    StressField::new(w.values.iter().map(|x| sign * x / min).collect())
}

pub fn export_svg(
    g: &GlobalOpts,
    file: Option<&Path>,
    family: Option<&str>,
    level: usize,
    one_sided: bool,
    overlay: &str,
) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let (f, spec) = match (file, family) {
        (Some(path), _) => (load(path, &tol)?, None),
        (None, Some(name)) => {
            let spec = GeneratorSpec::new(parse_family(name)?).one_sided(one_sided);
            (spec.truncation(level)?.framework, Some(spec))
        }
        (None, None) => return Err(CliError::Input("give a framework file or --family".into())),
    };
    let overlay = match overlay {
        "none" => Overlay::None,
        "stress" => {
            let w = match &spec {
                Some(spec) => spec.candidate_stress(level, &tol)?,
                None if f.has_only_bars() => {
                    let space = prestress::stress_space(&f, &tol);
                    let w = space
                        .basis
                        .first()
                        .ok_or_else(|| CliError::Input("the framework has no equilibrium stress".into()))?;
                    display_stress(&f, w, tol.cert_tol)
                }
                None => tensegrity::proper_equilibrium_stress(&Tensegrity::new(f.clone())?, &tol)
                    .ok_or_else(|| CliError::Input("the tensegrity has no proper equilibrium stress".into()))?,
            };
            Overlay::Stress(w)
        }
        other => {
            let k: usize = other
                .strip_prefix("flex:")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| CliError::Input(format!("unknown overlay '{other}'; use none, flex:<k> or stress")))?;
            let flexes: Vec<Vec<f64>> = match &spec {
                Some(spec) => spec.candidate_flexes(level)?.into_iter().map(|n| n.field.values).collect(),
                None if f.has_only_bars() => rigidity::flex_space(&f, &tol).basis,
                None => {
                    let t = Tensegrity::new(f.clone())?;
                    tensegrity::first_order_rigidity_direct_with(&t, &tol, arithmetic(g))
                        .witness_flex
                        .map(|u| vec![u.values])
                        .unwrap_or_default()
                }
            };
            let u = flexes
                .into_iter()
                .nth(k)
                .ok_or_else(|| CliError::Input(format!("flex {k} does not exist")))?;
            Overlay::Flex(rigidity_core::VelocityField::new(f.dimension(), u))
        }
    };
    Ok(svg::render(&f, &overlay)?)
}

pub fn oracle(g: &GlobalOpts, kind: &str, trials: usize) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let suite = rigidity_core::suites::run_suite(kind, trials, g.seed, &tol)?;
    let passed = suite.all_passed();
    let input = json!({ "kind": kind, "trials": trials });
    let out = render(&AnalysisReport::new("oracle", input, g.seed, tol, suite), g.format)?;
    if passed {
        Ok(out)
    } else {
        Err(CliError::SuiteFailure(out))
    }
}

#[derive(Serialize)]
struct MatrixResult {
    signed: bool,
    exact: bool,
    rows: Vec<String>,
    matrix: Value,
}

pub fn matrix(g: &GlobalOpts, path: &Path, signed: bool) -> Result<String, CliError> {
    let tol = g.tolerances()?;
    let f = load(path, &tol)?;
    let t = if signed {
        Some(Tensegrity::new(f.clone()).unwrap_or_else(|_| expand_to_cable_strut(&f)))
    } else {
        None
    };
    let members = t.as_ref().map_or(f.members(), |t| t.members());
    let rows: Vec<String> = members.iter().map(|m| m.label()).collect();
    if g.exact {
        let r: Option<RigidityMatrix<Exact>> = match &t {
            Some(t) => rigidity::tensegrity_rigidity_matrix_in(t),
            None => rigidity::bar_rigidity_matrix_in(&f),
        };
        let r = r.ok_or_else(|| CliError::Input("--exact needs rational coordinates".into()))?;
        let cells: Vec<Vec<String>> = r.matrix.to_rows().iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect();
        return match g.format {
            Format::Csv => {
                // same layout as the float CSV, exact entries
                let float = match &t {
                    Some(t) => rigidity::tensegrity_rigidity_matrix(t),
                    None => rigidity::bar_rigidity_matrix(&f),
                }
                .to_csv();
                let header = float.lines().next().unwrap_or_default();
                let mut out = format!("{header}\n");
                for (label, row) in rows.iter().zip(&cells) {
                    out.push_str(&format!("{label},{}\n", row.join(",")));
                }
                Ok(out)
            }
            Format::Json => {
                let result = MatrixResult {
                    signed,
                    exact: true,
                    rows,
                    matrix: json!(cells),
                };
                render(&AnalysisReport::new("matrix", descriptor(path.display().to_string(), &f)?, g.seed, tol, result), Format::Json)
            }
        };
    }
    let r = match &t {
        Some(t) => rigidity::tensegrity_rigidity_matrix(t),
        None => rigidity::bar_rigidity_matrix(&f),
    };
    match g.format {
        Format::Csv => Ok(r.to_csv()),
        Format::Json => {
            let result = MatrixResult {
                signed,
                exact: false,
                rows,
                matrix: json!(r.matrix.to_rows()),
            };
            render(&AnalysisReport::new("matrix", descriptor(path.display().to_string(), &f)?, g.seed, tol, result), Format::Json)
        }
    }
}

pub fn generate(family: &str, level: usize, one_sided: bool) -> Result<String, CliError> {
    let spec = GeneratorSpec::new(parse_family(family)?).one_sided(one_sided);
    let mut s = to_canonical_json(&spec.truncation(level)?.framework);
    if !s.ends_with('\n') {
        s.push('\n');
    }
    Ok(s)
}
