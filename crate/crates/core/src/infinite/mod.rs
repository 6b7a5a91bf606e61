//! Countably infinite frameworks studied through nested finite truncations.
//!
//! Each [`Family`] is a pure function of the truncation level. Level `n`
//! vertices and members are a prefix (resp. subset) of level `n + 1`, with
//! identical placements on shared vertices.

mod dyadic;
mod families;
mod profiles;
mod sequence;
mod strip;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Framework, MemberKind, StressField, Tensegrity, ToleranceContext, VelocityField};

pub use dyadic::{solve_symmetric_stress, DyadicStress};
pub use families::{dyadic_squares, lacunary, strip as strip_framework, strip_columns, triangle_tiling, SQUARE_CORNERS};
pub use profiles::{
    bps_probe, decay_ratio, fit_ratio, infinite_energy_report, partial_energy_exact, summability_report,
    truncation_residual_profile, uniform_structure_check, weak_pairing_profile, BpsReport, BpsVerdict, CrossTerm,
    DecayCheck, EnergyReport, EnergyVerdict, PairingSeries, ResidualProfile, SummabilityReport, TruncationReport,
    UniformReport, WeakPairingProfile, DECAY_THRESHOLD,
};
pub use sequence::{sequence_norm, SequenceSpace};
pub use strip::{strip_monotonicity, MonotonicityReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    TriangleTiling,
    Strip,
    DyadicSquares,
    Lacunary,
    SquareInSquare,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::TriangleTiling,
        Family::Strip,
        Family::DyadicSquares,
        Family::Lacunary,
        Family::SquareInSquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::TriangleTiling => "triangle",
            Family::Strip => "strip",
            Family::DyadicSquares => "dyadic",
            Family::Lacunary => "lacunary",
            Family::SquareInSquare => "square-in-square",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "triangle" | "triangle-tiling" => Ok(Family::TriangleTiling),
            "strip" => Ok(Family::Strip),
            "dyadic" | "dyadic-squares" => Ok(Family::DyadicSquares),
            "lacunary" => Ok(Family::Lacunary),
            "square-in-square" | "squares" => Ok(Family::SquareInSquare),
            _ => Err(Error::InvalidArgument(format!("unknown family '{s}'"))),
        }
    }
}

/// Declared decay of a test velocity field along the truncation shells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayClass {
    /// Finitely supported.
    Compact,
    /// Tends to zero.
    C0,
    /// Bounded only.
    Bounded,
}

/// A test velocity field given by a formula in the joint position.
#[derive(Clone)]
pub struct DictionaryField {
    pub name: String,
    pub class: DecayClass,
    field: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl fmt::Debug for DictionaryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DictionaryField")
            .field("name", &self.name)
            .field("class", &self.class)
            .finish()
    }
}

impl DictionaryField {
    pub fn new(
        name: impl Into<String>,
        class: DecayClass,
        field: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            class,
            field: Arc::new(field),
        }
    }

    pub fn evaluate(&self, f: &Framework) -> VelocityField {
        let d = f.dimension();
        let mut values = Vec::with_capacity(d * f.vertex_count());
        for v in 0..f.vertex_count() {
            let u = (self.field)(&f.point(v));
            values.extend((0..d).map(|k| u.get(k).copied().unwrap_or(0.0)));
        }
        VelocityField::new(d, values)
    }
}

/// A named velocity field on one truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedFlex {
    pub name: String,
    pub field: VelocityField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    pub level: usize,
    pub framework: Framework,
    /// Members carry cable/strut kinds.
    pub tensegrity: bool,
}

impl Truncation {
    pub fn as_tensegrity(&self) -> Option<Tensegrity> {
        if self.tensegrity {
            Tensegrity::new(self.framework.clone()).ok()
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Strip only: keep columns `k ≥ 0`.
    #[serde(default)]
    pub one_sided: bool,
}

impl GeneratorSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            one_sided: false,
        }
    }

    pub fn one_sided(mut self, yes: bool) -> Self {
        self.one_sided = yes;
        self
    }

    pub fn truncation(&self, level: usize) -> Result<Truncation> {
        generate(self, level)
    }

    /// Upper bound on vertex degrees at every level.
    pub fn degree_bound(&self) -> usize {
        match self.family {
            Family::TriangleTiling => 6,
            Family::Strip => 7,
            Family::DyadicSquares | Family::SquareInSquare => 4,
            Family::Lacunary => 2,
        }
    }

    /// Upper bound on member lengths; `None` when lengths are unbounded.
    pub fn length_bound(&self) -> Option<f64> {
        match self.family {
            Family::TriangleTiling => Some(1.0),
            Family::Strip => Some(2f64.sqrt()),
            Family::DyadicSquares | Family::SquareInSquare => Some(2.0),
            Family::Lacunary => None,
        }
    }

    /// Members that must carry nonzero stress for properness. Strip rising
    /// diagonals are excluded.
    pub fn proper_mask(&self, level: usize) -> Result<Vec<bool>> {
        let t = generate(self, level)?;
        Ok(t.framework
            .members()
            .iter()
            .map(|m| match self.family {
                Family::Strip => !is_rising_diagonal(&t.framework, m),
                _ => true,
            })
            .collect())
    }

    /// Candidate stress restricted to the level-`n` members.
    pub fn candidate_stress(&self, level: usize, tol: &ToleranceContext) -> Result<StressField> {
        let t = generate(self, level)?;
        let f = &t.framework;
        let values = match self.family {
            Family::TriangleTiling => vec![-1.0; f.member_count()],
            Family::Strip | Family::Lacunary | Family::SquareInSquare => {
                return Ok(self.candidate_stress_exact(level)?.expect("rational family").to_f64())
            }
            Family::DyadicSquares => {
                let solved = dyadic::solve_level_uniform((level + 1).max(3), tol)?;
                f.members()
                    .iter()
                    .map(|m| match dyadic::classify(m) {
                        dyadic::DyadicMember::Square(0) => -1.0,
                        dyadic::DyadicMember::Square(k) | dyadic::DyadicMember::Connector(k) => {
                            solved.connector_values[k]
                        }
                    })
                    .collect()
            }
        };
        Ok(StressField::new(values))
    }

    /// Rational candidate stress where the family has a closed form.
    pub fn candidate_stress_exact(&self, level: usize) -> Result<Option<StressField<BigRational>>> {
        let t = generate(self, level)?;
        let f = &t.framework;
        let int = |x: i64| BigRational::from_integer(BigInt::from(x));
        let values = match self.family {
            Family::Lacunary => f
                .members()
                .iter()
                .map(|m| {
                    let x = |v: usize| f.vertices()[v][0].exact().cloned().expect("integer joint");
                    BigRational::one() / (x(m.i) - x(m.j)).abs()
                })
                .collect(),
            Family::Strip => f
                .members()
                .iter()
                .map(|m| {
                    if is_rising_diagonal(f, m) {
                        int(0)
                    } else {
                        match m.kind {
                            MemberKind::Strut => int(1),
                            _ => int(-1),
                        }
                    }
                })
                .collect(),
            Family::SquareInSquare => f
                .members()
                .iter()
                .map(|m| match dyadic::classify(m) {
                    dyadic::DyadicMember::Square(0) => int(-1),
                    dyadic::DyadicMember::Square(_) => int(2),
                    dyadic::DyadicMember::Connector(_) => int(4),
                })
                .collect(),
            Family::TriangleTiling | Family::DyadicSquares => return Ok(None),
        };
        Ok(Some(StressField::new(values)))
    }

    /// Known flexes of the level-`n` truncation.
    pub fn candidate_flexes(&self, level: usize) -> Result<Vec<NamedFlex>> {
        let t = generate(self, level)?;
        let f = &t.framework;
        let d = f.dimension();
        let n = f.vertex_count();
        let field = |g: &dyn Fn(usize, &[f64]) -> [f64; 2]| {
            let mut values = Vec::with_capacity(d * n);
            for v in 0..n {
                values.extend(g(v, &f.point(v)));
            }
            VelocityField::new(d, values)
        };
        let named = |name: String, field: VelocityField| NamedFlex { name, field };
        Ok(match self.family {
            Family::TriangleTiling => vec![named("contraction".into(), field(&|_, p| [-p[0] / 2.0, -p[1] / 2.0]))],
            Family::Strip => {
                let last = level as f64;
                [1.0, (last / 2.0).ceil()]
                    .iter()
                    .map(|&k0| {
                        named(
                            format!("leftward_tail_{k0}"),
                            field(&|_, p| if p[1] == 2.0 && p[0] >= k0 { [-1.0, 0.0] } else { [0.0, 0.0] }),
                        )
                    })
                    .collect()
            }
            Family::Lacunary => {
                let outer = (2 * level + 1, 2 * level + 2);
                vec![
                    named("vertical_origin".into(), field(&|v, _| if v == 0 { [0.0, 1.0] } else { [0.0, 0.0] })),
                    named(
                        "vertical_ends".into(),
                        field(&|v, _| if v == outer.0 || v == outer.1 { [0.0, 1.0] } else { [0.0, 0.0] }),
                    ),
                ]
            }
            Family::DyadicSquares | Family::SquareInSquare => {
                let squares = if self.family == Family::SquareInSquare { 1 } else { level };
                let mut out = vec![named("z".into(), field(&|v, _| if v % 4 < 2 { [1.0, 0.0] } else { [0.0, 0.0] }))];
                const SPIN: [[f64; 2]; 4] = [[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]];
                for k in 1..=squares {
                    out.push(named(
                        format!("w{k}"),
                        field(&|v, _| if v / 4 == k { SPIN[v % 4] } else { [0.0, 0.0] }),
                    ));
                }
                out
            }
        })
    }

    /// Pairs of [`Self::candidate_flexes`] indices declared orthogonal for
    /// the energy form.
    pub fn orthogonal_pairs(&self, flexes: &[NamedFlex]) -> Vec<(usize, usize)> {
        match self.family {
            Family::DyadicSquares | Family::SquareInSquare => {
                let index = |s: &str| s.strip_prefix('w').and_then(|k| k.parse::<usize>().ok());
                let mut out = Vec::new();
                for (a, fa) in flexes.iter().enumerate() {
                    for (b, fb) in flexes.iter().enumerate().skip(a + 1) {
                        if let (Some(j), Some(k)) = (index(&fa.name), index(&fb.name)) {
                            if j.abs_diff(k) >= 2 {
                                out.push((a, b));
                            }
                        }
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Upper bound on `Σ|ω_e|` over members outside level `n`.
    pub fn tail_bound(&self, level: usize, tol: &ToleranceContext) -> Result<Option<f64>> {
        if level == 0 {
            return Err(Error::Unsupported("level 0".into()));
        }
        Ok(match self.family {
            Family::Lacunary => Some(2f64.powi(2 - level as i32)),
            Family::SquareInSquare => Some(0.0),
            Family::DyadicSquares => {
                let solved = dyadic::solve_level_uniform((level + 1).max(3), tol)?;
                let rho = solved.fitted_ratio;
                if !(rho < 1.0) {
                    None
                } else {
                    Some(16.0 * rho.powi(level as i32) * (1.0 + rho) / (1.0 - rho))
                }
            }
            Family::TriangleTiling | Family::Strip => None,
        })
    }

    /// Upper bound on `Σ|ω_e| |p_i − p_j|²` beyond level `n`.
    pub fn energy_tail_bound(&self, level: usize, tol: &ToleranceContext) -> Result<Option<f64>> {
        let tail = self.tail_bound(level, tol)?;
        Ok(match (tail, self.length_bound()) {
            (Some(t), Some(l)) => Some(l * l * t),
            _ => None,
        })
    }

    /// Test fields used by the weak pairing profile.
    pub fn default_dictionary(&self) -> Vec<DictionaryField> {
        match self.family {
            Family::Strip => vec![
                DictionaryField::new("bump_top_3", DecayClass::Compact, |p| {
                    if p[0] == 3.0 && p[1] == 2.0 {
                        vec![1.0, 0.0]
                    } else {
                        vec![0.0, 0.0]
                    }
                }),
                DictionaryField::new("inverse_top", DecayClass::C0, |p| {
                    if p[1] == 2.0 && p[0] >= 1.0 {
                        vec![1.0 / p[0], 0.0]
                    } else {
                        vec![0.0, 0.0]
                    }
                }),
            ],
            Family::DyadicSquares | Family::SquareInSquare => {
                vec![DictionaryField::new("radial", DecayClass::C0, |p| p.to_vec())]
            }
            Family::TriangleTiling => vec![DictionaryField::new("bump_origin", DecayClass::Compact, |p| {
                if p[0] == 0.0 && p[1] == 0.0 {
                    vec![1.0, 0.0]
                } else {
                    vec![0.0, 0.0]
                }
            })],
            Family::Lacunary => vec![DictionaryField::new("bump_one", DecayClass::Compact, |p| {
                if p[0] == 1.0 {
                    vec![0.0, 1.0]
                } else {
                    vec![0.0, 0.0]
                }
            })],
        }
    }
}

fn is_rising_diagonal(f: &Framework, m: &crate::model::Member) -> bool {
    if m.kind != MemberKind::Cable {
        return false;
    }
    let (a, b) = (f.point(m.i), f.point(m.j));
    let (lo, hi) = if a[1] < b[1] { (a, b) } else { (b, a) };
    lo[1] == 1.0 && hi[1] == 2.0 && hi[0] == lo[0] + 1.0
}

/// The level-`n` truncation. The square-in-square family is the level-1
/// nested-squares framework at every level.
pub fn generate(spec: &GeneratorSpec, level: usize) -> Result<Truncation> {
    if level == 0 {
        return Err(Error::Unsupported("truncation level must be at least 1".into()));
    }
    let (framework, tensegrity) = match spec.family {
        Family::TriangleTiling => (triangle_tiling(level), true),
        Family::Strip => (families::strip(level, spec.one_sided), true),
        Family::DyadicSquares => (dyadic_squares(level), false),
        Family::SquareInSquare => (dyadic_squares(1), false),
        Family::Lacunary => (lacunary(level), false),
    };
    Ok(Truncation {
        level,
        framework,
        tensegrity,
    })
}
