//! First-order rigidity of finite tensegrities, decided directly through the
//! cone `{u : R(G(p))u ≥ 0}` and certified through a bar-rigid closure plus a
//! proper equilibrium stress.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::cones;
use crate::error::{Error, Result};
use crate::linalg::dense;
use crate::model::{Member, StressField, Tensegrity, ToleranceContext, VelocityField};
use crate::rigidity::{self, RigidityMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    FirstOrderRigid,
    Flexible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    DirectCone,
    RothWhiteley,
}

/// Arithmetic used for the cone programs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arithmetic {
    /// Exact when the placement is rational and small, float otherwise.
    #[default]
    Auto,
    Float,
    Exact,
}

/// Largest `d·n` for which `Arithmetic::Auto` chooses exact pivoting.
pub const AUTO_EXACT_LIMIT: usize = 12;

impl Arithmetic {
    fn exact_for(self, t: &Tensegrity) -> bool {
        let f = t.framework();
        match self {
            Arithmetic::Float => false,
            Arithmetic::Exact => f.is_exact(),
            Arithmetic::Auto => f.is_exact() && f.dimension() * f.vertex_count() <= AUTO_EXACT_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityCertificate {
    pub verdict: Verdict,
    pub method: Method,
    pub bar_rigid: bool,
    pub proper_stress: Option<StressField>,
    pub witness_flex: Option<VelocityField>,
    pub members: Vec<Member>,
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    verdict: Verdict,
    method: Method,
    bar_rigid: bool,
    proper_stress: Option<BTreeMap<String, f64>>,
    witness_flex: Option<BTreeMap<String, &'a [f64]>>,
}

impl Serialize for RigidityCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let stress = self.proper_stress.as_ref().map(|w| {
            self.members
                .iter()
                .zip(&w.values)
                .map(|(m, &x)| (m.label(), x))
                .collect()
        });
        let witness = self.witness_flex.as_ref().map(|u| {
            (0..u.vertex_count())
                .map(|v| (format!("{}", v + 1), u.at(v)))
                .collect()
        });
        CertificateJson {
            verdict: self.verdict,
            method: self.method,
            bar_rigid: self.bar_rigid,
            proper_stress: stress,
            witness_flex: witness,
        }
        .serialize(s)
    }
}

/// Per-member constraint values of a velocity field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackReport {
    pub members: Vec<String>,
    /// `(p_i − p_j)·(u_i − u_j)`.
    pub raw: Vec<f64>,
    /// `sgn(e)(p_i − p_j)·(u_i − u_j)`, nonnegative on a flex.
    pub signed: Vec<f64>,
    pub is_flex: bool,
}

pub fn member_slack(t: &Tensegrity, u: &VelocityField, tol: &ToleranceContext) -> Result<SlackReport> {
    let f = t.framework();
    u.check_len(f)?;
    let (d, p) = (f.dimension(), f.placement());
    let raw: Vec<f64> = f
        .members()
        .iter()
        .map(|m| {
            (0..d)
                .map(|k| (p[m.i * d + k] - p[m.j * d + k]) * (u.values[m.i * d + k] - u.values[m.j * d + k]))
                .sum()
        })
        .collect();
    let signed: Vec<f64> = raw
        .iter()
        .zip(f.members())
        .map(|(&s, m)| s * m.kind.sign() as f64)
        .collect();
    Ok(SlackReport {
        members: f.members().iter().map(Member::label).collect(),
        is_flex: signed.iter().all(|&s| s >= -tol.cert_tol),
        raw,
        signed,
    })
}

fn cone_direction(t: &Tensegrity, exact: bool) -> Option<Vec<f64>> {
    if exact {
        let a = rigidity::tensegrity_rigidity_matrix_in::<BigRational>(t)?;
        cones::flexible_direction(&a.matrix).map(|u| u.iter().map(Scalar::to_f64).collect())
    } else {
        cones::flexible_direction(&rigidity::tensegrity_rigidity_matrix(t).matrix)
    }
}

fn witness(t: &Tensegrity, u: Vec<f64>, trivial: &rigidity::TrivialSpace) -> VelocityField {
    let v = trivial.nontrivial_part(&u);
    VelocityField::new(t.framework().dimension(), v)
}

pub fn first_order_rigidity_direct(t: &Tensegrity, tol: &ToleranceContext) -> RigidityCertificate {
    first_order_rigidity_direct_with(t, tol, Arithmetic::Auto)
}

/// Flexible iff the cone program finds a strict direction or the bar closure
/// has a nontrivial kernel flex.
pub fn first_order_rigidity_direct_with(t: &Tensegrity, tol: &ToleranceContext, arith: Arithmetic) -> RigidityCertificate {
    let closure = t.framework().bar_closure();
    let bars = rigidity::analyze_bars(&closure, tol);
    let members = t.members().to_vec();
    let flex = cone_direction(t, arith.exact_for(t)).or_else(|| bars.flexes.basis.first().cloned());
    let (verdict, witness_flex) = match flex {
        Some(u) => (Verdict::Flexible, Some(witness(t, u, &bars.trivial))),
        None => (Verdict::FirstOrderRigid, None),
    };
    RigidityCertificate {
        verdict,
        method: Method::DirectCone,
        bar_rigid: bars.is_rigid(),
        proper_stress: None,
        witness_flex,
        members,
    }
}

pub fn proper_equilibrium_stress(t: &Tensegrity, tol: &ToleranceContext) -> Option<StressField> {
    proper_equilibrium_stress_with(t, tol, Arithmetic::Auto)
}

/// `ω_e = sgn(e) μ_e` for a strictly positive `μ` with `μ R(G(p)) = 0`,
/// scaled so that `min |ω_e| = 1`.
pub fn proper_equilibrium_stress_with(t: &Tensegrity, _tol: &ToleranceContext, arith: Arithmetic) -> Option<StressField> {
    let mu: Vec<f64> = if arith.exact_for(t) {
        let a = rigidity::tensegrity_rigidity_matrix_in::<BigRational>(t)?;
        cones::strict_positive_left_kernel(&a.matrix)?
            .iter()
            .map(Scalar::to_f64)
            .collect()
    } else {
        cones::strict_positive_left_kernel(&rigidity::tensegrity_rigidity_matrix(t).matrix)?
    };
    Some(StressField::new(
        mu.iter()
            .zip(t.members())
            .map(|(&m, e)| m * e.kind.sign() as f64)
            .collect(),
    ))
}

/// Largest per-coordinate imbalance `|Σ_j ω_ij (p_i − p_j)|`.
pub fn equilibrium_residual(t: &Tensegrity, stress: &StressField) -> f64 {
    let f = t.framework();
    let r = RigidityMatrix::build(&f.placement(), f.dimension(), f.members(), false);
    dense::norm_inf(&r.left_apply(&stress.values))
}

pub fn roth_whiteley_certify(t: &Tensegrity, tol: &ToleranceContext) -> Result<RigidityCertificate> {
    roth_whiteley_certify_with(t, tol, Arithmetic::Auto)
}

/// First-order rigid iff the bar closure is first-order rigid and a proper
/// equilibrium stress exists; cross-checked against the direct method.
pub fn roth_whiteley_certify_with(t: &Tensegrity, tol: &ToleranceContext, arith: Arithmetic) -> Result<RigidityCertificate> {
    let closure = t.framework().bar_closure();
    let bars = rigidity::analyze_bars(&closure, tol);
    let stress = proper_equilibrium_stress_with(t, tol, arith);
    let bar_rigid = bars.is_rigid();
    let cert = if bar_rigid && stress.is_some() {
        RigidityCertificate {
            verdict: Verdict::FirstOrderRigid,
            method: Method::RothWhiteley,
            bar_rigid,
            proper_stress: stress,
            witness_flex: None,
            members: t.members().to_vec(),
        }
    } else {
        let u = bars
            .flexes
            .basis
            .first()
            .cloned()
            .or_else(|| cone_direction(t, arith.exact_for(t)));
        RigidityCertificate {
            verdict: Verdict::Flexible,
            method: Method::RothWhiteley,
            bar_rigid,
            proper_stress: stress,
            witness_flex: u.map(|u| witness(t, u, &bars.trivial)),
            members: t.members().to_vec(),
        }
    };
    let direct = first_order_rigidity_direct_with(t, tol, arith);
    if direct.verdict != cert.verdict {
        return Err(Error::Inconsistent(format!(
            "direct method says {:?}, certificate method says {:?}",
            direct.verdict, cert.verdict
        )));
    }
    if cert.verdict == Verdict::Flexible && cert.witness_flex.is_none() {
        return Err(Error::Inconsistent("no proper stress but no flexible direction".into()));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{expand_to_cable_strut, Framework};

    fn tol() -> ToleranceContext {
        ToleranceContext::default()
    }

    fn triangle_pts() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn single_cable_flexes() {
        let t = Tensegrity::new(Framework::from_f64(1, &[vec![0.0], vec![1.0]], vec![Member::cable(0, 1)]).unwrap()).unwrap();
        let c = first_order_rigidity_direct(&t, &tol());
        assert_eq!(c.verdict, Verdict::Flexible);
        let u = c.witness_flex.unwrap();
        // projected off translations: (1, 0) becomes (1/2, -1/2)
        assert!((u.values[0] - u.values[1] - 1.0).abs() < 1e-12 || u.values[0] - u.values[1] < 0.0);
        let s = member_slack(&t, &u, &tol()).unwrap();
        assert!(s.is_flex && s.signed[0] > 0.0);
    }

    #[test]
    fn expanded_triangle_is_rigid() {
        let f = Framework::from_f64(2, &triangle_pts(), vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(0, 2)]).unwrap();
        let t = expand_to_cable_strut(&f);
        assert_eq!(first_order_rigidity_direct(&t, &tol()).verdict, Verdict::FirstOrderRigid);
        let c = roth_whiteley_certify(&t, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::FirstOrderRigid);
        assert!(c.bar_rigid);
        let w = c.proper_stress.unwrap();
        assert!(w.is_sign_admissible(t.members(), 0.0));
        assert!(w.values.iter().all(|x| x.abs() >= 1.0 - 1e-12));
        assert!(equilibrium_residual(&t, &w) <= 1e-12);
    }

    #[test]
    fn pair_stress_is_plus_minus_one() {
        let f = Framework::from_f64(1, &[vec![0.0], vec![1.0]], vec![Member::cable(0, 1), Member::strut(0, 1)]).unwrap();
        let t = Tensegrity::new(f).unwrap();
        let w = proper_equilibrium_stress(&t, &tol()).unwrap();
        assert_eq!(w.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn all_cable_triangle_is_flexible() {
        let f = Framework::from_f64(2, &triangle_pts(), vec![Member::cable(0, 1), Member::cable(1, 2), Member::cable(0, 2)]).unwrap();
        let t = Tensegrity::new(f).unwrap();
        assert!(proper_equilibrium_stress(&t, &tol()).is_none());
        let c = roth_whiteley_certify(&t, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::Flexible);
        assert!(c.bar_rigid);
        let s = member_slack(&t, c.witness_flex.as_ref().unwrap(), &tol()).unwrap();
        assert!(s.is_flex);
        assert!(s.signed.iter().any(|&x| x > 1e-7));
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["verdict"], "Flexible");
        assert!(json["witness_flex"]["3"].is_array());
    }

    #[test]
    fn translation_has_zero_slack() {
        let f = Framework::from_f64(2, &triangle_pts(), vec![Member::cable(0, 1), Member::strut(1, 2)]).unwrap();
        let t = Tensegrity::new(f).unwrap();
        let u = VelocityField::new(2, vec![0.3, -2.0, 0.3, -2.0, 0.3, -2.0]);
        let s = member_slack(&t, &u, &tol()).unwrap();
        assert!(s.raw.iter().all(|&x| x == 0.0) && s.is_flex);
    }
}
