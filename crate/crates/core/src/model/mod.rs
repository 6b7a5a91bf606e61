//! Frameworks, tensegrities, velocity and stress fields, and the tolerance
//! policy shared by every analysis.

mod coordinate;
mod io;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use coordinate::Coordinate;
pub use io::{parse_framework, to_canonical_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Bar,
    Cable,
    Strut,
}

impl MemberKind {
    /// Row sign in the tensegrity rigidity matrix: −1 for cables, +1 otherwise.
    pub fn sign(self) -> i64 {
        match self {
            MemberKind::Cable => -1,
            MemberKind::Bar | MemberKind::Strut => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MemberKind::Bar => "bar",
            MemberKind::Cable => "cable",
            MemberKind::Strut => "strut",
        }
    }
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A member between vertices `i < j` (0-based internally; files and
/// diagnostics use 1-based ids).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Member {
    pub i: usize,
    pub j: usize,
    pub kind: MemberKind,
}

impl Member {
    pub fn new(a: usize, b: usize, kind: MemberKind) -> Self {
        Self {
            i: a.min(b),
            j: a.max(b),
            kind,
        }
    }

    pub fn bar(a: usize, b: usize) -> Self {
        Self::new(a, b, MemberKind::Bar)
    }

    pub fn cable(a: usize, b: usize) -> Self {
        Self::new(a, b, MemberKind::Cable)
    }

    pub fn strut(a: usize, b: usize) -> Self {
        Self::new(a, b, MemberKind::Strut)
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// `"i-j:kind"` with 1-based ids; used as a JSON key.
    pub fn label(&self) -> String {
        format!("{}-{}:{}", self.i + 1, self.j + 1, self.kind)
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Member {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    SelfLoop { member: String },
    MissingVertex { member: String, vertex: usize },
    DuplicateMember { member: String },
    ZeroLength { member: String, length: f64 },
    WrongArity { vertex: usize, expected: usize, got: usize },
    NonFinite { vertex: usize },
    /// Warning only: two vertices share a position and no member uses either.
    CoincidentUnused { first: usize, second: usize },
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        !matches!(self, Diagnostic::CoincidentUnused { .. })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::SelfLoop { member } => write!(f, "member {member} joins a vertex to itself"),
            Diagnostic::MissingVertex { member, vertex } => {
                write!(f, "member {member} references missing vertex {vertex}")
            }
            Diagnostic::DuplicateMember { member } => write!(f, "member {member} is repeated"),
            Diagnostic::ZeroLength { member, length } => {
                write!(f, "member {member} has length {length:e}")
            }
            Diagnostic::WrongArity {
                vertex,
                expected,
                got,
            } => write!(f, "vertex {vertex} has {got} coordinates, expected {expected}"),
            Diagnostic::NonFinite { vertex } => write!(f, "vertex {vertex} has a non-finite coordinate"),
            Diagnostic::CoincidentUnused { first, second } => {
                write!(f, "warning: unused vertices {first} and {second} coincide")
            }
        }
    }
}

/// Thresholds used by rank decisions, certificate re-verification and finite
/// differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceContext {
    /// Relative singular-value threshold.
    pub rank_tol: f64,
    /// Residual threshold for re-verifying certificates.
    pub cert_tol: f64,
    /// Finite-difference step.
    pub fd_step: f64,
}

impl Default for ToleranceContext {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            cert_tol: 1e-8,
            fd_step: 1e-4,
        }
    }
}

impl ToleranceContext {
    pub fn new(rank_tol: f64, cert_tol: f64, fd_step: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(rank_tol) && ok(cert_tol) && ok(fd_step)) {
            return Err(Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if rank_tol >= 1e-6 {
            return Err(Error::InvalidArgument("rank_tol must be below 1e-6".into()));
        }
        Ok(Self {
            rank_tol,
            cert_tol,
            fd_step,
        })
    }
}

/// A placement of vertices in `R^d` with typed members.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    dimension: usize,
    vertices: Vec<Vec<Coordinate>>,
    members: Vec<Member>,
}

impl Framework {
    /// Builds and validates a framework. Warnings are dropped; any error
    /// diagnostic fails construction.
    pub fn new(dimension: usize, vertices: Vec<Vec<Coordinate>>, members: Vec<Member>) -> Result<Self> {
        let f = Self::from_parts(dimension, vertices, members);
        let errors: Vec<_> = validate(&f, &ToleranceContext::default())
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect();
        if errors.is_empty() {
            Ok(f)
        } else {
            Err(Error::Invalid(errors))
        }
    }

    /// Unvalidated constructor; members are put in canonical order.
    pub fn from_parts(dimension: usize, vertices: Vec<Vec<Coordinate>>, mut members: Vec<Member>) -> Self {
        members.sort();
        Self {
            dimension,
            vertices,
            members,
        }
    }

    /// Convenience constructor from float points. Exact values are the
    /// binary values of the floats.
    pub fn from_f64(dimension: usize, points: &[Vec<f64>], members: Vec<Member>) -> Result<Self> {
        let vertices = points
            .iter()
            .map(|p| p.iter().map(|&x| Coordinate::from_f64(x)).collect())
            .collect();
        Self::new(dimension, vertices, members)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn vertices(&self) -> &[Vec<Coordinate>] {
        &self.vertices
    }

    pub fn point(&self, v: usize) -> Vec<f64> {
        self.vertices[v].iter().map(Coordinate::value).collect()
    }

    /// Flat float placement `(p_1, …, p_n)`, length `d·n`.
    pub fn placement(&self) -> Vec<f64> {
        self.placement_as::<f64>().expect("float placement always exists")
    }

    /// Flat placement in scalar type `T`, or `None` if some coordinate has
    /// no representation there.
    pub fn placement_as<T: Scalar>(&self) -> Option<Vec<T>> {
        self.vertices
            .iter()
            .flat_map(|p| p.iter())
            .map(T::from_coordinate)
            .collect()
    }

    /// `true` when every coordinate carries an exact rational value.
    pub fn is_exact(&self) -> bool {
        self.vertices.iter().flatten().all(|c| c.exact().is_some())
    }

    pub fn member_index(&self, m: &Member) -> Option<usize> {
        self.members.binary_search(m).ok()
    }

    pub fn length(&self, m: &Member) -> f64 {
        let a = self.point(m.i);
        let b = self.point(m.j);
        a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Same placement, different members.
    pub fn with_members(&self, members: Vec<Member>) -> Self {
        Self::from_parts(self.dimension, self.vertices.clone(), members)
    }

    /// The associated bar-joint framework: one bar per distinct vertex pair.
    pub fn bar_closure(&self) -> Self {
        let mut pairs: Vec<_> = self.members.iter().map(Member::pair).collect();
        pairs.dedup();
        pairs.sort();
        pairs.dedup();
        self.with_members(pairs.into_iter().map(|(i, j)| Member::bar(i, j)).collect())
    }

    pub fn count_kind(&self, kind: MemberKind) -> usize {
        self.members.iter().filter(|m| m.kind == kind).count()
    }

    pub fn has_only_bars(&self) -> bool {
        self.members.iter().all(|m| m.kind == MemberKind::Bar)
    }

    /// Maximum number of distinct neighbours of any vertex.
    pub fn max_degree(&self) -> usize {
        let mut neighbours = vec![HashSet::new(); self.vertex_count()];
        for m in &self.members {
            neighbours[m.i].insert(m.j);
            neighbours[m.j].insert(m.i);
        }
        neighbours.iter().map(HashSet::len).max().unwrap_or(0)
    }

    pub fn max_length(&self) -> f64 {
        self.members.iter().map(|m| self.length(m)).fold(0.0, f64::max)
    }
}

/// Checks every framework invariant. Empty iff the framework is valid;
/// warnings (coincident unused vertices) may appear alongside a valid result.
pub fn validate(f: &Framework, tol: &ToleranceContext) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = f.vertex_count();
    let d = f.dimension();
    let mut shape_ok = vec![true; n];
    for (v, p) in f.vertices.iter().enumerate() {
        if p.len() != d {
            out.push(Diagnostic::WrongArity {
                vertex: v + 1,
                expected: d,
                got: p.len(),
            });
            shape_ok[v] = false;
        } else if p.iter().any(|c| !c.value().is_finite()) {
            out.push(Diagnostic::NonFinite { vertex: v + 1 });
            shape_ok[v] = false;
        }
    }
    let mut seen = HashSet::new();
    let mut used = vec![false; n];
    for m in &f.members {
        let label = m.label();
        if m.i == m.j {
            out.push(Diagnostic::SelfLoop { member: label });
            continue;
        }
        let mut missing = false;
        for v in [m.i, m.j] {
            if v >= n {
                out.push(Diagnostic::MissingVertex {
                    member: label.clone(),
                    vertex: v + 1,
                });
                missing = true;
            } else {
                used[v] = true;
            }
        }
        if !seen.insert(*m) {
            out.push(Diagnostic::DuplicateMember { member: label.clone() });
        }
        if !missing && shape_ok[m.i] && shape_ok[m.j] {
            let length = f.length(m);
            if length <= tol.cert_tol {
                out.push(Diagnostic::ZeroLength { member: label, length });
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if used[a] || used[b] || !shape_ok[a] || !shape_ok[b] {
                continue;
            }
            if f.vertices[a] == f.vertices[b] || f.point(a) == f.point(b) {
                out.push(Diagnostic::CoincidentUnused {
                    first: a + 1,
                    second: b + 1,
                });
            }
        }
    }
    out
}

/// A framework whose members are cables and struts only; a vertex pair may
/// carry one cable and one strut.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensegrity {
    base: Framework,
}

impl Tensegrity {
    pub fn new(base: Framework) -> Result<Self> {
        if let Some(m) = base.members().iter().find(|m| m.kind == MemberKind::Bar) {
            return Err(Error::Field {
                field: "members".into(),
                message: format!("tensegrity member {m} is a bar; expand it to a cable-strut pair"),
            });
        }
        Ok(Self { base })
    }

    pub fn framework(&self) -> &Framework {
        &self.base
    }

    pub fn into_framework(self) -> Framework {
        self.base
    }

    pub fn members(&self) -> &[Member] {
        self.base.members()
    }

    /// `|E_c| + |E_s|`.
    pub fn member_count(&self) -> usize {
        self.base.member_count()
    }
}

/// Replaces every bar by a cable plus a strut on the same pair.
pub fn expand_to_cable_strut(f: &Framework) -> Tensegrity {
    let mut members = Vec::with_capacity(f.member_count() + f.count_kind(MemberKind::Bar));
    for m in f.members() {
        match m.kind {
            MemberKind::Bar => {
                members.push(Member::cable(m.i, m.j));
                members.push(Member::strut(m.i, m.j));
            }
            _ => members.push(*m),
        }
    }
    // A bar next to an existing cable on the same pair would duplicate it.
    members.sort();
    members.dedup();
    Tensegrity {
        base: f.with_members(members),
    }
}

/// One velocity vector per vertex, stored flat.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityField<T = f64> {
    pub dimension: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> VelocityField<T> {
    pub fn new(dimension: usize, values: Vec<T>) -> Self {
        assert!(dimension > 0 && values.len() % dimension == 0);
        Self { dimension, values }
    }

    pub fn zeros(dimension: usize, vertices: usize) -> Self {
        Self::new(dimension, vec![T::zero(); dimension * vertices])
    }

    pub fn from_vectors(dimension: usize, vectors: &[Vec<T>]) -> Self {
        Self::new(dimension, vectors.iter().flatten().cloned().collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.values.len() / self.dimension
    }

    pub fn at(&self, v: usize) -> &[T] {
        &self.values[v * self.dimension..(v + 1) * self.dimension]
    }

    pub fn set(&mut self, v: usize, value: &[T]) {
        let d = self.dimension;
        self.values[v * d..(v + 1) * d].clone_from_slice(value);
    }

    pub fn check_len(&self, f: &Framework) -> Result<()> {
        if self.dimension != f.dimension() || self.vertex_count() != f.vertex_count() {
            return Err(Error::Dimension {
                expected: f.vertex_count() * f.dimension(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// One scalar per member, aligned with the framework's member order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressField<T = f64> {
    pub values: Vec<T>,
}

impl<T: Scalar> StressField<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![T::zero(); m])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cables carry ω ≤ 0 and struts ω ≥ 0 (bars are unconstrained).
    pub fn is_sign_admissible(&self, members: &[Member], tol: f64) -> bool {
        members.iter().zip(&self.values).all(|(m, w)| match m.kind {
            MemberKind::Cable => w.to_f64() <= tol,
            MemberKind::Strut => w.to_f64() >= -tol,
            MemberKind::Bar => true,
        })
    }

    pub fn check_len(&self, f: &Framework) -> Result<()> {
        if self.values.len() != f.member_count() {
            return Err(Error::Dimension {
                expected: f.member_count(),
                got: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn to_f64(&self) -> StressField<f64> {
        StressField::new(self.values.iter().map(Scalar::to_f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Framework {
        Framework::from_f64(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(0, 2)],
        )
        .unwrap()
    }

    #[test]
    fn valid_triangle_has_no_diagnostics() {
        assert!(validate(&triangle(), &ToleranceContext::default()).is_empty());
    }

    #[test]
    fn coincident_endpoints_are_reported() {
        let f = Framework::from_parts(
            2,
            vec![
                vec![Coordinate::from(1), Coordinate::from(1)],
                vec![Coordinate::from(1), Coordinate::from(1)],
            ],
            vec![Member::bar(0, 1)],
        );
        let d = validate(&f, &ToleranceContext::default());
        assert!(matches!(d.as_slice(), [Diagnostic::ZeroLength { .. }]));
    }

    #[test]
    fn missing_vertex_is_reported() {
        let mut f = triangle();
        f.members.push(Member::bar(0, 5));
        let d = validate(&f, &ToleranceContext::default());
        assert!(d
            .iter()
            .any(|x| matches!(x, Diagnostic::MissingVertex { vertex: 6, .. })));
    }

    #[test]
    fn unused_coincident_vertices_only_warn() {
        let f = Framework::from_f64(
            1,
            &[vec![0.0], vec![1.0], vec![5.0], vec![5.0]],
            vec![Member::bar(0, 1)],
        )
        .unwrap();
        let d = validate(&f, &ToleranceContext::default());
        assert_eq!(d.len(), 1);
        assert!(!d[0].is_error());
    }

    #[test]
    fn expansion_counts_and_idempotence() {
        let t = expand_to_cable_strut(&Framework::from_f64(1, &[vec![0.0], vec![1.0]], vec![Member::bar(0, 1)]).unwrap());
        assert_eq!(t.members(), &[Member::cable(0, 1), Member::strut(0, 1)]);

        let cables = triangle().with_members(vec![Member::cable(0, 1), Member::cable(1, 2), Member::cable(0, 2)]);
        let once = expand_to_cable_strut(&cables);
        assert_eq!(once.member_count(), 3);
        let twice = expand_to_cable_strut(once.framework());
        assert_eq!(once, twice);
    }

    #[test]
    fn tolerance_context_rejects_bad_values() {
        assert!(ToleranceContext::new(1e-9, 1e-8, 1e-4).is_ok());
        assert!(ToleranceContext::new(1e-3, 1e-8, 1e-4).is_err());
        assert!(ToleranceContext::new(1e-9, 0.0, 1e-4).is_err());
    }

    #[test]
    fn tensegrity_rejects_bars() {
        assert!(Tensegrity::new(triangle()).is_err());
    }
}
