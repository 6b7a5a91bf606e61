//! Rigidity matrices, rigid-motion flex spaces and first-order rigidity of
//! bar-joint frameworks.

use serde::Serialize;

use crate::linalg::dense::{self, Svd};
use crate::linalg::{elimination, Matrix};
use crate::model::{Framework, Member, Tensegrity, ToleranceContext};
use crate::scalar::Scalar;

/// One row per member; the row for `e = ij` holds `sgn(e)(p_i − p_j)` on the
/// block of vertex `i` and `sgn(e)(p_j − p_i)` on the block of vertex `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidityMatrix<T = f64> {
    pub matrix: Matrix<T>,
    /// Member generating each row.
    pub rows: Vec<Member>,
    pub dimension: usize,
}

impl<T: Scalar> RigidityMatrix<T> {
    /// Builds the matrix for `members` at the flat placement `points`.
    /// With `signed`, cable rows are negated; otherwise every sign is +1.
    pub fn build(points: &[T], dimension: usize, members: &[Member], signed: bool) -> Self {
        let n = points.len() / dimension;
        let mut matrix = Matrix::zeros(members.len(), dimension * n);
        for (row, m) in members.iter().enumerate() {
            let s = if signed { T::from_i64(m.kind.sign()) } else { T::one() };
            for k in 0..dimension {
                let diff = points[m.i * dimension + k].clone() - points[m.j * dimension + k].clone();
                matrix[(row, m.i * dimension + k)] = s.clone() * diff.clone();
                matrix[(row, m.j * dimension + k)] = -(s.clone() * diff);
            }
        }
        Self {
            matrix,
            rows: members.to_vec(),
            dimension,
        }
    }

    /// `R u`, one entry per member.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        self.matrix.mul_vec(u)
    }

    /// `ω R`, one entry per coordinate.
    pub fn left_apply(&self, stress: &[T]) -> Vec<T> {
        self.matrix.left_mul(stress)
    }

    pub fn rows_len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols_len(&self) -> usize {
        self.matrix.cols()
    }
}

impl RigidityMatrix<f64> {
    pub fn rank(&self, tol: &ToleranceContext) -> usize {
        dense::numerical_rank(&self.matrix, tol.rank_tol)
    }

    /// CSV with a header of coordinate labels and one row per member.
    pub fn to_csv(&self) -> String {
        let d = self.dimension;
        let axes = ["x", "y", "z", "w"];
        let mut header = vec!["member".to_string()];
        for c in 0..self.cols_len() {
            let axis = axes.get(c % d).map_or_else(|| format!("c{}", c % d), |a| a.to_string());
            header.push(format!("v{}{}", c / d + 1, axis));
        }
        let mut out = header.join(",");
        out.push('\n');
        for (r, m) in self.rows.iter().enumerate() {
            out.push_str(&m.label());
            for x in self.matrix.row(r) {
                out.push(',');
                out.push_str(&format!("{}", x + 0.0));
            }
            out.push('\n');
        }
        out
    }
}

/// `R(G,p)`: all signs positive regardless of member kind.
pub fn bar_rigidity_matrix(f: &Framework) -> RigidityMatrix<f64> {
    RigidityMatrix::build(&f.placement(), f.dimension(), f.members(), false)
}

/// `R(G,p)` in scalar type `T`; `None` if the placement is not representable.
pub fn bar_rigidity_matrix_in<T: Scalar>(f: &Framework) -> Option<RigidityMatrix<T>> {
    Some(RigidityMatrix::build(&f.placement_as::<T>()?, f.dimension(), f.members(), false))
}

/// `R(G(p))`: rows of cables carry sign −1.
pub fn tensegrity_rigidity_matrix(t: &Tensegrity) -> RigidityMatrix<f64> {
    let f = t.framework();
    RigidityMatrix::build(&f.placement(), f.dimension(), f.members(), true)
}

pub fn tensegrity_rigidity_matrix_in<T: Scalar>(t: &Tensegrity) -> Option<RigidityMatrix<T>> {
    let f = t.framework();
    Some(RigidityMatrix::build(&f.placement_as::<T>()?, f.dimension(), f.members(), true))
}

/// Exact rank of `R(G,p)` by rational elimination, when the placement is rational.
pub fn exact_rank(f: &Framework) -> Option<usize> {
    let r = bar_rigidity_matrix_in::<num_rational::BigRational>(f)?;
    Some(elimination::rank(&r.matrix, 0.0))
}

/// Orthonormal basis of the rigid-motion velocity fields `u_i = c + S p_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrivialSpace {
    pub dimension: usize,
    /// Flat velocity fields, each of length `d·n`.
    pub basis: Vec<Vec<f64>>,
}

impl TrivialSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Component of `u` orthogonal to every rigid motion.
    pub fn nontrivial_part(&self, u: &[f64]) -> Vec<f64> {
        let mut v = u.to_vec();
        dense::project_out(&mut v, &self.basis);
        v
    }
}

/// Rigid-motion space of a flat placement in `R^d`.
pub fn trivial_flex_space(placement: &[f64], dimension: usize) -> TrivialSpace {
    let n = placement.len() / dimension;
    let mut generators = Vec::new();
    for a in 0..dimension {
        let mut t = vec![0.0; dimension * n];
        for v in 0..n {
            t[v * dimension + a] = 1.0;
        }
        generators.push(t);
    }
    for a in 0..dimension {
        for b in a + 1..dimension {
            // infinitesimal rotation in the (a, b) plane
            let mut r = vec![0.0; dimension * n];
            for v in 0..n {
                r[v * dimension + a] = placement[v * dimension + b];
                r[v * dimension + b] = -placement[v * dimension + a];
            }
            generators.push(r);
        }
    }
    TrivialSpace {
        dimension,
        basis: dense::gram_schmidt(&generators, &[], 1e-9, usize::MAX),
    }
}

/// Orthonormal basis of `ker R(G,p) ∩ (rigid motions)^⊥`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlexBasis {
    pub dimension: usize,
    pub basis: Vec<Vec<f64>>,
}

impl FlexBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Rank data behind a first-order rigidity decision.
#[derive(Clone, Debug, Serialize)]
pub struct BarAnalysis {
    pub rank: usize,
    pub trivial_dim: usize,
    pub nullity: usize,
    pub flexes: FlexBasis,
    #[serde(skip)]
    pub trivial: TrivialSpace,
}

impl BarAnalysis {
    pub fn is_rigid(&self) -> bool {
        self.flexes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BarVerdict {
    Rigid,
    Flexible(FlexBasis),
}

pub fn analyze_bars(f: &Framework, tol: &ToleranceContext) -> BarAnalysis {
    let d = f.dimension();
    let placement = f.placement();
    let r = RigidityMatrix::build(&placement, d, f.members(), false);
    let svd = Svd::new(&r.matrix);
    let rank = svd.rank(tol.rank_tol);
    let cols = d * f.vertex_count();
    let trivial = trivial_flex_space(&placement, d);
    let nullity = cols - rank;
    let target = nullity.saturating_sub(trivial.dim());
    let mut basis = dense::gram_schmidt(&svd.null_space(tol.rank_tol), &trivial.basis, 1e-6, target);
    basis.iter_mut().for_each(|v| dense::canonical_sign(v));
    BarAnalysis {
        rank,
        trivial_dim: trivial.dim(),
        nullity,
        flexes: FlexBasis { dimension: d, basis },
        trivial,
    }
}

/// Rigid iff `rank R(G,p) = d·n − dim(rigid motions)`.
pub fn bar_first_order_rigidity(f: &Framework, tol: &ToleranceContext) -> BarVerdict {
    let a = analyze_bars(f, tol);
    if a.is_rigid() {
        BarVerdict::Rigid
    } else {
        BarVerdict::Flexible(a.flexes)
    }
}

pub fn flex_space(f: &Framework, tol: &ToleranceContext) -> FlexBasis {
    analyze_bars(f, tol).flexes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{expand_to_cable_strut, Member, MemberKind};

    fn fw(d: usize, pts: &[Vec<f64>], members: Vec<Member>) -> Framework {
        Framework::from_f64(d, pts, members).unwrap()
    }

    fn triangle() -> Framework {
        fw(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(0, 2)],
        )
    }

    fn square() -> Framework {
        fw(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(2, 3), Member::bar(0, 3)],
        )
    }

    #[test]
    fn bar_rows_follow_the_row_formula() {
        let f = fw(1, &[vec![0.0], vec![1.0]], vec![Member::bar(0, 1)]);
        assert_eq!(bar_rigidity_matrix(&f).matrix.row(0), &[-1.0, 1.0]);
        let r = bar_rigidity_matrix(&triangle());
        assert_eq!(r.rows[0], Member::bar(0, 1));
        assert_eq!(r.matrix.row(0), &[-1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        for i in 0..r.rows_len() {
            assert!(r.matrix.row_nnz(i) <= 4);
        }
    }

    #[test]
    fn cable_rows_are_negated() {
        let f = fw(1, &[vec![0.0], vec![1.0]], vec![Member::cable(0, 1)]);
        let t = Tensegrity::new(f.clone()).unwrap();
        assert_eq!(tensegrity_rigidity_matrix(&t).matrix.row(0), &[1.0, -1.0]);
        let pair = expand_to_cable_strut(&f.with_members(vec![Member::bar(0, 1)]));
        let r = tensegrity_rigidity_matrix(&pair);
        assert_eq!(r.matrix.to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        // bar matrix ignores kinds
        assert_eq!(bar_rigidity_matrix(&f).matrix.row(0), &[-1.0, 1.0]);
    }

    #[test]
    fn trivial_space_dimensions() {
        let generic = trivial_flex_space(&[0.0, 0.0, 1.0, 0.3, 0.2, 1.0], 2);
        assert_eq!(generic.dim(), 3);
        assert_eq!(trivial_flex_space(&[0.0, 0.0], 2).dim(), 2);
        let line = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.5, 0.0, 0.0];
        assert_eq!(trivial_flex_space(&line, 3).dim(), 5);
    }

    #[test]
    fn trivial_fields_are_flexes() {
        let f = square().with_members(vec![
            Member::bar(0, 1),
            Member::bar(1, 2),
            Member::bar(0, 2),
            Member::new(1, 3, MemberKind::Cable),
        ]);
        let r = bar_rigidity_matrix(&f);
        for u in &trivial_flex_space(&f.placement(), 2).basis {
            assert!(dense::norm_inf(&r.apply(u)) < 1e-12);
        }
    }

    #[test]
    fn triangle_is_rigid_square_is_not() {
        let tol = ToleranceContext::default();
        assert_eq!(bar_first_order_rigidity(&triangle(), &tol), BarVerdict::Rigid);
        assert!(flex_space(&triangle(), &tol).is_empty());

        let sq = square();
        let BarVerdict::Flexible(flexes) = bar_first_order_rigidity(&sq, &tol) else {
            panic!("square should flex");
        };
        assert_eq!(flexes.dim(), 1);
        // the shear lies in span(flex) + trivial
        let shear = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let r = bar_rigidity_matrix(&sq);
        assert!(dense::norm_inf(&r.apply(&shear)) < 1e-15);
        let trivial = trivial_flex_space(&sq.placement(), 2);
        let mut rest = trivial.nontrivial_part(&shear);
        dense::project_out(&mut rest, &flexes.basis);
        assert!(dense::norm(&rest) < 1e-12);
    }

    #[test]
    fn exact_and_float_rank_agree_on_triangle() {
        let t = triangle();
        assert_eq!(exact_rank(&t), Some(bar_rigidity_matrix(&t).rank(&ToleranceContext::default())));
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let csv = bar_rigidity_matrix(&triangle()).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "member,v1x,v1y,v2x,v2y,v3x,v3y");
        assert_eq!(lines[1], "1-2:bar,-1,0,1,0,0,0");
    }
}
