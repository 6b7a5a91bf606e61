//! Equilibrium stresses, stress matrices and energies, and prestress
//! stability of bar-joint frameworks.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::dense::{self, compensated_sum, dot, norm, Svd, SymmetricEigen};
use crate::linalg::{elimination, Matrix};
use crate::model::{Framework, Member, StressField, ToleranceContext, VelocityField};
use crate::rigidity::{self, FlexBasis, RigidityMatrix};
use crate::scalar::Scalar;

/// Orthonormal basis of `{ω : ω R(G,p) = 0}`. Member kinds are ignored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressSpace {
    pub basis: Vec<StressField>,
    pub members: Vec<Member>,
}

impl StressSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the orthogonal projection of `r` onto the space.
    pub fn coordinates(&self, r: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|w| dot(&w.values, r)).collect()
    }

    pub fn combine(&self, coeffs: &[f64]) -> StressField {
        let mut out = vec![0.0; self.members.len()];
        for (w, &c) in self.basis.iter().zip(coeffs) {
            dense::axpy(c, &w.values, &mut out);
        }
        StressField::new(out)
    }
}

pub fn stress_space(f: &Framework, tol: &ToleranceContext) -> StressSpace {
    let r = rigidity::bar_rigidity_matrix(f);
    let svd = Svd::new(&r.matrix.transpose());
    let basis = svd
        .null_space(tol.rank_tol)
        .into_iter()
        .map(|mut v| {
            dense::canonical_sign(&mut v);
            StressField::new(v)
        })
        .collect();
    StressSpace {
        basis,
        members: f.members().to_vec(),
    }
}

/// Exact left kernel of `R(G,p)` for a rational placement, in reduced form.
pub fn stress_space_exact(f: &Framework) -> Option<Vec<StressField<BigRational>>> {
    let r = rigidity::bar_rigidity_matrix_in::<BigRational>(f)?;
    Some(
        elimination::left_nullspace(&r.matrix, 0.0)
            .into_iter()
            .map(StressField::new)
            .collect(),
    )
}

/// Rescales `ω` so that member `index` carries `value`.
pub fn normalize_at<T: Scalar>(stress: &StressField<T>, index: usize, value: T) -> Option<StressField<T>> {
    let at = stress.values.get(index)?.clone();
    if at.is_zero() {
        return None;
    }
    let s = value / at;
    Some(StressField::new(stress.values.iter().map(|x| x.clone() * s.clone()).collect()))
}

/// `Ω_ij = −ω_ij`, `Ω_ii = Σ_j ω_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct StressMatrix<T = f64> {
    pub entries: Matrix<T>,
    pub dimension: usize,
}

impl<T: Scalar> StressMatrix<T> {
    pub fn build(vertex_count: usize, dimension: usize, members: &[Member], stress: &[T]) -> Self {
        let mut entries: Matrix<T> = Matrix::zeros(vertex_count, vertex_count);
        for (m, w) in members.iter().zip(stress) {
            let (i, j) = (m.i, m.j);
            entries[(i, j)] = entries[(i, j)].clone() - w.clone();
            entries[(j, i)] = entries[(j, i)].clone() - w.clone();
            entries[(i, i)] = entries[(i, i)].clone() + w.clone();
            entries[(j, j)] = entries[(j, j)].clone() + w.clone();
        }
        Self { entries, dimension }
    }

    /// `uᵀ(Ω ⊗ I_d)u`.
    pub fn quadratic(&self, u: &[T]) -> T {
        self.bilinear(u, u)
    }

    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let (n, d) = (self.entries.rows(), self.dimension);
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let o = &self.entries[(i, j)];
                if o.is_zero() {
                    continue;
                }
                let mut inner = T::zero();
                for k in 0..d {
                    inner = inner + u[i * d + k].clone() * v[j * d + k].clone();
                }
                total = total + o.clone() * inner;
            }
        }
        total
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.entries.rows())
            .map(|i| {
                self.entries
                    .row(i)
                    .iter()
                    .fold(T::zero(), |a, x| a + x.clone())
                    .to_f64()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn stress_matrix<T: Scalar>(f: &Framework, stress: &StressField<T>) -> Result<StressMatrix<T>> {
    stress.check_len(f)?;
    Ok(StressMatrix::build(f.vertex_count(), f.dimension(), f.members(), &stress.values))
}

/// `E_ω(q) = Σ ω_ij |q_i − q_j|²`, exact for exact scalars.
pub fn stress_energy<T: Scalar>(members: &[Member], dimension: usize, stress: &[T], q: &[T]) -> T {
    let mut total = T::zero();
    for (m, w) in members.iter().zip(stress) {
        let mut sq = T::zero();
        for k in 0..dimension {
            let diff = q[m.i * dimension + k].clone() - q[m.j * dimension + k].clone();
            sq = sq + diff.clone() * diff;
        }
        total = total + w.clone() * sq;
    }
    total
}

/// `Σ ω_ij |u_i − u_j|²`, checked against `ω · R(G,u)u`.
pub fn energy_form(f: &Framework, stress: &StressField, u: &VelocityField) -> Result<f64> {
    stress.check_len(f)?;
    u.check_len(f)?;
    let d = f.dimension();
    let value = stress_energy(f.members(), d, &stress.values, &u.values);
    let ru = RigidityMatrix::build(&u.values, d, f.members(), false).apply(&u.values);
    let alt = dot(&stress.values, &ru);
    let scale = stress
        .values
        .iter()
        .zip(&ru)
        .map(|(w, r)| (w * r).abs())
        .sum::<f64>()
        .max(1.0);
    if (value - alt).abs() > 1e-10 * scale {
        return Err(Error::Inconsistent(format!(
            "energy form {value} disagrees with ω·R(G,u)u = {alt}"
        )));
    }
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondDerivativeReport {
    /// `2 Σ ω_ij |u_i − u_j|²`.
    pub analytic: f64,
    pub finite_difference: f64,
    pub abs_error: f64,
    /// Central first difference at `t = 0`.
    pub first_derivative: f64,
    pub passed: bool,
}

/// Compares the second difference of `t ↦ E_ω(q + t u)` with twice the
/// energy form; terms are differenced per member and summed with
/// compensation.
pub fn second_derivative_check(
    members: &[Member],
    dimension: usize,
    stress: &[f64],
    q: &[f64],
    u: &[f64],
    h: f64,
) -> SecondDerivativeReport {
    let d = dimension;
    let mut second = Vec::with_capacity(members.len());
    let mut first = Vec::with_capacity(members.len());
    let mut analytic = Vec::with_capacity(members.len());
    for (m, &w) in members.iter().zip(stress) {
        let sq = |t: f64| -> f64 {
            (0..d)
                .map(|k| {
                    let x = (q[m.i * d + k] + t * u[m.i * d + k]) - (q[m.j * d + k] + t * u[m.j * d + k]);
                    x * x
                })
                .sum()
        };
        let (plus, zero, minus) = (sq(h), sq(0.0), sq(-h));
        second.push(w * ((plus - zero) + (minus - zero)) / (h * h));
        first.push(w * (plus - minus) / (2.0 * h));
        let du: f64 = (0..d).map(|k| (u[m.i * d + k] - u[m.j * d + k]).powi(2)).sum();
        analytic.push(2.0 * w * du);
    }
    let analytic = compensated_sum(analytic);
    let finite_difference = compensated_sum(second);
    let abs_error = (analytic - finite_difference).abs();
    SecondDerivativeReport {
        analytic,
        finite_difference,
        abs_error,
        first_derivative: compensated_sum(first),
        passed: abs_error <= 1e-6 * analytic.abs().max(1.0),
    }
}

/// `M_ab = v_aᵀ (Ω ⊗ I_d) v_b`, symmetrized.
pub fn reduced_flex_form(f: &Framework, stress: &StressField, basis: &[Vec<f64>]) -> Result<Matrix<f64>> {
    let omega = stress_matrix(f, stress)?;
    let k = basis.len();
    let m = Matrix::from_fn(k, k, |a, b| omega.bilinear(&basis[a], &basis[b]));
    Ok(m.symmetrize())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PSState {
    CertifiedPS,
    CertifiedNotWPS,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PSVerdict {
    pub state: PSState,
    pub stress: Option<StressField>,
    /// Reduced form of `stress` over the orthonormal flex basis.
    pub reduced_form: Vec<Vec<f64>>,
    /// `None` when the flex basis is empty.
    pub min_eigenvalue: Option<f64>,
    pub stress_dim: usize,
    pub flex_dim: usize,
    /// Flex on which every equilibrium stress has zero energy.
    pub witness_flex: Option<VelocityField>,
}

/// Budget for the eigenvalue ascent over stress spaces of dimension ≥ 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 32,
            iterations: 300,
            seed: 0,
        }
    }
}

fn combine_forms(forms: &[Matrix<f64>], c: &[f64]) -> Matrix<f64> {
    let k = forms[0].rows();
    Matrix::from_fn(k, k, |a, b| forms.iter().zip(c).map(|(m, &x)| x * m[(a, b)]).sum())
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Projected subgradient ascent of `λ_min(Σ c_l M_l)` on the unit sphere.
fn ascend(forms: &[Matrix<f64>], budget: &SearchBudget, restart: usize) -> (f64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(restart as u64);
    let dim = forms.len();
    let mut c = normalized((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    let mut best = (f64::NEG_INFINITY, c.clone());
    for it in 0..budget.iterations {
        let eig = SymmetricEigen::new(&combine_forms(forms, &c));
        let lambda = eig.values[0];
        if lambda > best.0 {
            best = (lambda, c.clone());
        }
        let v = &eig.vectors[0];
        let g: Vec<f64> = forms.iter().map(|m| dot(v, &m.mul_vec(v))).collect();
        let step = 0.5 / ((it + 1) as f64).sqrt();
        let next: Vec<f64> = c.iter().zip(&g).map(|(x, gi)| x + step * gi / norm(&g).max(1e-300)).collect();
        c = normalized(next);
    }
    best
}

fn flex_field(f: &Framework, basis: &FlexBasis, coeffs: &[f64]) -> VelocityField {
    let mut u = vec![0.0; f.dimension() * f.vertex_count()];
    for (v, &c) in basis.basis.iter().zip(coeffs) {
        dense::axpy(c, v, &mut u);
    }
    VelocityField::new(f.dimension(), u)
}

pub fn prestress_stability(f: &Framework, tol: &ToleranceContext, budget: &SearchBudget) -> Result<PSVerdict> {
    let analysis = rigidity::analyze_bars(f, tol);
    let flexes = analysis.flexes;
    let space = stress_space(f, tol);
    let mut verdict = PSVerdict {
        state: PSState::Unknown,
        stress: None,
        reduced_form: Vec::new(),
        min_eigenvalue: None,
        stress_dim: space.dim(),
        flex_dim: flexes.dim(),
        witness_flex: None,
    };
    let gate = 10.0 * tol.cert_tol;
    if flexes.is_empty() {
        verdict.state = PSState::CertifiedPS;
        verdict.stress = Some(StressField::zeros(f.member_count()));
        return Ok(verdict);
    }
    if space.dim() == 0 {
        verdict.state = PSState::CertifiedNotWPS;
        verdict.witness_flex = Some(flex_field(f, &flexes, &[1.0]));
        verdict.reduced_form = vec![vec![0.0; flexes.dim()]; flexes.dim()];
        verdict.min_eigenvalue = Some(0.0);
        return Ok(verdict);
    }
    let forms: Vec<Matrix<f64>> = space
        .basis
        .iter()
        .map(|w| reduced_flex_form(f, w, &flexes.basis))
        .collect::<Result<_>>()?;

    if space.dim() == 1 {
        let eig = SymmetricEigen::new(&forms[0]);
        let (lo, hi) = (eig.values[0], *eig.values.last().expect("nonempty"));
        let sign = if lo >= gate {
            Some(1.0)
        } else if hi <= -gate {
            Some(-1.0)
        } else {
            None
        };
        if let Some(s) = sign {
            let stress = StressField::new(space.basis[0].values.iter().map(|x| s * x).collect());
            let m = reduced_flex_form(f, &stress, &flexes.basis)?;
            let min = SymmetricEigen::new(&m).values[0];
            verdict.state = if min >= gate { PSState::CertifiedPS } else { PSState::Unknown };
            verdict.stress = Some(stress);
            verdict.reduced_form = m.to_rows();
            verdict.min_eigenvalue = Some(min);
            return Ok(verdict);
        }
        verdict.stress = Some(space.basis[0].clone());
        verdict.reduced_form = forms[0].to_rows();
        verdict.min_eigenvalue = Some(lo);
        if lo <= -gate && hi >= gate {
            // isotropic combination of the extreme eigenvectors
            let (a, b) = (hi.sqrt(), (-lo).sqrt());
            let coeffs: Vec<f64> = eig.vectors[0]
                .iter()
                .zip(eig.vectors.last().expect("nonempty"))
                .map(|(x, y)| a * x + b * y)
                .collect();
            verdict.state = PSState::CertifiedNotWPS;
            verdict.witness_flex = Some(flex_field(f, &flexes, &coeffs));
        }
        return Ok(verdict);
    }

    let results: Vec<(f64, Vec<f64>)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| ascend(&forms, budget, r))
        .collect();
    // best value, ties resolved by restart order
    let mut best = &results[0];
    for r in &results[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    let stress = space.combine(&best.1);
    let m = reduced_flex_form(f, &stress, &flexes.basis)?;
    let min = SymmetricEigen::new(&m).values[0];
    verdict.state = if min >= gate { PSState::CertifiedPS } else { PSState::Unknown };
    verdict.stress = Some(stress);
    verdict.reduced_form = m.to_rows();
    verdict.min_eigenvalue = Some(min);
    Ok(verdict)
}

/// Largest `|R(G,p)u|` entry allowed for `u` to count as a flex.
fn flex_violation(f: &Framework, u: &[f64]) -> f64 {
    dense::norm_inf(&rigidity::bar_rigidity_matrix(f).apply(u))
}

fn require_flex(f: &Framework, u: &VelocityField, tol: &ToleranceContext) -> Result<()> {
    u.check_len(f)?;
    let violation = flex_violation(f, &u.values);
    let scale = dense::norm_inf(&u.values).max(1.0) * f.max_length().max(1.0);
    if violation > tol.cert_tol * scale {
        return Err(Error::NotAFlex { violation });
    }
    Ok(())
}

/// Rescales a stress so that its smallest non-negligible entry has modulus 1.
fn unit_min(stress: StressField, tol: f64) -> StressField {
    let min = stress
        .values
        .iter()
        .map(|x| x.abs())
        .filter(|&x| x > tol)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return stress;
    }
    StressField::new(stress.values.iter().map(|x| x / min).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WpsSample {
    /// Norm of the projection of `R(G,u)u` onto the stress space.
    pub projection_norm: f64,
    pub witnessed: bool,
    pub trivial: bool,
    /// Stress along the projection, scaled so its smallest entry has modulus 1.
    pub stress: Option<StressField>,
    /// `Σ ω_ij |u_i − u_j|²` for `stress`.
    pub value: Option<f64>,
}

pub fn wps_probe(f: &Framework, samples: &[VelocityField], tol: &ToleranceContext) -> Result<Vec<WpsSample>> {
    let space = stress_space(f, tol);
    let trivial = rigidity::trivial_flex_space(&f.placement(), f.dimension());
    let mut out = Vec::with_capacity(samples.len());
    for u in samples {
        require_flex(f, u, tol)?;
        let r = RigidityMatrix::build(&u.values, f.dimension(), f.members(), false).apply(&u.values);
        let coords = space.coordinates(&r);
        let projection_norm = norm(&coords);
        let is_trivial = norm(&trivial.nontrivial_part(&u.values)) < 10.0 * tol.cert_tol;
        let witnessed = projection_norm >= 10.0 * tol.cert_tol;
        let (stress, value) = if witnessed {
            let w = unit_min(space.combine(&coords), tol.cert_tol * projection_norm);
            let value = dot(&w.values, &r);
            (Some(w), Some(value))
        } else {
            (None, None)
        };
        out.push(WpsSample {
            projection_norm,
            witnessed,
            trivial: is_trivial,
            stress,
            value,
        });
    }
    Ok(out)
}

/// A flex with an acceleration: `R(G,p)u = 0`, `R(G,p)a + R(G,u)u = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondOrderFlex {
    pub u: VelocityField,
    pub a: VelocityField,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SecondOrderOutcome {
    Extended(SecondOrderFlex),
    /// An equilibrium stress with `ω · R(G,u)u > 0`.
    Blocked { stress: StressField, pairing: f64 },
    /// Residual between the two thresholds.
    Undecided { residual: f64 },
}

pub fn second_order_extend(f: &Framework, u: &VelocityField, tol: &ToleranceContext) -> Result<SecondOrderOutcome> {
    require_flex(f, u, tol)?;
    let d = f.dimension();
    let r = rigidity::bar_rigidity_matrix(f);
    let ruu = RigidityMatrix::build(&u.values, d, f.members(), false).apply(&u.values);
    let rhs: Vec<f64> = ruu.iter().map(|x| -x).collect();
    let a = dense::least_squares(&r.matrix, &rhs);
    let ra = r.apply(&a);
    let residual = norm(&ra.iter().zip(&rhs).map(|(x, y)| x - y).collect::<Vec<_>>());
    if residual <= tol.cert_tol {
        return Ok(SecondOrderOutcome::Extended(SecondOrderFlex {
            u: u.clone(),
            a: VelocityField::new(d, a),
        }));
    }
    let space = stress_space(f, tol);
    let coords = space.coordinates(&ruu);
    let projection = norm(&coords);
    if projection >= 10.0 * tol.cert_tol {
        let w = unit_min(space.combine(&coords), tol.cert_tol * projection);
        let pairing = dot(&w.values, &ruu);
        return Ok(SecondOrderOutcome::Blocked { stress: w, pairing });
    }
    Ok(SecondOrderOutcome::Undecided { residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Member;

    fn tol() -> ToleranceContext {
        ToleranceContext::default()
    }

    fn square() -> Framework {
        Framework::from_f64(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(2, 3), Member::bar(0, 3)],
        )
        .unwrap()
    }

    #[test]
    fn stress_space_dimensions() {
        let bar = Framework::from_f64(1, &[vec![0.0], vec![1.0]], vec![Member::bar(0, 1)]).unwrap();
        assert_eq!(stress_space(&bar, &tol()).dim(), 0);
        assert_eq!(stress_space(&square(), &tol()).dim(), 0);
    }

    #[test]
    fn single_edge_stress_matrix_and_energy() {
        let bar = Framework::from_f64(1, &[vec![0.0], vec![3.0]], vec![Member::bar(0, 1)]).unwrap();
        let om = stress_matrix(&bar, &StressField::new(vec![1.0])).unwrap();
        assert_eq!(om.entries.to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(stress_energy(bar.members(), 1, &[1.0], &[0.0, 3.0]), 9.0);
        let zero = stress_matrix(&bar, &StressField::<f64>::zeros(1)).unwrap();
        assert_eq!(zero.entries.max_abs(), 0.0);
        let r = second_derivative_check(bar.members(), 1, &[1.0], &[0.0, 1.0], &[1.0, 0.0], 1e-4);
        assert_eq!(r.analytic, 2.0);
        assert!(r.abs_error < 1e-8);
    }

    #[test]
    fn rigid_triangle_is_vacuously_ps() {
        let t = Framework::from_f64(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![Member::bar(0, 1), Member::bar(1, 2), Member::bar(0, 2)],
        )
        .unwrap();
        let v = prestress_stability(&t, &tol(), &SearchBudget::default()).unwrap();
        assert_eq!(v.state, PSState::CertifiedPS);
        assert_eq!(v.min_eigenvalue, None);
    }

    #[test]
    fn square_is_not_wps() {
        let v = prestress_stability(&square(), &tol(), &SearchBudget::default()).unwrap();
        assert_eq!(v.state, PSState::CertifiedNotWPS);
        let shear = VelocityField::new(2, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let probe = wps_probe(&square(), std::slice::from_ref(&shear), &tol()).unwrap();
        assert!(!probe[0].witnessed);
        let flexes = rigidity::flex_space(&square(), &tol());
        let m = reduced_flex_form(&square(), &StressField::zeros(4), &flexes.basis).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0]]);
        match second_order_extend(&square(), &shear, &tol()).unwrap() {
            SecondOrderOutcome::Extended(s) => {
                let r = rigidity::bar_rigidity_matrix(&square());
                let ruu = RigidityMatrix::build(&shear.values, 2, square().members(), false).apply(&shear.values);
                let lhs: Vec<f64> = r.apply(&s.a.values).iter().zip(&ruu).map(|(x, y)| x + y).collect();
                assert!(dense::norm_inf(&lhs) < 1e-10);
            }
            other => panic!("expected extension, got {other:?}"),
        }
    }

    #[test]
    fn translation_extends_with_zero_acceleration() {
        let u = VelocityField::new(2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let SecondOrderOutcome::Extended(s) = second_order_extend(&square(), &u, &tol()).unwrap() else {
            panic!()
        };
        assert!(dense::norm_inf(&s.a.values) < 1e-12);
        let probe = wps_probe(&square(), &[u], &tol()).unwrap();
        assert!(probe[0].trivial && !probe[0].witnessed);
    }

    #[test]
    fn non_flex_is_rejected() {
        let u = VelocityField::new(2, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(wps_probe(&square(), &[u.clone()], &tol()), Err(Error::NotAFlex { .. })));
        assert!(matches!(second_order_extend(&square(), &u, &tol()), Err(Error::NotAFlex { .. })));
    }
}
