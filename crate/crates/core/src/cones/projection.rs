use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::dense::{self, dot, norm};
use crate::linalg::Matrix;
use crate::model::ToleranceContext;

/// Nearest point of a finitely generated cone and the separating normal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeProjection {
    pub point: Vec<f64>,
    /// `x_* − w`; zero when `w` lies in the cone.
    pub separating_normal: Vec<f64>,
    /// Nonnegative generator weights with `Σ λ_i x_i = x_*`.
    pub coefficients: Vec<f64>,
    pub distance: f64,
}

impl ConeProjection {
    /// `⟨x_* − w, x_*⟩`, zero at the optimum.
    pub fn right_angle_defect(&self) -> f64 {
        dot(&self.separating_normal, &self.point)
    }
}

fn combine(generators: &[Vec<f64>], coeffs: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (g, &c) in generators.iter().zip(coeffs) {
        if c != 0.0 {
            dense::axpy(c, g, &mut x);
        }
    }
    x
}

/// Lawson–Hanson active-set nonnegative least squares:
/// minimize `|Σ λ_i x_i − w|` over `λ ≥ 0`.
fn nnls(generators: &[Vec<f64>], w: &[f64], tol: f64) -> Vec<f64> {
    let n = generators.len();
    let dim = w.len();
    let mut lambda = vec![0.0; n];
    let mut passive = vec![false; n];
    let scale = generators.iter().map(|g| norm(g)).fold(norm(w), f64::max).max(1.0);
    let grad_tol = tol * scale * scale;
    for _ in 0..3 * n + 10 {
        let x = combine(generators, &lambda, dim);
        let r: Vec<f64> = w.iter().zip(&x).map(|(a, b)| a - b).collect();
        let grad: Vec<f64> = generators.iter().map(|g| dot(g, &r)).collect();
        let mut enter = None;
        for j in 0..n {
            if !passive[j] && grad[j] > grad_tol && enter.is_none_or(|k: usize| grad[j] > grad[k]) {
                enter = Some(j);
            }
        }
        let Some(j) = enter else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let a = Matrix::from_fn(dim, idx.len(), |r, c| generators[idx[c]][r]);
            let sol = dense::least_squares(&a, w);
            let mut z = vec![0.0; n];
            for (k, &i) in idx.iter().enumerate() {
                z[i] = sol[k];
            }
            if idx.iter().all(|&i| z[i] > 0.0) {
                lambda = z;
                break;
            }
            let mut alpha = 1.0_f64;
            for &i in &idx {
                if z[i] <= 0.0 {
                    let denom = lambda[i] - z[i];
                    if denom > 0.0 {
                        alpha = alpha.min(lambda[i] / denom);
                    }
                }
            }
            for i in 0..n {
                lambda[i] += alpha * (z[i] - lambda[i]);
            }
            for &i in &idx {
                if lambda[i] <= tol * scale {
                    lambda[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    lambda
}

/// Nearest point of `C = {Σ λ_i x_i : λ ≥ 0}` to `w`.
pub fn cone_project(generators: &[Vec<f64>], w: &[f64], tol: &ToleranceContext) -> ConeProjection {
    let dim = w.len();
    assert!(generators.iter().all(|g| g.len() == dim), "generator length mismatch");
    let coefficients = nnls(generators, w, tol.cert_tol * 1e-3);
    let point = combine(generators, &coefficients, dim);
    let normal: Vec<f64> = point.iter().zip(w).map(|(x, w)| x - w).collect();
    let distance = norm(&normal);
    if distance <= tol.cert_tol * norm(w).max(1.0) {
        return ConeProjection {
            point: w.to_vec(),
            separating_normal: vec![0.0; dim],
            coefficients,
            distance: 0.0,
        };
    }
    ConeProjection {
        point,
        separating_normal: normal,
        coefficients,
        distance,
    }
}

/// `y = x_* − w`, which satisfies `⟨w, y⟩ < 0 ≤ ⟨x_i, y⟩`.
pub fn separating_functional(generators: &[Vec<f64>], w: &[f64], tol: &ToleranceContext) -> Result<Vec<f64>> {
    let p = cone_project(generators, w, tol);
    if p.distance <= tol.cert_tol {
        return Err(Error::InCone { distance: p.distance });
    }
    Ok(p.separating_normal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceContext {
        ToleranceContext::default()
    }

    #[test]
    fn quadrant_projection() {
        let g = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = cone_project(&g, &[-1.0, 2.0], &tol());
        assert_eq!(p.point, vec![0.0, 2.0]);
        assert_eq!(p.separating_normal, vec![1.0, 0.0]);
        assert_eq!(dot(&p.separating_normal, &[-1.0, 2.0]), -1.0);
        let inside = cone_project(&g, &[1.0, 1.0], &tol());
        assert_eq!(inside.point, vec![1.0, 1.0]);
        assert_eq!(inside.separating_normal, vec![0.0, 0.0]);
    }

    #[test]
    fn ray_projection_is_right_angled() {
        let p = cone_project(&[vec![1.0, 1.0]], &[1.0, 0.0], &tol());
        assert!((p.point[0] - 0.5).abs() < 1e-14 && (p.point[1] - 0.5).abs() < 1e-14);
        assert!(p.right_angle_defect().abs() < 1e-14);
        let y = separating_functional(&[vec![1.0, 1.0]], &[1.0, 0.0], &tol()).unwrap();
        assert!((y[0] + 0.5).abs() < 1e-14 && (y[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn membership_is_an_error_for_separation() {
        let g = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(separating_functional(&g, &[2.0, 3.0], &tol()), Err(Error::InCone { .. })));
        let y = separating_functional(&g, &[-1.0, -1.0], &tol()).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);
    }
}
