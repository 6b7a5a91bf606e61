//! Floating-point spectral helpers backed by `nalgebra`.

use nalgebra::DMatrix;

use crate::linalg::Matrix;

/// Full singular value decomposition data needed for rank and null spaces.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Singular values in descending order, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// All `cols` right singular vectors; the first `min(rows, cols)` pair with
    /// `singular_values`, the rest span the structural null space.
    pub right: Vec<Vec<f64>>,
    rows: usize,
    cols: usize,
}

impl Svd {
    pub fn new(a: &Matrix<f64>) -> Self {
        let (rows, cols) = (a.rows(), a.cols());
        if cols == 0 {
            return Self {
                singular_values: Vec::new(),
                right: Vec::new(),
                rows,
                cols,
            };
        }
        // Pad with zero rows so nalgebra returns a complete set of right vectors.
        let padded_rows = rows.max(cols);
        let mut m = DMatrix::<f64>::zeros(padded_rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = a[(i, j)];
            }
        }
        let svd = m.svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&x, &y| {
            svd.singular_values[y]
                .partial_cmp(&svd.singular_values[x])
                .unwrap()
                .then(x.cmp(&y))
        });
        let k = rows.min(cols);
        let singular_values = order.iter().take(k).map(|&i| svd.singular_values[i]).collect();
        let right = order
            .iter()
            .map(|&i| vt.row(i).iter().copied().collect())
            .collect();
        Self {
            singular_values,
            right,
            rows,
            cols,
        }
    }

    /// Number of singular values above `rank_tol · σ_max · max(rows, cols)`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        let cut = rank_tol * smax * self.rows.max(self.cols) as f64;
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal basis of the numerical null space, ordered by descending
    /// singular value.
    pub fn null_space(&self, rank_tol: f64) -> Vec<Vec<f64>> {
        let r = self.rank(rank_tol);
        self.right[r..].to_vec()
    }
}

pub fn numerical_rank(a: &Matrix<f64>, rank_tol: f64) -> usize {
    Svd::new(a).rank(rank_tol)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn new(m: &Matrix<f64>) -> Self {
        assert_eq!(m.rows(), m.cols());
        if m.rows() == 0 {
            return Self {
                values: Vec::new(),
                vectors: Vec::new(),
            };
        }
        let eig = m.symmetrize().to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..m.rows()).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
        Self {
            values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            vectors: order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn least_squares(a: &Matrix<f64>, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.rows(), b.len());
    if a.cols() == 0 {
        return Vec::new();
    }
    if a.rows() == 0 {
        return vec![0.0; a.cols()];
    }
    let m = a.to_nalgebra();
    let rhs = nalgebra::DVector::from_column_slice(b);
    let svd = m.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.solve(&rhs, eps)
        .map(|x| x.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; a.cols()])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Removes from `v` its components along the orthonormal vectors `basis`,
/// twice (classical re-orthogonalization).
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Candidates are processed in order; each is orthogonalized against
/// `against` and against the vectors already accepted, and kept when its
/// remaining norm exceeds `drop_tol` times its original norm. Stops once
/// `limit` vectors have been accepted.
pub fn gram_schmidt(
    candidates: &[Vec<f64>],
    against: &[Vec<f64>],
    drop_tol: f64,
    limit: usize,
) -> Vec<Vec<f64>> {
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if accepted.len() >= limit {
            break;
        }
        let original = norm(c);
        if original == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in against.iter().chain(accepted.iter()) {
                let coef = dot(&v, b);
                axpy(-coef, b, &mut v);
            }
        }
        let n = norm(&v);
        if n > drop_tol * original {
            accepted.push(v.iter().map(|x| x / n).collect());
        }
    }
    accepted
}

/// Flips the sign of `v` so that its largest-magnitude entry (lowest index
/// on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
