//! Dense symmetric linear algebra used by the whitening transforms.
//!
//! Everything here works on small, dense `f64` matrices. The eigensolver is a
//! cyclic Jacobi iteration: it is slow for large `d` but accurate to a few
//! ulps on the well-conditioned covariance matrices this crate deals with, and
//! its output is a deterministic function of the input bits.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute asymmetry accepted (and then averaged away) by
/// [`SymMatrix::new`], relative to `max(1, max |m_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative eigenvalue floor: eigenvalues at or below
/// `PD_REL_TOL * max(1, largest eigenvalue)` mark a matrix as not positive definite.
pub const PD_REL_TOL: f64 = 1e-10;

/// Diagonal entries with magnitude at or below this never act as a sign pivot.
const PIVOT_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// A square matrix that has been checked to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Validates `m` and replaces it by `(m + mᵀ) / 2`.
    ///
    /// Rejects non-square, empty or non-finite input, and asymmetry larger
    /// than [`SYMMETRY_TOL`] (scaled by the largest entry when that exceeds 1).
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.is_empty() {
            return Err(Error::invalid("matrix has dimension 0"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let asym = max_abs_diff(&m, &m.transpose());
        let scale = m.amax().max(1.0);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "matrix is not symmetric: max |m_ij - m_ji| = {asym:e}"
            )));
        }
        Ok(SymMatrix(symmetrize(&m)))
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix(Matrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        SymMatrix::new(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    /// Builds from row-major nested slices.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        SymMatrix::new(matrix_from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn diagonal(&self) -> Vector {
        self.0.diagonal()
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigenvalues in descending order with matching, sign-canonical eigenvectors
/// stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub values: Vector,
    pub vectors: Matrix,
}

impl EigenPair {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U · diag(values) · Uᵀ`
    pub fn reconstruct(&self) -> Matrix {
        self.spectral_map(|v| v)
    }

    /// `U · diag(f(values)) · Uᵀ`, symmetrized.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let scaled = Matrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    /// Threshold below which an eigenvalue counts as non-positive.
    pub fn pd_threshold(&self) -> f64 {
        PD_REL_TOL * self.values.max().max(1.0)
    }

    /// Fails unless every eigenvalue exceeds [`EigenPair::pd_threshold`].
    pub fn ensure_positive_definite(&self) -> Result<()> {
        let threshold = self.pd_threshold();
        let smallest = self.values[self.dim() - 1];
        if smallest > threshold {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                what: "smallest eigenvalue".into(),
                value: smallest,
                threshold,
            })
        }
    }

    /// Matrix power `m^p` for SPD input, any real `p`.
    pub fn spd_power(&self, p: f64) -> Result<SymMatrix> {
        self.ensure_positive_definite()?;
        Ok(SymMatrix(self.spectral_map(|v| v.powf(p))))
    }
}

/// Lower-triangular matrix with a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// Symmetric eigendecomposition with descending eigenvalues and
/// [`fix_signs`]-canonical eigenvectors.
///
/// Equal eigenvalues keep the solver's relative order, so inside a degenerate
/// eigenspace the basis is one valid choice among many.
pub fn sym_eigen(m: &SymMatrix) -> EigenPair {
    let (values, vectors) = jacobi_eigen(m.as_matrix());
    let d = values.len();

    let mut order: Vec<usize> = (0..d).collect();
    // stable: ties keep solver order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let sorted_values = Vector::from_iterator(d, order.iter().map(|&k| values[k]));
    let sorted_vectors = Matrix::from_fn(d, d, |i, j| vectors[(i, order[j])]);

    EigenPair {
        values: sorted_values,
        vectors: fix_signs(&sorted_vectors),
    }
}

/// Cyclic Jacobi rotations until the off-diagonal part vanishes.
/// Returns unsorted eigenvalues and the accumulated rotation.
fn jacobi_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let d = m.nrows();
    let mut a = m.clone();
    let mut v = Matrix::identity(d, d);

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off == 0.0 {
            break;
        }

        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Once converged far enough, entries below the diagonal's
                // resolution are flushed instead of rotated.
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }

                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    ((0..d).map(|i| a[(i, i)]).collect(), v)
}

/// Flips column signs so that each column's pivot entry is positive.
///
/// The pivot of column `k` is its diagonal entry when that is larger than
/// `1e-12` in magnitude, otherwise the largest-magnitude entry of the column
/// (first one on ties).
pub fn fix_signs(vectors: &Matrix) -> Matrix {
    let mut out = vectors.clone();
    for k in 0..out.ncols() {
        let col = out.column(k);
        let pivot = if k < out.nrows() && col[k].abs() > PIVOT_TOL {
            k
        } else {
            let mut best = 0;
            for i in 1..col.len() {
                if col[i].abs() > col[best].abs() {
                    best = i;
                }
            }
            best
        };
        if out[(pivot, k)] < 0.0 {
            out.column_mut(k).neg_mut();
        }
    }
    out
}

/// The unique symmetric positive definite square root.
pub fn spd_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    sym_eigen(m).spd_power(0.5)
}

/// The unique symmetric positive definite inverse square root.
pub fn spd_inv_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    sym_eigen(m).spd_power(-0.5)
}

/// Cholesky factor `L` with `L · Lᵀ = m`.
pub fn cholesky_lower(m: &SymMatrix) -> Result<LowerTriangular> {
    let a = m.as_matrix();
    let d = m.dim();
    let threshold = PD_REL_TOL * a.diagonal().amax().max(1.0);
    let mut l = Matrix::zeros(d, d);

    for j in 0..d {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot.is_nan() || pivot <= threshold {
            return Err(Error::NotPositiveDefinite {
                what: format!("Cholesky pivot {j}"),
                value: pivot,
                threshold,
            });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..d {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(LowerTriangular(l))
}

/// Haar-distributed random orthogonal `d × d` matrix, deterministic in `seed`.
///
/// QR of a standard normal matrix, with `Q`'s columns re-signed so that the
/// triangular factor has a positive diagonal.
pub fn random_orthogonal(d: usize, seed: u64) -> Matrix {
    assert!(d >= 1, "random_orthogonal needs d >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `(m + mᵀ) / 2`
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Maximum absolute elementwise difference.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `max |QᵀQ - I|`
pub fn orthogonality_residual(q: &Matrix) -> f64 {
    let d = q.ncols();
    max_abs_diff(&(q.transpose() * q), &Matrix::identity(d, d))
}

pub(crate) fn matrix_from_rows(rows: &[&[f64]]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("ragged rows"));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
