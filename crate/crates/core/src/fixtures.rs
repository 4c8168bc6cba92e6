//! Seeded random inputs for tests, benchmarks and the guide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{cholesky_lower, random_orthogonal, Matrix, SymMatrix, Vector};
use crate::moments::DataMatrix;

/// Random SPD matrix `D Q Λ Qᵀ D` with Haar `Q`, eigenvalues `Λ` drawn from
/// `[0.2, 5]` and a positive diagonal rescaling `D` from `[0.5, 2]`, so that
/// variances differ between coordinates. Condition number stays below 400.
pub fn random_spd(d: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5bd0);
    let q = random_orthogonal(d, seed);
    let lambda = Vector::from_fn(d, |_, _| rng.random_range(0.2..5.0));
    let scale = Vector::from_fn(d, |_, _| rng.random_range(0.5..2.0));
    let core = &q * Matrix::from_diagonal(&lambda) * q.transpose();
    let m = Matrix::from_fn(d, d, |i, j| scale[i] * core[(i, j)] * scale[j]);
    SymMatrix::new(crate::linalg::symmetrize(&m)).expect("symmetric by construction")
}

/// Random positive diagonal entries in `[lo, hi)`.
pub fn random_positive_diagonal(d: usize, lo: f64, hi: f64, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from_fn(d, |_, _| rng.random_range(lo..hi))
}

/// `n` rows drawn from `N(0, sigma)`.
///
/// # Panics
///
/// If `sigma` is not positive definite.
pub fn sample_gaussian(n: usize, sigma: &SymMatrix, seed: u64) -> DataMatrix {
    let d = sigma.dim();
    let l = cholesky_lower(sigma).expect("sample_gaussian needs an SPD covariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    DataMatrix::new(g * l.as_matrix().transpose()).expect("finite samples")
}
