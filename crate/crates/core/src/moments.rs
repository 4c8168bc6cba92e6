//! Sample moments: means, the unbiased covariance, and its split into
//! variances and correlations.

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_lower, sym_eigen, EigenPair, LowerTriangular, Matrix, SymMatrix, Vector,
};

/// `n × d` observations, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Matrix,
    column_names: Option<Vec<String>>,
}

impl DataMatrix {
    /// Requires at least one row and one column, all values finite.
    pub fn new(values: Matrix) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid(format!(
                "data matrix is empty ({}x{})",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::invalid(format!(
                "non-finite value at row {row}, column {col}"
            )));
        }
        Ok(DataMatrix {
            values,
            column_names: None,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        DataMatrix::new(crate::linalg::matrix_from_rows(rows)?)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.ncols() {
            return Err(Error::invalid(format!(
                "{} column names for {} columns",
                names.len(),
                self.ncols()
            )));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Arithmetic mean of every column.
pub fn column_means(x: &DataMatrix) -> Result<Vector> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::invalid("cannot take the mean of zero rows"));
    }
    Ok(Vector::from_iterator(
        x.ncols(),
        x.values
            .column_iter()
            .map(|c| compensated_sum(c.iter().copied()) / n as f64),
    ))
}

/// Unbiased (`n - 1` divisor) sample covariance.
///
/// A singular result is returned as-is; it is the whitening step that
/// rejects it.
pub fn empirical_covariance(x: &DataMatrix) -> Result<SymMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!(
            "covariance needs at least 2 rows, got {n}"
        )));
    }
    let means = column_means(x)?;
    let d = x.ncols();
    let centered = Matrix::from_fn(n, d, |k, i| x.values[(k, i)] - means[i]);

    let mut s = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let ci = centered.column(i);
            let cj = centered.column(j);
            let v = compensated_sum(ci.iter().zip(cj.iter()).map(|(a, b)| a * b)) / (n - 1) as f64;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    SymMatrix::new(s)
}

/// Splits `Σ = V^{1/2} R V^{1/2}` into the variances `diag(V)` and the
/// correlation matrix `R` (with an exactly unit diagonal).
pub fn cov_to_cor(sigma: &SymMatrix) -> Result<(Vector, SymMatrix)> {
    let v = sigma.diagonal();
    if let Some(i) = v.iter().position(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::invalid(format!(
            "variance of column {i} is {}, must be positive",
            v[i]
        )));
    }
    let sd = v.map(f64::sqrt);
    let d = sigma.dim();
    let rho = Matrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            sigma[(i, j)] / (sd[i] * sd[j])
        }
    });
    Ok((v, SymMatrix::new(rho)?))
}

/// A positive definite covariance together with every decomposition the
/// whitening transforms are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    mean: Vector,
    sigma: SymMatrix,
    v_diag: Vector,
    rho: SymMatrix,
    eigen_sigma: EigenPair,
    eigen_rho: EigenPair,
    chol_precision: LowerTriangular,
    sigma_sqrt: SymMatrix,
    sigma_inv_sqrt: SymMatrix,
    rho_sqrt: SymMatrix,
    rho_inv_sqrt: SymMatrix,
}

impl CovarianceModel {
    /// Model for a known covariance. `mean` defaults to zero.
    pub fn from_covariance(sigma: SymMatrix, mean: Option<Vector>) -> Result<Self> {
        let d = sigma.dim();
        let mean = match mean {
            Some(m) if m.len() != d => {
                return Err(Error::invalid(format!(
                    "mean has length {}, covariance is {d}x{d}",
                    m.len()
                )))
            }
            Some(m) => m,
            None => Vector::zeros(d),
        };

        let eigen_sigma = sym_eigen(&sigma);
        eigen_sigma.ensure_positive_definite()?;
        let (v_diag, rho) = cov_to_cor(&sigma)?;
        let eigen_rho = sym_eigen(&rho);
        eigen_rho.ensure_positive_definite()?;

        // Σ⁻¹ through the eigendecomposition, then its Cholesky factor.
        let precision = eigen_sigma.spd_power(-1.0)?;
        let chol_precision = cholesky_lower(&precision)?;

        Ok(CovarianceModel {
            mean,
            sigma_sqrt: eigen_sigma.spd_power(0.5)?,
            sigma_inv_sqrt: eigen_sigma.spd_power(-0.5)?,
            rho_sqrt: eigen_rho.spd_power(0.5)?,
            rho_inv_sqrt: eigen_rho.spd_power(-0.5)?,
            sigma,
            v_diag,
            rho,
            eigen_sigma,
            eigen_rho,
            chol_precision,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    /// `Σ`
    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    /// Variances, the diagonal of `V`.
    pub fn v_diag(&self) -> &Vector {
        &self.v_diag
    }

    /// Correlation matrix `R`.
    pub fn rho(&self) -> &SymMatrix {
        &self.rho
    }

    /// `Σ = U Λ Uᵀ`
    pub fn eigen_sigma(&self) -> &EigenPair {
        &self.eigen_sigma
    }

    /// `R = G Θ Gᵀ`
    pub fn eigen_rho(&self) -> &EigenPair {
        &self.eigen_rho
    }

    /// `L` with `L Lᵀ = Σ⁻¹`.
    pub fn chol_precision(&self) -> &LowerTriangular {
        &self.chol_precision
    }

    pub fn sigma_sqrt(&self) -> &SymMatrix {
        &self.sigma_sqrt
    }

    pub fn sigma_inv_sqrt(&self) -> &SymMatrix {
        &self.sigma_inv_sqrt
    }

    pub fn rho_sqrt(&self) -> &SymMatrix {
        &self.rho_sqrt
    }

    pub fn rho_inv_sqrt(&self) -> &SymMatrix {
        &self.rho_inv_sqrt
    }

    /// `V^{p}` as a diagonal matrix.
    pub fn v_power(&self, p: f64) -> Matrix {
        Matrix::from_diagonal(&self.v_diag.map(|v| v.powf(p)))
    }
}

/// Estimates the mean and unbiased covariance of `x` and decomposes them.
pub fn build_model(x: &DataMatrix) -> Result<CovarianceModel> {
    let s = empirical_covariance(x)?;
    CovarianceModel::from_covariance(s, Some(column_means(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn data(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn means() {
        let m = column_means(&data(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(m.as_slice(), &[2.0, 3.0]);
        let m = column_means(&data(&[&[5.0, 7.0]])).unwrap();
        assert_eq!(m.as_slice(), &[5.0, 7.0]);
    }

    #[test]
    fn iris_means() {
        // plain summation over the fixture, done separately
        let expected = [
            5.843333333333334,
            3.0573333333333337,
            3.758,
            1.1993333333333331,
        ];
        let m = column_means(&crate::datasets::iris()).unwrap();
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn empty_and_short_inputs() {
        assert!(matches!(
            DataMatrix::new(Matrix::zeros(0, 3)),
            Err(Error::InvalidInput(_))
        ));
        let one = data(&[&[1.0, 2.0]]);
        assert!(matches!(
            empirical_covariance(&one),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(build_model(&one), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::from_rows(&[&[1.0, 2.0], &[f64::INFINITY, 0.0]]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidInput("non-finite value at row 1, column 0".into())
        );
    }

    #[test]
    fn covariance_examples() {
        let s = empirical_covariance(&data(&[&[0.0, 0.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(s.as_matrix().as_slice(), &[2.0, 2.0, 2.0, 2.0]);
        let s = empirical_covariance(&data(&[&[1.0], &[2.0], &[3.0]])).unwrap();
        assert_eq!(s.as_matrix().as_slice(), &[1.0]);
    }

    #[test]
    fn cov_to_cor_examples() {
        let (v, r) = cov_to_cor(&SymMatrix::identity(3)).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(r, SymMatrix::identity(3));

        let (v, r) =
            cov_to_cor(&SymMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 9.0]]).unwrap()).unwrap();
        assert_eq!(v.as_slice(), &[4.0, 9.0]);
        assert!((r[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r[(0, 0)], 1.0);

        let (_, r) = cov_to_cor(&SymMatrix::from_diagonal(&[5.0, 7.0]).unwrap()).unwrap();
        assert_eq!(r, SymMatrix::identity(2));
    }

    #[test]
    fn cov_to_cor_rejects_zero_variance() {
        let s = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(cov_to_cor(&s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn model_from_white_noise() {
        let x = crate::fixtures::sample_gaussian(10_000, &SymMatrix::identity(3), 11);
        let model = build_model(&x).unwrap();
        assert!(max_abs_diff(model.rho().as_matrix(), &Matrix::identity(3, 3)) < 0.2);
    }

    #[test]
    fn iris_model_invariants() {
        let model = build_model(&crate::datasets::iris()).unwrap();
        let vals = &model.eigen_sigma().values;
        assert!(vals.iter().all(|&v| v > 0.0));
        assert!(vals.as_slice().windows(2).all(|w| w[0] >= w[1]));

        let vh = model.v_power(0.5);
        let recomposed = &vh * model.rho().as_matrix() * &vh;
        assert!(max_abs_diff(&recomposed, model.sigma().as_matrix()) < 1e-10);

        let l = model.chol_precision().as_matrix();
        let inv = model.sigma().as_matrix().clone().try_inverse().unwrap();
        assert!(max_abs_diff(&(l * l.transpose()), &inv) < 1e-8);
    }

    #[test]
    fn duplicated_column_is_singular() {
        let x = data(&[&[1.0, 1.0], &[2.0, 2.0], &[4.0, 4.0]]);
        assert!(matches!(
            build_model(&x),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn row_permutation_invariance() {
        let x = crate::datasets::iris();
        let n = x.nrows();
        let rev =
            DataMatrix::new(Matrix::from_fn(n, 4, |k, i| x.values()[(n - 1 - k, i)])).unwrap();
        let a = empirical_covariance(&x).unwrap();
        let b = empirical_covariance(&rev).unwrap();
        assert!(max_abs_diff(a.as_matrix(), b.as_matrix()) < 1e-12);
    }

    #[test]
    fn mean_length_checked() {
        let err = CovarianceModel::from_covariance(SymMatrix::identity(2), Some(Vector::zeros(3)));
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
