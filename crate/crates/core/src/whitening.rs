//! The five natural whitening matrices and the rotations that relate them.
//!
//! Every whitening matrix factors as `W = Q₁ Σ^{-1/2}` and as
//! `W = Q₂ R^{-1/2} V^{-1/2}` with orthogonal `Q₁`, `Q₂`. The methods differ
//! only in that rotation:
//!
//! | method   | `W`                       | `Q₁`         | `Q₂`         |
//! |----------|---------------------------|--------------|--------------|
//! | ZCA      | `Σ^{-1/2}`                | `I`          | `Aᵀ`         |
//! | PCA      | `Λ^{-1/2} Uᵀ`             | `Uᵀ`         | `Uᵀ Aᵀ`      |
//! | Cholesky | `Lᵀ`                      | `Lᵀ Σ^{1/2}` | `Lᵀ V^{1/2} R^{1/2}` |
//! | ZCA-cor  | `R^{-1/2} V^{-1/2}`       | `A`          | `I`          |
//! | PCA-cor  | `Θ^{-1/2} Gᵀ V^{-1/2}`    | `Gᵀ A`       | `Gᵀ`         |
//!
//! where `A = R^{-1/2} V^{-1/2} Σ^{1/2}` is itself orthogonal.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, Matrix};
use crate::moments::{column_means, CovarianceModel, DataMatrix};

/// Which whitening matrix to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Mahalanobis whitening, the symmetric choice `Σ^{-1/2}`.
    Zca,
    /// Scaled principal components, `Λ^{-1/2} Uᵀ`.
    Pca,
    /// Transpose of the Cholesky factor of the precision matrix.
    Cholesky,
    /// ZCA applied to standardized variables.
    ZcaCor,
    /// PCA applied to standardized variables.
    PcaCor,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Zca,
        Method::Pca,
        Method::Cholesky,
        Method::ZcaCor,
        Method::PcaCor,
    ];

    /// Lower-case name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Zca => "zca",
            Method::Pca => "pca",
            Method::Cholesky => "cholesky",
            Method::ZcaCor => "zca-cor",
            Method::PcaCor => "pca-cor",
        }
    }

    /// Display label, e.g. `ZCA-cor`.
    pub fn label(self) -> &'static str {
        match self {
            Method::Zca => "ZCA",
            Method::Pca => "PCA",
            Method::Cholesky => "Cholesky",
            Method::ZcaCor => "ZCA-cor",
            Method::PcaCor => "PCA-cor",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.cli_name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.cli_name()).collect();
                Error::invalid(format!(
                    "unknown method '{s}', expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// A whitening matrix together with the covariance model it was built for.
#[derive(Debug, Clone)]
pub struct Whitener<'m> {
    method: Method,
    w: Matrix,
    model: &'m CovarianceModel,
}

impl<'m> Whitener<'m> {
    pub fn method(&self) -> Method {
        self.method
    }

    /// The `d × d` whitening matrix `W`.
    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn model(&self) -> &'m CovarianceModel {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }
}

/// Builds `W` for `method`. Eigenvectors in `U` and `G` carry the
/// positive-diagonal sign convention of [`crate::linalg::fix_signs`].
pub fn build_whitener(method: Method, model: &CovarianceModel) -> Result<Whitener<'_>> {
    let w = match method {
        Method::Zca => model.sigma_inv_sqrt().as_matrix().clone(),
        Method::Pca => {
            let e = model.eigen_sigma();
            scale_rows(&e.vectors.transpose(), |i| e.values[i].powf(-0.5))
        }
        Method::Cholesky => model.chol_precision().as_matrix().transpose(),
        Method::ZcaCor => model.rho_inv_sqrt().as_matrix() * model.v_power(-0.5),
        Method::PcaCor => {
            let e = model.eigen_rho();
            scale_rows(&e.vectors.transpose(), |i| e.values[i].powf(-0.5)) * model.v_power(-0.5)
        }
    };
    Ok(Whitener { method, w, model })
}

fn scale_rows(m: &Matrix, f: impl Fn(usize) -> f64) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| f(i) * m[(i, j)])
}

/// `Z = (X - 1 x̄ᵀ) Wᵀ`, or `X Wᵀ` without centering. `x̄` is the column mean
/// of `x` itself.
pub fn whiten(x: &DataMatrix, whitener: &Whitener<'_>, center: bool) -> Result<DataMatrix> {
    if x.ncols() != whitener.dim() {
        return Err(Error::invalid(format!(
            "data has {} columns, whitener expects {}",
            x.ncols(),
            whitener.dim()
        )));
    }
    let mut centered = x.values().clone();
    if center {
        let means = column_means(x)?;
        for (mut col, m) in centered.column_iter_mut().zip(means.iter()) {
            col.add_scalar_mut(-m);
        }
    }
    let z = DataMatrix::new(centered * whitener.w.transpose())?;
    match x.column_names() {
        Some(names) => z.with_column_names(names.iter().map(|n| format!("z_{n}")).collect()),
        None => Ok(z),
    }
}

/// `Q₁ = W Σ^{1/2}`, the rotation in the polar form `W = Q₁ Σ^{-1/2}`.
pub fn rotation_q1(whitener: &Whitener<'_>) -> Matrix {
    &whitener.w * whitener.model.sigma_sqrt().as_matrix()
}

/// `Q₂ = W V^{1/2} R^{1/2}`, the rotation in `W = Q₂ R^{-1/2} V^{-1/2}`.
pub fn rotation_q2(whitener: &Whitener<'_>) -> Matrix {
    let m = whitener.model;
    &whitener.w * m.v_power(0.5) * m.rho_sqrt().as_matrix()
}

/// `A = R^{-1/2} V^{-1/2} Σ^{1/2}`; satisfies `Q₁ = Q₂ A` for every whitener.
pub fn link_matrix(model: &CovarianceModel) -> Matrix {
    model.rho_inv_sqrt().as_matrix() * model.v_power(-0.5) * model.sigma_sqrt().as_matrix()
}

/// Cholesky whitening done on standardized variables: `L_Rᵀ V^{-1/2}` with
/// `L_R L_Rᵀ = R⁻¹`. Always equal to the plain Cholesky whitener, because
/// `L_R = V^{1/2} L`.
pub fn cholesky_cor_matrix(model: &CovarianceModel) -> Result<Matrix> {
    let rho_precision = model.eigen_rho().spd_power(-1.0)?;
    let l_rho = cholesky_lower(&rho_precision)?;
    Ok(l_rho.as_matrix().transpose() * model.v_power(-0.5))
}
