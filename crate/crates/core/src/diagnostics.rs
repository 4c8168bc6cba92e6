//! Cross-covariance and cross-correlation between whitened and original
//! variables, the objectives they induce, and the method comparison table.
//!
//! For `z = W x`:
//!
//! * `Φ = cov(z, x) = W Σ`
//! * `Ψ = cor(z, x) = Φ V^{-1/2}`
//!
//! Squared column sums of `Ψ` are always 1, whatever `W` is. Row sums are
//! the compression scores: how much of all original variables a single
//! whitened component carries.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, orthogonality_residual, random_orthogonal, Matrix, Vector};
use crate::moments::{build_model, CovarianceModel, DataMatrix};
use crate::whitening::{build_whitener, Method, Whitener};

/// Orthogonality residual above which the objectives reject their rotation.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Tolerance of the structure certificates.
pub const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossStats {
    /// `Φ = W Σ`
    pub phi: Matrix,
    /// `Ψ = Φ V^{-1/2}`
    pub psi: Matrix,
    /// `trace(Φ)`, maximal for ZCA.
    pub trace_phi: f64,
    /// `trace(Ψ)`, maximal for ZCA-cor.
    pub trace_psi: f64,
    /// `diag(Φ Φᵀ)`
    pub phi_row_sq: Vector,
    /// `diag(Ψ Ψᵀ)`
    pub psi_row_sq: Vector,
    /// `cor(zᵢ, xᵢ)`
    pub diag_psi: Vector,
    /// `E[(z - x)ᵀ (z - x)] = d - 2 trace(Φ) + trace(V)` for centered data.
    pub squared_distance: f64,
}

impl CrossStats {
    /// `diag(Ψᵀ Ψ)`; every entry is 1 up to rounding.
    pub fn psi_col_sq(&self) -> Vector {
        (self.psi.transpose() * &self.psi).diagonal()
    }
}

pub fn cross_stats(whitener: &Whitener<'_>) -> CrossStats {
    let model = whitener.model();
    let phi = whitener.matrix() * model.sigma().as_matrix();
    let psi = &phi * model.v_power(-0.5);
    let row_sq =
        |m: &Matrix| Vector::from_iterator(m.nrows(), m.row_iter().map(|r| r.norm_squared()));
    let trace_phi = phi.trace();
    CrossStats {
        trace_psi: psi.trace(),
        phi_row_sq: row_sq(&phi),
        psi_row_sq: row_sq(&psi),
        diag_psi: psi.diagonal(),
        squared_distance: model.dim() as f64 - 2.0 * trace_phi + model.v_diag().sum(),
        trace_phi,
        phi,
        psi,
    }
}

fn check_rotation(q: &Matrix, model: &CovarianceModel) -> Result<()> {
    let d = model.dim();
    if q.shape() != (d, d) {
        return Err(Error::invalid(format!(
            "rotation is {}x{}, model dimension is {d}",
            q.nrows(),
            q.ncols()
        )));
    }
    let residual = orthogonality_residual(q);
    if residual > ORTHOGONALITY_TOL {
        return Err(Error::invalid(format!(
            "matrix is not orthogonal: max |QᵀQ - I| = {residual:e}"
        )));
    }
    Ok(())
}

/// `g₁(Q₁) = trace(Q₁ Σ^{1/2})`, the trace of `Φ` for `W = Q₁ Σ^{-1/2}`.
pub fn objective_g1(q1: &Matrix, model: &CovarianceModel) -> Result<f64> {
    check_rotation(q1, model)?;
    Ok((q1 * model.sigma_sqrt().as_matrix()).trace())
}

/// `g₂(Q₂) = trace(Q₂ R^{1/2})`, the trace of `Ψ` for `W = Q₂ R^{-1/2} V^{-1/2}`.
pub fn objective_g2(q2: &Matrix, model: &CovarianceModel) -> Result<f64> {
    check_rotation(q2, model)?;
    Ok((q2 * model.rho_sqrt().as_matrix()).trace())
}

/// `h₁(Q₁) = diag(Q₁ Σ Q₁ᵀ)`, the row sums of squared cross-covariances.
pub fn compression_h1(q1: &Matrix, model: &CovarianceModel) -> Result<Vector> {
    check_rotation(q1, model)?;
    Ok((q1 * model.sigma().as_matrix() * q1.transpose()).diagonal())
}

/// `h₂(Q₂) = diag(Q₂ R Q₂ᵀ)`, the row sums of squared cross-correlations.
pub fn compression_h2(q2: &Matrix, model: &CovarianceModel) -> Result<Vector> {
    check_rotation(q2, model)?;
    Ok((q2 * model.rho().as_matrix() * q2.transpose()).diagonal())
}

/// A structural property together with how far the matrix is from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub holds: bool,
    pub residual: f64,
}

impl Certificate {
    fn symmetric(m: &Matrix) -> Self {
        let residual = max_abs_diff(m, &m.transpose());
        Certificate {
            holds: residual <= STRUCTURE_TOL,
            residual,
        }
    }

    /// Residual is the largest entry above the diagonal; a non-positive
    /// diagonal entry also fails the certificate.
    fn lower_triangular(m: &Matrix) -> Self {
        let mut residual: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                residual = residual.max(m[(i, j)].abs());
            }
        }
        let positive_diag = m.diagonal().iter().all(|&v| v > 0.0);
        Certificate {
            holds: residual <= STRUCTURE_TOL && positive_diag,
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureCertificates {
    pub method: Method,
    pub phi_symmetric: Certificate,
    pub psi_symmetric: Certificate,
    pub phi_lower_triangular: Certificate,
    pub psi_lower_triangular: Certificate,
}

impl StructureCertificates {
    /// Which certificates `method` guarantees, in field order
    /// (phi symmetric, psi symmetric, phi lower, psi lower).
    pub fn expected(method: Method) -> [bool; 4] {
        match method {
            Method::Zca => [true, false, false, false],
            Method::ZcaCor => [false, true, false, false],
            Method::Cholesky => [false, false, true, true],
            Method::Pca | Method::PcaCor => [false; 4],
        }
    }

    pub fn holds(&self) -> [bool; 4] {
        [
            self.phi_symmetric.holds,
            self.psi_symmetric.holds,
            self.phi_lower_triangular.holds,
            self.psi_lower_triangular.holds,
        ]
    }

    /// True when every certificate guaranteed by the method holds.
    /// Certificates the method does not guarantee may still hold by accident,
    /// e.g. on a diagonal covariance.
    pub fn guaranteed_hold(&self) -> bool {
        Self::expected(self.method)
            .iter()
            .zip(self.holds())
            .all(|(&e, h)| !e || h)
    }
}

pub fn structure_certificates(stats: &CrossStats, method: Method) -> StructureCertificates {
    StructureCertificates {
        method,
        phi_symmetric: Certificate::symmetric(&stats.phi),
        psi_symmetric: Certificate::symmetric(&stats.psi),
        phi_lower_triangular: Certificate::lower_triangular(&stats.phi),
        psi_lower_triangular: Certificate::lower_triangular(&stats.psi),
    }
}

/// The four objective rows of the comparison table. All are "larger is better".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    TracePhi,
    TracePsi,
    MaxPhiRowSq,
    MaxPsiRowSq,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::TracePhi,
        Objective::TracePsi,
        Objective::MaxPhiRowSq,
        Objective::MaxPsiRowSq,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Objective::TracePhi => "trace(Phi)",
            Objective::TracePsi => "trace(Psi)",
            Objective::MaxPhiRowSq => "max diag(Phi Phi^T)",
            Objective::MaxPsiRowSq => "max diag(Psi Psi^T)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Best,
    Second,
    None,
}

impl Mark {
    fn symbol(self) -> char {
        match self {
            Mark::Best => '*',
            Mark::Second => '~',
            Mark::None => ' ',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    /// `cor(zᵢ, xᵢ)` for the first `min(d, 4)` components.
    pub diag_psi: Vec<f64>,
    pub trace_phi: f64,
    pub trace_psi: f64,
    pub max_phi_row_sq: f64,
    pub max_psi_row_sq: f64,
}

impl ReportRow {
    pub fn objective(&self, o: Objective) -> f64 {
        match o {
            Objective::TracePhi => self.trace_phi,
            Objective::TracePsi => self.trace_psi,
            Objective::MaxPhiRowSq => self.max_phi_row_sq,
            Objective::MaxPsiRowSq => self.max_psi_row_sq,
        }
    }
}

/// One row per method, in [`Method::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
}

impl ComparisonReport {
    pub fn row(&self, method: Method) -> &ReportRow {
        self.rows
            .iter()
            .find(|r| r.method == method)
            .expect("report has every method")
    }

    /// Best and second-best marks for one objective. Values within `1e-10`
    /// (relative to the best) count as ties and share a mark.
    pub fn marks(&self, objective: Objective) -> Vec<Mark> {
        let values: Vec<f64> = self.rows.iter().map(|r| r.objective(objective)).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-10 * best.abs().max(1.0);
        let runner_up = values
            .iter()
            .copied()
            .filter(|&v| v < best - tol)
            .fold(f64::NEG_INFINITY, f64::max);
        values
            .iter()
            .map(|&v| {
                if v >= best - tol {
                    Mark::Best
                } else if v >= runner_up - tol {
                    Mark::Second
                } else {
                    Mark::None
                }
            })
            .collect()
    }

    /// Plain-text table: methods as columns, `*` marks the best and `~` the
    /// second best value of each objective row.
    pub fn render(&self, precision: usize) -> String {
        let fmt = |v: f64| format!("{v:.precision$}");
        let label_width = Objective::ALL
            .iter()
            .map(|o| o.label().len())
            .max()
            .unwrap_or(0);
        let all_values = self.rows.iter().flat_map(|r| {
            r.diag_psi
                .iter()
                .copied()
                .chain(Objective::ALL.iter().map(move |&o| r.objective(o)))
        });
        let width = all_values
            .map(|v| fmt(v).len())
            .chain(self.rows.iter().map(|r| r.method.label().len()))
            .max()
            .unwrap_or(0);

        let mut out = String::new();
        let _ = write!(out, "{:label_width$}", "");
        for r in &self.rows {
            let _ = write!(out, "  {:>width$} ", r.method.label());
        }
        out.push('\n');

        let components = self.rows.first().map_or(0, |r| r.diag_psi.len());
        for i in 0..components {
            let _ = write!(out, "{:label_width$}", format!("cor(z{0},x{0})", i + 1));
            for r in &self.rows {
                let _ = write!(out, "  {:>width$} ", fmt(r.diag_psi[i]));
            }
            out.push('\n');
        }
        for o in Objective::ALL {
            let _ = write!(out, "{:label_width$}", o.label());
            for (r, m) in self.rows.iter().zip(self.marks(o)) {
                let _ = write!(out, "  {:>width$}{}", fmt(r.objective(o)), m.symbol());
            }
            out.push('\n');
        }
        // unmarked last cells leave trailing blanks
        out.lines().map(|l| format!("{}\n", l.trim_end())).collect()
    }
}

/// Diagnostics for all five methods on an existing model.
pub fn compare_model(model: &CovarianceModel) -> Result<ComparisonReport> {
    let shown = model.dim().min(4);
    let rows = Method::ALL
        .iter()
        .map(|&method| {
            let w = build_whitener(method, model)?;
            let s = cross_stats(&w);
            Ok(ReportRow {
                method,
                diag_psi: s.diag_psi.iter().take(shown).copied().collect(),
                trace_phi: s.trace_phi,
                trace_psi: s.trace_psi,
                max_phi_row_sq: s.phi_row_sq.max(),
                max_psi_row_sq: s.psi_row_sq.max(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { rows })
}

/// Estimates the covariance of `x` and compares all five methods on it.
pub fn compare_all(x: &DataMatrix) -> Result<ComparisonReport> {
    compare_model(&build_model(x)?)
}

/// Largest objective values seen over a sample of random rotations, next to
/// the analytic optima attained by ZCA, ZCA-cor, PCA and PCA-cor.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSweep {
    pub rotations: usize,
    pub seed: u64,
    /// `g₁(I) = trace(Σ^{1/2})`
    pub g1_optimum: f64,
    pub g1_sampled_max: f64,
    /// `g₂(I) = trace(R^{1/2})`
    pub g2_optimum: f64,
    pub g2_sampled_max: f64,
    /// Largest eigenvalue of `Σ`.
    pub h1_optimum: f64,
    pub h1_first_sampled_max: f64,
    /// Largest eigenvalue of `R`.
    pub h2_optimum: f64,
    pub h2_first_sampled_max: f64,
}

impl RotationSweep {
    /// True when no sampled rotation beats an optimum by more than `tol`.
    pub fn optima_dominate(&self, tol: f64) -> bool {
        self.g1_sampled_max <= self.g1_optimum + tol
            && self.g2_sampled_max <= self.g2_optimum + tol
            && self.h1_first_sampled_max <= self.h1_optimum + tol
            && self.h2_first_sampled_max <= self.h2_optimum + tol
    }
}

/// Evaluates the four objectives on `rotations` random orthogonal matrices,
/// the `i`-th drawn with seed `seed + i`.
pub fn rotation_sweep(model: &CovarianceModel, rotations: usize, seed: u64) -> RotationSweep {
    let d = model.dim();
    let mut sweep = RotationSweep {
        rotations,
        seed,
        g1_optimum: model.sigma_sqrt().as_matrix().trace(),
        g1_sampled_max: f64::NEG_INFINITY,
        g2_optimum: model.rho_sqrt().as_matrix().trace(),
        g2_sampled_max: f64::NEG_INFINITY,
        h1_optimum: model.eigen_sigma().values[0],
        h1_first_sampled_max: f64::NEG_INFINITY,
        h2_optimum: model.eigen_rho().values[0],
        h2_first_sampled_max: f64::NEG_INFINITY,
    };
    for i in 0..rotations {
        let q = random_orthogonal(d, seed.wrapping_add(i as u64));
        let sigma = model.sigma().as_matrix();
        let rho = model.rho().as_matrix();
        sweep.g1_sampled_max = sweep
            .g1_sampled_max
            .max((&q * model.sigma_sqrt().as_matrix()).trace());
        sweep.g2_sampled_max = sweep
            .g2_sampled_max
            .max((&q * model.rho_sqrt().as_matrix()).trace());
        let first = q.row(0);
        sweep.h1_first_sampled_max = sweep
            .h1_first_sampled_max
            .max((first * sigma * first.transpose())[(0, 0)]);
        sweep.h2_first_sampled_max = sweep
            .h2_first_sampled_max
            .max((first * rho * first.transpose())[(0, 0)]);
    }
    sweep
}
