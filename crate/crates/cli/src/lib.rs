//! Command-line front end: whiten CSV files, inspect one whitening method,
//! or compare all five.
//!
//! Exit codes: 0 success, 1 invalid input or flags, 2 covariance not
//! positive definite, 3 I/O or parse failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand};
use sphering::diagnostics::{self, Certificate, CrossStats, RotationSweep, StructureCertificates};
use sphering::linalg::{Matrix, Vector};
use sphering::{moments, whitening, Method};
use thiserror::Error;

pub mod csv_io;

pub use crate::csv_io::{parse_csv, read_csv, write_csv};

/// Number of random rotations drawn by `diagnose --check-optimality`.
pub const OPTIMALITY_ROTATIONS: usize = 200;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] sphering::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(sphering::Error::InvalidInput(_)) => 1,
            CliError::Input(sphering::Error::NotPositiveDefinite { .. }) => 2,
            CliError::Io { .. } | CliError::Parse { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sphering",
    version,
    about = "Whitening transforms for CSV data"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the whitened data as CSV (columns prefixed with `z_`).
    Whiten {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short, long, value_parser = parse_method)]
        method: Method,
        /// Do not subtract column means before whitening.
        #[arg(long)]
        no_center: bool,
    },
    /// Cross-covariance, cross-correlation, objectives and structure of one method.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short, long, value_parser = parse_method)]
        method: Method,
        /// Compare the optima against random rotations.
        #[arg(long)]
        check_optimality: bool,
        /// Seed for the random rotations.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Compare all five methods in one table.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        format: FormatArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// CSV file with a header row, or `iris` for the bundled data.
    #[arg(short, long)]
    pub input: String,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    /// Decimal places in reports.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=12))]
    pub precision: u8,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: sphering::Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&config, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(config: &CliConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (common, body) = match &config.command {
        Command::Whiten {
            common,
            method,
            no_center,
        } => {
            let x = read_csv(&common.input)?;
            let model = moments::build_model(&x)?;
            let w = whitening::build_whitener(*method, &model)?;
            let z = whitening::whiten(&x, &w, !no_center)?;
            let mut buf = Vec::new();
            write_csv(&z, &mut buf)?;
            (common, buf)
        }
        Command::Diagnose {
            common,
            method,
            check_optimality,
            seed,
            format,
        } => {
            let x = read_csv(&common.input)?;
            let model = moments::build_model(&x)?;
            let w = whitening::build_whitener(*method, &model)?;
            let stats = diagnostics::cross_stats(&w);
            let certs = diagnostics::structure_certificates(&stats, *method);
            let sweep = check_optimality
                .then(|| diagnostics::rotation_sweep(&model, OPTIMALITY_ROTATIONS, *seed));
            let text = render_diagnosis(
                *method,
                &x,
                w.matrix(),
                &stats,
                &certs,
                sweep.as_ref(),
                format.precision.into(),
            );
            (common, text.into_bytes())
        }
        Command::Compare { common, format } => {
            let x = read_csv(&common.input)?;
            let report = diagnostics::compare_all(&x)?;
            (common, report.render(format.precision.into()).into_bytes())
        }
    };

    match &common.output {
        Some(path) => File::create(path)
            .and_then(|mut f| f.write_all(&body))
            .map_err(|e| CliError::Io {
                context: format!("cannot write {path}"),
                source: e,
            }),
        None => stdout.write_all(&body).map_err(|e| CliError::Io {
            context: "cannot write to standard output".into(),
            source: e,
        }),
    }
}

fn render_diagnosis(
    method: Method,
    x: &sphering::DataMatrix,
    w: &Matrix,
    stats: &CrossStats,
    certs: &StructureCertificates,
    sweep: Option<&RotationSweep>,
    precision: usize,
) -> String {
    let num = |v: f64| format!("{v:.precision$}");
    let vec = |v: &Vector| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ");
    let mut out = String::new();

    let _ = writeln!(out, "method: {method}");
    let _ = writeln!(out, "observations: {}, variables: {}", x.nrows(), x.ncols());
    for (title, m) in [
        ("W (whitening matrix)", w),
        ("Phi = cov(z, x)", &stats.phi),
        ("Psi = cor(z, x)", &stats.psi),
    ] {
        let _ = writeln!(out, "\n{title}");
        let cells: Vec<Vec<String>> = m
            .row_iter()
            .map(|r| r.iter().map(|&v| num(v)).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
        for row in cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            let _ = writeln!(out, "  {}", line.join("  "));
        }
    }

    let _ = writeln!(out);
    let rows = [
        ("trace(Phi)", num(stats.trace_phi)),
        ("trace(Psi)", num(stats.trace_psi)),
        ("diag(Phi Phi^T)", vec(&stats.phi_row_sq)),
        ("max diag(Phi Phi^T)", num(stats.phi_row_sq.max())),
        ("diag(Psi Psi^T)", vec(&stats.psi_row_sq)),
        ("max diag(Psi Psi^T)", num(stats.psi_row_sq.max())),
        ("cor(z_i, x_i)", vec(&stats.diag_psi)),
        ("E[(z-x)^T (z-x)]", num(stats.squared_distance)),
    ];
    for (label, value) in rows {
        let _ = writeln!(out, "{label:<21}{value}");
    }

    let _ = writeln!(
        out,
        "\nstructure (tolerance {:e})",
        diagnostics::STRUCTURE_TOL
    );
    let yes_no = |c: &Certificate| if c.holds { "yes" } else { "no" };
    for (label, c) in [
        ("Phi symmetric", &certs.phi_symmetric),
        ("Psi symmetric", &certs.psi_symmetric),
        ("Phi lower-triangular", &certs.phi_lower_triangular),
        ("Psi lower-triangular", &certs.psi_lower_triangular),
    ] {
        let _ = writeln!(
            out,
            "  {label:<21}{:<4}(residual {:.2e})",
            yes_no(c),
            c.residual
        );
    }

    if let Some(s) = sweep {
        let _ = writeln!(
            out,
            "\noptimality against {} random rotations (seed {})",
            s.rotations, s.seed
        );
        for (label, opt, sampled) in [
            ("g1 = trace(Phi)", s.g1_optimum, s.g1_sampled_max),
            ("g2 = trace(Psi)", s.g2_optimum, s.g2_sampled_max),
            ("h1[1]", s.h1_optimum, s.h1_first_sampled_max),
            ("h2[1]", s.h2_optimum, s.h2_first_sampled_max),
        ] {
            let ok = if sampled <= opt + 1e-9 {
                "ok"
            } else {
                "VIOLATED"
            };
            let _ = writeln!(
                out,
                "  {label:<17}optimum {}  sampled max {}  {ok}",
                num(opt),
                num(sampled)
            );
        }
    }
    out
}
