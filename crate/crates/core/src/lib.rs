//! Whitening (sphering) transforms for multivariate data.
//!
//! A whitening matrix `W` maps a random vector `x` with covariance `Σ` to
//! `z = W x` with identity covariance. Any `W` with `WᵀW = Σ⁻¹` works, so
//! there are infinitely many; this crate builds the five natural choices
//! ([`Method`]) and the diagnostics that tell them apart:
//!
//! ```
//! use sphering::{datasets, moments, whitening::{self, Method}, diagnostics};
//!
//! let iris = datasets::iris();
//! let model = moments::build_model(&iris)?;
//! let zca = whitening::build_whitener(Method::Zca, &model)?;
//! let z = whitening::whiten(&iris, &zca, true)?;
//! assert_eq!(z.nrows(), 150);
//!
//! let stats = diagnostics::cross_stats(&zca);
//! assert!((stats.trace_phi - 2.9829).abs() < 1e-4);
//! # Ok::<(), sphering::Error>(())
//! ```

pub mod datasets;
pub mod diagnostics;
mod error;
pub mod fixtures;
pub mod linalg;
pub mod moments;
pub mod whitening;

pub use error::{Error, Result};
pub use moments::{CovarianceModel, DataMatrix};
pub use whitening::{Method, Whitener};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/five-transforms.md")]
    mod five_transforms {}
    #[doc = include_str!("../../../book/src/rotations.md")]
    mod rotations {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/optimality.md")]
    mod optimality {}
    #[doc = include_str!("../../../book/src/iris.md")]
    mod iris {}
}
