//! Numerical laboratory for rotationally symmetric cone metrics
//! `g = q(x) dx^2 + phi(x)^2 g_F` over an Einstein cross-section `(F, g_F)`.
//!
//! Two halves, deliberately decoupled:
//!
//! * exact spectral stability classification of cross-sections
//!   ([`cross_section`], [`stability`]) — all arithmetic in rationals, no
//!   floating point in any verdict;
//! * a discretized Ricci de Turck flow on the symmetric-diagonal metric
//!   class ([`grid`], [`geometry`], [`flow`], [`diagnostics`]) with an
//!   independent finite-difference tensor oracle ([`oracle`]) backing the
//!   closed-form curvature operations.
//!
//! Sign convention everywhere: the scalar Laplacian is the geometer's
//! positive one, `Δf = -(f_ss + n (phi_s/phi) f_s)` in arclength.

pub mod cross_section;
pub mod diagnostics;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod par;
pub mod stability;

pub use cross_section::{CrossSection, TableRow};
pub use geometry::{DiagonalTwoTensor, RadialVectorField, WarpedMetric};
pub use grid::RadialGrid;
pub use stability::StabilityVerdict;

/// Errors shared across the numerical modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("positivity loss: {0}")]
    PositivityLoss(String),
    #[error("numerical failure at t = {t}: {message}")]
    NumericalFailure { t: f64, message: String },
    #[error("insufficient spectral data: {0}")]
    InsufficientSpectralData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
