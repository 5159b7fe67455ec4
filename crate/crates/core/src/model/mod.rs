//! The Delta-Gamma-Normal portfolio model: remapping to independent factors,
//! the closed-form characteristic function and its parameter gradients,
//! analytic moments, and the asymptotic shape of the density tails.

mod cf;
mod moments;
mod portfolio;
mod tail;

pub use cf::{cf, cf_grad, strip_of_regularity, Parameter, Strip};
pub(crate) use cf::{
    check_parameter, cumulant_and_slope, grad_factor, log_cf_centred, phase_centre,
};
pub use moments::{moments, MomentSet};
pub use portfolio::{remap, PortfolioSpec, RemappedPortfolio};
pub use tail::{
    asymptotic_left_log_density, tail_profile, TailProfile, TailRegime, DEFAULT_GROUP_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("sigma is not positive definite (Cholesky factorization failed)")]
    NotPositiveDefinite,
    #[error("{what} is not symmetric: entries ({row},{col}) and ({col},{row}) differ")]
    AsymmetricInput {
        what: &'static str,
        row: usize,
        col: usize,
    },
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("portfolio parameters must be finite")]
    NonFinite,
    #[error("imaginary part {nu} lies outside the strip of regularity")]
    OutsideStrip { nu: f64 },
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error("no left-tail asymptote for regime {0:?}")]
    WrongRegime(TailRegime),
    #[error("the lowest eigenvalue group carries no linear exposure")]
    DegenerateTailGroup,
}
