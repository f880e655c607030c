//! Error taxonomy shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its domain. Carries the offending name so CLI
    /// messages can point at the config key.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Redundant mirror/loss inputs disagree beyond 1e-9 relative.
    #[error("inconsistent mirror parameters: {0}")]
    InconsistentMirrors(String),

    /// At or above the parametric oscillation threshold alpha_eff = 1 the
    /// series for the energy density diverges.
    #[error("alpha_eff = {alpha_eff} is at or above the parametric oscillation threshold")]
    ThresholdExceeded { alpha_eff: f64 },

    /// The closed-form energies have a pole at alpha = rho.
    #[error(
        "alpha is within {separation:.3e} (relative) of the closed-form energy pole at alpha = rho"
    )]
    PoleProximity { separation: f64 },

    /// Two ray trajectories coincided at the evaluation time, which cannot
    /// happen below threshold; indicates a corrupted configuration.
    #[error("interference kernel evaluated at zero ray separation (delta = {separation})")]
    SingularKernel { separation: f64 },

    /// The density series is flat (no sample rises above the prominence
    /// threshold), e.g. for a static cavity.
    #[error("no pulses above the prominence threshold; density is flat over the period")]
    NoPulses,

    /// Adaptive quadrature exhausted its evaluation budget.
    #[error(
        "quadrature did not converge: error estimate {estimate:.3e} above tolerance {tol:.3e} after {evals} evaluations"
    )]
    QuadratureNonConvergence {
        tol: f64,
        evals: usize,
        estimate: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
