use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus must have positive imaginary part, got Im(tau) = {0}")]
    NonPositiveImaginaryPart(f64),
    #[error("theta_1 vanishes at a lattice point")]
    ZeroOfTheta,
    #[error("evaluation point is a lattice point")]
    PoleAtLattice,
    #[error("series did not reach tolerance: {0}")]
    Unconverged(String),
    #[error("wp' vanishes at the input (half period)")]
    HalfPeriodInput,
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },
    #[error("found {found} distinct critical points, at most five are possible")]
    CountViolation { found: usize },
    #[error("Newton sweeps disagree: {coarse} points on the coarse grid, {fine} on the fine grid")]
    NoConvergence { coarse: usize, fine: usize },
    #[error("half-period comparison methods disagree: {0}")]
    InconsistentComparison(String),
    #[error("b = {b} lies between the degeneracy thresholds; no extra critical pair")]
    NotInExtraRegime { b: f64 },
    #[error("no sign change found on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("point is not a critical point of G (residual {residual:e})")]
    NotACriticalPoint { residual: f64 },
    #[error("branch point is a half period; the developing map would be constant")]
    HalfPeriodBranch,
    #[error("the torus has no critical point besides the half periods")]
    NoExtraCriticalPoint,
    #[error("developing map construction is inconsistent: {0}")]
    ConstructionInconsistent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors that can only come from a broken implementation, never from
    /// bad input.
    pub fn is_consistency_violation(&self) -> bool {
        matches!(
            self,
            Error::CountViolation { .. }
                | Error::InconsistentComparison(_)
                | Error::NoConvergence { .. }
                | Error::ConstructionInconsistent(_)
        )
    }
}
