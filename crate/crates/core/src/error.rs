//! Error taxonomy shared across the solver stack.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid run configuration (grid sizes, exponent ranges, unknown keys).
    #[error("config error: {0}")]
    Config(String),

    /// An integral with a fitted power-law tail does not converge.
    #[error("divergent tail: {0}")]
    DivergentTail(String),

    /// A linear solve could not be stabilised; carries the shift for diagnosis.
    #[error("ill-conditioned solve: {0}")]
    Conditioning(String),

    /// An iterative scheme failed to converge.
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    /// The resolvent shift is too large for the block scheme's Neumann series.
    #[error("shift too large for block inversion: {0}")]
    ShiftTooLarge(String),

    /// An extrapolation sequence did not behave as required.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Two independent quadrature routes disagree beyond tolerance.
    #[error("quadrature disagreement: {0}")]
    Quadrature(String),

    /// A profile that must be positive has a non-positive node.
    #[error("positivity violated: {0}")]
    Positivity(String),

    /// Shooting could not bracket the separatrix.
    #[error("bracket not found: {0}")]
    Bracket(String),

    /// Adaptive integrator step size underflowed.
    #[error("integrator step underflow: {0}")]
    StepUnderflow(String),

    /// A denominator that must stay away from zero degenerated.
    #[error("degenerate denominator: {0}")]
    Degenerate(String),
}
