use crate::tpbvp::ShootingUnknowns;

/// Failure modes shared across the model, the policy solvers, the
/// simulator, and the shooting solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The flow-conservation system has no usable solution: the matrix is
    /// singular (routing mass trapped in a cycle with no way out) or the
    /// solve produced negative rates.
    #[error("flow conservation system is singular or produced negative rates")]
    SingularFlow,

    /// The source has no outgoing arc, or no alive path reaches the base.
    #[error("no route from the source to the base")]
    NoRoute,

    /// The source workload is zero, so the balance multiplier is undefined.
    #[error("source workload is zero; balance multiplier undefined")]
    DegenerateSource,

    /// The damped fixed-point iteration on the balance multiplier ran out
    /// of iterations.
    #[error("balance multiplier did not converge in {iterations} iterations (last gap {gap:e})")]
    NuDiverged { iterations: usize, gap: f64 },

    /// Exhaustive routing enumeration would exceed the hard bound.
    #[error("deterministic routing enumeration too large: {count} vertices (bound {bound})")]
    TooLarge { count: u128, bound: u64 },

    /// The shooting iteration stopped above tolerance; carries the best
    /// iterate seen so the caller can report it.
    #[error("shooting did not converge: best residual norm {residual_norm:e}")]
    ShootingDiverged {
        best: ShootingUnknowns,
        residual_norm: f64,
    },

    /// The source-energy costate must be strictly negative.
    #[error("source-energy costate must be negative, got {0}")]
    InvalidCostate(f64),

    /// The costate equations are derived for quadratic path loss only.
    #[error("costate equations require path-loss exponent 2, got {0}")]
    UnsupportedPathLoss(f64),

    /// Malformed caller input (dimensions, signs, non-finite values).
    #[error("{0}")]
    InvalidInput(String),
}
