use thiserror::Error;

/// Errors produced by the fitting and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The input cannot support the requested operation (too few points,
    /// coincident points, collinear data in an algebraic fit, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// The candidate center is within the distance floor of a data point,
    /// where the objective is not differentiable. The solver treats this as
    /// a rejected step and raises the damping.
    #[error("center coincides with a data point")]
    CenterOnDataPoint,

    /// `evaluate_big_circle` was called with a center below its distance
    /// threshold; the standard evaluator should be used instead.
    #[error("center distance {d} is below the big-circle threshold {threshold}")]
    CenterTooClose { d: f64, threshold: f64 },

    /// A damped Hessian eigenvalue is not positive; the caller must raise
    /// the damping parameter before recomputing the step.
    #[error("damped Hessian is singular or indefinite")]
    SingularDamping,

    /// Extended-precision Newton refinement failed to reach its gradient
    /// target within the iteration budget.
    #[error("oracle refinement did not converge")]
    NoConvergence,

    /// |xxy| in the rotated frame is below the floor, so the wrong-valley
    /// side cannot be determined; a best-fitting circle may not exist.
    #[error("valley orientation is ambiguous (xxy ~ 0)")]
    AmbiguousValley,
}

pub type Result<T> = std::result::Result<T, Error>;
