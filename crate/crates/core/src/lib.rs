//! Geometric circle fitting that is fast and numerically stable.
//!
//! The main solver minimizes the reduced objective F(a, b) = a^2 + b^2 -
//! rbar^2 over the circle center with damped full-Newton steps (closed-form
//! 2x2 eigendecomposition) and a two-phase acceptance rule: the objective
//! must decrease far from the minimum, and the gradient norm must decrease
//! near it, which keeps the comparison informative down to machine precision
//! instead of its square root. Far-away centers are evaluated with a
//! reparametrized set of formulas that avoids catastrophic cancellation, and
//! a valley guard restarts iterates that escape toward infinity on the wrong
//! side of the data (falling back to a line fit when no best circle exists).
//!
//! The crate also ships the classic baselines (Kasa algebraic fit,
//! Gauss-Newton, Levenberg-Marquardt) and a double-double extended-precision
//! oracle for scoring accuracy, so the solver's behavior can be benchmarked
//! against them.
//!
//! ```
//! use circlefit::{fit_circle, PointSet, SolverConfig};
//!
//! let points = PointSet::from_xy(&[(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)]).unwrap();
//! let report = fit_circle(&points, &SolverConfig::default()).unwrap();
//! let circle = report.circle().unwrap();
//! assert!((circle.a - 1.0).abs() < 1e-12);
//! assert!((circle.b - 0.75).abs() < 1e-12);
//! assert!((circle.r - 1.25).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod dd;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod solver;
pub mod valley;

pub use error::{Error, Result};
pub use eval::{evaluate, Evaluation, EvaluatorKind, D_SWITCH};
pub use geometry::{
    full_objective, normalize, radius_for_center, reduced_objective, Circle, FitResult, Frame,
    NormalizationTransform, NormalizedPointSet, PointSet,
};
pub use linalg::{eig_sym_2x2, Eigen2, SymMat2, Vec2};
pub use solver::{fit, fit_circle, FitReport, Phase, SolverConfig, Termination, TraceRow};
