//! Evaluation of the reduced objective F, its gradient, and its Hessian at a
//! candidate center, with automatic selection between the standard formulas
//! and the cancellation-safe big-circle formulas for far-away centers.

mod big_circle;
mod standard;

use serde::{Deserialize, Serialize};

pub use big_circle::{evaluate_big_circle, evaluate_big_circle_unchecked, W_FLOOR};
pub use standard::{evaluate_standard, R_FLOOR};

use crate::error::Result;
use crate::geometry::NormalizedPointSet;
use crate::linalg::{SymMat2, Vec2};

/// Centers at least this far from the origin are evaluated with the
/// big-circle formulas (boundary inclusive). Below it the standard formulas
/// are fully accurate and cheaper.
pub const D_SWITCH: f64 = 2.0;

/// Which formula family produced an [`Evaluation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorKind {
    Standard,
    BigCircle,
}

impl std::fmt::Display for EvaluatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvaluatorKind::Standard => write!(f, "standard"),
            EvaluatorKind::BigCircle => write!(f, "big_circle"),
        }
    }
}

/// Objective value, gradient, and Hessian at a candidate center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: SymMat2,
    pub evaluator: EvaluatorKind,
}

/// Evaluates F, grad F, and H at `center`, dispatching on the center's
/// distance from the origin.
pub fn evaluate(data: &NormalizedPointSet, center: Vec2) -> Result<Evaluation> {
    if center.norm() >= D_SWITCH {
        evaluate_big_circle(data, center)
    } else {
        evaluate_standard(data, center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize, PointSet};

    fn sample() -> NormalizedPointSet {
        normalize(&PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.05), (2.0, 0.0)]).unwrap()).unwrap()
    }

    #[test]
    fn dispatch_selects_by_distance() {
        let data = sample();
        let near = evaluate(&data, Vec2::new(0.1, 0.1)).unwrap();
        assert_eq!(near.evaluator, EvaluatorKind::Standard);

        let far = evaluate(&data, Vec2::new(80.0, 60.0)).unwrap();
        assert_eq!(far.evaluator, EvaluatorKind::BigCircle);
    }

    #[test]
    fn dispatch_boundary_is_inclusive_to_big_circle() {
        let data = sample();
        let at_switch = evaluate(&data, Vec2::new(D_SWITCH, 0.0)).unwrap();
        assert_eq!(at_switch.evaluator, EvaluatorKind::BigCircle);
    }
}
