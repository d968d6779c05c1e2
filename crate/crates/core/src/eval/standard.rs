//! Standard (small-circle) formulas for F, its gradient, and its Hessian.

use super::{Evaluation, EvaluatorKind};
use crate::error::{Error, Result};
use crate::geometry::NormalizedPointSet;
use crate::linalg::{compensated_sum_by, pairwise_sum_by, SymMat2, Vec2};

/// Point distances at or below this floor make u_i = (x_i - a)/r_i
/// meaningless; the evaluation is rejected so the solver damps the step
/// instead of stepping onto a data point.
pub const R_FLOOR: f64 = 1e-12;

/// Evaluates F = a^2 + b^2 - rbar^2 together with its gradient and Hessian
/// using the direct per-point formulas. Valid at any center that keeps all
/// distances above [`R_FLOOR`].
pub fn evaluate_standard(data: &NormalizedPointSet, center: Vec2) -> Result<Evaluation> {
    let pts = data.points();
    let n = pts.len();
    let inv_n = 1.0 / n as f64;

    let mut r = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        let dx = pts[i].x - center.x;
        let dy = pts[i].y - center.y;
        let ri = (dx * dx + dy * dy).sqrt();
        if ri <= R_FLOOR {
            return Err(Error::CenterOnDataPoint);
        }
        r[i] = ri;
        u[i] = dx / ri;
        v[i] = dy / ri;
    }

    // The objective-decrease acceptance rule must resolve differences of a
    // few ulps in F when the gradient sits just above the phase-switch
    // threshold, so rbar gets a compensated sum: its error stays at one
    // rounding instead of growing with n.
    let r_mean = compensated_sum_by(n, |i| r[i]) * inv_n;
    let u_mean = pairwise_sum_by(n, |i| u[i]) * inv_n;
    let v_mean = pairwise_sum_by(n, |i| v[i]) * inv_n;
    let uu_r = pairwise_sum_by(n, |i| u[i] * u[i] / r[i]) * inv_n;
    let vv_r = pairwise_sum_by(n, |i| v[i] * v[i] / r[i]) * inv_n;
    let uv_r = pairwise_sum_by(n, |i| u[i] * v[i] / r[i]) * inv_n;

    let value = center.norm_sq() - r_mean * r_mean;
    let gradient = Vec2::new(center.x + u_mean * r_mean, center.y + v_mean * r_mean) * 2.0;
    let hessian = SymMat2::new(
        2.0 * (1.0 - u_mean * u_mean - r_mean * vv_r),
        2.0 * (-u_mean * v_mean + r_mean * uv_r),
        2.0 * (1.0 - v_mean * v_mean - r_mean * uu_r),
    );

    Ok(Evaluation {
        value,
        gradient,
        hessian,
        evaluator: EvaluatorKind::Standard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize, PointSet};

    fn unit_cross() -> NormalizedPointSet {
        normalize(&PointSet::from_xy(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]).unwrap())
            .unwrap()
    }

    #[test]
    fn value_gradient_hessian_at_perfect_center() {
        let eval = evaluate_standard(&unit_cross(), Vec2::ZERO).unwrap();
        assert!((eval.value + 1.0).abs() < 1e-15);
        assert!(eval.gradient.norm() < 1e-15);
        assert!((eval.hessian.xx - 1.0).abs() < 1e-15);
        assert!(eval.hessian.xy.abs() < 1e-15);
        assert!((eval.hessian.yy - 1.0).abs() < 1e-15);
        assert_eq!(eval.evaluator, EvaluatorKind::Standard);
    }

    #[test]
    fn center_on_data_point_is_rejected() {
        let data = unit_cross();
        let on_point = data.points()[0];
        assert_eq!(
            evaluate_standard(&data, on_point),
            Err(Error::CenterOnDataPoint)
        );
        // just off the floor is fine
        let nearby = on_point + Vec2::new(1e-6, 0.0);
        assert!(evaluate_standard(&data, nearby).is_ok());
    }
}
