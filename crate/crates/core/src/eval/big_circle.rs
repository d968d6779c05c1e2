//! Big-circle formulas: a reparametrization of F, its gradient, and its
//! Hessian in (delta, theta) = (1/D, direction) form that avoids the
//! catastrophic cancellation the standard formulas suffer when the center is
//! far from the (centered) data.

use super::{Evaluation, EvaluatorKind, D_SWITCH};
use crate::error::{Error, Result};
use crate::geometry::NormalizedPointSet;
use crate::linalg::{pairwise_sum_by, SymMat2, Vec2};

/// Floor on w_i = r_i / D; values at or below it put the center on a data
/// point, where the objective is not differentiable.
pub const W_FLOOR: f64 = 1e-12;

/// Per-point intermediates of the big-circle reparametrization, kept
/// together so the algebraic identities between them can be tested.
#[derive(Debug, Clone)]
pub(crate) struct BigCircleTerms {
    #[allow(dead_code)] // read by the identity tests
    pub d: f64,
    pub delta: f64,
    pub cos: f64,
    pub sin: f64,
    /// w_i = r_i / D
    pub w: Vec<f64>,
    /// tau_i = 2 p_i - delta z_i
    pub tau: Vec<f64>,
    /// gamma_i = r_i - D, computed in the cancellation-free form
    /// -tau_i / (1 + w_i), never as D (w_i - 1).
    pub gamma: Vec<f64>,
    /// g_i = (z_i + p_i gamma_i) / (2 + delta gamma_i)
    pub g: Vec<f64>,
    /// eta_i = 1 / (1 + delta gamma_i)
    pub eta: Vec<f64>,
    /// kappa_i = gamma_i / (2 + delta gamma_i)
    pub kappa: Vec<f64>,
    /// alpha_i = (x_i + gamma_i cos) / w_i
    pub alpha: Vec<f64>,
    /// beta_i = (y_i + gamma_i sin) / w_i
    pub beta: Vec<f64>,
}

pub(crate) fn big_circle_terms(data: &NormalizedPointSet, center: Vec2) -> Result<BigCircleTerms> {
    let d = center.norm();
    if d <= W_FLOOR {
        return Err(Error::CenterTooClose {
            d,
            threshold: W_FLOOR,
        });
    }
    let delta = 1.0 / d;
    // cos/sin of the polar angle of the center, without going through atan2
    let cos = center.x * delta;
    let sin = center.y * delta;

    let pts = data.points();
    let z = &data.moments().z;
    let n = pts.len();
    let mut terms = BigCircleTerms {
        d,
        delta,
        cos,
        sin,
        w: vec![0.0; n],
        tau: vec![0.0; n],
        gamma: vec![0.0; n],
        g: vec![0.0; n],
        eta: vec![0.0; n],
        kappa: vec![0.0; n],
        alpha: vec![0.0; n],
        beta: vec![0.0; n],
    };
    for i in 0..n {
        let (x, y) = (pts[i].x, pts[i].y);
        let p = x * cos + y * sin;
        let q = x * sin - y * cos;
        // w^2 = 1 - 2 delta p + delta^2 z, written as a sum of squares
        // (p^2 + q^2 = z) so it cannot go negative from round-off.
        let w = ((1.0 - delta * p) * (1.0 - delta * p) + (delta * q) * (delta * q)).sqrt();
        if w <= W_FLOOR {
            return Err(Error::CenterOnDataPoint);
        }
        let tau = 2.0 * p - delta * z[i];
        let gamma = -tau / (1.0 + w);
        terms.w[i] = w;
        terms.tau[i] = tau;
        terms.gamma[i] = gamma;
        terms.g[i] = (z[i] + p * gamma) / (2.0 + delta * gamma);
        terms.eta[i] = 1.0 / (1.0 + delta * gamma);
        terms.kappa[i] = gamma / (2.0 + delta * gamma);
        terms.alpha[i] = (x + gamma * cos) / w;
        terms.beta[i] = (y + gamma * sin) / w;
    }
    Ok(terms)
}

/// Big-circle evaluation with the dispatch threshold enforced: centers
/// closer than [`D_SWITCH`] are refused so callers use the standard
/// evaluator there.
pub fn evaluate_big_circle(data: &NormalizedPointSet, center: Vec2) -> Result<Evaluation> {
    let d = center.norm();
    if d < D_SWITCH {
        return Err(Error::CenterTooClose {
            d,
            threshold: D_SWITCH,
        });
    }
    evaluate_big_circle_unchecked(data, center)
}

/// Big-circle evaluation without the [`D_SWITCH`] precondition. The formulas
/// are valid at any nonzero center distance; this entry point exists for
/// accuracy sweeps that compare both formula families across all distances.
pub fn evaluate_big_circle_unchecked(
    data: &NormalizedPointSet,
    center: Vec2,
) -> Result<Evaluation> {
    let t = big_circle_terms(data, center)?;
    let n = data.len();
    let inv_n = 1.0 / n as f64;
    let (delta, c, s) = (t.delta, t.cos, t.sin);
    let pts = data.points();

    let g_mean = pairwise_sum_by(n, |i| t.g[i]) * inv_n;
    let value = -2.0 * g_mean - delta * delta * g_mean * g_mean;

    let tge = pairwise_sum_by(n, |i| t.tau[i] * t.gamma[i] * t.eta[i]) * inv_n;
    let tgek = pairwise_sum_by(n, |i| t.tau[i] * t.gamma[i] * t.eta[i] * t.kappa[i]) * inv_n;
    let tk = pairwise_sum_by(n, |i| t.tau[i] * t.kappa[i]) * inv_n;
    let big_p = 0.5 * (tge - delta * tgek);
    let big_q = 0.5 * (tk + data.moments().z_mean);
    let big_x = pairwise_sum_by(n, |i| pts[i].x * t.gamma[i] * t.eta[i]) * inv_n;
    let big_y = pairwise_sum_by(n, |i| pts[i].y * t.gamma[i] * t.eta[i]) * inv_n;

    let big_a = big_p + delta * delta * (big_p + big_q) * big_q;
    let big_b = 1.0 + delta * delta * big_q;
    let gradient = Vec2::new(big_a * c - big_b * big_x, big_a * s - big_b * big_y) * (2.0 * delta);

    let big_u = (big_p + big_q) * c - big_x;
    let big_v = (big_p + big_q) * s - big_y;
    let gge = pairwise_sum_by(n, |i| t.gamma[i] * t.gamma[i] * t.eta[i]) * inv_n;
    let age = pairwise_sum_by(n, |i| t.alpha[i] * t.gamma[i] * t.eta[i]) * inv_n;
    let bge = pairwise_sum_by(n, |i| t.beta[i] * t.gamma[i] * t.eta[i]) * inv_n;
    let aae = pairwise_sum_by(n, |i| t.alpha[i] * t.alpha[i] * t.eta[i]) * inv_n;
    let bbe = pairwise_sum_by(n, |i| t.beta[i] * t.beta[i] * t.eta[i]) * inv_n;
    let abe = pairwise_sum_by(n, |i| t.alpha[i] * t.beta[i] * t.eta[i]) * inv_n;

    let big_m = (gge - big_q) * c * c + 2.0 * (age - big_u) * c + aae;
    let big_n = (gge - big_q) * s * s + 2.0 * (bge - big_v) * s + bbe;
    let big_l = (gge - big_q) * c * s + (age - big_u) * s + (bge - big_v) * c + abe;

    let dd2 = 2.0 * delta * delta;
    let hessian = SymMat2::new(
        dd2 * (big_u * (2.0 * c - delta * delta * big_u) - big_q * s * s - big_b * big_n),
        dd2 * (big_u * s + big_v * c - delta * delta * big_u * big_v
            + big_q * s * c
            + big_b * big_l),
        dd2 * (big_v * (2.0 * s - delta * delta * big_v) - big_q * c * c - big_b * big_m),
    );

    Ok(Evaluation {
        value,
        gradient,
        hessian,
        evaluator: EvaluatorKind::BigCircle,
    })
}
