//! Extended-precision reference fit and the accuracy-digit score used to
//! grade every algorithm's output against it.

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::geometry::{Circle, Frame, NormalizedPointSet};
use crate::linalg::Vec2;

/// Gradient-norm target of the extended-precision refinement.
pub const ORACLE_GRAD_TOL: f64 = 1e-28;

/// Newton iteration budget for the refinement.
pub const ORACLE_MAX_ITERS: usize = 50;

/// A circle refined in double-double precision (normalized frame).
#[derive(Debug, Clone, Copy)]
pub struct OracleCircle {
    pub a: DoubleDouble,
    pub b: DoubleDouble,
    pub r: DoubleDouble,
}

impl OracleCircle {
    /// Rounds to a plain double-precision circle.
    pub fn to_circle(&self) -> Circle {
        Circle::normalized(self.a.to_f64(), self.b.to_f64(), self.r.to_f64())
    }
}

struct DdEval {
    grad: (DoubleDouble, DoubleDouble),
    hess: (DoubleDouble, DoubleDouble, DoubleDouble),
    r_mean: DoubleDouble,
}

fn dd_evaluate(points: &[Vec2], a: DoubleDouble, b: DoubleDouble) -> DdEval {
    let n = points.len();
    let inv_n = DoubleDouble::ONE / DoubleDouble::from_f64(n as f64);

    let mut r = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for p in points {
        let dx = DoubleDouble::from_f64(p.x) - a;
        let dy = DoubleDouble::from_f64(p.y) - b;
        let ri = (dx * dx + dy * dy).sqrt();
        r.push(ri);
        u.push(dx / ri);
        v.push(dy / ri);
    }
    let mut r_mean = DoubleDouble::ZERO;
    let mut u_mean = DoubleDouble::ZERO;
    let mut v_mean = DoubleDouble::ZERO;
    let mut uu_r = DoubleDouble::ZERO;
    let mut vv_r = DoubleDouble::ZERO;
    let mut uv_r = DoubleDouble::ZERO;
    for i in 0..n {
        r_mean = r_mean + r[i];
        u_mean = u_mean + u[i];
        v_mean = v_mean + v[i];
        uu_r = uu_r + u[i] * u[i] / r[i];
        vv_r = vv_r + v[i] * v[i] / r[i];
        uv_r = uv_r + u[i] * v[i] / r[i];
    }
    r_mean = r_mean * inv_n;
    u_mean = u_mean * inv_n;
    v_mean = v_mean * inv_n;
    uu_r = uu_r * inv_n;
    vv_r = vv_r * inv_n;
    uv_r = uv_r * inv_n;

    let two = DoubleDouble::from_f64(2.0);
    let one = DoubleDouble::ONE;
    let grad = (two * (a + u_mean * r_mean), two * (b + v_mean * r_mean));
    let hess = (
        two * (one - u_mean * u_mean - r_mean * vv_r),
        two * (-(u_mean * v_mean) + r_mean * uv_r),
        two * (one - v_mean * v_mean - r_mean * uu_r),
    );
    DdEval { grad, hess, r_mean }
}

/// Reduced objective F(a, b) in double-double, via the standard formula;
/// the reference value for formula-accuracy sweeps.
pub fn dd_reduced_objective(data: &NormalizedPointSet, center: Vec2) -> DoubleDouble {
    let a = DoubleDouble::from_f64(center.x);
    let b = DoubleDouble::from_f64(center.y);
    let n = data.len();
    let mut r_mean = DoubleDouble::ZERO;
    for p in data.points() {
        let dx = DoubleDouble::from_f64(p.x) - a;
        let dy = DoubleDouble::from_f64(p.y) - b;
        r_mean = r_mean + (dx * dx + dy * dy).sqrt();
    }
    r_mean = r_mean / DoubleDouble::from_f64(n as f64);
    a * a + b * b - r_mean * r_mean
}

/// Refines a converged double-precision fit by full-Newton iterations in
/// double-double arithmetic until the gradient norm falls below
/// [`ORACLE_GRAD_TOL`]. The result stands in for an arbitrary-precision
/// "ideal" fit: its error is far below the double-precision scoring ceiling.
pub fn oracle_fit(data: &NormalizedPointSet, seed: &Circle) -> Result<OracleCircle> {
    assert_eq!(
        seed.frame,
        Frame::Normalized,
        "oracle refinement runs in the normalized frame"
    );
    let points = data.points();
    let mut a = DoubleDouble::from_f64(seed.a);
    let mut b = DoubleDouble::from_f64(seed.b);

    for _ in 0..ORACLE_MAX_ITERS {
        let eval = dd_evaluate(points, a, b);
        let (g1, g2) = eval.grad;
        let grad_sq = (g1 * g1 + g2 * g2).to_f64();
        if !grad_sq.is_finite() {
            return Err(Error::NoConvergence);
        }
        if grad_sq <= ORACLE_GRAD_TOL * ORACLE_GRAD_TOL {
            return Ok(OracleCircle {
                a,
                b,
                r: eval.r_mean,
            });
        }
        let (h11, h12, h22) = eval.hess;
        let det = h11 * h22 - h12 * h12;
        if det.to_f64() == 0.0 {
            return Err(Error::NoConvergence);
        }
        // h = -H^{-1} g
        let ha = (h12 * g2 - h22 * g1) / det;
        let hb = (h12 * g1 - h11 * g2) / det;
        if !(ha.is_finite() && hb.is_finite()) {
            return Err(Error::NoConvergence);
        }
        a = a + ha;
        b = b + hb;
    }
    Err(Error::NoConvergence)
}

/// Accuracy of an estimate against the oracle: the relative parameter error
/// E and the digit count k = floor(-log10 E), clamped to [0, 16].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyScore {
    pub e: f64,
    pub k: u32,
    /// k >= 15: the estimate reached the double-precision ceiling.
    pub superaccurate: bool,
}

/// Scores a normalized-frame estimate against the oracle circle:
/// E = |(a,b,R)_est - (a,b,R)_oracle| / max(|(a,b,R)_oracle|, 1).
pub fn score(estimate: &Circle, oracle: &OracleCircle) -> AccuracyScore {
    assert_eq!(
        estimate.frame,
        Frame::Normalized,
        "scores are computed in the normalized frame"
    );
    let da = (DoubleDouble::from_f64(estimate.a) - oracle.a).to_f64();
    let db = (DoubleDouble::from_f64(estimate.b) - oracle.b).to_f64();
    let dr = (DoubleDouble::from_f64(estimate.r) - oracle.r).to_f64();
    let diff = (da * da + db * db + dr * dr).sqrt();
    let oracle_norm = {
        let (a, b, r) = (oracle.a.to_f64(), oracle.b.to_f64(), oracle.r.to_f64());
        (a * a + b * b + r * r).sqrt()
    };
    let e = diff / oracle_norm.max(1.0);
    let k = if e == 0.0 {
        16
    } else if !e.is_finite() {
        0
    } else {
        (-e.log10()).floor().clamp(0.0, 16.0) as u32
    };
    AccuracyScore {
        e,
        k,
        superaccurate: k >= 15,
    }
}
