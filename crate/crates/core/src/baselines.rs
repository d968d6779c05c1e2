//! Baseline fits: the Kasa algebraic initializer and the classic
//! Gauss-Newton / Levenberg-Marquardt geometric fits over (a, b, R).
//!
//! The iterative baselines deliberately use neither the big-circle formulas
//! nor the valley guard: they exist to exhibit the divergence and sqrt(eps)
//! accuracy ceilings the main solver is designed to avoid. Gauss-Newton
//! takes unconditional steps (which is what lets the eps-stopping variant
//! reach machine accuracy, and what makes it run away in the wrong valley);
//! Levenberg-Marquardt damps with the usual objective-decrease acceptance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Circle, FitResult, Frame, NormalizedPointSet};
use crate::linalg::{pairwise_sum_by, Vec2};
use crate::solver::{FitReport, Phase, Termination, TraceRow};

/// Step-size stopping rule. The classic fits stop once the step is below
/// sqrt(eps), capping their accuracy around eight digits; continuing to eps
/// (the modified Gauss-Newton) reaches machine accuracy at the cost of many
/// extra iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    StepBelowSqrtEps,
    StepBelowEps,
}

impl StopRule {
    pub fn threshold(self, machine_eps: f64) -> f64 {
        match self {
            StopRule::StepBelowSqrtEps => machine_eps.sqrt(),
            StopRule::StepBelowEps => machine_eps,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub stop_rule: StopRule,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iters: usize,
    /// Center norm beyond which a run is classified as diverged.
    pub divergence_box: f64,
    pub machine_eps: f64,
    pub trace: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            stop_rule: StopRule::StepBelowSqrtEps,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            max_iters: 500,
            divergence_box: 1e6,
            machine_eps: f64::EPSILON,
            trace: false,
        }
    }
}

impl BaselineConfig {
    /// Config for the modified Gauss-Newton (eps stopping).
    pub fn modified() -> Self {
        BaselineConfig {
            stop_rule: StopRule::StepBelowEps,
            ..Self::default()
        }
    }
}

/// Non-iterative algebraic circle fit: least squares on
/// z_i ~ 2 a x_i + 2 b y_i + c, then R = sqrt(c + a^2 + b^2).
///
/// On centered data the normal equations reduce to a 2x2 system in (a, b)
/// with c = mean(z). Fails on (near-)collinear data, where the system is
/// singular; callers should take the line-fallback path.
pub fn kasa_fit(data: &NormalizedPointSet) -> Result<Circle> {
    let m = data.moments();
    // trace(S) = mean(z) = 1 on normalized data, so this is a relative test
    let det = m.xx * m.yy - m.xy * m.xy;
    if det.abs() <= 1e-12 {
        return Err(Error::DegenerateInput("collinear data: singular system"));
    }
    let pts = data.points();
    let n = pts.len();
    let inv_n = 1.0 / n as f64;
    let xz = pairwise_sum_by(n, |i| pts[i].x * m.z[i]) * inv_n;
    let yz = pairwise_sum_by(n, |i| pts[i].y * m.z[i]) * inv_n;
    let a = 0.5 * (m.yy * xz - m.xy * yz) / det;
    let b = 0.5 * (m.xx * yz - m.xy * xz) / det;
    let c = m.z_mean;
    let r = (c + a * a + b * b).sqrt();
    Ok(Circle::normalized(a, b, r))
}

/// Parameters (a, b, R) of the three-parameter geometric fits.
#[derive(Debug, Clone, Copy)]
struct Params3 {
    a: f64,
    b: f64,
    r: f64,
}

impl Params3 {
    fn from_circle(c: &Circle) -> Self {
        Params3 {
            a: c.a,
            b: c.b,
            r: c.r,
        }
    }

    fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.r * self.r).sqrt()
    }

    fn add(&self, h: [f64; 3]) -> Params3 {
        Params3 {
            a: self.a + h[0],
            b: self.b + h[1],
            r: self.r + h[2],
        }
    }

    fn center_norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b).sqrt()
    }
}

/// Sum of squared residuals (r_i - R)^2.
fn objective3(data: &NormalizedPointSet, q: Params3) -> f64 {
    let pts = data.points();
    pairwise_sum_by(pts.len(), |i| {
        let d = (pts[i] - Vec2::new(q.a, q.b)).norm() - q.r;
        d * d
    })
}

/// Normal equations J^T J h = -J^T f for residuals f_i = r_i - R with
/// Jacobian rows (-u_i, -v_i, -1). Returns (J^T J, -J^T f). None if a point
/// coincides with the center.
fn normal_equations(data: &NormalizedPointSet, q: Params3) -> Option<([[f64; 3]; 3], [f64; 3])> {
    let pts = data.points();
    let n = pts.len();
    let mut jtj = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in pts {
        let dx = p.x - q.a;
        let dy = p.y - q.b;
        let ri = (dx * dx + dy * dy).sqrt();
        if ri <= 1e-12 {
            return None;
        }
        let u = dx / ri;
        let v = dy / ri;
        let f = ri - q.r;
        jtj[0][0] += u * u;
        jtj[0][1] += u * v;
        jtj[0][2] += u;
        jtj[1][1] += v * v;
        jtj[1][2] += v;
        rhs[0] += u * f;
        rhs[1] += v * f;
        rhs[2] += f;
    }
    jtj[2][2] = n as f64;
    jtj[1][0] = jtj[0][1];
    jtj[2][0] = jtj[0][2];
    jtj[2][1] = jtj[1][2];
    Some((jtj, rhs))
}

/// 3x3 linear solve with partial pivoting; None when singular.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let factor = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (entry, pivot) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= factor * pivot;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in (row + 1)..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

fn norm3(h: [f64; 3]) -> f64 {
    (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt()
}

struct BaselineState {
    q: Params3,
    value: f64,
    iterations: usize,
    rejections: usize,
    termination: Termination,
    trace: Option<Vec<TraceRow>>,
}

impl BaselineState {
    fn new(data: &NormalizedPointSet, init: &Circle, cfg: &BaselineConfig) -> Self {
        assert_eq!(
            init.frame,
            Frame::Normalized,
            "baselines run in the normalized frame"
        );
        let q = Params3::from_circle(init);
        let value = objective3(data, q);
        let mut state = BaselineState {
            q,
            value,
            iterations: 0,
            rejections: 0,
            termination: Termination::MaxIters,
            trace: cfg.trace.then(Vec::new),
        };
        state.record(0, f64::NAN, f64::NAN);
        state
    }

    fn record(&mut self, iter: usize, lambda: f64, step_norm: f64) {
        if let Some(rows) = self.trace.as_mut() {
            rows.push(TraceRow {
                iter,
                center: Vec2::new(self.q.a, self.q.b),
                value: self.value,
                grad_norm: f64::NAN,
                lambda,
                phase: Phase::Ar1,
                evaluator: crate::eval::EvaluatorKind::Standard,
                step_norm,
                h_max: f64::NAN,
                restarted: false,
            });
        }
    }

    fn into_report(self, grad_norm: f64) -> FitReport {
        FitReport {
            result: FitResult::CircleFound(Circle::normalized(
                self.q.a,
                self.q.b,
                self.q.r.max(0.0),
            )),
            iterations: self.iterations,
            inner_rejections: self.rejections,
            termination: self.termination,
            restarts: 0,
            final_gradient_norm: grad_norm,
            trace: self.trace,
        }
    }
}

/// Residual gradient norm |2 J^T f| of the three-parameter objective.
fn gradient3_norm(data: &NormalizedPointSet, q: Params3) -> f64 {
    normal_equations(data, q).map_or(f64::NAN, |(_, rhs)| 2.0 * norm3(rhs))
}

/// Classic Gauss-Newton on (a, b, R): every step is taken unconditionally,
/// as in the standard published implementations. `cfg.stop_rule` selects
/// between the classic sqrt(eps) stopping (GN) and the machine-precision
/// stopping (modified GN); the iterate sequences are identical until the
/// classic rule fires.
pub fn gauss_newton_fit(
    data: &NormalizedPointSet,
    init: &Circle,
    cfg: &BaselineConfig,
) -> FitReport {
    let threshold = cfg.stop_rule.threshold(cfg.machine_eps);
    let mut state = BaselineState::new(data, init, cfg);

    while state.iterations < cfg.max_iters {
        state.iterations += 1;
        let Some((jtj, rhs)) = normal_equations(data, state.q) else {
            state.termination = Termination::Diverged;
            break;
        };
        let Some(h) = solve3(jtj, rhs) else {
            state.termination = Termination::Diverged;
            break;
        };
        let hn = norm3(h);
        if !hn.is_finite() {
            state.termination = Termination::Diverged;
            break;
        }
        if hn < threshold * state.q.norm().max(1.0) {
            state.termination = Termination::StepBelowEps;
            break;
        }
        state.q = state.q.add(h);
        state.value = objective3(data, state.q);
        state.record(state.iterations, f64::NAN, hn);
        if state.q.center_norm() > cfg.divergence_box || !state.value.is_finite() {
            state.termination = Termination::Diverged;
            break;
        }
    }

    let grad = gradient3_norm(data, state.q);
    state.into_report(grad)
}

/// Classic Levenberg-Marquardt on (a, b, R): J^T J + lambda I damping,
/// objective-decrease acceptance, sqrt(eps) stopping by default. The damping
/// carries across iterations, which is what stalls it at sqrt(eps) accuracy
/// once objective comparisons drown in round-off.
pub fn lm_classic_fit(data: &NormalizedPointSet, init: &Circle, cfg: &BaselineConfig) -> FitReport {
    let threshold = cfg.stop_rule.threshold(cfg.machine_eps);
    let mut state = BaselineState::new(data, init, cfg);
    let mut lambda = cfg.lambda_init;

    'outer: while state.iterations < cfg.max_iters {
        state.iterations += 1;
        let Some((jtj, rhs)) = normal_equations(data, state.q) else {
            state.termination = Termination::Diverged;
            break;
        };
        loop {
            let mut damped = jtj;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += lambda;
            }
            let Some(h) = solve3(damped, rhs) else {
                state.termination = Termination::Diverged;
                break 'outer;
            };
            let hn = norm3(h);
            if !hn.is_finite() {
                state.termination = Termination::Diverged;
                break 'outer;
            }
            if hn < threshold * state.q.norm().max(1.0) {
                state.termination = Termination::StepBelowEps;
                break 'outer;
            }
            let candidate = state.q.add(h);
            let value = objective3(data, candidate);
            if value < state.value {
                state.q = candidate;
                state.value = value;
                lambda *= cfg.lambda_down;
                state.record(state.iterations, lambda, hn);
                break;
            }
            state.rejections += 1;
            lambda *= cfg.lambda_up;
        }
        if state.q.center_norm() > cfg.divergence_box {
            state.termination = Termination::Diverged;
            break;
        }
    }

    let grad = gradient3_norm(data, state.q);
    state.into_report(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize, PointSet};

    fn circumcircle_data() -> NormalizedPointSet {
        normalize(&PointSet::from_xy(&[(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)]).unwrap()).unwrap()
    }

    #[test]
    fn kasa_is_exact_on_circle_consistent_data() {
        let data = circumcircle_data();
        let circle = kasa_fit(&data).unwrap().denormalized(data.transform());
        assert!((circle.a - 1.0).abs() <= 1e-13);
        assert!((circle.b - 0.75).abs() <= 1e-13);
        assert!((circle.r - 1.25).abs() <= 1e-13);
    }

    #[test]
    fn kasa_on_symmetric_cross() {
        let data = normalize(
            &PointSet::from_xy(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]).unwrap(),
        )
        .unwrap();
        let c = kasa_fit(&data).unwrap();
        assert!(c.a.abs() < 1e-15);
        assert!(c.b.abs() < 1e-15);
        assert!((c.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kasa_rejects_collinear_data() {
        let data =
            normalize(&PointSet::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap()).unwrap();
        assert!(matches!(kasa_fit(&data), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn gauss_newton_converges_on_circumcircle_data() {
        let data = circumcircle_data();
        let init = kasa_fit(&data).unwrap();
        let report = gauss_newton_fit(&data, &init, &BaselineConfig::default());
        assert_eq!(report.termination, Termination::StepBelowEps);
        let c = report.circle().unwrap().denormalized(data.transform());
        assert!((c.a - 1.0).abs() < 1e-7);
        assert!((c.b - 0.75).abs() < 1e-7);
        assert!((c.r - 1.25).abs() < 1e-7);
    }

    #[test]
    fn modified_gauss_newton_reaches_machine_accuracy_on_circle_data() {
        // perturb the init so the eps stopping rule actually has to iterate
        let data = circumcircle_data();
        let kasa = kasa_fit(&data).unwrap();
        let init = Circle::normalized(kasa.a + 0.05, kasa.b - 0.03, kasa.r);
        let report = gauss_newton_fit(&data, &init, &BaselineConfig::modified());
        assert_eq!(report.termination, Termination::StepBelowEps);
        let c = report.circle().unwrap().denormalized(data.transform());
        assert!((c.a - 1.0).abs() < 1e-12);
        assert!((c.b - 0.75).abs() < 1e-12);
        assert!((c.r - 1.25).abs() < 1e-12);
    }

    #[test]
    fn lm_converges_on_circumcircle_data() {
        let data = circumcircle_data();
        let init = kasa_fit(&data).unwrap();
        let report = lm_classic_fit(&data, &init, &BaselineConfig::default());
        assert_eq!(report.termination, Termination::StepBelowEps);
        let c = report.circle().unwrap().denormalized(data.transform());
        assert!((c.a - 1.0).abs() < 1e-7);
        assert!((c.r - 1.25).abs() < 1e-7);
    }

    #[test]
    fn solve3_handles_pivoting() {
        let m = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]];
        let x = solve3(m, [3.0, 4.0, 10.0]).unwrap();
        assert_eq!(x, [4.0, 3.0, 5.0]);
        assert!(solve3(
            [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [1.0, 2.0, 3.0]
        )
        .is_none());
    }
}
