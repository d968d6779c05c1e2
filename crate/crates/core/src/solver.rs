//! The main fitting loop: damped full-Newton steps through a closed-form
//! 2x2 eigendecomposition, a two-phase acceptance rule (objective decrease
//! far from the minimum, gradient-norm decrease near it), and wrong-valley
//! restarts.

use serde::{Deserialize, Serialize};

use crate::baselines::kasa_fit;
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvaluatorKind};
use crate::geometry::{
    normalize, radius_for_center, Circle, FitResult, NormalizedPointSet, PointSet,
};
use crate::linalg::{Eigen2, Vec2};
use crate::valley::{line_fit, GuardAction, ValleyGuard};

/// Acceptance phase. AR1 accepts a step when the objective decreases; AR2,
/// active near the minimum, accepts when the gradient norm decreases, which
/// stays informative down to O(eps) instead of O(sqrt(eps)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Ar1,
    Ar2,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Ar1 => write!(f, "AR1"),
            Phase::Ar2 => write!(f, "AR2"),
        }
    }
}

/// Why a fit stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The step fell below machine precision relative to the iterate.
    StepBelowEps,
    /// The outer iteration budget was exhausted; the report carries the best
    /// iterate found.
    MaxIters,
    /// No best circle exists; the result is the best-fitting line.
    LineFallback,
    /// Iterates left the divergence box (baseline fits only; the main solver
    /// prevents this).
    Diverged,
}

/// Solver tunables. The defaults are the values used throughout the tests
/// and benchmarks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Gradient norm below which the acceptance rule switches from AR1 to
    /// AR2, permanently.
    pub eps_star: f64,
    /// Constant term of the step bound h_max = alpha1 |p| + alpha0.
    pub alpha0: f64,
    /// Proportional term of the step bound.
    pub alpha1: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_outer_iters: usize,
    pub max_inner_rejections: usize,
    /// Unit round-off used in the termination test |h| < eps max(|p|, 1).
    pub machine_eps: f64,
    /// Record the iterate trace in the report.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_star: 3e-8,
            alpha0: 0.1,
            alpha1: 0.1,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            max_outer_iters: 200,
            max_inner_rejections: 50,
            machine_eps: f64::EPSILON,
            trace: false,
        }
    }
}

/// Lower bound on lambda ensuring every eigen-component of the damped step
/// stays within `h_max`, which also makes H + lambda I positive definite.
/// `g` is the gradient expressed in the eigenbasis, g = Q^T grad.
pub fn lambda_min(g: Vec2, d1: f64, d2: f64, h_max: f64) -> f64 {
    (g.x.abs() / h_max - d1).max(g.y.abs() / h_max - d2)
}

/// Damped Newton step h = -Q diag(1/(d1+lambda), 1/(d2+lambda)) Q^T grad.
/// Fails if either damped eigenvalue is not positive.
pub fn step(eig: &Eigen2, gradient: Vec2, lambda: f64) -> Result<Vec2> {
    let e1 = eig.d1 + lambda;
    let e2 = eig.d2 + lambda;
    if e1 <= 0.0 || e2 <= 0.0 {
        return Err(Error::SingularDamping);
    }
    let g = eig.q.tr_mul_vec(gradient);
    Ok(-eig.q.mul_vec(Vec2::new(g.x / e1, g.y / e2)))
}

/// One recorded state of the iterate sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    /// Outer iterations completed when this state was reached (0 = start).
    pub iter: usize,
    pub center: Vec2,
    pub value: f64,
    pub grad_norm: f64,
    /// Damping used by the step that produced this state; NaN for the
    /// initial state and restarts.
    pub lambda: f64,
    /// Phase of the iteration that produced this state.
    pub phase: Phase,
    pub evaluator: EvaluatorKind,
    /// Norm of the accepted step that produced this state; NaN when the
    /// state was not produced by a step.
    pub step_norm: f64,
    /// Step bound alpha1 |p_prev| + alpha0 that applied to that step.
    pub h_max: f64,
    /// True when this state was set by a valley-guard restart.
    pub restarted: bool,
}

/// Fit outcome plus diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub result: FitResult,
    pub iterations: usize,
    /// Total rejected candidates across all inner loops.
    pub inner_rejections: usize,
    pub termination: Termination,
    pub restarts: usize,
    pub final_gradient_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

impl FitReport {
    pub fn circle(&self) -> Option<&Circle> {
        self.result.circle()
    }

    /// Maps the result to the raw frame; diagnostics are unchanged.
    pub fn denormalized(&self, t: crate::geometry::NormalizationTransform) -> FitReport {
        FitReport {
            result: self.result.denormalized(t),
            ..self.clone()
        }
    }
}

// The lambda_min bound controls the eigen-components, i.e. the max norm of
// the step. Dividing h_max by sqrt(2) before the bound turns that into a
// guarantee on the 2-norm: |h| <= sqrt(2) * (h_max / sqrt(2)) = h_max.
const MAX_NORM_MARGIN: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Fits a circle to normalized data starting from center `p0`.
///
/// Per outer iteration: evaluate F, grad, H; switch permanently to AR2 once
/// |grad| < eps_star; eigendecompose H; then an inner loop clamps lambda to
/// its lower bound, computes the damped step, terminates if the step is
/// below machine precision, and otherwise accepts or rejects the candidate
/// under the active rule, adjusting lambda accordingly. A valley guard runs
/// on every accepted iterate and can restart the search or end it with the
/// best-fitting line.
pub fn fit(data: &NormalizedPointSet, p0: Vec2, cfg: &SolverConfig) -> Result<FitReport> {
    if !p0.is_finite() {
        return Err(Error::DegenerateInput("non-finite initial center"));
    }
    let mut p = p0;
    let mut eval = evaluate_with_nudge(data, &mut p)?;

    let mut lambda = cfg.lambda_init;
    let mut phase = Phase::Ar1;
    let mut guard = ValleyGuard::new();
    let mut inner_rejections = 0usize;
    let mut iterations = 0usize;
    let mut termination = Termination::MaxIters;
    let mut line_result: Option<FitResult> = None;

    let mut trace: Option<Vec<TraceRow>> = cfg.trace.then(Vec::new);
    if let Some(rows) = trace.as_mut() {
        rows.push(TraceRow {
            iter: 0,
            center: p,
            value: eval.value,
            grad_norm: eval.gradient.norm(),
            lambda: f64::NAN,
            phase,
            evaluator: eval.evaluator,
            step_norm: f64::NAN,
            h_max: f64::NAN,
            restarted: false,
        });
    }

    'outer: while iterations < cfg.max_outer_iters {
        iterations += 1;
        let grad_norm = eval.gradient.norm();
        if grad_norm < cfg.eps_star {
            phase = Phase::Ar2; // one-way switch
        }

        let eig = crate::linalg::eig_sym_2x2(eval.hessian);
        let g = eig.q.tr_mul_vec(eval.gradient);
        let h_max = cfg.alpha1 * p.norm() + cfg.alpha0;
        let lam_min = lambda_min(g, eig.d1, eig.d2, h_max * MAX_NORM_MARGIN);
        if phase == Phase::Ar2 {
            lambda = 0.0;
        }

        let mut rejections = 0usize;
        loop {
            let lam = lambda.max(lam_min);
            let h = match step(&eig, eval.gradient, lam) {
                Ok(h) => h,
                Err(Error::SingularDamping) => {
                    // indefinite H with lambda still too small to fix it
                    lambda = cfg.lambda_up * lam.max(cfg.lambda_init);
                    inner_rejections += 1;
                    rejections += 1;
                    if rejections >= cfg.max_inner_rejections {
                        termination = Termination::StepBelowEps;
                        break 'outer;
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let step_norm = h.norm();
            if step_norm < cfg.machine_eps * p.norm().max(1.0) {
                termination = Termination::StepBelowEps;
                break 'outer;
            }

            let candidate = p + h;
            let cand_eval = match evaluate(data, candidate) {
                Ok(e) => e,
                Err(Error::CenterOnDataPoint) => {
                    // non-differentiable point: reject and damp harder
                    lambda = reject_lambda(phase, lam, cfg);
                    inner_rejections += 1;
                    rejections += 1;
                    if rejections >= cfg.max_inner_rejections {
                        termination = Termination::StepBelowEps;
                        break 'outer;
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };

            let accept = match phase {
                Phase::Ar1 => cand_eval.value < eval.value,
                Phase::Ar2 => cand_eval.gradient.norm() < grad_norm,
            };
            if accept {
                lambda = cfg.lambda_down * lam;
                p = candidate;
                eval = cand_eval;
                if let Some(rows) = trace.as_mut() {
                    rows.push(TraceRow {
                        iter: iterations,
                        center: p,
                        value: eval.value,
                        grad_norm: eval.gradient.norm(),
                        lambda: lam,
                        phase,
                        evaluator: eval.evaluator,
                        step_norm,
                        h_max,
                        restarted: false,
                    });
                }
                break;
            }
            lambda = reject_lambda(phase, lam, cfg);
            inner_rejections += 1;
            rejections += 1;
            if rejections >= cfg.max_inner_rejections {
                termination = Termination::StepBelowEps;
                break 'outer;
            }
        }

        match guard.check(data, p) {
            GuardAction::Proceed => {}
            GuardAction::Restart(restart) => {
                p = restart;
                eval = evaluate(data, p)?;
                lambda = cfg.lambda_init;
                if let Some(rows) = trace.as_mut() {
                    rows.push(TraceRow {
                        iter: iterations,
                        center: p,
                        value: eval.value,
                        grad_norm: eval.gradient.norm(),
                        lambda: f64::NAN,
                        phase,
                        evaluator: eval.evaluator,
                        step_norm: f64::NAN,
                        h_max: f64::NAN,
                        restarted: true,
                    });
                }
            }
            GuardAction::LineFallback => {
                termination = Termination::LineFallback;
                line_result = Some(line_fit(data));
                break 'outer;
            }
        }
    }

    let result = line_result.unwrap_or_else(|| {
        FitResult::CircleFound(Circle::normalized(p.x, p.y, radius_for_center(data, p)))
    });
    Ok(FitReport {
        result,
        iterations,
        inner_rejections,
        termination,
        restarts: guard.restarts(),
        final_gradient_norm: eval.gradient.norm(),
        trace,
    })
}

/// AR1 resumes from the clamped lambda; AR2 starts each iteration at zero,
/// so its rejections resume from max(lambda used, lambda_init) to escape the
/// zero state.
fn reject_lambda(phase: Phase, lam: f64, cfg: &SolverConfig) -> f64 {
    match phase {
        Phase::Ar1 => cfg.lambda_up * lam,
        Phase::Ar2 => cfg.lambda_up * lam.max(cfg.lambda_init),
    }
}

/// An initial center sitting exactly on a data point cannot be evaluated;
/// nudge it off deterministically.
fn evaluate_with_nudge(data: &NormalizedPointSet, p: &mut Vec2) -> Result<crate::eval::Evaluation> {
    match evaluate(data, *p) {
        Err(Error::CenterOnDataPoint) => {
            for k in 1..=4 {
                let nudge = 1e-9 * k as f64;
                let candidate = *p + Vec2::new(nudge, 1.5 * nudge);
                if let Ok(e) = evaluate(data, candidate) {
                    *p = candidate;
                    return Ok(e);
                }
            }
            Err(Error::CenterOnDataPoint)
        }
        other => other,
    }
}

/// Builds a line-fallback report without running the solver; used when the
/// algebraic initializer already reports collinear data.
pub fn line_fallback_report(data: &NormalizedPointSet) -> FitReport {
    FitReport {
        result: line_fit(data),
        iterations: 0,
        inner_rejections: 0,
        termination: Termination::LineFallback,
        restarts: 0,
        final_gradient_norm: f64::NAN,
        trace: None,
    }
}

/// Fits a circle to raw points: normalize, initialize from the algebraic
/// fit (falling back to a line on collinear data), run the solver, and map
/// the result back to the raw frame.
pub fn fit_circle(points: &PointSet, cfg: &SolverConfig) -> Result<FitReport> {
    let data = normalize(points)?;
    let report = match kasa_fit(&data) {
        Ok(init) => fit(&data, init.center(), cfg)?,
        Err(Error::DegenerateInput(_)) => line_fallback_report(&data),
        Err(e) => return Err(e),
    };
    Ok(report.denormalized(data.transform()))
}
