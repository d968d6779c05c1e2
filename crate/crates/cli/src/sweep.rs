//! Formula-accuracy sweep: compares the standard and big-circle objective
//! values against a double-double reference across center distances.

use serde::Serialize;

use circlefit::eval::{evaluate_big_circle_unchecked, evaluate_standard};
use circlefit::oracle::dd_reduced_objective;
use circlefit::{NormalizedPointSet, Vec2};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    /// Center distance from the origin.
    pub d: f64,
    pub f_standard: f64,
    pub f_big_circle: f64,
    /// Reference value (double-double, rounded).
    pub f_reference: f64,
    /// Accurate decimal digits of each formula vs. the reference, in [0, 16].
    pub digits_standard: f64,
    pub digits_big_circle: f64,
}

fn digits(value: f64, reference: f64) -> f64 {
    if !value.is_finite() {
        return 0.0;
    }
    let rel = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
    if rel == 0.0 {
        16.0
    } else if rel >= 1.0 {
        0.0
    } else {
        (-rel.log10()).clamp(0.0, 16.0)
    }
}

/// Evaluates F by both formula families at centers `d * (cos theta, sin
/// theta)` and counts their accurate digits against the double-double
/// reference.
pub fn evaluator_sweep(data: &NormalizedPointSet, d_values: &[f64], theta: f64) -> Vec<SweepRow> {
    let direction = Vec2::new(theta.cos(), theta.sin());
    d_values
        .iter()
        .map(|&d| {
            let center = direction * d;
            let reference = dd_reduced_objective(data, center).to_f64();
            let f_standard = evaluate_standard(data, center)
                .map(|e| e.value)
                .unwrap_or(f64::NAN);
            let f_big_circle = evaluate_big_circle_unchecked(data, center)
                .map(|e| e.value)
                .unwrap_or(f64::NAN);
            SweepRow {
                d,
                f_standard,
                f_big_circle,
                f_reference: reference,
                digits_standard: digits(f_standard, reference),
                digits_big_circle: digits(f_big_circle, reference),
            }
        })
        .collect()
}

/// `steps` log-spaced values covering [lo, hi] inclusive.
pub fn log_spaced(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    assert!(
        lo > 0.0 && hi > lo && steps >= 2,
        "need 0 < lo < hi, steps >= 2"
    );
    let ratio = (hi / lo).ln();
    (0..steps)
        .map(|i| lo * (ratio * i as f64 / (steps - 1) as f64).exp())
        .collect()
}

/// CSV rows `d,f_standard,f_big_circle,f_reference,digits_standard,digits_big_circle`.
pub fn write_sweep_csv<W: std::io::Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "d,f_standard,f_big_circle,f_reference,digits_standard,digits_big_circle"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.d,
            r.f_standard,
            r.f_big_circle,
            r.f_reference,
            r.digits_standard,
            r.digits_big_circle
        )?;
    }
    Ok(())
}
