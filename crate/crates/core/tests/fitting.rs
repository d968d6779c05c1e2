//! End-to-end solver behavior: frame invariance, the acceptance-rule
//! contract, valley restarts, and agreement with the baseline fits.

mod common;

use circlefit::baselines::{gauss_newton_fit, kasa_fit, lm_classic_fit, BaselineConfig};
use circlefit::valley::{build_valley_frame, BOX_LIMIT};
use circlefit::{fit, fit_circle, normalize, Phase, PointSet, SolverConfig, Termination, Vec2};
use common::random_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parabola_arc(rng: &mut ChaCha8Rng) -> PointSet {
    let n = 12;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            (x, x * x + rng.random_range(-1e-3..1e-3))
        })
        .collect();
    PointSet::from_xy(&pts).unwrap()
}

#[test]
fn fits_are_invariant_under_translation_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let cfg = SolverConfig::default();
    for _ in 0..25 {
        let raw: Vec<(f64, f64)> = (0..8)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let base = fit_circle(&PointSet::from_xy(&raw).unwrap(), &cfg).unwrap();
        let Some(base_circle) = base.circle().copied() else {
            continue;
        };

        let (tx, ty) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let shifted: Vec<(f64, f64)> = raw.iter().map(|&(x, y)| (x + tx, y + ty)).collect();
        let moved = fit_circle(&PointSet::from_xy(&shifted).unwrap(), &cfg).unwrap();
        let moved_circle = moved.circle().unwrap();
        let scale = base_circle
            .params()
            .iter()
            .map(|p| p.abs())
            .fold(1.0, f64::max);
        assert!((moved_circle.a - (base_circle.a + tx)).abs() / scale <= 1e-10);
        assert!((moved_circle.b - (base_circle.b + ty)).abs() / scale <= 1e-10);
        assert!((moved_circle.r - base_circle.r).abs() / scale <= 1e-10);

        let factor = rng.random_range(0.1..20.0);
        let scaled: Vec<(f64, f64)> = raw.iter().map(|&(x, y)| (factor * x, factor * y)).collect();
        let grown = fit_circle(&PointSet::from_xy(&scaled).unwrap(), &cfg).unwrap();
        let grown_circle = grown.circle().unwrap();
        let scale = scale * factor;
        assert!((grown_circle.a - factor * base_circle.a).abs() / scale <= 1e-10);
        assert!((grown_circle.b - factor * base_circle.b).abs() / scale <= 1e-10);
        assert!((grown_circle.r - factor * base_circle.r).abs() / scale <= 1e-10);
    }
}

#[test]
fn trace_satisfies_the_acceptance_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let cfg = SolverConfig {
        trace: true,
        ..SolverConfig::default()
    };
    for _ in 0..20 {
        let data = random_sample(&mut rng, 8);
        let Ok(init) = kasa_fit(&data) else { continue };
        let report = fit(&data, init.center(), &cfg).unwrap();
        let rows = report.trace.as_ref().unwrap();

        let mut switched = false;
        for pair in rows.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if prev.grad_norm < cfg.eps_star {
                switched = true;
            }
            if next.restarted {
                continue;
            }
            // phase of the step that produced `next` honors the switch state
            assert_eq!(next.phase == Phase::Ar2, switched, "switch not exact");
            match next.phase {
                Phase::Ar1 => assert!(next.value < prev.value, "AR1 must decrease F"),
                Phase::Ar2 => assert!(next.grad_norm < prev.grad_norm, "AR2 must decrease |grad|"),
            }
            assert!(
                next.step_norm <= next.h_max * (1.0 + 1e-12),
                "step {} exceeds bound {}",
                next.step_norm,
                next.h_max
            );
        }
        assert_eq!(report.termination, Termination::StepBelowEps);
        assert!(report.final_gradient_norm <= 1e-12);
    }
}

#[test]
fn ar2_phase_collapses_the_gradient_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let cfg = SolverConfig {
        trace: true,
        ..SolverConfig::default()
    };
    let mut worst_accepted = 0usize;
    for _ in 0..200 {
        let data = random_sample(&mut rng, 8);
        let Ok(init) = kasa_fit(&data) else { continue };
        let report = fit(&data, init.center(), &cfg).unwrap();
        if report.termination != Termination::StepBelowEps {
            continue;
        }
        let rows = report.trace.as_ref().unwrap();
        let ar2: Vec<_> = rows
            .iter()
            .filter(|r| r.phase == Phase::Ar2 && r.step_norm.is_finite())
            .collect();
        // quadratic convergence: from |grad| < eps_star, at most two accepted
        // undamped Newton steps reach the round-off floor
        if ar2.len() >= 2 {
            assert!(
                ar2[1].grad_norm <= 1e-12,
                "gradient {} after two AR2 steps",
                ar2[1].grad_norm
            );
        }
        // past the floor, accepted steps are record lows of evaluation noise;
        // the damping schedule keeps that tail short
        worst_accepted = worst_accepted.max(ar2.len());
    }
    assert!(
        worst_accepted <= 6,
        "AR2 phase took {worst_accepted} accepted steps"
    );
}

#[test]
fn wrong_valley_start_restarts_once_and_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    for _ in 0..10 {
        let raw = parabola_arc(&mut rng);
        let data = normalize(&raw).unwrap();
        let frame = build_valley_frame(&data).unwrap();
        assert_eq!(frame.z_sign, 1.0, "parabola opens upward");

        let cfg = SolverConfig {
            trace: true,
            ..SolverConfig::default()
        };
        let reference = fit(&data, kasa_fit(&data).unwrap().center(), &cfg).unwrap();
        let ref_circle = reference.circle().unwrap();

        // start deep in the wrong valley (below the x axis, |b| > L)
        let forced = fit(&data, Vec2::new(0.0, -150.0), &cfg).unwrap();
        assert_eq!(forced.restarts, 1, "expected exactly one restart");
        let rows = forced.trace.as_ref().unwrap();
        let restart_row = rows.iter().find(|r| r.restarted).unwrap();
        let expected = frame
            .rotation
            .mul_vec(Vec2::new(0.0, frame.z_sign * BOX_LIMIT));
        assert!((restart_row.center - expected).norm() <= 1e-12);

        let forced_circle = forced.circle().unwrap();
        assert_eq!(forced.termination, Termination::StepBelowEps);
        for (a, b) in forced_circle.params().iter().zip(ref_circle.params()) {
            assert!(
                (a - b).abs() <= 1e-10,
                "valley restart found another circle"
            );
        }
    }
}

#[test]
fn kasa_initialized_solver_converges_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    let cfg = SolverConfig::default();
    for _ in 0..500 {
        let data = random_sample(&mut rng, 8);
        let Ok(init) = kasa_fit(&data) else { continue };
        let report = fit(&data, init.center(), &cfg).unwrap();
        assert_eq!(report.termination, Termination::StepBelowEps);
        assert!(report.final_gradient_norm <= 1e-12);
    }
}

#[test]
fn modified_gauss_newton_tracks_classic_until_it_stops() {
    let mut rng = ChaCha8Rng::seed_from_u64(306);
    let gn_cfg = BaselineConfig {
        trace: true,
        ..BaselineConfig::default()
    };
    let gnm_cfg = BaselineConfig {
        trace: true,
        ..BaselineConfig::modified()
    };
    for _ in 0..50 {
        let data = random_sample(&mut rng, 8);
        let Ok(init) = kasa_fit(&data) else { continue };
        let gn = gauss_newton_fit(&data, &init, &gn_cfg);
        let gnm = gauss_newton_fit(&data, &init, &gnm_cfg);
        let gn_rows = gn.trace.as_ref().unwrap();
        let gnm_rows = gnm.trace.as_ref().unwrap();
        assert!(gnm_rows.len() >= gn_rows.len());
        for (a, b) in gn_rows.iter().zip(gnm_rows.iter()) {
            assert_eq!(a.center, b.center, "iterate sequences must agree");
            assert_eq!(a.value, b.value);
        }
    }
}

#[test]
fn all_fits_agree_at_a_shared_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(307);
    let cfg = SolverConfig::default();
    let base = BaselineConfig::default();
    let modified = BaselineConfig::modified();
    let mut compared = 0;
    for _ in 0..100 {
        let data = random_sample(&mut rng, 8);
        let Ok(init) = kasa_fit(&data) else { continue };
        let new = fit(&data, init.center(), &cfg).unwrap();
        if new.termination != Termination::StepBelowEps {
            continue;
        }
        let new_params = new.circle().unwrap().params();
        let others = [
            gauss_newton_fit(&data, &init, &base),
            gauss_newton_fit(&data, &init, &modified),
            lm_classic_fit(&data, &init, &base),
        ];
        let all_near = others.iter().all(|r| {
            r.termination == Termination::StepBelowEps
                && r.circle()
                    .is_some_and(|c| dist3(c.params(), new_params) < 1e-2)
        });
        if !all_near {
            continue;
        }
        compared += 1;
        for r in &others {
            assert!(
                dist3(r.circle().unwrap().params(), new_params) <= 1e-4,
                "converged fits disagree beyond 1e-4"
            );
        }
    }
    assert!(compared >= 50, "too few comparable runs: {compared}");
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
