//! Monte-Carlo campaigns: seeded sample generation, per-run fits with the
//! selected algorithms, classification, oracle scoring, and aggregation.
//!
//! Reproducibility: each run draws from a ChaCha8 stream addressed by
//! (campaign seed, run index), and floats are derived from raw 64-bit output
//! by the fixed `(u >> 11) * 2^-53` mapping, so campaigns are bit-identical
//! across platforms and thread schedules. Timing statistics are the one
//! exception and can be disabled.

use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use circlefit::baselines::{gauss_newton_fit, kasa_fit, lm_classic_fit, BaselineConfig};
use circlefit::oracle::{oracle_fit, score};
use circlefit::solver::line_fallback_report;
use circlefit::{
    fit, normalize, radius_for_center, Circle, FitReport, PointSet, SolverConfig, Termination, Vec2,
};

/// Histogram buckets for the accuracy digit count k in [0, 16].
pub const K_BUCKETS: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// The main solver (full Newton, two-phase acceptance, valley guard).
    New,
    /// Classic Gauss-Newton, sqrt(eps) stopping.
    Gn,
    /// Modified Gauss-Newton, eps stopping.
    Gnm,
    /// Classic Levenberg-Marquardt, sqrt(eps) stopping.
    Lm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::New, Algorithm::Gn, Algorithm::Gnm, Algorithm::Lm];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::New => "new",
            Algorithm::Gn => "gn",
            Algorithm::Gnm => "gnm",
            Algorithm::Lm => "lm",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "new" => Ok(Algorithm::New),
            "gn" => Ok(Algorithm::Gn),
            "gnm" => Ok(Algorithm::Gnm),
            "lm" => Ok(Algorithm::Lm),
            other => Err(format!(
                "unknown algorithm `{other}` (expected new|gn|gnm|lm)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Initialize from the Kasa algebraic fit.
    Kasa,
    /// Random center in a square, radius set to the mean distance.
    RandomCenter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub runs: usize,
    pub n_points: usize,
    /// Half-width of the square the sample points are drawn from.
    pub point_box: f64,
    pub init_mode: InitMode,
    /// Half-width of the square random centers are drawn from
    /// (normalized frame).
    pub random_center_box: f64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Score only runs where every selected algorithm converged to the same
    /// minimum (pairwise parameter distance < 1e-2).
    pub same_min_only: bool,
    /// Keep per-run records in the report.
    pub keep_runs: bool,
    /// Collect wall-clock timing (not reproducible; off for bit-identical
    /// reports).
    pub measure_time: bool,
}

impl Campaign {
    pub fn new(runs: usize, seed: u64) -> Self {
        Campaign {
            runs,
            n_points: 8,
            point_box: 1.0,
            init_mode: InitMode::Kasa,
            random_center_box: 5.0,
            seed,
            algorithms: vec![Algorithm::New],
            same_min_only: false,
            keep_runs: false,
            measure_time: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CampaignError {
    #[error("campaign needs at least one run")]
    NoRuns,
    #[error("samples need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("campaign needs at least one algorithm")]
    NoAlgorithms,
    #[error("point box half-width must be positive")]
    BadPointBox,
}

/// How a single run ended for one algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Converged,
    Diverged,
    LineFallback,
    MaxIters,
}

fn classify(algorithm: Algorithm, report: &FitReport) -> Classification {
    match report.termination {
        Termination::StepBelowEps => Classification::Converged,
        Termination::Diverged => Classification::Diverged,
        Termination::LineFallback => Classification::LineFallback,
        // a baseline that burns its whole budget without stopping has, for
        // benchmark purposes, diverged; the main solver's budget exhaustion
        // is kept visible as its own bucket
        Termination::MaxIters if algorithm != Algorithm::New => Classification::Diverged,
        Termination::MaxIters => Classification::MaxIters,
    }
}

/// One algorithm's outcome on one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub classification: Classification,
    pub iterations: usize,
    pub restarts: usize,
    /// Accuracy digits vs. the oracle; None when the run was not scored.
    pub k: Option<u32>,
    /// Final circle in the normalized frame, when one was produced.
    pub circle: Option<Circle>,
    #[serde(skip)]
    pub elapsed_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub results: Vec<AlgorithmRun>,
    /// True when the run passed the scoring filter and has oracle scores.
    pub scored: bool,
    /// True when the run passed the filter but the oracle refinement failed.
    pub oracle_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    pub converged: usize,
    pub diverged: usize,
    pub line_fallback: usize,
    pub max_iters: usize,
    pub divergence_pct: f64,
    /// Mean outer iterations over converged runs.
    pub mean_iterations: f64,
    /// Total valley-guard restarts (main solver only).
    pub restarts: usize,
    /// Histogram of accuracy digits k = 0..=16 over scored runs.
    pub k_histogram: [u64; K_BUCKETS],
    pub scored_runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_time_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub campaign: Campaign,
    pub stats: Vec<AlgorithmStats>,
    /// Runs that passed the scoring filter.
    pub scored_runs: usize,
    /// Runs dropped because the oracle refinement failed.
    pub oracle_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunRecord>>,
}

impl CampaignReport {
    pub fn stats_for(&self, algorithm: Algorithm) -> &AlgorithmStats {
        self.stats
            .iter()
            .find(|s| s.algorithm == algorithm)
            .expect("algorithm not part of the campaign")
    }
}

/// Uniform double in [0, 1) from the top 53 bits of a raw 64-bit draw; fixed
/// mapping so streams are portable across rand versions and platforms.
fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform_symmetric(rng: &mut impl RngCore, half_width: f64) -> f64 {
    (2.0 * unit_f64(rng) - 1.0) * half_width
}

/// `n` i.i.d. uniform points in [-w, w]^2, deterministic in the generator
/// state.
pub fn generate_sample(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> PointSet {
    let points = (0..n)
        .map(|_| {
            Vec2::new(
                uniform_symmetric(rng, half_width),
                uniform_symmetric(rng, half_width),
            )
        })
        .collect();
    PointSet::new(points).expect("generated coordinates are finite")
}

/// Generator for one run: the campaign seed selects the key, the run index
/// selects the stream.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

fn run_one(c: &Campaign, run: usize) -> RunRecord {
    let mut rng = run_rng(c.seed, run);
    let sample = generate_sample(&mut rng, c.n_points, c.point_box);
    // the random-center draw happens unconditionally so the stream layout
    // does not depend on the init mode
    let random_center = Vec2::new(
        uniform_symmetric(&mut rng, c.random_center_box),
        uniform_symmetric(&mut rng, c.random_center_box),
    );

    let Ok(data) = normalize(&sample) else {
        // coincident sample (measure zero): nothing to fit
        let results = c
            .algorithms
            .iter()
            .map(|&algorithm| AlgorithmRun {
                algorithm,
                classification: Classification::LineFallback,
                iterations: 0,
                restarts: 0,
                k: None,
                circle: None,
                elapsed_us: 0.0,
            })
            .collect();
        return RunRecord {
            run,
            results,
            scored: false,
            oracle_failed: false,
        };
    };

    let init = match c.init_mode {
        InitMode::Kasa => kasa_fit(&data).ok(),
        InitMode::RandomCenter => Some(Circle::normalized(
            random_center.x,
            random_center.y,
            radius_for_center(&data, random_center),
        )),
    };

    let solver_cfg = SolverConfig::default();
    let sqrt_eps_cfg = BaselineConfig::default();
    let eps_cfg = BaselineConfig::modified();

    let mut results: Vec<AlgorithmRun> = c
        .algorithms
        .iter()
        .map(|&algorithm| {
            let start = c.measure_time.then(Instant::now);
            let report = match &init {
                None => line_fallback_report(&data),
                Some(circle) => match algorithm {
                    Algorithm::New => {
                        fit(&data, circle.center(), &solver_cfg).expect("solver failed")
                    }
                    Algorithm::Gn => gauss_newton_fit(&data, circle, &sqrt_eps_cfg),
                    Algorithm::Gnm => gauss_newton_fit(&data, circle, &eps_cfg),
                    Algorithm::Lm => lm_classic_fit(&data, circle, &sqrt_eps_cfg),
                },
            };
            let elapsed_us = start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e6);
            AlgorithmRun {
                algorithm,
                classification: classify(algorithm, &report),
                iterations: report.iterations,
                restarts: report.restarts,
                k: None,
                circle: report.circle().copied(),
                elapsed_us,
            }
        })
        .collect();

    let (scored, oracle_failed) = score_run(c, &data, &mut results);
    RunRecord {
        run,
        results,
        scored,
        oracle_failed,
    }
}

/// Oracle-scores the converged results of a run; returns (scored,
/// oracle_failed). Under `same_min_only` the run is scored only if every
/// selected algorithm converged and all circles agree pairwise within 1e-2.
fn score_run(
    c: &Campaign,
    data: &circlefit::NormalizedPointSet,
    results: &mut [AlgorithmRun],
) -> (bool, bool) {
    if c.same_min_only {
        let all_converged = results
            .iter()
            .all(|r| r.classification == Classification::Converged && r.circle.is_some());
        if !all_converged {
            return (false, false);
        }
        let circles: Vec<&Circle> = results.iter().filter_map(|r| r.circle.as_ref()).collect();
        for i in 0..circles.len() {
            for j in (i + 1)..circles.len() {
                if param_distance(circles[i], circles[j]) >= 1e-2 {
                    return (false, false);
                }
            }
        }
    }

    // one oracle per run, seeded by the most trustworthy converged circle
    let seed = results
        .iter()
        .find(|r| r.algorithm == Algorithm::New && r.classification == Classification::Converged)
        .or_else(|| {
            results
                .iter()
                .find(|r| r.classification == Classification::Converged)
        })
        .and_then(|r| r.circle);
    let Some(seed) = seed else {
        return (false, false);
    };
    let Ok(oracle) = oracle_fit(data, &seed) else {
        return (false, true);
    };
    for r in results.iter_mut() {
        if r.classification == Classification::Converged {
            if let Some(circle) = &r.circle {
                r.k = Some(score(circle, &oracle).k);
            }
        }
    }
    (true, false)
}

fn param_distance(a: &Circle, b: &Circle) -> f64 {
    let pa = a.params();
    let pb = b.params();
    pa.iter()
        .zip(pb)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Runs the campaign. Runs execute in parallel; aggregation is performed in
/// run order, so the report is independent of scheduling.
pub fn run_campaign(c: &Campaign) -> Result<CampaignReport, CampaignError> {
    if c.runs == 0 {
        return Err(CampaignError::NoRuns);
    }
    if c.n_points < 3 {
        return Err(CampaignError::TooFewPoints(c.n_points));
    }
    if c.algorithms.is_empty() {
        return Err(CampaignError::NoAlgorithms);
    }
    if !c.point_box.is_finite() || c.point_box <= 0.0 {
        return Err(CampaignError::BadPointBox);
    }

    let records: Vec<RunRecord> = (0..c.runs)
        .into_par_iter()
        .map(|run| run_one(c, run))
        .collect();

    let mut stats: Vec<AlgorithmStats> = c
        .algorithms
        .iter()
        .map(|&algorithm| AlgorithmStats {
            algorithm,
            converged: 0,
            diverged: 0,
            line_fallback: 0,
            max_iters: 0,
            divergence_pct: 0.0,
            mean_iterations: 0.0,
            restarts: 0,
            k_histogram: [0; K_BUCKETS],
            scored_runs: 0,
            mean_time_us: None,
        })
        .collect();
    let mut iter_sums = vec![0u64; c.algorithms.len()];
    let mut time_sums = vec![0.0f64; c.algorithms.len()];
    let mut scored_runs = 0usize;
    let mut oracle_failures = 0usize;

    for record in &records {
        if record.scored {
            scored_runs += 1;
        }
        if record.oracle_failed {
            oracle_failures += 1;
        }
        for (slot, result) in record.results.iter().enumerate() {
            let s = &mut stats[slot];
            match result.classification {
                Classification::Converged => {
                    s.converged += 1;
                    iter_sums[slot] += result.iterations as u64;
                }
                Classification::Diverged => s.diverged += 1,
                Classification::LineFallback => s.line_fallback += 1,
                Classification::MaxIters => s.max_iters += 1,
            }
            s.restarts += result.restarts;
            time_sums[slot] += result.elapsed_us;
            if let Some(k) = result.k {
                s.k_histogram[k.min(16) as usize] += 1;
                s.scored_runs += 1;
            }
        }
    }
    for (slot, s) in stats.iter_mut().enumerate() {
        s.divergence_pct = 100.0 * s.diverged as f64 / c.runs as f64;
        s.mean_iterations = if s.converged > 0 {
            iter_sums[slot] as f64 / s.converged as f64
        } else {
            f64::NAN
        };
        if c.measure_time {
            s.mean_time_us = Some(time_sums[slot] / c.runs as f64);
        }
    }

    Ok(CampaignReport {
        campaign: c.clone(),
        stats,
        scored_runs,
        oracle_failures,
        runs: c.keep_runs.then_some(records),
    })
}

/// Writes the per-algorithm k histograms as CSV rows `algorithm,k,count`.
pub fn write_histogram_csv<W: std::io::Write>(
    mut w: W,
    report: &CampaignReport,
) -> std::io::Result<()> {
    writeln!(w, "algorithm,k,count")?;
    for s in &report.stats {
        for (k, count) in s.k_histogram.iter().enumerate() {
            writeln!(w, "{},{},{}", s.algorithm.name(), k, count)?;
        }
    }
    Ok(())
}
