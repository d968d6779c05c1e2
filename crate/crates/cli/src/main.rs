use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use circlefit::baselines::{gauss_newton_fit, kasa_fit, lm_classic_fit, BaselineConfig};
use circlefit::io::{read_points_csv_path, write_trace_csv};
use circlefit::solver::line_fallback_report;
use circlefit::{fit, normalize, radius_for_center, Circle, FitReport, SolverConfig, Vec2};
use circlefit_cli::campaign::{run_campaign, write_histogram_csv, Algorithm, Campaign, InitMode};
use circlefit_cli::sweep::{evaluator_sweep, log_spaced, write_sweep_csv};

#[derive(Parser)]
#[command(
    name = "circlefit",
    about = "Geometric circle fitting and benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Main solver (full Newton, two-phase acceptance, valley guard).
    New,
    /// Classic Gauss-Newton, sqrt(eps) stopping.
    Gn,
    /// Modified Gauss-Newton, eps stopping.
    Gnm,
    /// Classic Levenberg-Marquardt, sqrt(eps) stopping.
    Lm,
    /// Kasa algebraic fit only (no iterations).
    Kasa,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Kasa,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a single point set from a two-column x,y CSV file.
    Fit {
        /// Input CSV (optional header row).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::New)]
        method: Method,
        /// Initial guess: `kasa` or an explicit raw-frame center `x,y`.
        #[arg(long, default_value = "kasa")]
        init: String,
        /// Write the iterate trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a Monte-Carlo campaign over random samples and write a JSON report.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        /// Points per sample.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InitArg::Kasa)]
        init: InitArg,
        /// Comma-separated subset of new,gn,gnm,lm.
        #[arg(long, default_value = "new")]
        methods: String,
        /// Output JSON report path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the k-digit histograms as CSV.
        #[arg(long)]
        hist: Option<PathBuf>,
        /// Half-width of the sample square.
        #[arg(long, default_value_t = 1.0)]
        point_box: f64,
        /// Half-width of the random-center square (normalized frame).
        #[arg(long, default_value_t = 5.0)]
        center_box: f64,
        /// Score only runs where all methods reached the same minimum.
        #[arg(long)]
        same_min_only: bool,
        /// Keep per-run records in the report.
        #[arg(long)]
        keep_runs: bool,
        /// Skip wall-clock timing so reports are bit-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Compare both objective formulas against the double-double reference
    /// across center distances, writing CSV rows of accurate digits.
    Sweep {
        /// Input CSV of sample points.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        d_min: f64,
        #[arg(long, default_value_t = 1e8)]
        d_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Direction of the center ray, degrees from the +x axis.
        #[arg(long, default_value_t = 90.0)]
        theta_deg: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct FitSummary<'a> {
    method: &'a str,
    #[serde(flatten)]
    report: &'a FitReport,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fit {
            input,
            method,
            init,
            trace,
        } => run_fit(input, method, &init, trace),
        Command::Bench {
            runs,
            n,
            seed,
            init,
            methods,
            out,
            hist,
            point_box,
            center_box,
            same_min_only,
            keep_runs,
            no_timing,
        } => {
            let algorithms = parse_methods(&methods)?;
            let campaign = Campaign {
                runs,
                n_points: n,
                point_box,
                init_mode: match init {
                    InitArg::Kasa => InitMode::Kasa,
                    InitArg::Random => InitMode::RandomCenter,
                },
                random_center_box: center_box,
                seed,
                algorithms,
                same_min_only,
                keep_runs,
                measure_time: !no_timing,
            };
            let report = run_campaign(&campaign)?;
            let file =
                File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            serde_json::to_writer_pretty(BufWriter::new(file), &report)?;
            if let Some(hist_path) = hist {
                let file = File::create(&hist_path)
                    .with_context(|| format!("cannot create {}", hist_path.display()))?;
                write_histogram_csv(BufWriter::new(file), &report)?;
            }
            for s in &report.stats {
                eprintln!(
                    "{:>4}: {} converged, {} diverged ({:.2}%), {} line, {} max-iters, mean iters {:.1}",
                    s.algorithm.name(),
                    s.converged,
                    s.diverged,
                    s.divergence_pct,
                    s.line_fallback,
                    s.max_iters,
                    s.mean_iterations
                );
            }
            Ok(())
        }
        Command::Sweep {
            input,
            d_min,
            d_max,
            steps,
            theta_deg,
            out,
        } => {
            if !d_min.is_finite()
                || !d_max.is_finite()
                || d_min <= 0.0
                || d_max <= d_min
                || steps < 2
            {
                bail!("need 0 < d-min < d-max and steps >= 2");
            }
            let points = read_points_csv_path(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let data = normalize(&points)?;
            let rows = evaluator_sweep(
                &data,
                &log_spaced(d_min, d_max, steps),
                theta_deg.to_radians(),
            );
            let file =
                File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            write_sweep_csv(BufWriter::new(file), &rows)?;
            Ok(())
        }
    }
}

fn parse_methods(spec: &str) -> Result<Vec<Algorithm>> {
    let mut algorithms = Vec::new();
    for part in spec.split(',') {
        let algorithm: Algorithm = part.parse().map_err(anyhow::Error::msg)?;
        if !algorithms.contains(&algorithm) {
            algorithms.push(algorithm);
        }
    }
    if algorithms.is_empty() {
        bail!("--methods needs at least one of new,gn,gnm,lm");
    }
    Ok(algorithms)
}

fn run_fit(input: PathBuf, method: Method, init: &str, trace: Option<PathBuf>) -> Result<()> {
    let points =
        read_points_csv_path(&input).with_context(|| format!("cannot read {}", input.display()))?;
    let data = normalize(&points)?;
    let transform = data.transform();

    // initial circle in the normalized frame
    let init_circle = match init {
        "kasa" => kasa_fit(&data).ok(),
        spec => {
            let center_raw = parse_center(spec)?;
            let center = Vec2::new(
                (center_raw.x - transform.x_mean) / transform.scale,
                (center_raw.y - transform.y_mean) / transform.scale,
            );
            Some(Circle::normalized(
                center.x,
                center.y,
                radius_for_center(&data, center),
            ))
        }
    };

    let solver_cfg = SolverConfig {
        trace: trace.is_some(),
        ..SolverConfig::default()
    };
    let trace_cfg = BaselineConfig {
        trace: trace.is_some(),
        ..BaselineConfig::default()
    };
    let trace_cfg_modified = BaselineConfig {
        trace: trace.is_some(),
        ..BaselineConfig::modified()
    };

    let report = match (&init_circle, method) {
        (None, _) => line_fallback_report(&data),
        (Some(c), Method::New) => fit(&data, c.center(), &solver_cfg)?,
        (Some(c), Method::Gn) => gauss_newton_fit(&data, c, &trace_cfg),
        (Some(c), Method::Gnm) => gauss_newton_fit(&data, c, &trace_cfg_modified),
        (Some(c), Method::Lm) => lm_classic_fit(&data, c, &trace_cfg),
        (Some(c), Method::Kasa) => FitReport {
            result: circlefit::FitResult::CircleFound(*c),
            iterations: 0,
            inner_rejections: 0,
            termination: circlefit::Termination::StepBelowEps,
            restarts: 0,
            final_gradient_norm: f64::NAN,
            trace: None,
        },
    };

    if let Some(path) = trace {
        let rows = report.trace.as_deref().unwrap_or(&[]);
        let file =
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        write_trace_csv(BufWriter::new(file), rows)?;
    }

    let raw = report.denormalized(transform);
    let method_name = match method {
        Method::New => "new",
        Method::Gn => "gn",
        Method::Gnm => "gnm",
        Method::Lm => "lm",
        Method::Kasa => "kasa",
    };
    let summary = FitSummary {
        method: method_name,
        report: &raw,
    };
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &summary)?;
    writeln!(stdout)?;
    Ok(())
}

fn parse_center(spec: &str) -> Result<Vec2> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        bail!("--init expects `kasa` or `x,y`, got `{spec}`");
    }
    let x: f64 = parts[0].trim().parse().context("bad init x coordinate")?;
    let y: f64 = parts[1].trim().parse().context("bad init y coordinate")?;
    Ok(Vec2::new(x, y))
}
