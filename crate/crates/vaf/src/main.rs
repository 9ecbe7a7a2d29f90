//! `vaf` — virtual analysis facility laboratory.
//!
//! Closed-form scheduling curves, parameter fitting/calibration, and
//! deterministic simulation of pull/push scheduling, boot latencies, and an
//! elastic VM fleet. Every command writes CSV with a metadata comment line
//! and is byte-reproducible given the same inputs and seed.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vaf::autoscaler::ElasticSim;
use vaf::cloud::boot_latency_rows;
use vaf::csv_row;
use vaf::fit::{calibrate_from_claims, fit_rampup, RampUpSample};
use vaf::model::{
    optimal_job_count, pull_time_to_results, push_time_to_results, speedup_ratio, ModelError,
    RampUpParams,
};
use vaf::output::{self, humanize_duration, CsvDoc};
use vaf::presets;
use vaf::scenario::{self, fnv1a64, ScenarioDetail};
use vaf::sched::{simulate_pull, simulate_pull_traced, simulate_push, Workload};

#[derive(Parser)]
#[command(
    name = "vaf",
    version,
    about = "Virtual analysis facility laboratory: scheduling models and simulators",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed; overrides a scenario file's seed (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory CSV outputs are written to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form pull/push time-to-results over a workload range.
    Model {
        /// Named parameter set (cern-2013).
        #[arg(long, conflicts_with_all = ["p0", "p1"])]
        preset: Option<String>,
        /// Initial worker arrival rate, workers per second.
        #[arg(long, requires = "p1")]
        p0: Option<f64>,
        /// Saturation coefficient, 1 per second.
        #[arg(long, requires = "p0")]
        p1: Option<f64>,
        /// Smallest workload, e.g. "1 h" (seconds if unitless).
        #[arg(long, value_parser = scenario::duration_arg)]
        t_min: f64,
        /// Largest workload, e.g. "240 h".
        #[arg(long, value_parser = scenario::duration_arg)]
        t_max: f64,
        /// Number of log-spaced samples.
        #[arg(long, default_value_t = 100)]
        points: u32,
    },
    /// Pull-vs-push comparison table for specific workloads.
    Compare {
        /// Named parameter set.
        #[arg(long)]
        preset: String,
        /// Workload size; repeatable.
        #[arg(long = "t", value_parser = scenario::duration_arg, required = true)]
        t: Vec<f64>,
    },
    /// Fit ramp-up parameters to a measured `t,n` trace.
    Fit {
        /// CSV file with a `t,n` header row.
        input: PathBuf,
    },
    /// Reconstruct ramp-up parameters from two published timings.
    Calibrate {
        /// Total workload the timings refer to, e.g. "240 h".
        #[arg(long, value_parser = scenario::duration_arg)]
        total: f64,
        /// Measured pull time-to-results.
        #[arg(long, value_parser = scenario::duration_arg)]
        t_pull: f64,
        /// Measured push time-to-results.
        #[arg(long, value_parser = scenario::duration_arg)]
        t_push: f64,
    },
    /// Run a scenario file or built-in scenario.
    Simulate {
        /// Path to a scenario file, or a built-in name.
        scenario: String,
        /// Also write the full event trace CSV (pull/elastic kinds).
        #[arg(long)]
        trace: bool,
    },
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => m,
        }
    }
}

/// Convergence and root-finding failures are ours; everything else means
/// the request itself was out of range.
fn model_err(e: ModelError) -> CliError {
    match e {
        ModelError::NoConvergence { .. } | ModelError::NoRoot(_) => {
            CliError::Internal(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    let out = cli.out;
    match cli.command {
        Command::Model {
            preset,
            p0,
            p1,
            t_min,
            t_max,
            points,
        } => cmd_model(&out, seed, resolve_params(preset, p0, p1)?, t_min, t_max, points),
        Command::Compare { preset, t } => {
            cmd_compare(&out, seed, resolve_params(Some(preset), None, None)?, &t)
        }
        Command::Fit { input } => cmd_fit(&out, seed, &input),
        Command::Calibrate {
            total,
            t_pull,
            t_push,
        } => cmd_calibrate(&out, seed, total, t_pull, t_push),
        Command::Simulate { scenario, trace } => cmd_simulate(&out, seed, &scenario, trace),
    }
}

fn resolve_params(
    preset: Option<String>,
    p0: Option<f64>,
    p1: Option<f64>,
) -> Result<RampUpParams, CliError> {
    match (preset, p0, p1) {
        (Some(name), _, _) => {
            let preset = presets::lookup(&name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset '{name}' (known: {})",
                    presets::names().join(", ")
                ))
            })?;
            preset.rampup.ok_or_else(|| {
                CliError::Usage(format!(
                    "preset '{name}' has no ramp-up curve; pass --p0/--p1 instead"
                ))
            })
        }
        (None, Some(p0), Some(p1)) => RampUpParams::new(p0, p1).map_err(model_err),
        _ => Err(CliError::Usage(
            "give either --preset or both --p0 and --p1".into(),
        )),
    }
}

fn write_csv(path: &Path, content: &str) -> Result<(), CliError> {
    output::write_file(path, content).map_err(|e| io_err(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_model(
    out: &Path,
    seed: Option<u64>,
    params: RampUpParams,
    t_min: f64,
    t_max: f64,
    points: u32,
) -> Result<(), CliError> {
    if t_min.is_nan() || t_max.is_nan() || t_min <= 0.0 || t_max < t_min {
        return Err(CliError::Usage(format!(
            "workload range must satisfy 0 < t_min <= t_max, got [{t_min}, {t_max}]"
        )));
    }
    if points < 1 {
        return Err(CliError::Usage("need at least one sample point".into()));
    }
    let seed = seed.unwrap_or(42);
    let tag = fnv1a64(
        format!(
            "model p0={} p1={} t_min={t_min} t_max={t_max} points={points}",
            params.p0(),
            params.p1()
        )
        .as_bytes(),
    );
    let mut doc = CsvDoc::new(tag, seed, "T,t_pull,t_push,ratio,n_optimal");
    for i in 0..points {
        let total = if points == 1 {
            t_min
        } else {
            t_min * (t_max / t_min).powf(f64::from(i) / f64::from(points - 1))
        };
        let t_pull = pull_time_to_results(&params, total).map_err(model_err)?;
        let t_push = push_time_to_results(&params, total).map_err(model_err)?;
        let ratio = speedup_ratio(&params, total).map_err(model_err)?;
        let n_opt = optimal_job_count(&params, total).map_err(model_err)?;
        csv_row!(doc, total, t_pull, t_push, ratio, n_opt);
    }
    write_csv(&out.join("model.csv"), &doc.into_string())?;
    let last_ratio = speedup_ratio(&params, t_max).map_err(model_err)?;
    println!(
        "{points} points over [{}, {}]; pull/push ratio at the top end: {last_ratio:.4}",
        humanize_duration(t_min),
        humanize_duration(t_max)
    );
    Ok(())
}

fn cmd_compare(
    out: &Path,
    seed: Option<u64>,
    params: RampUpParams,
    totals: &[f64],
) -> Result<(), CliError> {
    let seed = seed.unwrap_or(42);
    let tag = fnv1a64(
        format!(
            "compare p0={} p1={} t={totals:?}",
            params.p0(),
            params.p1()
        )
        .as_bytes(),
    );
    let mut doc = CsvDoc::new(tag, seed, "T,t_pull,t_push,speedup_percent");
    println!(
        "{:>14}  {:>20}  {:>20}  {:>8}",
        "workload", "pull", "push", "speedup"
    );
    for &total in totals {
        let t_pull = pull_time_to_results(&params, total).map_err(model_err)?;
        let t_push = push_time_to_results(&params, total).map_err(model_err)?;
        let ratio = speedup_ratio(&params, total).map_err(model_err)?;
        let speedup = (1.0 - ratio) * 100.0;
        csv_row!(doc, total, t_pull, t_push, speedup);
        println!(
            "{:>14}  {:>20}  {:>20}  {:>7.1}%",
            humanize_duration(total),
            humanize_duration(t_pull),
            humanize_duration(t_push),
            speedup
        );
    }
    write_csv(&out.join("compare.csv"), &doc.into_string())
}

fn read_samples(path: &Path) -> Result<Vec<RampUpSample>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut samples = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |msg: String| {
            CliError::Usage(format!("{} line {line}: {msg}", path.display()))
        };
        if !saw_header {
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols != ["t", "n"] {
                return Err(bad(format!("expected header 't,n', got '{trimmed}'")));
            }
            saw_header = true;
            continue;
        }
        let Some((t_raw, n_raw)) = trimmed.split_once(',') else {
            return Err(bad(format!("expected 't,n' pair, got '{trimmed}'")));
        };
        let t: f64 = t_raw
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad t value '{}'", t_raw.trim())))?;
        let n: f64 = n_raw
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad n value '{}'", n_raw.trim())))?;
        samples.push(RampUpSample { t, n });
    }
    if !saw_header {
        return Err(CliError::Usage(format!(
            "{}: no 't,n' header found",
            path.display()
        )));
    }
    Ok(samples)
}

fn cmd_fit(out: &Path, seed: Option<u64>, input: &Path) -> Result<(), CliError> {
    let samples = read_samples(input)?;
    let report = fit_rampup(&samples).map_err(model_err)?;
    let seed = seed.unwrap_or(42);
    let tag = fnv1a64(format!("fit input={}", input.display()).as_bytes());
    let mut doc = CsvDoc::new(tag, seed, "p0,p1,residual_norm,iterations,max_jobs");
    csv_row!(
        doc,
        report.params.p0(),
        report.params.p1(),
        report.residual_norm,
        report.iterations,
        report.params.max_jobs()
    );
    write_csv(&out.join("fit.csv"), &doc.into_string())?;
    println!(
        "fit over {} samples: p0 = {:.6} /s, p1 = {:.6} /s (plateau {:.1} jobs), residual norm {:.3e}",
        samples.len(),
        report.params.p0(),
        report.params.p1(),
        report.params.p0() / report.params.p1().max(f64::MIN_POSITIVE),
        report.residual_norm
    );
    Ok(())
}

fn cmd_calibrate(
    out: &Path,
    seed: Option<u64>,
    total: f64,
    t_pull: f64,
    t_push: f64,
) -> Result<(), CliError> {
    let cal = calibrate_from_claims(total, t_pull, t_push).map_err(model_err)?;
    let seed = seed.unwrap_or(42);
    let tag = fnv1a64(format!("calibrate total={total} t_pull={t_pull} t_push={t_push}").as_bytes());
    let mut doc = CsvDoc::new(
        tag,
        seed,
        "p0,p1,max_jobs,rel_residual_pull,rel_residual_push",
    );
    csv_row!(
        doc,
        cal.params.p0(),
        cal.params.p1(),
        cal.params.max_jobs(),
        cal.rel_residual_pull,
        cal.rel_residual_push
    );
    write_csv(&out.join("calibrate.csv"), &doc.into_string())?;
    println!(
        "p0 = {:.6} /s ({:.1} /h), p1 = {:.6} /s ({:.2} /h), plateau {:.1} jobs",
        cal.params.p0(),
        cal.params.p0() * 3600.0,
        cal.params.p1(),
        cal.params.p1() * 3600.0,
        cal.params.p0() / cal.params.p1()
    );
    println!(
        "claims reproduced to {:.1e} (pull) / {:.1e} (push) relative",
        cal.rel_residual_pull, cal.rel_residual_push
    );
    Ok(())
}

fn cmd_simulate(
    out: &Path,
    cli_seed: Option<u64>,
    source: &str,
    trace: bool,
) -> Result<(), CliError> {
    let (name, text) =
        scenario::load_source(source).map_err(|e| CliError::Usage(e.to_string()))?;
    let sc = scenario::parse(&text, &name).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = cli_seed.or(sc.seed).unwrap_or(42);
    let hash = sc.hash;
    let prefix = sc.output_prefix.clone();
    let internal = |e: &dyn std::fmt::Display| CliError::Internal(e.to_string());

    match &sc.detail {
        ScenarioDetail::Pull(p) => {
            let (report, rows) = if trace {
                let (r, rows) = simulate_pull_traced(&p.workload, &p.workers, p.config)
                    .map_err(|e| internal(&e))?;
                (r, Some(rows))
            } else {
                (
                    simulate_pull(&p.workload, &p.workers, p.config)
                        .map_err(|e| internal(&e))?,
                    None,
                )
            };
            write_csv(
                &out.join(format!("{prefix}_completion.csv")),
                &output::completion_csv(&report, hash, seed),
            )?;
            write_csv(
                &out.join(format!("{prefix}_workers.csv")),
                &output::workers_csv(&report, hash, seed),
            )?;
            if let Some(rows) = rows {
                write_csv(
                    &out.join(format!("{prefix}_trace.csv")),
                    &output::trace_csv(&rows, hash, seed),
                )?;
            }
            println!(
                "pull: time to results {} ({} packets, {} workers)",
                humanize_duration(report.time_to_results),
                report.packets_granted,
                report.workers.len()
            );
        }
        ScenarioDetail::Push(p) => {
            if trace {
                eprintln!("note: push runs are closed-form; no event trace to write");
            }
            let workload = Workload::new(p.total_work, 10.0).map_err(|e| internal(&e))?;
            let report =
                simulate_push(&workload, &p.workers, p.n_jobs).map_err(|e| internal(&e))?;
            write_csv(
                &out.join(format!("{prefix}_completion.csv")),
                &output::completion_csv(&report, hash, seed),
            )?;
            write_csv(
                &out.join(format!("{prefix}_workers.csv")),
                &output::workers_csv(&report, hash, seed),
            )?;
            println!(
                "push: time to results {} ({} jobs)",
                humanize_duration(report.time_to_results),
                p.n_jobs
            );
        }
        ScenarioDetail::Elastic(e) => {
            let sim = ElasticSim::new(
                e.elastiq,
                e.cloud.clone(),
                e.submissions.clone(),
                seed,
                e.horizon,
            )
            .map_err(|err| CliError::Usage(err.to_string()))?;
            let (report, rows) = sim.run(trace).map_err(|err| internal(&err))?;
            write_csv(
                &out.join(format!("{prefix}_timeline.csv")),
                &output::timeline_csv(&report.timeline, hash, seed),
            )?;
            if trace {
                write_csv(
                    &out.join(format!("{prefix}_trace.csv")),
                    &output::trace_csv(&rows, hash, seed),
                )?;
            }
            match report.drain_time {
                Some(t) => println!(
                    "elastic: {} jobs drained at {} ({} VMs granted, {} requests failed)",
                    report.jobs_completed,
                    humanize_duration(t),
                    report.total_granted,
                    report.failed_requests
                ),
                None => println!(
                    "elastic: {} of {} jobs completed{} ({} VMs granted)",
                    report.jobs_completed,
                    report.jobs_submitted,
                    if report.horizon_hit {
                        " before the horizon"
                    } else {
                        ""
                    },
                    report.total_granted
                ),
            }
        }
        ScenarioDetail::BootLatency(b) => {
            let rows = boot_latency_rows(&b.cloud, b.vms, b.registration_tick, seed)
                .map_err(|e| internal(&e))?;
            write_csv(
                &out.join(format!("{prefix}_joins.csv")),
                &output::boot_csv(&rows, hash, seed),
            )?;
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.boot_latency).sum::<f64>() / n;
            let var = rows
                .iter()
                .map(|r| (r.boot_latency - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0).max(1.0);
            println!(
                "boot latency over {} VMs: mean {:.1} s, stddev {:.1} s; last join at {}",
                rows.len(),
                mean,
                var.sqrt(),
                humanize_duration(rows.iter().map(|r| r.join_time).fold(0.0, f64::max))
            );
        }
    }
    Ok(())
}
