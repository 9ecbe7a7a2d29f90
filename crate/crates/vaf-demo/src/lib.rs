//! Browser playground for the scheduling laboratory. Three operations are
//! exported to JavaScript, all returning JSON strings so the page can stay
//! framework-free: the pull/push model curves over a workload range, a
//! single-workload comparison, and a full elastic-cluster run.
//!
//! The `*_json` functions hold the logic and are unit-tested on the host;
//! the `#[wasm_bindgen]` wrappers only translate errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use vaf::autoscaler::{run_elastic_scenario, ElastiqConfig, SubmissionEntry};
use vaf::cloud::CloudConfig;
use vaf::model::{
    optimal_job_count, pull_time_to_results, push_time_to_results, speedup_ratio, RampUpParams,
};
use vaf::output::humanize_duration;
use vaf::presets;

const HOUR: f64 = 3600.0;

/// Hard ceilings so a stray input can't hang the browser tab.
const MAX_POINTS: u32 = 2000;
const MAX_JOBS: u32 = 2000;
const MAX_QUOTA: u32 = 100;

#[derive(Serialize)]
struct CurvePoint {
    t_hours: f64,
    pull_minutes: f64,
    push_minutes: f64,
    ratio: f64,
    n_optimal: f64,
}

#[derive(Serialize)]
struct Comparison {
    t_hours: f64,
    pull: String,
    push: String,
    pull_minutes: f64,
    push_minutes: f64,
    saved_percent: f64,
    n_optimal: f64,
}

#[derive(Serialize)]
struct TimelinePoint {
    time: f64,
    running: u32,
    pending: u32,
    waiting_jobs: u32,
    action: String,
}

#[derive(Serialize)]
struct ElasticRun {
    timeline: Vec<TimelinePoint>,
    jobs_completed: u64,
    drain_time: Option<f64>,
    drain_label: Option<String>,
    total_granted: u32,
}

fn params_of(p0_per_hour: f64, p1_per_hour: f64) -> Result<RampUpParams, String> {
    RampUpParams::new(p0_per_hour / HOUR, p1_per_hour / HOUR).map_err(|e| e.to_string())
}

/// Default ramp-up parameters (the 2013 CERN fit), per hour, for the page
/// to prefill its inputs with.
#[wasm_bindgen]
pub fn default_p0_per_hour() -> f64 {
    presets::cern_2013().rampup.unwrap().p0() * HOUR
}

#[wasm_bindgen]
pub fn default_p1_per_hour() -> f64 {
    presets::cern_2013().rampup.unwrap().p1() * HOUR
}

pub fn curves_json(
    p0_per_hour: f64,
    p1_per_hour: f64,
    t_min_hours: f64,
    t_max_hours: f64,
    points: u32,
) -> Result<String, String> {
    let p = params_of(p0_per_hour, p1_per_hour)?;
    if !(t_min_hours > 0.0 && t_max_hours > t_min_hours) {
        return Err("need 0 < t_min < t_max".into());
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}"));
    }
    let (lo, hi) = (t_min_hours * HOUR, t_max_hours * HOUR);
    let mut rows = Vec::with_capacity(points as usize);
    for i in 0..points {
        let total = lo * (hi / lo).powf(f64::from(i) / f64::from(points - 1));
        rows.push(CurvePoint {
            t_hours: total / HOUR,
            pull_minutes: pull_time_to_results(&p, total).map_err(|e| e.to_string())? / 60.0,
            push_minutes: push_time_to_results(&p, total).map_err(|e| e.to_string())? / 60.0,
            ratio: speedup_ratio(&p, total).map_err(|e| e.to_string())?,
            n_optimal: optimal_job_count(&p, total).map_err(|e| e.to_string())?,
        });
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

pub fn compare_json(p0_per_hour: f64, p1_per_hour: f64, t_hours: f64) -> Result<String, String> {
    let p = params_of(p0_per_hour, p1_per_hour)?;
    if !(t_hours.is_finite() && t_hours > 0.0) {
        return Err("workload must be > 0 hours".into());
    }
    let total = t_hours * HOUR;
    let pull = pull_time_to_results(&p, total).map_err(|e| e.to_string())?;
    let push = push_time_to_results(&p, total).map_err(|e| e.to_string())?;
    let row = Comparison {
        t_hours,
        pull: humanize_duration(pull),
        push: humanize_duration(push),
        pull_minutes: pull / 60.0,
        push_minutes: push / 60.0,
        saved_percent: (1.0 - pull / push) * 100.0,
        n_optimal: optimal_job_count(&p, total).map_err(|e| e.to_string())?,
    };
    serde_json::to_string(&row).map_err(|e| e.to_string())
}

pub fn elastic_json(
    jobs: u32,
    job_minutes: f64,
    max_quota: u32,
    jobs_per_vm: u32,
    boot_minutes: f64,
    seed: u32,
) -> Result<String, String> {
    if jobs == 0 || jobs > MAX_JOBS {
        return Err(format!("jobs must be in 1..={MAX_JOBS}"));
    }
    if max_quota == 0 || max_quota > MAX_QUOTA {
        return Err(format!("max_quota must be in 1..={MAX_QUOTA}"));
    }
    if !(job_minutes > 0.0 && job_minutes <= 24.0 * 60.0) {
        return Err("job length must be in (0, 1440] minutes".into());
    }
    if !(0.0..=60.0).contains(&boot_minutes) {
        return Err("boot time must be in [0, 60] minutes".into());
    }
    let submissions = vec![SubmissionEntry {
        at: 0.0,
        count: jobs,
        duration: job_minutes * 60.0,
    }];
    let elastiq = ElastiqConfig {
        jobs_per_vm: jobs_per_vm.clamp(1, 16),
        max_quota,
        ..ElastiqConfig::default()
    };
    let cloud = CloudConfig {
        capacity: MAX_QUOTA,
        boot_mean: boot_minutes * 60.0,
        boot_stddev: boot_minutes * 6.0,
        slots_per_vm: jobs_per_vm.clamp(1, 16),
        ..CloudConfig::default()
    };
    let report = run_elastic_scenario(submissions, elastiq, cloud, u64::from(seed), None)
        .map_err(|e| e.to_string())?;
    let run = ElasticRun {
        timeline: report
            .timeline
            .iter()
            .map(|r| TimelinePoint {
                time: r.time,
                running: r.running,
                pending: r.pending,
                waiting_jobs: r.waiting_jobs,
                action: r.action.clone(),
            })
            .collect(),
        jobs_completed: report.jobs_completed,
        drain_time: report.drain_time,
        drain_label: report.drain_time.map(humanize_duration),
        total_granted: report.total_granted,
    };
    serde_json::to_string(&run).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn model_curves(
    p0_per_hour: f64,
    p1_per_hour: f64,
    t_min_hours: f64,
    t_max_hours: f64,
    points: u32,
) -> Result<String, JsValue> {
    curves_json(p0_per_hour, p1_per_hour, t_min_hours, t_max_hours, points)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_workload(
    p0_per_hour: f64,
    p1_per_hour: f64,
    t_hours: f64,
) -> Result<String, JsValue> {
    compare_json(p0_per_hour, p1_per_hour, t_hours).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn elastic_run(
    jobs: u32,
    job_minutes: f64,
    max_quota: u32,
    jobs_per_vm: u32,
    boot_minutes: f64,
    seed: u32,
) -> Result<String, JsValue> {
    elastic_json(jobs, job_minutes, max_quota, jobs_per_vm, boot_minutes, seed)
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cern() -> (f64, f64) {
        (default_p0_per_hour(), default_p1_per_hour())
    }

    #[test]
    fn curves_cover_the_grid_and_stay_ordered() {
        let (p0, p1) = cern();
        let json = curves_json(p0, p1, 1.0, 240.0, 50).unwrap();
        let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = rows.as_array().unwrap();
        assert_eq!(rows.len(), 50);
        assert!((rows[0]["t_hours"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!((rows[49]["t_hours"].as_f64().unwrap() - 240.0).abs() < 1e-9);
        for r in rows {
            let (pull, push) = (
                r["pull_minutes"].as_f64().unwrap(),
                r["push_minutes"].as_f64().unwrap(),
            );
            assert!(pull < push, "pull {pull} not faster than push {push}");
        }
    }

    #[test]
    fn comparison_matches_published_240h_numbers() {
        let (p0, p1) = cern();
        let json = compare_json(p0, p1, 240.0).unwrap();
        let row: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(row["pull"], "2 h 42 min");
        assert_eq!(row["push"], "3 h 18 min");
        assert!((row["saved_percent"].as_f64().unwrap() - 18.2).abs() < 0.1);
    }

    #[test]
    fn elastic_run_drains_and_reports_grants() {
        let json = elastic_json(16, 10.0, 5, 4, 5.0, 1).unwrap();
        let run: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(run["jobs_completed"], 16);
        assert!(run["drain_time"].as_f64().unwrap() > 0.0);
        assert!(run["total_granted"].as_u64().unwrap() >= 1);
        assert!(run["timeline"].as_array().unwrap().len() > 3);
    }

    #[test]
    fn bad_inputs_are_rejected_with_messages() {
        let (p0, p1) = cern();
        assert!(curves_json(p0, p1, 10.0, 1.0, 50).is_err());
        assert!(curves_json(p0, p1, 1.0, 10.0, 1).is_err());
        assert!(compare_json(-1.0, p1, 10.0).is_err());
        assert!(elastic_json(0, 10.0, 5, 4, 5.0, 1).is_err());
        assert!(elastic_json(10, 10.0, 0, 4, 5.0, 1).is_err());
    }
}
