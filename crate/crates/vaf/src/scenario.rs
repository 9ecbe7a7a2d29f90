//! Scenario files: a sectioned key-value format describing one experiment
//! per file, plus the built-in scenarios the tool ships with.
//!
//! ```text
//! # comment
//! [scenario]
//! kind = pull            ; pull | push | elastic | boot-latency
//! seed = 42
//!
//! [workload]
//! total = 240 h          ; durations accept s, min, h, d suffixes
//! ```
//!
//! Sections and keys are validated per scenario kind; an unknown or
//! misspelled key fails with its `section.key` path rather than being
//! silently ignored. Values never contain commas except in the repeatable
//! list keys (`worker = at[, init[, speed]]`, `job = at, count, duration`).

use std::fmt;

use thiserror::Error;

use crate::autoscaler::{ElastiqConfig, SubmissionEntry};
use crate::cloud::CloudConfig;
use crate::model::{rampup_time, RampUpParams};
use crate::presets;
use crate::sched::{PullConfig, WorkerRecord, Workload};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {msg}")]
    Value { path: String, msg: String },
    #[error("missing required key {path}")]
    Missing { path: String },
    #[error("scenario '{0}' not found: not a file, and not a built-in ({1})")]
    NotFound(String, String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

fn value_err(path: impl fmt::Display, msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::Value {
        path: path.to_string(),
        msg: msg.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Pull,
    Push,
    Elastic,
    BootLatency,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Pull => "pull",
            ScenarioKind::Push => "push",
            ScenarioKind::Elastic => "elastic",
            ScenarioKind::BootLatency => "boot-latency",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PullScenario {
    pub workload: Workload,
    pub workers: Vec<WorkerRecord>,
    pub config: PullConfig,
}

#[derive(Debug, Clone)]
pub struct PushScenario {
    pub total_work: f64,
    pub n_jobs: u32,
    pub workers: Vec<WorkerRecord>,
}

#[derive(Debug, Clone)]
pub struct ElasticScenario {
    pub submissions: Vec<SubmissionEntry>,
    pub elastiq: ElastiqConfig,
    pub cloud: CloudConfig,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BootLatencyScenario {
    pub cloud: CloudConfig,
    pub vms: u32,
    pub registration_tick: f64,
}

#[derive(Debug, Clone)]
pub enum ScenarioDetail {
    Pull(PullScenario),
    Push(PushScenario),
    Elastic(ElasticScenario),
    BootLatency(BootLatencyScenario),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// Seed from the file, if set; the command line takes precedence.
    pub seed: Option<u64>,
    /// FNV-1a hash of the scenario text, stamped into output metadata.
    pub hash: u64,
    pub output_prefix: String,
    pub detail: ScenarioDetail,
}

/// FNV-1a, 64-bit. Stable across platforms and dependency-free; collision
/// resistance is irrelevant here — the hash only tags outputs with the
/// scenario text they came from.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

// ---------------------------------------------------------------------------
// Lexing

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn lex(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("unterminated section header '{trimmed}'"),
                });
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(ScenarioError::Parse {
                    line,
                    msg: "empty section name".into(),
                });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("section [{name}] appears twice"),
                });
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ScenarioError::Parse {
                line,
                msg: format!("expected 'key = value' or '[section]', got '{trimmed}'"),
            });
        };
        let Some(section) = sections.last_mut() else {
            return Err(ScenarioError::Parse {
                line,
                msg: "key before any [section] header".into(),
            });
        };
        section.entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Typed key access

struct Keys {
    section: String,
    entries: Vec<Entry>,
    used: Vec<bool>,
}

impl Keys {
    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.section, key)
    }

    /// A key that may appear at most once.
    fn unique(&mut self, key: &str) -> Result<Option<String>, ScenarioError> {
        let mut found: Option<String> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.key == key {
                if found.is_some() {
                    return Err(value_err(
                        self.path(key),
                        format!("appears more than once (line {})", e.line),
                    ));
                }
                found = Some(e.value.clone());
                self.used[i] = true;
            }
        }
        Ok(found)
    }

    /// A key that may repeat; returns values in file order.
    fn repeated(&mut self, key: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.key == key {
                out.push(e.value.clone());
                self.used[i] = true;
            }
        }
        out
    }

    /// Everything must have been claimed; the first leftover is an error.
    fn finish(self) -> Result<(), ScenarioError> {
        for (i, e) in self.entries.iter().enumerate() {
            if !self.used[i] {
                return Err(value_err(
                    self.path(&e.key),
                    format!("unknown key (line {})", e.line),
                ));
            }
        }
        Ok(())
    }
}

struct Doc {
    sections: Vec<Section>,
    claimed: Vec<bool>,
}

impl Doc {
    fn take(&mut self, name: &str) -> Option<Keys> {
        for (i, s) in self.sections.iter_mut().enumerate() {
            if s.name == name && !self.claimed[i] {
                self.claimed[i] = true;
                let entries = std::mem::take(&mut s.entries);
                let used = vec![false; entries.len()];
                return Some(Keys {
                    section: name.to_string(),
                    entries,
                    used,
                });
            }
        }
        None
    }

    /// Any unclaimed section is either unknown or not allowed for this kind.
    fn finish(self, kind: ScenarioKind) -> Result<(), ScenarioError> {
        for (i, s) in self.sections.iter().enumerate() {
            if !self.claimed[i] {
                return Err(ScenarioError::Parse {
                    line: s.line,
                    msg: format!(
                        "section [{}] is not allowed in a {} scenario",
                        s.name,
                        kind.name()
                    ),
                });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Value parsers

/// `"240 h"` → 864000.0. Bare numbers are seconds.
fn duration_term(path: &str, raw: &str, term: &str) -> Result<f64, ScenarioError> {
    let (num, mult) = if let Some(v) = term.strip_suffix("min") {
        (v, 60.0)
    } else if let Some(v) = term.strip_suffix('s') {
        (v, 1.0)
    } else if let Some(v) = term.strip_suffix('h') {
        (v, 3600.0)
    } else if let Some(v) = term.strip_suffix('d') {
        (v, 86400.0)
    } else {
        (term, 1.0)
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| value_err(path, format!("expected a duration, got '{raw}'")))?;
    if !value.is_finite() {
        return Err(value_err(path, format!("non-finite duration '{raw}'")));
    }
    Ok(value * mult)
}

/// `"90 min"`, `"0.5h"`, bare seconds, or a compound like `"2 h 42 min"`
/// (so a value printed by the tools can be pasted back in).
fn parse_duration(path: &str, raw: &str) -> Result<f64, ScenarioError> {
    let raw = raw.trim();
    // Split "2 h 42 min" into unit-terminated terms; a lone number or a
    // single "value unit" pair falls through as one term.
    let mut terms: Vec<String> = Vec::new();
    let mut current = String::new();
    for piece in raw.split_whitespace() {
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(piece);
        if piece.ends_with(['s', 'h', 'd']) || piece.ends_with("min") {
            terms.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        terms.push(current);
    }
    if terms.len() <= 1 {
        return duration_term(path, raw, raw);
    }
    terms
        .iter()
        .map(|t| duration_term(path, raw, t))
        .sum::<Result<f64, _>>()
}

/// Duration parser for CLI arguments; same grammar as scenario values.
pub fn duration_arg(raw: &str) -> Result<f64, String> {
    match parse_duration("duration", raw) {
        Ok(v) => Ok(v),
        Err(ScenarioError::Value { msg, .. }) => Err(msg),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_f64(path: &str, raw: &str) -> Result<f64, ScenarioError> {
    raw.trim()
        .parse()
        .map_err(|_| value_err(path, format!("expected a number, got '{raw}'")))
}

fn parse_u32(path: &str, raw: &str) -> Result<u32, ScenarioError> {
    raw.trim()
        .parse()
        .map_err(|_| value_err(path, format!("expected a non-negative integer, got '{raw}'")))
}

fn parse_u64(path: &str, raw: &str) -> Result<u64, ScenarioError> {
    raw.trim()
        .parse()
        .map_err(|_| value_err(path, format!("expected a non-negative integer, got '{raw}'")))
}

fn duration_key(keys: &mut Keys, key: &str, default: f64) -> Result<f64, ScenarioError> {
    match keys.unique(key)? {
        Some(v) => parse_duration(&keys.path(key), &v),
        None => Ok(default),
    }
}

fn u32_key(keys: &mut Keys, key: &str, default: u32) -> Result<u32, ScenarioError> {
    match keys.unique(key)? {
        Some(v) => parse_u32(&keys.path(key), &v),
        None => Ok(default),
    }
}

// ---------------------------------------------------------------------------
// Section resolvers

fn resolve_model(doc: &mut Doc) -> Result<Option<RampUpParams>, ScenarioError> {
    let Some(mut keys) = doc.take("model") else {
        return Ok(None);
    };
    let preset = keys.unique("preset")?;
    let p0 = keys.unique("p0")?;
    let p1 = keys.unique("p1")?;
    keys.finish()?;
    match (preset, p0, p1) {
        (Some(name), None, None) => {
            let preset = presets::lookup(&name)
                .ok_or_else(|| value_err("model.preset", format!("unknown preset '{name}'")))?;
            preset.rampup.ok_or_else(|| {
                value_err(
                    "model.preset",
                    format!("preset '{name}' has no ramp-up curve; give p0/p1 explicitly"),
                )
            }).map(Some)
        }
        (None, Some(p0), Some(p1)) => {
            let p0 = parse_f64("model.p0", &p0)?;
            let p1 = parse_f64("model.p1", &p1)?;
            RampUpParams::new(p0, p1)
                .map(Some)
                .map_err(|e| value_err("model.p0", e))
        }
        (None, None, None) => Err(ScenarioError::Missing {
            path: "model.preset (or model.p0/p1)".into(),
        }),
        (Some(_), _, _) => Err(value_err(
            "model.preset",
            "give either a preset or explicit p0/p1, not both",
        )),
        _ => Err(ScenarioError::Missing {
            path: "model.p1".into(),
        }),
    }
}

struct ArrivalSpec {
    workers: Vec<WorkerRecord>,
    master_poll: f64,
}

fn resolve_arrivals(
    doc: &mut Doc,
    params: Option<&RampUpParams>,
) -> Result<ArrivalSpec, ScenarioError> {
    let Some(mut keys) = doc.take("arrivals") else {
        return Err(ScenarioError::Missing {
            path: "[arrivals]".into(),
        });
    };
    let source = keys
        .unique("source")?
        .ok_or_else(|| ScenarioError::Missing {
            path: "arrivals.source".into(),
        })?;
    let master_poll = duration_key(&mut keys, "master_poll", PullConfig::default().master_poll_interval)?;
    let workers = match source.as_str() {
        "rampup" => {
            let count = u32_key(&mut keys, "workers", 0)?;
            if count < 1 {
                return Err(ScenarioError::Missing {
                    path: "arrivals.workers".into(),
                });
            }
            let init = duration_key(&mut keys, "init", 0.0)?;
            let speed = match keys.unique("speed")? {
                Some(v) => parse_f64(&keys.path("speed"), &v)?,
                None => 1.0,
            };
            let params = params.ok_or_else(|| {
                value_err("arrivals.source", "rampup arrivals need a [model] section")
            })?;
            let mut workers = Vec::with_capacity(count as usize);
            for k in 1..=count {
                let t = rampup_time(params, f64::from(k))
                    .map_err(|e| value_err("arrivals.workers", e))?;
                workers.push(WorkerRecord {
                    id: k,
                    arrival_time: t,
                    init_duration: init,
                    speed,
                    local_node: None,
                });
            }
            workers
        }
        "list" => {
            let rows = keys.repeated("worker");
            if rows.is_empty() {
                return Err(ScenarioError::Missing {
                    path: "arrivals.worker".into(),
                });
            }
            let mut workers = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let path = format!("arrivals.worker[{i}]");
                let parts: Vec<&str> = row.split(',').collect();
                if parts.is_empty() || parts.len() > 3 {
                    return Err(value_err(path, "expected 'at[, init[, speed]]'"));
                }
                let at = parse_duration(&path, parts[0])?;
                let init = if parts.len() > 1 {
                    parse_duration(&path, parts[1])?
                } else {
                    0.0
                };
                let speed = if parts.len() > 2 {
                    parse_f64(&path, parts[2])?
                } else {
                    1.0
                };
                workers.push(WorkerRecord {
                    id: i as u32 + 1,
                    arrival_time: at,
                    init_duration: init,
                    speed,
                    local_node: None,
                });
            }
            workers
        }
        other => {
            return Err(value_err(
                "arrivals.source",
                format!("unknown source '{other}' (expected rampup | list)"),
            ));
        }
    };
    keys.finish()?;
    Ok(ArrivalSpec {
        workers,
        master_poll,
    })
}

fn resolve_cloud(doc: &mut Doc) -> Result<(CloudConfig, Option<Keys>), ScenarioError> {
    let Some(mut keys) = doc.take("cloud") else {
        return Ok((CloudConfig::default(), None));
    };
    let mut config = CloudConfig::default();
    if let Some(name) = keys.unique("preset")? {
        let preset = presets::lookup(&name)
            .ok_or_else(|| value_err("cloud.preset", format!("unknown preset '{name}'")))?;
        config.boot_mean = preset.boot_mean;
        config.boot_stddev = preset.boot_stddev;
    }
    if let Some(v) = keys.unique("capacity")? {
        config.capacity = parse_u32(&keys.path("capacity"), &v)?;
    }
    if let Some(v) = keys.unique("boot_mean")? {
        config.boot_mean = parse_duration(&keys.path("boot_mean"), &v)?;
    }
    if let Some(v) = keys.unique("boot_stddev")? {
        config.boot_stddev = parse_duration(&keys.path("boot_stddev"), &v)?;
    }
    if let Some(v) = keys.unique("slots_per_vm")? {
        config.slots_per_vm = parse_u32(&keys.path("slots_per_vm"), &v)?;
    }
    if let Some(v) = keys.unique("teardown_delay")? {
        config.teardown_delay = parse_duration(&keys.path("teardown_delay"), &v)?;
    }
    config
        .validate()
        .map_err(|e| value_err("cloud", e))?;
    Ok((config, Some(keys)))
}

fn resolve_elastiq(doc: &mut Doc) -> Result<ElastiqConfig, ScenarioError> {
    let mut config = ElastiqConfig::default();
    let Some(mut keys) = doc.take("elastiq") else {
        return Ok(config);
    };
    config.poll_interval = duration_key(&mut keys, "poll_interval", config.poll_interval)?;
    config.waiting_jobs_threshold =
        u32_key(&mut keys, "waiting_jobs_threshold", config.waiting_jobs_threshold)?;
    config.waiting_time_threshold = duration_key(
        &mut keys,
        "waiting_time_threshold",
        config.waiting_time_threshold,
    )?;
    config.jobs_per_vm = u32_key(&mut keys, "jobs_per_vm", config.jobs_per_vm)?;
    config.idle_time_threshold =
        duration_key(&mut keys, "idle_time_threshold", config.idle_time_threshold)?;
    config.min_quota = u32_key(&mut keys, "min_quota", config.min_quota)?;
    config.max_quota = u32_key(&mut keys, "max_quota", config.max_quota)?;
    keys.finish()?;
    config.validate().map_err(|e| value_err("elastiq", e))?;
    Ok(config)
}

fn resolve_submissions(doc: &mut Doc) -> Result<Vec<SubmissionEntry>, ScenarioError> {
    let Some(mut keys) = doc.take("submissions") else {
        return Err(ScenarioError::Missing {
            path: "[submissions]".into(),
        });
    };
    let rows = keys.repeated("job");
    keys.finish()?;
    if rows.is_empty() {
        return Err(ScenarioError::Missing {
            path: "submissions.job".into(),
        });
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let path = format!("submissions.job[{i}]");
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != 3 {
            return Err(value_err(path, "expected 'at, count, duration'"));
        }
        out.push(SubmissionEntry {
            at: parse_duration(&path, parts[0])?,
            count: parse_u32(&path, parts[1])?,
            duration: parse_duration(&path, parts[2])?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Top level

/// Parse and fully resolve one scenario. `fallback_name` names the scenario
/// when the file doesn't (typically the file stem or built-in name).
pub fn parse(text: &str, fallback_name: &str) -> Result<Scenario, ScenarioError> {
    let hash = fnv1a64(text.as_bytes());
    let sections = lex(text)?;
    let claimed = vec![false; sections.len()];
    let mut doc = Doc { sections, claimed };

    let Some(mut head) = doc.take("scenario") else {
        return Err(ScenarioError::Missing {
            path: "[scenario]".into(),
        });
    };
    let kind_raw = head
        .unique("kind")?
        .ok_or_else(|| ScenarioError::Missing {
            path: "scenario.kind".into(),
        })?;
    let kind = match kind_raw.as_str() {
        "pull" => ScenarioKind::Pull,
        "push" => ScenarioKind::Push,
        "elastic" => ScenarioKind::Elastic,
        "boot-latency" => ScenarioKind::BootLatency,
        other => {
            return Err(value_err(
                "scenario.kind",
                format!("unknown kind '{other}' (expected pull | push | elastic | boot-latency)"),
            ));
        }
    };
    let name = head
        .unique("name")?
        .unwrap_or_else(|| fallback_name.to_string());
    let seed = match head.unique("seed")? {
        Some(v) => Some(parse_u64("scenario.seed", &v)?),
        None => None,
    };
    let horizon = match head.unique("horizon")? {
        Some(v) => Some(parse_duration("scenario.horizon", &v)?),
        None => None,
    };
    if horizon.is_some() && kind != ScenarioKind::Elastic {
        return Err(value_err(
            "scenario.horizon",
            "only elastic scenarios take a horizon",
        ));
    }
    head.finish()?;

    let output_prefix = match doc.take("output") {
        Some(mut keys) => {
            let prefix = keys.unique("prefix")?.unwrap_or_else(|| name.clone());
            keys.finish()?;
            prefix
        }
        None => name.clone(),
    };

    let detail = match kind {
        ScenarioKind::Pull => {
            let params = resolve_model(&mut doc)?;
            let mut keys = doc.take("workload").ok_or_else(|| ScenarioError::Missing {
                path: "[workload]".into(),
            })?;
            let total = keys
                .unique("total")?
                .ok_or_else(|| ScenarioError::Missing {
                    path: "workload.total".into(),
                })?;
            let total = parse_duration("workload.total", &total)?;
            let packet_target = duration_key(&mut keys, "packet_target", 10.0)?;
            keys.finish()?;
            let workload = Workload::new(total, packet_target)
                .map_err(|e| value_err("workload", e))?;
            let arrivals = resolve_arrivals(&mut doc, params.as_ref())?;
            ScenarioDetail::Pull(PullScenario {
                workload,
                workers: arrivals.workers,
                config: PullConfig {
                    master_poll_interval: arrivals.master_poll,
                },
            })
        }
        ScenarioKind::Push => {
            let params = resolve_model(&mut doc)?;
            let mut keys = doc.take("workload").ok_or_else(|| ScenarioError::Missing {
                path: "[workload]".into(),
            })?;
            let total = keys
                .unique("total")?
                .ok_or_else(|| ScenarioError::Missing {
                    path: "workload.total".into(),
                })?;
            let total = parse_duration("workload.total", &total)?;
            let jobs = u32_key(&mut keys, "jobs", 0)?;
            keys.finish()?;
            let arrivals = resolve_arrivals(&mut doc, params.as_ref())?;
            let n_jobs = if jobs == 0 {
                arrivals.workers.len() as u32
            } else {
                jobs
            };
            if n_jobs as usize > arrivals.workers.len() {
                return Err(value_err(
                    "workload.jobs",
                    format!(
                        "asks for {n_jobs} jobs but only {} workers arrive",
                        arrivals.workers.len()
                    ),
                ));
            }
            ScenarioDetail::Push(PushScenario {
                total_work: total,
                n_jobs,
                workers: arrivals.workers,
            })
        }
        ScenarioKind::Elastic => {
            let (cloud, extra) = resolve_cloud(&mut doc)?;
            if let Some(keys) = extra {
                keys.finish()?;
            }
            let elastiq = resolve_elastiq(&mut doc)?;
            let submissions = resolve_submissions(&mut doc)?;
            ScenarioDetail::Elastic(ElasticScenario {
                submissions,
                elastiq,
                cloud,
                horizon,
            })
        }
        ScenarioKind::BootLatency => {
            let (cloud, extra) = resolve_cloud(&mut doc)?;
            let mut vms = 10;
            let mut registration_tick = 10.0;
            if let Some(mut keys) = extra {
                vms = u32_key(&mut keys, "vms", vms)?;
                registration_tick =
                    duration_key(&mut keys, "registration_tick", registration_tick)?;
                keys.finish()?;
            }
            if vms < 1 {
                return Err(value_err("cloud.vms", "need at least one VM"));
            }
            if !(registration_tick.is_finite() && registration_tick > 0.0) {
                return Err(value_err(
                    "cloud.registration_tick",
                    "must be finite and > 0",
                ));
            }
            ScenarioDetail::BootLatency(BootLatencyScenario {
                cloud,
                vms,
                registration_tick,
            })
        }
    };

    doc.finish(kind)?;
    Ok(Scenario {
        name,
        kind,
        seed,
        hash,
        output_prefix,
        detail,
    })
}

// ---------------------------------------------------------------------------
// Built-ins

const PULL_CERN_240H: &str = "\
# 240 core-hours on the cern-2013 ramp-up curve, pull scheduling.
# Worker k arrives when the analytic curve reaches k running jobs.
[scenario]
kind = pull
name = pull-cern-240h

[model]
preset = cern-2013

[workload]
total = 240 h
packet_target = 10 s

[arrivals]
source = rampup
workers = 98
init = 0 s
master_poll = 1 s
";

const PUSH_CERN_240H: &str = "\
# Same workload and arrivals, statically split into the optimal job count.
[scenario]
kind = push
name = push-cern-240h

[model]
preset = cern-2013

[workload]
total = 240 h
jobs = 84

[arrivals]
source = rampup
workers = 98
";

const BOOT_LATENCY_10VM: &str = "\
# Ten VMs requested at t=0; workers join one registration tick after boot.
[scenario]
kind = boot-latency
name = boot-latency-10vm

[cloud]
preset = cern-2013
vms = 10
registration_tick = 10 s
";

const ELASTIC_BURST: &str = "\
# A burst of 40 ten-minute jobs against an initially empty fleet.
[scenario]
kind = elastic
name = elastic-burst

[cloud]
preset = cern-2013

[elastiq]
min_quota = 0
max_quota = 10

[submissions]
job = 0 s, 40, 10 min
";

pub fn builtin_names() -> &'static [&'static str] {
    &[
        "pull-cern-240h",
        "push-cern-240h",
        "boot-latency-10vm",
        "elastic-burst",
    ]
}

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "pull-cern-240h" => Some(PULL_CERN_240H),
        "push-cern-240h" => Some(PUSH_CERN_240H),
        "boot-latency-10vm" => Some(BOOT_LATENCY_10VM),
        "elastic-burst" => Some(ELASTIC_BURST),
        _ => None,
    }
}

/// Resolve a CLI argument to (name, scenario text): a readable file wins,
/// otherwise a built-in name.
pub fn load_source(arg: &str) -> Result<(String, String), ScenarioError> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: arg.to_string(),
            msg: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok((name, text));
    }
    if let Some(text) = builtin(arg) {
        return Ok((arg.to_string(), text.to_string()));
    }
    Err(ScenarioError::NotFound(
        arg.to_string(),
        builtin_names().join(", "),
    ))
}
