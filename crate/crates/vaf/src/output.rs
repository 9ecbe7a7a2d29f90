//! CSV emission. Every table starts with a metadata comment line
//! (`# scenario=<hash> seed=<n> version=<v>`) followed by a header row.
//!
//! Numbers are formatted with Rust's shortest round-trip `Display`, which is
//! platform-independent, so identical runs produce byte-identical files.

use std::borrow::Cow;
use std::io;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn metadata_line(hash: u64, seed: u64) -> String {
    format!("# scenario={hash:016x} seed={seed} version={VERSION}")
}

/// Quote a field if it contains a comma, quote, or newline.
pub fn escape(field: &str) -> Cow<'_, str> {
    if field.contains([',', '"', '\n']) {
        Cow::Owned(format!("\"{}\"", field.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(field)
    }
}

pub struct CsvDoc {
    text: String,
    columns: usize,
}

impl CsvDoc {
    pub fn new(hash: u64, seed: u64, header: &str) -> Self {
        let mut text = metadata_line(hash, seed);
        text.push('\n');
        text.push_str(header);
        text.push('\n');
        Self {
            text,
            columns: header.split(',').count(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns, "row width mismatch");
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&escape(cell));
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shorthand for building a row of heterogeneous `Display` values.
#[macro_export]
macro_rules! csv_row {
    ($doc:expr, $($cell:expr),+ $(,)?) => {
        $doc.row(&[$(format!("{}", $cell)),+])
    };
}

pub fn write_file(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)
}

/// `9930.0` → `"2 h 45 min 30 s"`. Sub-second remainders print as seconds
/// with their fractional part.
pub fn humanize_duration(seconds: f64) -> String {
    if !seconds.is_finite() {
        return format!("{seconds}");
    }
    if seconds < 0.0 {
        return format!("-{}", humanize_duration(-seconds));
    }
    // Round to the displayed precision up front so accumulated float error
    // (e.g. 9720.000000001) doesn't surface as a stray "0.00 s" part.
    let seconds = (seconds * 100.0).round() / 100.0;
    let whole = seconds.floor();
    let frac = seconds - whole;
    let total = whole as u64;
    let (d, rem) = (total / 86400, total % 86400);
    let (h, rem) = (rem / 3600, rem % 3600);
    let (m, s) = (rem / 60, rem % 60);
    let mut parts: Vec<String> = Vec::new();
    if d > 0 {
        parts.push(format!("{d} d"));
    }
    if h > 0 {
        parts.push(format!("{h} h"));
    }
    if m > 0 {
        parts.push(format!("{m} min"));
    }
    let secs = s as f64 + frac;
    if parts.is_empty() || secs > 0.0 {
        if frac > 0.0 {
            parts.push(format!("{secs:.2} s"));
        } else {
            parts.push(format!("{s} s"));
        }
    }
    parts.join(" ")
}

/// Render a trace (`time,seq,kind,detail`) as CSV.
pub fn trace_csv(rows: &[crate::sim::TraceRow], hash: u64, seed: u64) -> String {
    let mut doc = CsvDoc::new(hash, seed, "time,seq,kind,detail");
    for r in rows {
        csv_row!(doc, r.time, r.seq, r.kind, r.detail);
    }
    doc.into_string()
}

/// Render an elastic timeline (`time,running,pending,waiting_jobs,action,detail`).
pub fn timeline_csv(rows: &[crate::autoscaler::TimelineRow], hash: u64, seed: u64) -> String {
    let mut doc = CsvDoc::new(hash, seed, "time,running,pending,waiting_jobs,action,detail");
    for r in rows {
        csv_row!(doc, r.time, r.running, r.pending, r.waiting_jobs, r.action, r.detail);
    }
    doc.into_string()
}

/// Render boot-latency rows (`vm,request_time,boot_latency,join_time`).
pub fn boot_csv(rows: &[crate::cloud::BootRow], hash: u64, seed: u64) -> String {
    let mut doc = CsvDoc::new(hash, seed, "vm,request_time,boot_latency,join_time");
    for r in rows {
        csv_row!(doc, r.vm, r.request_time, r.boot_latency, r.join_time);
    }
    doc.into_string()
}

/// Render a scheduler completion report as a one-row summary plus the
/// per-worker table.
pub fn completion_csv(report: &crate::sched::CompletionReport, hash: u64, seed: u64) -> String {
    let mut doc = CsvDoc::new(
        hash,
        seed,
        "time_to_results,completion_time,first_arrival,work_processed,packets_granted,workers",
    );
    csv_row!(
        doc,
        report.time_to_results,
        report.completion_time,
        report.first_arrival,
        report.work_processed,
        report.packets_granted,
        report.workers.len()
    );
    doc.into_string()
}

pub fn workers_csv(report: &crate::sched::CompletionReport, hash: u64, seed: u64) -> String {
    let mut doc = CsvDoc::new(hash, seed, "id,arrival,init,busy,idle,packets");
    for w in &report.workers {
        csv_row!(doc, w.id, w.arrival, w.init_spent, w.busy, w.idle, w.packets);
    }
    doc.into_string()
}
