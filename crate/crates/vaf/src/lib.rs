//! Virtual analysis facility laboratory.
//!
//! Everything here exists to answer one operational question: when a batch of
//! analysis jobs lands on an elastic pool of virtual machines, how quickly do
//! the first and the last results come back, and what does the scheduling
//! discipline (adaptive pull vs. static push) cost or buy?
//!
//! The crate is organised in three layers:
//!
//! * [`model`] / [`fit`] — a closed-form ramp-up model of worker
//!   availability, time-to-results for both disciplines, and parameter
//!   estimation from measured ramp-ups or from a pair of published timings.
//! * [`sim`] / [`sched`] — a deterministic discrete-event kernel and, on top
//!   of it, a pull packetizer and a static push splitter whose completion
//!   times can be checked against the closed forms.
//! * [`cloud`] / [`autoscaler`] — a minimal EC2-like cloud with noisy boot
//!   latencies plus the elastic scale-up/scale-down policy of a
//!   queue-watching daemon, wired into a closed loop.
//!
//! [`scenario`], [`presets`] and [`output`] are the plumbing: a small
//! sectioned config format, named parameter sets, and CSV emission. The `vaf`
//! binary drives all of it.

pub mod autoscaler;
pub mod cloud;
pub mod fit;
pub mod model;
pub mod output;
pub mod presets;
pub mod scenario;
pub mod sched;
pub mod sim;

pub use fit::{calibrate_from_claims, fit_rampup, FitReport, RampUpSample};
pub use model::{ModelError, RampUpParams};
pub use sched::{simulate_pull, simulate_push, CompletionReport, Workload};
