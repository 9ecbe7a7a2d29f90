//! Named parameter sets for the two deployments the tool models.
//!
//! The `cern-2013` ramp-up curve is reconstructed by
//! [`calibrate_from_claims`](crate::fit::calibrate_from_claims) from the
//! deployment's published summary numbers (a ~100-worker plateau and the
//! 2 h 42 min pull / 3 h 18 min push completion of a 240-core-hour
//! workload), not from a raw scheduler trace; treat it as representative,
//! not measured. Boot statistics for both sites are measured means/stddevs.

use crate::cloud::CloudConfig;
use crate::model::RampUpParams;

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    /// Worker ramp-up curve, when the site published enough to pin one down.
    pub rampup: Option<RampUpParams>,
    /// VM boot latency mean/stddev in seconds.
    pub boot_mean: f64,
    pub boot_stddev: f64,
    pub note: &'static str,
}

/// `p0` (workers/s) and `p1` (1/s) for the cern-2013 ramp-up curve, frozen
/// from the claim calibration so every consumer sees identical numbers.
pub const CERN_2013_P0: f64 = 0.337663007174016;
pub const CERN_2013_P1: f64 = 0.0033925645199458806;

pub fn cern_2013() -> Preset {
    Preset {
        name: "cern-2013",
        rampup: Some(
            RampUpParams::new(CERN_2013_P0, CERN_2013_P1)
                .expect("frozen constants are valid"),
        ),
        boot_mean: 375.0,
        boot_stddev: 39.0,
        note: "ramp-up reconstructed from summary claims, not a measured trace",
    }
}

pub fn torino_2013() -> Preset {
    Preset {
        name: "torino-2013",
        rampup: None,
        boot_mean: 351.0,
        boot_stddev: 21.0,
        note: "boot statistics only; no ramp-up curve published",
    }
}

pub fn lookup(name: &str) -> Option<Preset> {
    match name {
        "cern-2013" => Some(cern_2013()),
        "torino-2013" => Some(torino_2013()),
        _ => None,
    }
}

pub fn names() -> &'static [&'static str] {
    &["cern-2013", "torino-2013"]
}

impl Preset {
    pub fn cloud_config(&self) -> CloudConfig {
        CloudConfig {
            boot_mean: self.boot_mean,
            boot_stddev: self.boot_stddev,
            ..CloudConfig::default()
        }
    }
}
