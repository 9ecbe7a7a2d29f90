//! Closed-form ramp-up and time-to-results model.
//!
//! A site that receives a burst of job submissions does not start them all at
//! once: the running-job count grows along a saturating curve
//!
//! ```text
//!     n(t) = p0 * t / (1 + p1 * t)
//! ```
//!
//! where `p0` is the initial job-arrival rate and `p0/p1` the per-user
//! ceiling. From that single curve both scheduling disciplines follow:
//!
//! * **pull** — workers join as they start and share one work pool, so the
//!   serialized work done by time `t'` is the integral of `n`, and the time
//!   to results inverts that integral;
//! * **push** — the work is pre-split into `n'` equal and independent jobs,
//!   so the last job to start (`rampup_time(n')`) plus its chunk (`T/n'`)
//!   bounds completion; `n'` has a closed-form optimum.
//!
//! All functions are unit-agnostic: supply `p0`, `p1`, `t`, `T` in any one
//! consistent time unit. The simulator modules use seconds.

use thiserror::Error;

/// Relative tolerance for the numeric inversion of the cumulative-work curve.
const INVERT_REL_TOL: f64 = 1e-12;
/// Iteration budget for the inversion (bracket growth + bisection/Newton).
const INVERT_MAX_ITER: u32 = 200;
/// Below this value of `p1 * t` the closed form of [`pull_serialized_time`]
/// cancels badly — `x - ln(1+x)` keeps only a 2e-16/x fraction of each
/// operand, so its relative error grows like `2 eps / x` — and the switch
/// sits where that error (~4e-13) meets the truncated series' own error
/// (~3e-16). Pushing the switch lower would poison finite differences of
/// the curve just above it.
const SERIES_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("time must be finite and >= 0, got {0}")]
    NegativeTime(f64),
    #[error("serialized work must be finite and > 0, got {0}")]
    NonPositiveWork(f64),
    #[error("job count {n} outside the valid range [0, {max}) for these parameters")]
    JobCountOutOfRange { n: f64, max: f64 },
    #[error("invalid ramp-up parameters: {0}")]
    InvalidParams(String),
    #[error("inversion stalled after {iterations} iterations (best t'={best}, relative residual {residual:.3e})")]
    NoConvergence {
        iterations: u32,
        best: f64,
        residual: f64,
    },
    #[error("need at least 3 samples with 2 distinct positive times, got {0} usable")]
    InsufficientSamples(usize),
    #[error("invalid sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error("claims must satisfy 0 < t_pull < t_push, got t_pull={t_pull}, t_push={t_push}")]
    ClaimOrdering { t_pull: f64, t_push: f64 },
    #[error("no ramp-up parameters reproduce the claims: {0}")]
    NoRoot(String),
}

/// Site ramp-up parameters: `p0` jobs per time unit at t=0, `p1` saturation
/// rate. `p0/p1` is the asymptotic job ceiling (infinite when `p1 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampUpParams {
    p0: f64,
    p1: f64,
}

impl RampUpParams {
    pub fn new(p0: f64, p1: f64) -> Result<Self, ModelError> {
        if !p0.is_finite() || p0 <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "p0 must be finite and > 0, got {p0}"
            )));
        }
        if !p1.is_finite() || p1 < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "p1 must be finite and >= 0, got {p1}"
            )));
        }
        Ok(Self { p0, p1 })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Asymptotic running-job ceiling `p0/p1`; `+inf` for a linear ramp.
    pub fn max_jobs(&self) -> f64 {
        if self.p1 == 0.0 {
            f64::INFINITY
        } else {
            self.p0 / self.p1
        }
    }
}

fn check_time(t: f64) -> Result<(), ModelError> {
    if !t.is_finite() || t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    Ok(())
}

fn check_work(total: f64) -> Result<(), ModelError> {
    if !total.is_finite() || total <= 0.0 {
        return Err(ModelError::NonPositiveWork(total));
    }
    Ok(())
}

/// Running-job count at time `t` since the first job started:
/// `n(t) = p0 t / (1 + p1 t)`.
pub fn running_jobs(params: &RampUpParams, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    Ok(params.p0 * t / (1.0 + params.p1 * t))
}

/// Time at which the running-job count reaches `n`: `t(n) = n / (p0 - p1 n)`.
/// Undefined at or above the ceiling `p0/p1`.
pub fn rampup_time(params: &RampUpParams, n: f64) -> Result<f64, ModelError> {
    let max = params.max_jobs();
    if !n.is_finite() || n < 0.0 || n >= max {
        return Err(ModelError::JobCountOutOfRange { n, max });
    }
    Ok(n / (params.p0 - params.p1 * n))
}

/// Serialized work completed by a pull scheduler after `t'` of wall time:
/// the integral of `running_jobs`, `(p0/p1^2) (p1 t' - ln(1 + p1 t'))`.
///
/// For small `p1 t'` the closed form cancels catastrophically; the series
/// `p0 t'^2 (1/2 - x/3 + x^2/4 - x^3/5 + x^4/6)` is used instead (whose
/// leading term is also the exact `p1 = 0` limit).
pub fn pull_serialized_time(params: &RampUpParams, t_prime: f64) -> Result<f64, ModelError> {
    check_time(t_prime)?;
    let x = params.p1 * t_prime;
    if x < SERIES_THRESHOLD {
        let poly = 0.5 - x * (1.0 / 3.0 - x * (0.25 - x * (0.2 - x / 6.0)));
        Ok(params.p0 * t_prime * t_prime * poly)
    } else {
        Ok(params.p0 / (params.p1 * params.p1) * (x - x.ln_1p()))
    }
}

/// Wall time for a pull scheduler to complete `total_work`: the numeric
/// inverse of [`pull_serialized_time`], which is strictly increasing.
///
/// Brackets the root by geometric growth, then alternates Newton steps
/// (the derivative is [`running_jobs`]) with bisection whenever Newton
/// leaves the bracket.
pub fn pull_time_to_results(params: &RampUpParams, total_work: f64) -> Result<f64, ModelError> {
    check_work(total_work)?;

    // Exact for p1 = 0 and a lower bound otherwise: good bracket seed.
    let mut hi = (2.0 * total_work / params.p0).sqrt();
    let mut iterations = 0u32;
    while pull_serialized_time(params, hi)? < total_work {
        hi *= 2.0;
        iterations += 1;
        if iterations >= INVERT_MAX_ITER {
            return Err(ModelError::NoConvergence {
                iterations,
                best: hi,
                residual: f64::INFINITY,
            });
        }
    }
    let mut lo = 0.0f64;
    let mut t = hi;

    while iterations < INVERT_MAX_ITER {
        let f = pull_serialized_time(params, t)? - total_work;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let residual = f.abs() / total_work;
        if residual <= INVERT_REL_TOL {
            return Ok(t);
        }
        let slope = params.p0 * t / (1.0 + params.p1 * t);
        let newton = t - f / slope;
        t = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= INVERT_REL_TOL * hi {
            return Ok(t);
        }
        iterations += 1;
    }
    let best = 0.5 * (lo + hi);
    let residual = (pull_serialized_time(params, best)? - total_work).abs() / total_work;
    Err(ModelError::NoConvergence {
        iterations,
        best,
        residual,
    })
}

/// Job count minimizing push completion time:
/// `n'(T) = p0 sqrt(T) / (sqrt(p0) + p1 sqrt(T))`. Always below `p0/p1`.
pub fn optimal_job_count(params: &RampUpParams, total_work: f64) -> Result<f64, ModelError> {
    check_work(total_work)?;
    let rt = total_work.sqrt();
    Ok(params.p0 * rt / (params.p0.sqrt() + params.p1 * rt))
}

/// Push completion time with `n'` equal independent jobs: the last one
/// starts at `rampup_time(n')` and still has `T/n'` of work to do.
pub fn push_time_at(
    params: &RampUpParams,
    total_work: f64,
    n_prime: f64,
) -> Result<f64, ModelError> {
    check_work(total_work)?;
    let max = params.max_jobs();
    if !n_prime.is_finite() || n_prime <= 0.0 || n_prime >= max {
        return Err(ModelError::JobCountOutOfRange { n: n_prime, max });
    }
    Ok(n_prime / (params.p0 - params.p1 * n_prime) + total_work / n_prime)
}

/// Push completion time at the optimal job count:
/// `(2 sqrt(p0 T) + p1 T) / p0`.
pub fn push_time_to_results(params: &RampUpParams, total_work: f64) -> Result<f64, ModelError> {
    check_work(total_work)?;
    Ok((2.0 * (params.p0 * total_work).sqrt() + params.p1 * total_work) / params.p0)
}

/// Pull-to-push completion ratio; pull is never slower. The ratio depends
/// on workload only through `c = T p1^2 / p0`. It tends to `1/sqrt(2)` as
/// `c -> 0` — approached from slightly below, bottoming out near 0.70469
/// at `c ~ 0.068` — and climbs monotonically toward 1 beyond the dip: the
/// two disciplines are asymptotically equivalent on large workloads.
pub fn speedup_ratio(params: &RampUpParams, total_work: f64) -> Result<f64, ModelError> {
    let pull = pull_time_to_results(params, total_work)?;
    let push = push_time_to_results(params, total_work)?;
    Ok(pull / push)
}
