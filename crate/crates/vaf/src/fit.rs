//! Parameter estimation for the ramp-up curve.
//!
//! Two entry points:
//!
//! * [`fit_rampup`] — nonlinear least squares on a measured `(t, n)` trace.
//!   Gauss-Newton with Levenberg damping, seeded by the linearization
//!   `1/n = 1/(p0 t) + p1/p0` (ordinary least squares in `x = 1/t`), which
//!   lands close enough to the basin that damping rarely engages.
//! * [`calibrate_from_claims`] — recovers `(p0, p1)` from a pair of
//!   published completion times (pull and push) for the same workload.
//!   The pull claim pins `p0` as a closed-form function of `p1`, reducing
//!   the 2x2 system to a 1-D root search in `p1`.

use crate::model::{pull_time_to_results, push_time_to_results, ModelError, RampUpParams};

/// One point of a ramp-up trace: `n` jobs running `t` after the first start.
/// `n` is real-valued so averaged traces stay representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampUpSample {
    pub t: f64,
    pub n: f64,
}

/// Result of [`fit_rampup`].
#[derive(Debug, Clone, Copy)]
pub struct FitReport {
    pub params: RampUpParams,
    /// L2 norm of the residuals `n_i - model(t_i)` at the optimum.
    pub residual_norm: f64,
    pub iterations: u32,
}

/// Result of [`calibrate_from_claims`]: parameters plus how exactly they
/// reproduce the two input claims.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    pub params: RampUpParams,
    pub rel_residual_pull: f64,
    pub rel_residual_push: f64,
}

const FIT_MAX_ITER: u32 = 200;
const CLAIM_REL_TOL: f64 = 1e-6;

fn validate_samples(samples: &[RampUpSample]) -> Result<(), ModelError> {
    let mut distinct_positive = 0usize;
    let mut prev_t = f64::NEG_INFINITY;
    for (index, s) in samples.iter().enumerate() {
        if !s.t.is_finite() || s.t < 0.0 {
            return Err(ModelError::InvalidSample {
                index,
                reason: format!("t must be finite and >= 0, got {}", s.t),
            });
        }
        if !s.n.is_finite() || s.n < 0.0 {
            return Err(ModelError::InvalidSample {
                index,
                reason: format!("n must be finite and >= 0, got {}", s.n),
            });
        }
        if s.t <= prev_t {
            return Err(ModelError::InvalidSample {
                index,
                reason: format!("times must be strictly increasing, {} after {}", s.t, prev_t),
            });
        }
        if s.t > 0.0 {
            distinct_positive += 1;
        }
        prev_t = s.t;
    }
    if samples.len() < 3 || distinct_positive < 2 {
        return Err(ModelError::InsufficientSamples(samples.len()));
    }
    Ok(())
}

/// Linearized initializer: OLS of `1/n` against `1/t` over samples with
/// `t > 0` and `n > 0`. Slope `= 1/p0`, intercept `= p1/p0`.
fn initial_guess(samples: &[RampUpSample]) -> (f64, f64) {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut m = 0.0;
    for s in samples {
        if s.t > 0.0 && s.n > 0.0 {
            let x = 1.0 / s.t;
            let y = 1.0 / s.n;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1.0;
        }
    }
    let denom = m * sxx - sx * sx;
    if m < 2.0 || denom.abs() < 1e-300 {
        return fallback_guess(samples);
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    if !(slope.is_finite() && intercept.is_finite()) || slope <= 0.0 {
        return fallback_guess(samples);
    }
    let p0 = 1.0 / slope;
    let p1 = (intercept * p0).max(0.0);
    (p0, p1)
}

/// Crude but safe seed for degenerate traces: initial slope, no saturation.
fn fallback_guess(samples: &[RampUpSample]) -> (f64, f64) {
    let p0 = samples
        .iter()
        .filter(|s| s.t > 0.0 && s.n > 0.0)
        .map(|s| s.n / s.t)
        .fold(f64::MIN, f64::max);
    (if p0 > 0.0 { p0 } else { 1.0 }, 0.0)
}

fn rss(samples: &[RampUpSample], p0: f64, p1: f64) -> f64 {
    samples
        .iter()
        .map(|s| {
            let r = s.n - p0 * s.t / (1.0 + p1 * s.t);
            r * r
        })
        .sum()
}

/// Least-squares fit of `(p0, p1)` to a ramp-up trace.
pub fn fit_rampup(samples: &[RampUpSample]) -> Result<FitReport, ModelError> {
    validate_samples(samples)?;
    let (mut p0, mut p1) = initial_guess(samples);
    let mut cost = rss(samples, p0, p1);
    let mut lambda = 1e-3;
    let mut iterations = 0u32;

    while iterations < FIT_MAX_ITER {
        iterations += 1;

        // Normal equations of the damped Gauss-Newton step.
        let mut jtj = [0.0f64; 3]; // [a00, a01, a11], symmetric
        let mut jtr = [0.0f64; 2];
        for s in samples {
            let denom = 1.0 + p1 * s.t;
            let model = p0 * s.t / denom;
            let r = s.n - model;
            let d0 = s.t / denom; // d model / d p0
            let d1 = -p0 * s.t * s.t / (denom * denom); // d model / d p1
            jtj[0] += d0 * d0;
            jtj[1] += d0 * d1;
            jtj[2] += d1 * d1;
            jtr[0] += d0 * r;
            jtr[1] += d1 * r;
        }

        let mut stepped = false;
        for _ in 0..24 {
            let a00 = jtj[0] * (1.0 + lambda);
            let a11 = jtj[2] * (1.0 + lambda);
            let a01 = jtj[1];
            let det = a00 * a11 - a01 * a01;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let dp0 = (jtr[0] * a11 - jtr[1] * a01) / det;
            let dp1 = (jtr[1] * a00 - jtr[0] * a01) / det;
            let cand0 = p0 + dp0;
            let cand1 = (p1 + dp1).max(0.0);
            if !(cand0.is_finite() && cand1.is_finite()) || cand0 <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let cand_cost = rss(samples, cand0, cand1);
            if cand_cost <= cost {
                let rel_step = (dp0 / p0).abs().max(if p1 > 0.0 {
                    (dp1 / p1).abs()
                } else {
                    dp1.abs()
                });
                let rel_drop = (cost - cand_cost) / cost.max(f64::MIN_POSITIVE);
                p0 = cand0;
                p1 = cand1;
                cost = cand_cost;
                lambda = (lambda * 0.1).max(1e-12);
                stepped = true;
                if rel_step < 1e-12 || rel_drop < 1e-14 {
                    let params = RampUpParams::new(p0, p1)?;
                    return Ok(FitReport {
                        params,
                        residual_norm: cost.sqrt(),
                        iterations,
                    });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // Damping saturated: we are at a (possibly flat) minimum.
            let params = RampUpParams::new(p0, p1)?;
            return Ok(FitReport {
                params,
                residual_norm: cost.sqrt(),
                iterations,
            });
        }
    }
    let params = RampUpParams::new(p0, p1)?;
    Ok(FitReport {
        params,
        residual_norm: cost.sqrt(),
        iterations,
    })
}

/// `p0` that makes the pull claim exact for a given `p1`, from
/// `T = (p0/p1^2)(p1 t - ln(1 + p1 t))`. Series-safe for small `p1 t`.
fn p0_from_pull_claim(total_work: f64, t_pull: f64, p1: f64) -> f64 {
    let x = p1 * t_pull;
    if x < 1e-6 {
        // T = p0 (t^2/2 - p1 t^3/3 + ...)
        total_work / (t_pull * t_pull * (0.5 - x / 3.0))
    } else {
        total_work * p1 * p1 / (x - x.ln_1p())
    }
}

/// Mismatch of the push claim when `p0` is slaved to the pull claim.
fn push_mismatch(total_work: f64, t_pull: f64, t_push: f64, p1: f64) -> f64 {
    let p0 = p0_from_pull_claim(total_work, t_pull, p1);
    (2.0 * (p0 * total_work).sqrt() + p1 * total_work) / p0 - t_push
}

/// Recover `(p0, p1)` from a pair of completion-time claims for the same
/// serialized workload. When several `(p0, p1)` branches reproduce the
/// claims, the one with `p0/p1` closest to 100 is returned.
pub fn calibrate_from_claims(
    total_work: f64,
    t_pull: f64,
    t_push: f64,
) -> Result<Calibration, ModelError> {
    if !total_work.is_finite() || total_work <= 0.0 {
        return Err(ModelError::NonPositiveWork(total_work));
    }
    if !(t_pull.is_finite() && t_push.is_finite()) || t_pull <= 0.0 || t_pull >= t_push {
        return Err(ModelError::ClaimOrdering { t_pull, t_push });
    }

    // p1 = 0 reproduces exactly t_push/t_pull = sqrt(2); check it first both
    // as a fast path and because the log-grid scan below cannot reach it.
    let p0_linear = 2.0 * total_work / (t_pull * t_pull);
    let push_linear = 2.0 * (total_work / p0_linear).sqrt();
    if (push_linear - t_push).abs() <= CLAIM_REL_TOL * t_push {
        let params = RampUpParams::new(p0_linear, 0.0)?;
        return finish_calibration(params, total_work, t_pull, t_push);
    }
    if t_push >= std::f64::consts::SQRT_2 * t_pull {
        return Err(ModelError::NoRoot(format!(
            "t_push/t_pull = {:.6} exceeds the model's sqrt(2) ceiling",
            t_push / t_pull
        )));
    }

    // Scan x = p1 * t_pull over a log grid and bisect every sign change.
    let (x_lo, x_hi, points) = (1e-8f64, 1e8f64, 3200usize);
    let step = (x_hi / x_lo).powf(1.0 / points as f64);
    let mut roots: Vec<f64> = Vec::new();
    let mut x_prev = x_lo;
    let mut g_prev = push_mismatch(total_work, t_pull, t_push, x_prev / t_pull);
    for i in 1..=points {
        let x = x_lo * step.powi(i as i32);
        let g = push_mismatch(total_work, t_pull, t_push, x / t_pull);
        if g_prev == 0.0 {
            roots.push(x_prev / t_pull);
        } else if g_prev * g < 0.0 {
            let (mut a, mut b) = (x_prev, x);
            for _ in 0..200 {
                let mid = (a * b).sqrt();
                let gm = push_mismatch(total_work, t_pull, t_push, mid / t_pull);
                if gm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if gm * g_prev < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
                if (b - a) <= 1e-15 * b {
                    break;
                }
            }
            roots.push(0.5 * (a + b) / t_pull);
        }
        x_prev = x;
        g_prev = g;
    }
    if roots.is_empty() {
        return Err(ModelError::NoRoot(
            "no sign change on the p1 scan grid".into(),
        ));
    }

    // Prefer the branch whose job ceiling is nearest 100.
    let best = roots
        .into_iter()
        .min_by(|a, b| {
            let da = (p0_from_pull_claim(total_work, t_pull, *a) / a - 100.0).abs();
            let db = (p0_from_pull_claim(total_work, t_pull, *b) / b - 100.0).abs();
            da.total_cmp(&db)
        })
        .expect("non-empty");
    let p0 = p0_from_pull_claim(total_work, t_pull, best);
    let params = RampUpParams::new(p0, best)?;
    finish_calibration(params, total_work, t_pull, t_push)
}

fn finish_calibration(
    params: RampUpParams,
    total_work: f64,
    t_pull: f64,
    t_push: f64,
) -> Result<Calibration, ModelError> {
    let rel_residual_pull =
        (pull_time_to_results(&params, total_work)? - t_pull).abs() / t_pull;
    let rel_residual_push =
        (push_time_to_results(&params, total_work)? - t_push).abs() / t_push;
    if rel_residual_pull > CLAIM_REL_TOL || rel_residual_push > CLAIM_REL_TOL {
        return Err(ModelError::NoRoot(format!(
            "best branch misses the claims (pull {rel_residual_pull:.2e}, push {rel_residual_push:.2e})"
        )));
    }
    Ok(Calibration {
        params,
        rel_residual_pull,
        rel_residual_push,
    })
}

/// Convenience used by tests and the CLI: noiseless trace from known params.
pub fn synthetic_trace(params: &RampUpParams, times: &[f64]) -> Vec<RampUpSample> {
    times
        .iter()
        .map(|&t| RampUpSample {
            t,
            n: params.p0() * t / (1.0 + params.p1() * t),
        })
        .collect()
}
