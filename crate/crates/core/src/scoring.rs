//! Per-edge anomaly scores from sketch estimates.
//!
//! Inputs are the current-bin count `a`, the cumulative count `s` and the
//! number of bins elapsed `t`. The historical per-bin mean is `s / t`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringParams {
    /// Mean shift of the anomaly hypothesis.
    pub delta_shift: f64,
    /// Prior probability of an anomaly.
    pub prior: f64,
    /// Lower bound on the normal-hypothesis variance.
    pub variance_floor: f64,
    /// Anomaly variance as a multiple of the normal variance.
    pub anomaly_variance_factor: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            delta_shift: 10.0,
            prior: 0.05,
            variance_floor: 1e-9,
            anomaly_variance_factor: 4.0,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_shift > 0.0 && self.delta_shift.is_finite()) {
            return Err(Error::param("delta_shift", "must be positive and finite"));
        }
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::param(
                "prior",
                format!("must lie in (0, 1), got {}", self.prior),
            ));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::param("variance_floor", "must be positive"));
        }
        if !(self.anomaly_variance_factor > 0.0 && self.anomaly_variance_factor.is_finite()) {
            return Err(Error::param("variance_factor", "must be positive"));
        }
        Ok(())
    }
}

/// Normalised squared deviation of `a` from the historical mean `s / t`:
/// `(a - s/t)^2 * t / (s * (t - 1))`.
///
/// With no history to deviate from (`t <= 1` or `s == 0`) the score is 0.
pub fn raw_score(a: f64, s: f64, t: u64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::param("a", "must be non-negative"));
    }
    if !(s >= 0.0) {
        return Err(Error::param("s", "must be non-negative"));
    }
    if t == 0 {
        return Err(Error::param("t", "must be at least 1"));
    }
    Ok(raw_score_unchecked(a, s, t))
}

#[inline]
pub(crate) fn raw_score_unchecked(a: f64, s: f64, t: u64) -> f64 {
    if t <= 1 || s == 0.0 {
        return 0.0;
    }
    let t = t as f64;
    let dev = a - s / t;
    dev * dev * t / (s * (t - 1.0))
}

/// Normal density at `a`.
pub fn gaussian_likelihood(a: f64, mu: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::param("sigma2", "variance must be positive"));
    }
    Ok(log_gaussian(a, mu, sigma2).exp())
}

#[inline]
fn log_gaussian(a: f64, mu: f64, sigma2: f64) -> f64 {
    let d = a - mu;
    -0.5 * (2.0 * PI * sigma2).ln() - d * d / (2.0 * sigma2)
}

/// Both hypothesis log-densities for an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihoods {
    pub log_normal: f64,
    pub log_anomaly: f64,
}

pub fn likelihoods(a: f64, s: f64, t: u64, params: &ScoringParams) -> Likelihoods {
    let t = t.max(1) as f64;
    let mu = s / t;
    let sigma2 = (s / (t * t)).max(params.variance_floor);
    let mu_a = mu + params.delta_shift;
    let sigma2_a = params.anomaly_variance_factor * sigma2;
    Likelihoods {
        log_normal: log_gaussian(a, mu, sigma2),
        log_anomaly: log_gaussian(a, mu_a, sigma2_a),
    }
}

/// Posterior probability that `a` came from the anomaly hypothesis.
///
/// Normal: `N(s/t, max(s/t^2, floor))`. Anomaly: mean shifted by
/// `delta_shift`, variance scaled by `anomaly_variance_factor`. The two
/// densities are combined in log space, rescaled by the larger one, so the
/// ratio survives when both would underflow.
pub fn posterior_anomaly(a: f64, s: f64, t: u64, params: &ScoringParams) -> f64 {
    let l = likelihoods(a, s, t, params);
    posterior_from_logs(l, params.prior)
}

#[inline]
pub(crate) fn posterior_from_logs(l: Likelihoods, prior: f64) -> f64 {
    let m = l.log_normal.max(l.log_anomaly);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return prior;
    }
    let p_anomaly = (l.log_anomaly - m).exp();
    let p_normal = (l.log_normal - m).exp();
    let num = prior * p_anomaly;
    num / (num + (1.0 - prior) * p_normal)
}
