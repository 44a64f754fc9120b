//! EWMA smoothing and the adaptive `mean + k * std` threshold.

use crate::error::{Error, Result};

/// Which signal is compared against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlagMode {
    /// EWMA-smoothed score `z`.
    #[default]
    Smoothed,
    /// The raw score of the current edge.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// EWMA weight on the newest score, in (0, 1].
    pub lambda: f64,
    /// Sensitivity multiplier on the running standard deviation.
    pub k: f64,
    pub flag_mode: FlagMode,
    /// Fixed threshold replacing `mean + k * std` when set.
    pub static_threshold: Option<f64>,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            lambda: 0.8,
            k: 3.0,
            flag_mode: FlagMode::Smoothed,
            static_threshold: None,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param(
                "lambda",
                format!("must lie in (0, 1], got {}", self.lambda),
            ));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param("k", format!("must be positive, got {}", self.k)));
        }
        if let Some(th) = self.static_threshold {
            if !th.is_finite() {
                return Err(Error::param("threshold", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Outcome of [`DetectorState::classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub z: f64,
    pub tau: f64,
    pub flag: bool,
}

#[derive(Debug, Clone)]
pub struct DetectorState {
    params: DetectorParams,
    z: Option<f64>,
    count: u64,
    mean: f64,
    m2: f64,
}

impl DetectorState {
    pub fn new(params: DetectorParams) -> Result<Self> {
        params.validate()?;
        Ok(DetectorState {
            params,
            z: None,
            count: 0,
            mean: 0.0,
            m2: 0.0,
        })
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn z(&self) -> Option<f64> {
        self.z
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Updates and returns the smoothed score. The first score seeds `z`.
    pub fn ewma_update(&mut self, x: f64) -> f64 {
        let lambda = self.params.lambda;
        // z + lambda * (x - z) is the same recursion, but keeps z exactly
        // fixed when x == z.
        let z = match self.z {
            Some(prev) if lambda < 1.0 => prev + lambda * (x - prev),
            _ => x,
        };
        self.z = Some(z);
        z
    }

    /// Folds `x` into the running mean and population variance (Welford)
    /// and returns `(mean, std)`.
    pub fn stats_update(&mut self, x: f64) -> (f64, f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        (self.mean, self.std())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation of the scores seen so far.
    pub fn std(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.m2.max(0.0) / self.count as f64).sqrt()
    }

    pub fn threshold(&self) -> Result<f64> {
        if let Some(th) = self.params.static_threshold {
            return Ok(th);
        }
        if self.count == 0 {
            return Err(Error::State("threshold queried before any score"));
        }
        Ok(self.mean + self.params.k * self.std())
    }

    /// Smooths `x`, updates the statistics with the raw `x`, and flags when
    /// the compared signal strictly exceeds the threshold.
    pub fn classify(&mut self, x: f64) -> Decision {
        let z = self.ewma_update(x);
        self.stats_update(x);
        let tau = self.threshold().expect("statistics hold at least one score");
        let signal = match self.params.flag_mode {
            FlagMode::Smoothed => z,
            FlagMode::Raw => x,
        };
        Decision {
            z,
            tau,
            flag: signal > tau,
        }
    }
}

/// Chebyshev bound `1 / k^2` on the false-alarm rate of a `mean + k * std`
/// threshold.
pub fn fpr_bound(k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::param("k", "must be positive"));
    }
    Ok(1.0 / (k * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(lambda: f64, k: f64) -> DetectorState {
        DetectorState::new(DetectorParams {
            lambda,
            k,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn identity_smoothing() {
        let mut s = state(1.0, 3.0);
        for x in [3.0, -1.0, 8.5, 0.0] {
            assert_eq!(s.ewma_update(x), x);
        }
    }

    #[test]
    fn half_smoothing() {
        let mut s = state(0.5, 3.0);
        s.ewma_update(2.0);
        assert_eq!(s.ewma_update(4.0), 3.0);
    }

    #[test]
    fn constant_input_is_fixed_point() {
        let mut s = state(0.3, 3.0);
        for _ in 0..100 {
            assert_eq!(s.ewma_update(2.5), 2.5);
        }
    }

    #[test]
    fn stats_examples() {
        let mut s = state(1.0, 3.0);
        assert_eq!(s.stats_update(5.0), (5.0, 0.0));
        let mut s = state(1.0, 3.0);
        s.stats_update(1.0);
        assert_eq!(s.stats_update(3.0), (2.0, 1.0));
    }

    #[test]
    fn threshold_examples() {
        let mut s = state(1.0, 3.0);
        assert!(matches!(s.threshold(), Err(Error::State(_))));
        s.stats_update(1.0);
        s.stats_update(3.0);
        assert_eq!(s.threshold().unwrap(), 5.0);

        let mut flat = state(1.0, 7.0);
        for _ in 0..5 {
            flat.stats_update(2.0);
        }
        assert_eq!(flat.threshold().unwrap(), 2.0);

        let mut prev = f64::NEG_INFINITY;
        for k in [0.5, 1.0, 2.0, 3.0, 10.0] {
            let mut s = state(1.0, k);
            for x in [1.0, 4.0, 2.0, 9.0] {
                s.stats_update(x);
            }
            let tau = s.threshold().unwrap();
            assert!(tau >= prev);
            prev = tau;
        }
    }

    #[test]
    fn constant_stream_never_flags() {
        for c in [4.0, 9.80698107e-08, 0.1, 1.0 / 3.0, 12345.678] {
            let mut s = state(0.8, 3.0);
            for _ in 0..1000 {
                let d = s.classify(c);
                assert!(!d.flag, "{c}");
                assert_eq!(d.z, d.tau);
            }
        }
    }

    #[test]
    fn spike_flagged_without_smoothing() {
        let mut s = state(1.0, 3.0);
        for _ in 0..99 {
            assert!(!s.classify(0.0).flag);
        }
        let d = s.classify(100.0);
        assert!(d.flag);
        // mean 1, std sqrt(100 - 1)
        assert!((d.tau - (1.0 + 3.0 * 99f64.sqrt())).abs() < 1e-9);
        assert!((d.tau - 30.85).abs() < 0.01);
    }

    #[test]
    fn spike_suppressed_by_heavy_smoothing() {
        let mut s = state(0.01, 3.0);
        for _ in 0..99 {
            s.classify(0.0);
        }
        let d = s.classify(100.0);
        assert!((d.z - 1.0).abs() < 1e-12);
        assert!(!d.flag);
    }

    #[test]
    fn raw_flag_mode_compares_score() {
        let mut s = DetectorState::new(DetectorParams {
            lambda: 0.01,
            k: 3.0,
            flag_mode: FlagMode::Raw,
            static_threshold: None,
        })
        .unwrap();
        for _ in 0..99 {
            s.classify(0.0);
        }
        assert!(s.classify(100.0).flag);
    }

    #[test]
    fn static_threshold_overrides() {
        let mut s = DetectorState::new(DetectorParams {
            lambda: 1.0,
            static_threshold: Some(0.5),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.threshold().unwrap(), 0.5);
        assert!(!s.classify(0.5).flag);
        assert!(s.classify(0.6).flag);
    }

    #[test]
    fn fpr_bound_values() {
        assert_eq!(fpr_bound(2.0).unwrap(), 0.25);
        assert!((fpr_bound(3.0).unwrap() - 0.11).abs() < 0.0012);
        assert_eq!(fpr_bound(1.0).unwrap(), 1.0);
        assert!(fpr_bound(0.0).is_err());
        assert!(fpr_bound(-2.0).is_err());
    }

    #[test]
    fn validation() {
        for (lambda, k, key) in [(0.0, 3.0, "lambda"), (1.5, 3.0, "lambda"), (0.5, 0.0, "k")] {
            match DetectorState::new(DetectorParams {
                lambda,
                k,
                ..Default::default()
            }) {
                Err(Error::Param { name, .. }) => assert_eq!(name, key),
                other => panic!("{other:?}"),
            }
        }
    }
}
