//! The full parameter set of one pipeline run, addressable by key.
//!
//! Keys are shared by the CLI flags, config files, sweep grids and the
//! report echo.

use std::fmt;
use std::str::FromStr;

use crate::detector::{DetectorParams, FlagMode};
use crate::error::{Error, Result};
use crate::scoring::ScoringParams;
use crate::tensor_sketch::SketchParams;

/// Which score feeds the detector (and the AUC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    #[default]
    Posterior,
    Raw,
}

impl FromStr for ScoreMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "posterior" => Ok(ScoreMode::Posterior),
            "raw" => Ok(ScoreMode::Raw),
            _ => Err(Error::param(
                "score_mode",
                format!("expected `posterior` or `raw`, got `{s}`"),
            )),
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMode::Posterior => "posterior",
            ScoreMode::Raw => "raw",
        })
    }
}

impl FromStr for FlagMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoothed" => Ok(FlagMode::Smoothed),
            "raw" => Ok(FlagMode::Raw),
            _ => Err(Error::param(
                "flag_mode",
                format!("expected `smoothed` or `raw`, got `{s}`"),
            )),
        }
    }
}

impl fmt::Display for FlagMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagMode::Smoothed => "smoothed",
            FlagMode::Raw => "raw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineParams {
    pub sketch: SketchParams,
    pub scoring: ScoringParams,
    pub detector: DetectorParams,
    pub score_mode: ScoreMode,
}

/// Keys accepted by [`PipelineParams::set`], in echo order.
pub const PARAM_KEYS: &[&str] = &[
    "rows",
    "cols",
    "window",
    "bin_width",
    "gamma",
    "delta_shift",
    "prior",
    "variance_factor",
    "variance_floor",
    "lambda",
    "k",
    "threshold",
    "score_mode",
    "flag_mode",
    "seed",
];

fn parse_num<T: FromStr>(key: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::param(key, format!("cannot parse `{value}`")))
}

/// Maps a user-supplied key (either `snake_case` or `kebab-case`) onto its
/// canonical static name.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    let k = key.trim().replace('-', "_");
    PARAM_KEYS.iter().copied().find(|&p| p == k)
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.sketch.validate()?;
        self.scoring.validate()?;
        self.detector.validate()
    }

    /// Sets one parameter from its textual value. Range checks are left to
    /// [`PipelineParams::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let Some(key) = canonical_key(key) else {
            return Err(Error::param("key", format!("unknown parameter `{key}`")));
        };
        let v = value.trim();
        match key {
            "rows" => self.sketch.rows = parse_num(key, v)?,
            "cols" => self.sketch.cols = parse_num(key, v)?,
            "window" => self.sketch.window = parse_num(key, v)?,
            "bin_width" => self.sketch.bin_width = parse_num(key, v)?,
            "gamma" => self.sketch.gamma = parse_num(key, v)?,
            "seed" => self.sketch.seed = parse_num(key, v)?,
            "delta_shift" => self.scoring.delta_shift = parse_num(key, v)?,
            "prior" => self.scoring.prior = parse_num(key, v)?,
            "variance_factor" => self.scoring.anomaly_variance_factor = parse_num(key, v)?,
            "variance_floor" => self.scoring.variance_floor = parse_num(key, v)?,
            "lambda" => self.detector.lambda = parse_num(key, v)?,
            "k" => self.detector.k = parse_num(key, v)?,
            "threshold" => {
                self.detector.static_threshold = match v {
                    "" | "none" | "adaptive" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "score_mode" => self.score_mode = v.parse()?,
            "flag_mode" => self.detector.flag_mode = v.parse()?,
            _ => unreachable!("every PARAM_KEYS entry is handled"),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let key = canonical_key(key)?;
        Some(match key {
            "rows" => self.sketch.rows.to_string(),
            "cols" => self.sketch.cols.to_string(),
            "window" => self.sketch.window.to_string(),
            "bin_width" => self.sketch.bin_width.to_string(),
            "gamma" => self.sketch.gamma.to_string(),
            "seed" => self.sketch.seed.to_string(),
            "delta_shift" => self.scoring.delta_shift.to_string(),
            "prior" => self.scoring.prior.to_string(),
            "variance_factor" => self.scoring.anomaly_variance_factor.to_string(),
            "variance_floor" => self.scoring.variance_floor.to_string(),
            "lambda" => self.detector.lambda.to_string(),
            "k" => self.detector.k.to_string(),
            "threshold" => match self.detector.static_threshold {
                Some(t) => t.to_string(),
                None => "adaptive".to_owned(),
            },
            "score_mode" => self.score_mode.to_string(),
            "flag_mode" => self.detector.flag_mode.to_string(),
            _ => unreachable!(),
        })
    }

    /// Every parameter as `(key, value)`.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        PARAM_KEYS
            .iter()
            .map(|&k| (k, self.get(k).expect("known key")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_roundtrip() {
        let mut p = PipelineParams::default();
        for (k, v) in [
            ("rows", "6"),
            ("cols", "128"),
            ("window", "8"),
            ("bin-width", "60"),
            ("gamma", "0.97"),
            ("delta_shift", "12.5"),
            ("prior", "0.1"),
            ("lambda", "0.65"),
            ("k", "2"),
            ("threshold", "0.9"),
            ("score_mode", "raw"),
            ("flag_mode", "raw"),
            ("seed", "7"),
        ] {
            p.set(k, v).unwrap();
            assert_eq!(p.get(k).unwrap(), v, "{k}");
        }
        p.validate().unwrap();
        p.set("threshold", "adaptive").unwrap();
        assert_eq!(p.detector.static_threshold, None);
    }

    #[test]
    fn set_errors_name_key() {
        let mut p = PipelineParams::default();
        match p.set("gamma", "abc") {
            Err(Error::Param { name: "gamma", .. }) => {}
            other => panic!("{other:?}"),
        }
        match p.set("bogus", "1") {
            Err(Error::Param { reason, .. }) => assert!(reason.contains("bogus")),
            other => panic!("{other:?}"),
        }
        p.set("gamma", "1.5").unwrap();
        match p.validate() {
            Err(Error::Param { name: "gamma", .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn echo_covers_all_keys() {
        let echo = PipelineParams::default().echo();
        assert_eq!(echo.len(), PARAM_KEYS.len());
        assert_eq!(echo[0], ("rows", "4".to_owned()));
    }
}
