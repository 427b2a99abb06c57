//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! ranges = 25m, 50m, 100m
//! block_count = 350
//! topk_fraction = 0.06
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DEFAULT_BLOCK_COUNT, DEFAULT_BLOCK_SIZE, DEFAULT_MASK_RATIO};
use crate::error::{Error, Result};
use crate::spiral::{RangeSpec, PRESETS};
use crate::stats::{DEFAULT_CI_LEVEL, DEFAULT_REPLICATES};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoding {
    Threshold(f64),
    TopK(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub sampling: u64,
    pub split: u64,
    pub mask: u64,
    pub bootstrap: u64,
    pub run: u64,
}

impl RunSeeds {
    pub fn all(seed: u64) -> Self {
        Self {
            sampling: seed,
            split: seed,
            mask: seed,
            bootstrap: seed,
            run: seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ranges: Vec<String>,
    pub block_count: usize,
    pub block_size: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub mask_ratio: f64,
    pub decoding: Decoding,
    pub bootstrap_replicates: usize,
    pub ci_level: f64,
    pub seeds: RunSeeds,
    pub runs_to_average: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ranges: PRESETS.iter().map(|p| p.0.to_string()).collect(),
            block_count: DEFAULT_BLOCK_COUNT,
            block_size: DEFAULT_BLOCK_SIZE,
            n_train: 300,
            n_val: 50,
            mask_ratio: DEFAULT_MASK_RATIO,
            decoding: Decoding::Threshold(0.5),
            bootstrap_replicates: DEFAULT_REPLICATES,
            ci_level: DEFAULT_CI_LEVEL,
            seeds: RunSeeds::all(42),
            runs_to_average: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn range_specs(&self) -> Result<Vec<RangeSpec>> {
        self.ranges.iter().map(|r| RangeSpec::parse(r)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.ranges.is_empty() {
            return bad("at least one range is required".into());
        }
        self.range_specs()?;
        if self.block_count == 0 || self.block_size == 0 {
            return bad("block count and size must be positive".into());
        }
        if self.n_train + self.n_val > self.block_count {
            return bad(format!(
                "split {}+{} exceeds block count {}",
                self.n_train, self.n_val, self.block_count
            ));
        }
        if !(0.0..=1.0).contains(&self.mask_ratio) {
            return bad(format!("mask ratio {} outside [0, 1]", self.mask_ratio));
        }
        match self.decoding {
            Decoding::Threshold(t) if !(0.0..=1.0).contains(&t) => {
                return bad(format!("threshold {t} outside [0, 1]"))
            }
            Decoding::TopK(f) if !(f > 0.0 && f < 1.0) => {
                return bad(format!("top-k fraction {f} outside (0, 1)"))
            }
            _ => {}
        }
        if self.bootstrap_replicates == 0 || !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad("bootstrap needs replicates >= 1 and a level in (0, 1)".into());
        }
        if self.runs_to_average == 0 {
            return bad("runs_to_average must be at least 1".into());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Config { line: i + 1, reason };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|e| err(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.replace('_', "")
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{v}` for `{key}`")))
        }
        match key {
            "ranges" => {
                self.ranges = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "block_count" => self.block_count = num(key, value)?,
            "block_size" => self.block_size = num(key, value)?,
            "n_train" => self.n_train = num(key, value)?,
            "n_val" => self.n_val = num(key, value)?,
            "mask_ratio" => self.mask_ratio = num(key, value)?,
            "threshold" => self.decoding = Decoding::Threshold(num(key, value)?),
            "topk_fraction" => self.decoding = Decoding::TopK(num(key, value)?),
            "bootstrap_replicates" => self.bootstrap_replicates = num(key, value)?,
            "ci_level" => self.ci_level = num(key, value)?,
            "seed" => self.seeds = RunSeeds::all(num(key, value)?),
            "sampling_seed" => self.seeds.sampling = num(key, value)?,
            "split_seed" => self.seeds.split = num(key, value)?,
            "mask_seed" => self.seeds.mask = num(key, value)?,
            "bootstrap_seed" => self.seeds.bootstrap = num(key, value)?,
            "run_seed" => self.seeds.run = num(key, value)?,
            "runs_to_average" => self.runs_to_average = num(key, value)?,
            other => return Err(Error::InvalidArgument(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ranges = {}", self.ranges.join(", "));
        let _ = writeln!(s, "block_count = {}", self.block_count);
        let _ = writeln!(s, "block_size = {}", self.block_size);
        let _ = writeln!(s, "n_train = {}", self.n_train);
        let _ = writeln!(s, "n_val = {}", self.n_val);
        let _ = writeln!(s, "mask_ratio = {}", self.mask_ratio);
        match self.decoding {
            Decoding::Threshold(t) => {
                let _ = writeln!(s, "threshold = {t}");
            }
            Decoding::TopK(f) => {
                let _ = writeln!(s, "topk_fraction = {f}");
            }
        }
        let _ = writeln!(s, "bootstrap_replicates = {}", self.bootstrap_replicates);
        let _ = writeln!(s, "ci_level = {}", self.ci_level);
        let _ = writeln!(s, "sampling_seed = {}", self.seeds.sampling);
        let _ = writeln!(s, "split_seed = {}", self.seeds.split);
        let _ = writeln!(s, "mask_seed = {}", self.seeds.mask);
        let _ = writeln!(s, "bootstrap_seed = {}", self.seeds.bootstrap);
        let _ = writeln!(s, "run_seed = {}", self.seeds.run);
        let _ = writeln!(s, "runs_to_average = {}", self.runs_to_average);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.ranges.len(), 7);
        assert_eq!((c.block_count, c.block_size, c.n_train, c.n_val), (350, 256, 300, 50));
        assert_eq!(c.mask_ratio, 0.3);
        assert_eq!(c.decoding, Decoding::Threshold(0.5));
        assert_eq!((c.bootstrap_replicates, c.ci_level, c.runs_to_average), (10_000, 0.95, 3));
        c.validate().unwrap();
    }

    #[test]
    fn text_roundtrip() {
        let mut c = ExperimentConfig::default();
        c.ranges = vec!["25m".into(), "1:1_000_000".into()];
        c.decoding = Decoding::TopK(0.06);
        c.seeds.bootstrap = 9;
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back.ranges, vec!["25m", "1:1_000_000"]);
        assert_eq!(back.decoding, Decoding::TopK(0.06));
        assert_eq!(back.seeds.bootstrap, 9);
        assert_eq!(ExperimentConfig::parse(&back.to_text()).unwrap(), back);
    }

    #[test]
    fn reports_line_numbers() {
        let err = ExperimentConfig::parse("block_count = 10\n# ok\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        assert!(ExperimentConfig::parse("n_train = 400").is_err());
        assert!(ExperimentConfig::parse("ranges = 12m").is_err());
    }
}
