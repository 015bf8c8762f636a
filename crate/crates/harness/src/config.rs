//! Experiment configuration: a flat `key = value` text file.
//!
//! ```text
//! # comment
//! problems   = F1, F2, my_system.nes
//! algorithms = MONES, VR-MONES
//! runs       = 30
//! seed       = 2024
//! out        = results
//! jobs       = 4
//! generations = 500     # NSGA-II generations after the initial population
//! np         = 100      # NSGA-II population size
//! de_np      = 20       # JADE population; defaults to 10 per search dimension, within [20, 100]
//! nfes_max   = 50000    # repulsion-loop budget; defaults to each problem's own
//! ```
//!
//! Problems are suite names or paths to problem files (anything containing
//! `/` or ending in `.nes`).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "MONES")]
    Mones,
    #[serde(rename = "VR-MONES")]
    VrMones,
    #[serde(rename = "DR-JADE")]
    DrJade,
    #[serde(rename = "VR-DR-JADE")]
    VrDrJade,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Mones, Self::VrMones, Self::DrJade, Self::VrDrJade];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mones => "MONES",
            Self::VrMones => "VR-MONES",
            Self::DrJade => "DR-JADE",
            Self::VrDrJade => "VR-DR-JADE",
        }
    }

    /// Stable id mixed into per-run seeds.
    pub fn id(self) -> u64 {
        match self {
            Self::Mones => 1,
            Self::VrMones => 2,
            Self::DrJade => 3,
            Self::VrDrJade => 4,
        }
    }

    pub fn uses_reduction(self) -> bool {
        matches!(self, Self::VrMones | Self::VrDrJade)
    }

    pub fn is_mones(self) -> bool {
        matches!(self, Self::Mones | Self::VrMones)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError::UnknownAlgorithm(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown algorithm `{0}` (expected MONES, VR-MONES, DR-JADE or VR-DR-JADE)")]
    UnknownAlgorithm(String),
    #[error("`{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("no problems given")]
    NoProblems,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub generations: usize,
    pub np: usize,
    pub de_np: Option<usize>,
    pub nfes_max: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            algorithms: Algorithm::ALL.to_vec(),
            runs: 30,
            seed: 0,
            out: PathBuf::from("out"),
            jobs: 1,
            generations: 500,
            np: 100,
            de_np: None,
            nfes_max: None,
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        message: format!("`{value}` is not a valid number"),
    })
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                message: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problems" => cfg.problems = list(value).map(String::from).collect(),
                "algorithms" => cfg.algorithms = list(value).map(str::parse).collect::<Result<_, _>>()?,
                "runs" => cfg.runs = number(key, value)?,
                "seed" => cfg.seed = number(key, value)?,
                "out" => cfg.out = PathBuf::from(value),
                "jobs" => cfg.jobs = number(key, value)?,
                "generations" => cfg.generations = number(key, value)?,
                "np" => cfg.np = number(key, value)?,
                "de_np" => cfg.de_np = Some(number(key, value)?),
                "nfes_max" => cfg.nfes_max = Some(number(key, value)?),
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: &str| ConfigError::InvalidValue {
            key: key.into(),
            message: message.into(),
        };
        if self.problems.is_empty() {
            return Err(ConfigError::NoProblems);
        }
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "at least one algorithm is required"));
        }
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(invalid("jobs", "must be at least 1"));
        }
        if self.generations == 0 {
            return Err(invalid("generations", "must be at least 1"));
        }
        if self.np < 4 || self.np % 2 != 0 {
            return Err(invalid("np", "must be even and at least 4"));
        }
        if self.de_np.is_some_and(|n| n < 4) {
            return Err(invalid("de_np", "must be at least 4"));
        }
        if self.nfes_max.is_some_and(|b| b < self.de_np.unwrap_or(100) as u64) {
            return Err(invalid("nfes_max", "must cover at least one population"));
        }
        Ok(())
    }
}
