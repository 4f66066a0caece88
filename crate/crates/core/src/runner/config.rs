//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Reserved keys:
//!
//! | key           | value                                   |
//! |---------------|-----------------------------------------|
//! | `experiment`  | registry name (see `cma-lab list`)      |
//! | `backend`     | `radial` or `planar`                    |
//! | `n`           | one dimension or a comma list           |
//! | `resolutions` | increasing comma list of grid sizes     |
//! | `seed`        | unsigned integer                        |
//! | `out`         | output directory                        |
//!
//! Every other key is an experiment parameter (`p`, `q`, `m`, `alpha`,
//! `delta`, `cap`, `lambda`, `steps`, ...).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::lab::Backend;

/// A parsed configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub backend: Option<Backend>,
    /// Dimensions to run; empty means the experiment default.
    pub n: Vec<usize>,
    /// Empty means the experiment default.
    pub resolutions: Vec<usize>,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

fn usage(msg: String) -> LabError {
    LabError::Usage(msg)
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("bad entry {s:?} in `{key}`"))))
        .collect()
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.into(), ..Self::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| usage(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key as the parser would.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = value.to_string(),
            "backend" => {
                self.backend = Some(match value {
                    "radial" => Backend::Radial,
                    "planar" => Backend::Planar,
                    _ => return Err(usage(format!("unknown backend {value:?}"))),
                })
            }
            "n" => {
                self.n = parse_list(key, value)?;
                if self.n.contains(&0) {
                    return Err(usage("n must be >= 1".into()));
                }
            }
            "resolutions" => {
                self.resolutions = parse_list(key, value)?;
                if self.resolutions.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(usage("resolutions must be strictly increasing".into()));
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| usage(format!("bad seed {value:?}")))?,
            "out" => self.out_dir = Some(PathBuf::from(value)),
            _ => {
                if key.is_empty() || key.contains(char::is_whitespace) {
                    return Err(usage(format!("bad key {key:?}")));
                }
                self.params.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    pub fn with(mut self, key: &str, value: &str) -> Result<Self> {
        self.set(key, value)?;
        Ok(self)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| usage(format!("parameter `{key}` is not a number: {v:?}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| usage(format!("parameter `{key}` is not an integer: {v:?}"))),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(key, v),
        }
    }

    pub fn dims_or(&self, default: &[usize]) -> Vec<usize> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }

    pub fn resolutions_or(&self, default: &[usize]) -> Vec<usize> {
        if self.resolutions.is_empty() {
            default.to_vec()
        } else {
            self.resolutions.clone()
        }
    }

    pub fn backend_or(&self, default: Backend) -> Backend {
        self.backend.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nexperiment = mt-alpha\nbackend = planar\nn = 1, 2\nresolutions=100,200\nseed = 9 # fixed\np = 2.5\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, "mt-alpha");
        assert_eq!(cfg.backend, Some(Backend::Planar));
        assert_eq!(cfg.n, vec![1, 2]);
        assert_eq!(cfg.resolutions, vec![100, 200]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.f64_or("p", 0.0).unwrap(), 2.5);
        assert_eq!(cfg.f64_or("q", 1.5).unwrap(), 1.5);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["no equals sign", "resolutions = 4, 2", "backend = cubic", "n = 0", "seed = -1"] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(LabError::Usage(_))), "{bad}");
        }
        let cfg = ExperimentConfig::parse("p = x").unwrap();
        assert!(cfg.f64_or("p", 1.0).is_err());
    }
}
