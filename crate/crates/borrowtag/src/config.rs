//! Flat `key = value` run configuration.
//!
//! ```text
//! # paths are relative to this file
//! train = data/train.tsv
//! dev = data/dev.tsv
//! embeddings = vectors.txt
//! c1 = 0.05
//! c2 = 0.01
//! grid_c1 = 0.01, 0.05, 0.1
//! grid_embeddings = none, vectors.txt
//! ignore_other = true
//! ```
//!
//! Command-line flags are applied on top of the file; a flag that changes a
//! value set in the file wins and logs a warning.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use borrowtag_core::features::FamilySet;
use borrowtag_core::tune::{GridSpec, NO_EMBEDDINGS};
use borrowtag_core::{Family, FeatureConfig, TrainConfig};

use crate::errors::{Error, Result};

const PATH_KEYS: &[&str] = &["train", "dev", "test", "embeddings", "model", "output_dir"];

pub const KEYS: &[&str] = &[
    "train",
    "dev",
    "test",
    "embeddings",
    "model",
    "output_dir",
    "families",
    "window_radius",
    "embedding_scaling",
    "c1",
    "c2",
    "delta",
    "period",
    "max_iterations",
    "lbfgs_memory",
    "epsilon",
    "grid_c1",
    "grid_c2",
    "grid_scaling",
    "grid_embeddings",
    "ignore_other",
];

/// Raw settings before typing, with relative paths already resolved.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key {key:?}")))
    }
}

fn resolve(base: &Path, value: &str) -> String {
    let path = Path::new(value);
    if path.is_absolute() || base.as_os_str().is_empty() {
        value.to_owned()
    } else {
        base.join(path).to_string_lossy().into_owned()
    }
}

impl Settings {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            check_key(key).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            let value = if PATH_KEYS.contains(&key) {
                resolve(base, value)
            } else if key == "grid_embeddings" {
                list(value)
                    .map(|v| if v == NO_EMBEDDINGS { v.to_owned() } else { resolve(base, v) })
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                value.to_owned()
            };
            if values.insert(key.to_owned(), value).is_some() {
                return Err(Error::parse(i + 1, format!("{key:?} set twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::at(path))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Config(format!("{}:{line}: {msg}", path.display())),
            e => e,
        })
    }

    /// Applies a command-line value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        let value = value.into();
        if let Some(old) = self.values.get(key) {
            if *old != value {
                log::warn!("{key}: command line value {value:?} overrides config value {old:?}");
            }
        }
        self.values.insert(key.to_owned(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| Error::Config(format!("bad value for {key}: {v:?}"))))
            .transpose()
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                list(v)
                    .map(|x| x.parse().map_err(|_| Error::Config(format!("bad value in {key}: {x:?}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn build(&self) -> Result<RunConfig> {
        let path = |key: &str| self.get(key).map(PathBuf::from);
        let mut features = FeatureConfig::default();
        if let Some(v) = self.get("families") {
            features.families = list(v)
                .map(|f| f.parse::<Family>())
                .collect::<Result<FamilySet, _>>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(r) = self.typed("window_radius")? {
            features.window_radius = r;
        }
        if let Some(s) = self.typed("embedding_scaling")? {
            features.embedding_scaling = s;
        }
        let d = TrainConfig::default();
        let train_config = TrainConfig {
            c1: self.typed("c1")?.unwrap_or(d.c1),
            c2: self.typed("c2")?.unwrap_or(d.c2),
            delta: self.typed("delta")?.unwrap_or(d.delta),
            period: self.typed("period")?.unwrap_or(d.period),
            max_iterations: self.typed("max_iterations")?.unwrap_or(d.max_iterations),
            lbfgs_memory: self.typed("lbfgs_memory")?.unwrap_or(d.lbfgs_memory),
            epsilon: self.typed("epsilon")?.unwrap_or(d.epsilon),
        };
        let default_coefficients = [0.01, 0.05, 0.1, 0.5, 1.0];
        let grid = GridSpec {
            c1: self.floats("grid_c1")?.unwrap_or(default_coefficients.to_vec()),
            c2: self.floats("grid_c2")?.unwrap_or(default_coefficients.to_vec()),
            scaling: self.floats("grid_scaling")?.unwrap_or(vec![0.5, 1.0, 2.0, 4.0]),
            embeddings: self
                .get("grid_embeddings")
                .map(|v| list(v).map(str::to_owned).collect())
                .unwrap_or_else(|| vec![NO_EMBEDDINGS.to_owned()]),
        };
        let ignore_other = match self.get("ignore_other") {
            None => false,
            Some("true" | "yes" | "1") => true,
            Some("false" | "no" | "0") => false,
            Some(v) => return Err(Error::Config(format!("bad value for ignore_other: {v:?}"))),
        };
        let config = RunConfig {
            train: path("train"),
            dev: path("dev"),
            test: path("test"),
            embeddings: path("embeddings"),
            model: path("model"),
            output_dir: path("output_dir"),
            features,
            train_config,
            grid,
            ignore_other,
        };
        config.features.validate()?;
        config.train_config.validate()?;
        config.grid.validate()?;
        Ok(config)
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Typed configuration shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub features: FeatureConfig,
    pub train_config: TrainConfig,
    pub grid: GridSpec,
    pub ignore_other: bool,
}

impl RunConfig {
    /// The path under `key`, which must be set and exist.
    pub fn input(&self, key: &str) -> Result<&Path> {
        let path = match key {
            "train" => &self.train,
            "dev" => &self.dev,
            "test" => &self.test,
            "embeddings" => &self.embeddings,
            "model" => &self.model,
            _ => &None,
        };
        let path = path
            .as_deref()
            .ok_or_else(|| Error::Config(format!("no {key} path given")))?;
        if !path.exists() {
            return Err(Error::Config(format!("{key} path {} does not exist", path.display())));
        }
        Ok(path)
    }
}
