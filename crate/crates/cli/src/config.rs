//! Run configuration. Every section is optional in the file; missing keys
//! take the defaults below.

use std::path::Path;

use reread_core::experiment::{ModelKind, Task};
use reread_core::ezreader::EzParams;
use reread_core::ingest::{ColumnSchema, SyntheticCorpusSpec};
use reread_core::learn::GbtHyperParams;
use reread_core::scasim::ScasimConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; `--seed` overrides it.
    pub seed: u64,
    pub corpus: SyntheticCorpusSpec,
    pub schema: ColumnSchema,
    /// Parameters of the reference reader used by `simulate`.
    pub ez: EzParams,
    pub scasim: ScasimConfig,
    pub simulate: SimulateConfig,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub evaluate: EvaluateConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 7,
            corpus: SyntheticCorpusSpec::default(),
            schema: ColumnSchema::default(),
            ez: EzParams::default(),
            scasim: ScasimConfig::default(),
            simulate: SimulateConfig::default(),
            split: SplitConfig::default(),
            train: TrainConfig::default(),
            evaluate: EvaluateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Statistical subjects per paragraph.
    pub subjects: usize,
    /// The prototype scanpath is chosen among the first this many subjects.
    pub prototype_pool: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            subjects: 1000,
            prototype_pool: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub folds: usize,
    pub timeout_secs: f64,
    pub require_fold_cycle: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            folds: 10,
            timeout_secs: 60.0,
            require_fold_cycle: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub learning_rates: Vec<f64>,
    pub n_estimators: Vec<usize>,
    pub max_depths: Vec<usize>,
    pub l1_alphas: Vec<f64>,
    pub pca_explained_variance: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            learning_rates: GbtHyperParams::LEARNING_RATES.to_vec(),
            n_estimators: GbtHyperParams::N_ESTIMATORS.to_vec(),
            max_depths: GbtHyperParams::MAX_DEPTHS.to_vec(),
            l1_alphas: GbtHyperParams::L1_ALPHAS.to_vec(),
            pca_explained_variance: GbtHyperParams::PCA_EXPLAINED.to_vec(),
        }
    }
}

impl GridConfig {
    pub fn points(&self) -> Vec<GbtHyperParams> {
        GbtHyperParams::grid(&self.learning_rates, &self.n_estimators, &self.max_depths, &self.l1_alphas, &self.pca_explained_variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub tasks: Vec<String>,
    pub models: Vec<String>,
    pub grid: GridConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tasks: vec!["single".into(), "paired".into()],
            models: ModelKind::ALL.iter().map(|m| m.as_str().to_string()).collect(),
            grid: GridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub bootstrap_resamples: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig { bootstrap_resamples: 1000 }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let config: Config = toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |e: reread_core::Error| Failure::Usage(format!("invalid configuration: {e}"));
        self.corpus.validate().map_err(bad)?;
        self.ez.validate().map_err(bad)?;
        self.scasim.validate().map_err(bad)?;
        for hp in self.train.grid.points() {
            hp.validate().map_err(bad)?;
        }
        self.tasks()?;
        self.models()?;
        if self.train.grid.points().is_empty() {
            return Err(Failure::Usage("train.grid must contain at least one point".into()));
        }
        if self.simulate.subjects == 0 || self.simulate.prototype_pool == 0 {
            return Err(Failure::Usage("simulate.subjects and simulate.prototype_pool must be positive".into()));
        }
        if !(self.split.timeout_secs > 0.0 && self.split.timeout_secs.is_finite()) {
            return Err(Failure::Usage("split.timeout_secs must be positive".into()));
        }
        if self.evaluate.bootstrap_resamples == 0 {
            return Err(Failure::Usage("evaluate.bootstrap_resamples must be positive".into()));
        }
        Ok(())
    }

    pub fn tasks(&self) -> Result<Vec<Task>, Failure> {
        parse_list(&self.train.tasks, Task::parse, "task")
    }

    pub fn models(&self) -> Result<Vec<ModelKind>, Failure> {
        parse_list(&self.train.models, ModelKind::parse, "model")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

pub fn parse_list<T>(names: &[String], parse: fn(&str) -> Option<T>, what: &str) -> Result<Vec<T>, Failure> {
    names
        .iter()
        .map(|n| parse(n).ok_or_else(|| Failure::Usage(format!("unknown {what} `{n}`"))))
        .collect()
}
