use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensembles::{LabeledGraphData, SbmConfig};
use crate::error::{Error, Result};
use crate::experiments::{ingest_external, ExternalDataset};
use crate::gnn::{ModelKind, TrainConfig};
use crate::rng::RngSeed;

/// A graph source: a stochastic block model or an exported dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Sbm(SbmConfig),
    External(ExternalDataset),
}

impl Setting {
    pub fn id(&self) -> String {
        match self {
            Setting::Sbm(cfg) => cfg.label(),
            Setting::External(ds) => ds.name.clone(),
        }
    }

    /// Checks the configuration, and for external datasets that the files exist.
    pub fn validate(&self) -> Result<()> {
        match self {
            Setting::Sbm(cfg) => cfg.validate(),
            Setting::External(ds) => {
                for path in [&ds.edge_file, &ds.feature_file, &ds.label_file] {
                    if !path.exists() {
                        return Err(Error::Config(format!(
                            "dataset {}: {} does not exist",
                            ds.name,
                            path.display()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Loads an external dataset once; SBM settings are generated per run.
    pub(crate) fn load_fixed(&self) -> Result<Option<LabeledGraphData>> {
        match self {
            Setting::Sbm(_) => Ok(None),
            Setting::External(ds) => {
                let ingested = ingest_external(ds)?;
                for w in &ingested.warnings {
                    log::warn!("{}: {w}", ds.name);
                }
                Ok(Some(ingested.data))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfLoopMode {
    Without,
    With,
}

impl SelfLoopMode {
    pub fn enabled(self) -> bool {
        self == SelfLoopMode::With
    }
}

/// Everything needed to reproduce a grid of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub settings: Vec<Setting>,
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<SelfLoopMode>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_kinds")]
    pub model_kinds: Vec<ModelKind>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_walk_k_max")]
    pub walk_k_max: usize,
    /// Graph realizations pooled per setting in the walk tables.
    #[serde(default = "default_walk_graphs")]
    pub walk_graphs: usize,
    /// Restrict generated graphs to their largest connected component.
    #[serde(default)]
    pub largest_component: bool,
    #[serde(default)]
    pub base_seed: RngSeed,
}

fn default_depths() -> Vec<usize> {
    (1..=6).collect()
}

fn default_modes() -> Vec<SelfLoopMode> {
    vec![SelfLoopMode::With, SelfLoopMode::Without]
}

fn default_runs() -> usize {
    50
}

fn default_kinds() -> Vec<ModelKind> {
    vec![ModelKind::Gcn, ModelKind::Mlp]
}

fn default_walk_k_max() -> usize {
    6
}

fn default_walk_graphs() -> usize {
    10
}

impl ExperimentPlan {
    /// Plan with all defaults for the given settings.
    pub fn new(settings: Vec<Setting>) -> Self {
        ExperimentPlan {
            settings,
            depths: default_depths(),
            modes: default_modes(),
            runs: default_runs(),
            model_kinds: default_kinds(),
            train: TrainConfig::default(),
            walk_k_max: default_walk_k_max(),
            walk_graphs: default_walk_graphs(),
            largest_component: false,
            base_seed: RngSeed::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<plan>".into(),
            source,
        })?;
        Ok(plan)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.settings.is_empty() {
            return Err(Error::Config("plan has no settings".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::Config(
                "depths must be a nonempty list of positive integers".into(),
            ));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("modes must not be empty".into()));
        }
        if self.model_kinds.is_empty() {
            return Err(Error::Config("model_kinds must not be empty".into()));
        }
        if self.walk_k_max == 0 || self.walk_graphs == 0 {
            return Err(Error::Config(
                "walk_k_max and walk_graphs must be at least 1".into(),
            ));
        }
        self.train.validate()?;
        self.settings.iter().try_for_each(Setting::validate)
    }

    /// The four block-model settings of the self-loop study with default depths, modes and runs.
    pub fn standard_grid() -> Self {
        let settings = [
            ("6/100", "3/900"),
            ("6/100", "6/900"),
            ("3/100", "6/900"),
            ("1/100", "9/900"),
        ]
        .into_iter()
        .map(|(a, b)| {
            Setting::Sbm(SbmConfig::standard(
                a.parse().expect("valid ratio"),
                b.parse().expect("valid ratio"),
            ))
        })
        .collect();
        ExperimentPlan::new(settings)
    }
}
