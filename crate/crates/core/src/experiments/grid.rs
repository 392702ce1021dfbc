//! The accuracy grid.
//!
//! Every (setting, run) pair draws a fresh graph, features and train/test
//! split from `base_seed.child(setting · runs + run)`. All model cells of that
//! run (kind, depth, self-loop mode) train on the same data, so with/without
//! comparisons are paired. Each cell's weight init and dropout come from
//! `base_seed.child(settings · runs + cell_index)`, where `cell_index`
//! enumerates the full grid; since [`RngSeed::child`] is injective no two
//! cells (or data draws) share a seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sbm, LabeledGraphData};
use crate::error::{Error, Result};
use crate::experiments::{ExperimentPlan, SelfLoopMode, Setting};
use crate::gnn::{split_nodes, train_with_split, ModelConfig, ModelKind, TrainConfig};
use crate::rng::RngSeed;

/// Identifies one box of the accuracy plot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub setting: String,
    pub kind: ModelKind,
    pub k: usize,
    pub self_loops: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub setting: String,
    pub kind: ModelKind,
    pub k: usize,
    pub self_loops: bool,
    pub run: usize,
    pub seed: RngSeed,
    pub test_accuracy: Option<f64>,
    pub error: Option<String>,
}

impl AccuracyRow {
    pub fn key(&self) -> CellKey {
        CellKey {
            setting: self.setting.clone(),
            kind: self.kind,
            k: self.k,
            self_loops: self.self_loops,
        }
    }
}

/// Model cells trained in every run: GCNs for each depth and mode, MLPs once
/// per depth (they do not see the graph).
fn model_cells(plan: &ExperimentPlan) -> Vec<(ModelKind, usize, bool)> {
    let mut cells = Vec::new();
    for &kind in &plan.model_kinds {
        for &k in &plan.depths {
            match kind {
                ModelKind::Gcn => {
                    for &mode in &plan.modes {
                        cells.push((kind, k, mode.enabled()));
                    }
                }
                ModelKind::Mlp => cells.push((kind, k, false)),
            }
        }
    }
    cells
}

fn modes_sorted(plan: &ExperimentPlan) -> ExperimentPlan {
    let mut plan = plan.clone();
    plan.modes.sort();
    plan.modes.dedup();
    plan
}

/// Trains every cell of the grid. Failures become error rows. Rows are
/// ordered by setting, model cell, then run, independent of `workers`.
pub fn run_accuracy_grid(plan: &ExperimentPlan, workers: usize) -> Result<Vec<AccuracyRow>> {
    plan.validate()?;
    let plan = &modes_sorted(plan);
    let cells = model_cells(plan);
    let fixed: Vec<Option<LabeledGraphData>> = plan
        .settings
        .iter()
        .map(Setting::load_fixed)
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..plan.settings.len())
        .flat_map(|s| (0..plan.runs).map(move |r| (s, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_job: Vec<Vec<(usize, AccuracyRow)>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, r)| run_job(plan, &cells, &fixed, s, r))
            .collect()
    });

    let mut rows: Vec<(usize, AccuracyRow)> = per_job.into_iter().flatten().collect();
    rows.sort_by_key(|(order, _)| *order);
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

fn run_job(
    plan: &ExperimentPlan,
    cells: &[(ModelKind, usize, bool)],
    fixed: &[Option<LabeledGraphData>],
    s: usize,
    r: usize,
) -> Vec<(usize, AccuracyRow)> {
    let setting = &plan.settings[s];
    let id = setting.id();
    let runs = plan.runs;
    let data_seed = plan.base_seed.child((s * runs + r) as u64);
    let prepared = prepare_data(plan, setting, fixed[s].as_ref(), data_seed).and_then(|data| {
        let split = split_nodes(data.n(), plan.train.train_fraction, data_seed)?;
        Ok((data, split))
    });

    cells
        .iter()
        .enumerate()
        .map(|(c, &(kind, k, self_loops))| {
            let cell_index = (s * cells.len() + c) * runs + r;
            let seed = plan
                .base_seed
                .child((plan.settings.len() * runs + cell_index) as u64);
            let outcome = prepared
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|(data, split)| {
                    let model = ModelConfig {
                        kind,
                        num_layers: k,
                        self_loops,
                        hidden_dim: 16,
                    };
                    let train = TrainConfig { seed, ..plan.train };
                    train_with_split(data, &model, &train, split.0.clone(), split.1.clone())
                        .map(|o| o.test_accuracy)
                        .map_err(|e| e.to_string())
                });
            if let Err(e) = &outcome {
                log::warn!(
                    "{id} {} k={k} loops={self_loops} run={r}: {e}",
                    kind.as_str()
                );
            }
            let row = AccuracyRow {
                setting: id.clone(),
                kind,
                k,
                self_loops,
                run: r,
                seed,
                test_accuracy: outcome.as_ref().ok().copied(),
                error: outcome.err(),
            };
            (cell_index, row)
        })
        .collect()
}

fn prepare_data(
    plan: &ExperimentPlan,
    setting: &Setting,
    fixed: Option<&LabeledGraphData>,
    seed: RngSeed,
) -> Result<LabeledGraphData> {
    let data = match (setting, fixed) {
        (_, Some(data)) => data.clone(),
        (Setting::Sbm(cfg), None) => sbm(cfg, seed)?.remove_isolated(),
        (Setting::External(_), None) => unreachable!("external data is loaded up front"),
    };
    Ok(if plan.largest_component {
        data.largest_component()
    } else {
        data
    })
}

impl SelfLoopMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelfLoopMode::With => "with",
            SelfLoopMode::Without => "without",
        }
    }
}
