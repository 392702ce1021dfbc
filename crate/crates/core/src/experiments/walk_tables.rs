use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::sbm;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentPlan, SelfLoopMode, Setting};
use crate::graph::{DegreeStats, Graph};
use crate::walks::{estimate_k1, estimate_k2, proportions, ProportionReport};

/// Seed indices at or above this offset are reserved for walk-table graphs,
/// keeping them apart from the grid's cell indices.
pub(crate) const WALK_SEED_OFFSET: u64 = 1 << 62;

/// One line of the walk table: pooled proportion for a setting, mode and `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRow {
    pub setting: String,
    pub self_loops: bool,
    pub k: usize,
    pub mean: f64,
    pub std: f64,
    /// Degree-based estimate, only for `k <= 2`.
    pub estimate: Option<f64>,
    /// Means of the individual graphs before pooling.
    #[serde(skip)]
    pub graph_means: Vec<f64>,
}

/// Pools the node proportions of `graphs` (loop-free, no isolated nodes)
/// for every mode and `k = 1..=k_max`.
pub fn walk_rows_for_graphs(
    setting: &str,
    graphs: &[Graph],
    modes: &[SelfLoopMode],
    k_max: usize,
) -> Result<Vec<WalkRow>> {
    if graphs.is_empty() {
        return Err(Error::Config("no graphs to pool".into()));
    }
    let stats = DegreeStats::from_degrees(graphs.iter().flat_map(|g| g.degrees()))?;
    let mut rows = Vec::new();
    for &mode in modes {
        let per_graph: Vec<Vec<ProportionReport>> = graphs
            .par_iter()
            .map(|g| proportions(&g.set_self_loops(mode.enabled()), k_max))
            .collect::<Result<_>>()?;
        for k in 1..=k_max {
            let reports: Vec<ProportionReport> =
                per_graph.iter().map(|r| r[k - 1].clone()).collect();
            let pooled = ProportionReport::pool(&reports)?;
            let estimate = match k {
                1 => Some(estimate_k1(&stats, mode.enabled())),
                2 => Some(estimate_k2(&stats, mode.enabled())?),
                _ => None,
            };
            rows.push(WalkRow {
                setting: setting.to_string(),
                self_loops: mode.enabled(),
                k,
                mean: pooled.mean,
                std: pooled.std,
                estimate,
                graph_means: reports.iter().map(|r| r.mean).collect(),
            });
        }
    }
    Ok(rows)
}

/// Walk table of every setting in the plan.
///
/// SBM settings pool `walk_graphs` independently generated graphs; an
/// external dataset contributes its single graph.
pub fn run_walk_tables(plan: &ExperimentPlan) -> Result<Vec<WalkRow>> {
    plan.validate()?;
    let mut rows = Vec::new();
    for (s, setting) in plan.settings.iter().enumerate() {
        let graphs: Vec<Graph> = match setting {
            Setting::Sbm(cfg) => (0..plan.walk_graphs)
                .into_par_iter()
                .map(|r| {
                    let index = WALK_SEED_OFFSET + (s * plan.walk_graphs + r) as u64;
                    let data = sbm(cfg, plan.base_seed.child(index))?.remove_isolated();
                    Ok(if plan.largest_component {
                        data.largest_component().graph
                    } else {
                        data.graph
                    })
                })
                .collect::<Result<_>>()?,
            Setting::External(_) => {
                let data = setting.load_fixed()?.expect("external data");
                vec![data.graph]
            }
        };
        rows.extend(walk_rows_for_graphs(
            &setting.id(),
            &graphs,
            &plan.modes,
            plan.walk_k_max,
        )?);
    }
    Ok(rows)
}
