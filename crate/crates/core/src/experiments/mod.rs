//! Plan-driven experiments: the accuracy grid over depths and self-loop
//! modes, pooled walk tables, ingestion of exported datasets, and reports.

mod grid;
mod ingest;
mod plan;
mod report;
mod summary;
mod walk_tables;

pub use grid::{run_accuracy_grid, AccuracyRow, CellKey};
pub use ingest::{ingest_external, ExternalDataset, Ingested};
pub use plan::{ExperimentPlan, SelfLoopMode, Setting};
pub use report::{emit_report, write_accuracies_csv, write_walk_csv, ExperimentResult};
pub use summary::{box_stats, quantile, summarize, BoxStats, CellSummary};
pub use walk_tables::{run_walk_tables, walk_rows_for_graphs, WalkRow};
