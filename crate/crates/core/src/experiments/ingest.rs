//! Exported datasets.
//!
//! Three files describe a dataset:
//!
//! - edges: the whitespace edge-list format of [`Graph::parse_edge_list`];
//!   directed edges are symmetrized and self-loops dropped,
//! - features: CSV without header, row `i` holds node `i`'s features,
//! - labels: CSV rows `node,label` (an optional `node,label` header is skipped).
//!
//! Isolated nodes are removed after cleaning and the remaining nodes are
//! renumbered densely; labels and features follow the same renumbering.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::LabeledGraphData;
use crate::error::{Error, Result};
use crate::graph::{parse_pairs, Graph};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalDataset {
    pub name: String,
    pub edge_file: PathBuf,
    pub feature_file: PathBuf,
    pub label_file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub data: LabeledGraphData,
    /// Nodes of the original numbering that were dropped as isolated.
    pub dropped: Vec<usize>,
    pub warnings: Vec<String>,
}

pub fn ingest_external(ds: &ExternalDataset) -> Result<Ingested> {
    let features = read_features(&ds.feature_file)?;
    let n = features.rows();
    let labels = read_labels(&ds.label_file, n)?;

    let edge_text =
        std::fs::read_to_string(&ds.edge_file).map_err(|e| Error::io(&ds.edge_file, e))?;
    let source = ds.edge_file.display().to_string();
    let pairs = parse_pairs(&edge_text, &source)?;
    if let Some(&(line, (u, v))) = pairs.iter().find(|&&(_, (u, v))| u.max(v) >= n) {
        return Err(Error::NodeCountMismatch(format!(
            "{source}:{line}: edge ({u}, {v}) refers to a node without a feature row ({n} rows)"
        )));
    }
    let graph = Graph::from_edge_list(pairs.into_iter().map(|(_, p)| p), n)?;
    let dropped = graph.isolated_nodes();
    let data = LabeledGraphData::new(graph, labels, features)?.remove_isolated();

    let mut warnings = Vec::new();
    if !dropped.is_empty() {
        warnings.push(format!("removed {} isolated nodes", dropped.len()));
    }
    if data.n() == 0 {
        warnings.push("graph is empty after removing self-loops and isolated nodes".to_string());
    }
    Ok(Ingested {
        data,
        dropped,
        warnings,
    })
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
}

fn parse_error(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line: line as usize,
        message,
    }
}

fn read_features(path: &Path) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in csv_reader(path)?.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_error(path, line, format!("invalid feature value: {e}")))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    line,
                    format!("{} features, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

fn read_labels(path: &Path, n: usize) -> Result<Vec<usize>> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (i, record) in csv_reader(path)?.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if i == 0 && record.get(0) == Some("node") {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_error(path, line, "expected `node,label`".into()));
        }
        let parse = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| parse_error(path, line, format!("invalid integer {f:?}")))
        };
        let node = parse(&record[0])?;
        let label = parse(&record[1])?;
        if node >= n {
            return Err(Error::NodeCountMismatch(format!(
                "{}:{line}: label for node {node} but only {n} feature rows",
                path.display()
            )));
        }
        if labels[node].replace(label).is_some() {
            return Err(parse_error(
                path,
                line,
                format!("duplicate label for node {node}"),
            ));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| {
            l.ok_or_else(|| {
                Error::NodeCountMismatch(format!("{}: node {v} has no label", path.display()))
            })
        })
        .collect()
}
