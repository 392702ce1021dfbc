//! Seeded random-graph ensembles and synthetic node data.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::rng::{RngSeed, Stream};

/// A probability that remembers whether it was written as a fraction, so
/// settings like `3/900` survive a JSON round trip unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    value: f64,
    ratio: Option<(u64, u64)>,
}

impl Probability {
    pub fn new(value: f64) -> Self {
        Probability { value, ratio: None }
    }

    pub fn ratio(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Config(format!(
                "probability {numerator}/{denominator} has a zero denominator"
            )));
        }
        Ok(Probability {
            value: numerator as f64 / denominator as f64,
            ratio: Some((numerator, denominator)),
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn as_ratio(self) -> Option<(u64, u64)> {
        self.ratio
    }
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("invalid probability {s:?}"));
        match s.split_once('/') {
            Some((num, den)) => {
                let num = num.trim().parse().map_err(|_| bad())?;
                let den = den.trim().parse().map_err(|_| bad())?;
                Probability::ratio(num, den)
            }
            None => s.parse().map(Probability::new).map_err(|_| bad()),
        }
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((a, b)) => write!(f, "{a}/{b}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.ratio {
            Some(_) => serializer.serialize_str(&self.to_string()),
            None => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(Probability::new(v)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Parameters of a planted-partition stochastic block model with Gaussian
/// hypercube features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmConfig {
    pub num_classes: usize,
    pub nodes_per_class: usize,
    pub p_intra: Probability,
    pub p_inter: Probability,
    pub feature_dim: usize,
    pub feature_sigma: f64,
}

impl SbmConfig {
    /// Ten classes of 100 nodes, 16-dimensional features with σ = 0.4.
    pub fn standard(p_intra: Probability, p_inter: Probability) -> Self {
        SbmConfig {
            num_classes: 10,
            nodes_per_class: 100,
            p_intra,
            p_inter,
            feature_dim: 16,
            feature_sigma: 0.4,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_classes * self.nodes_per_class
    }

    /// Setting label such as `p_intra=6/100,p_inter=3/900`.
    pub fn label(&self) -> String {
        format!("p_intra={},p_inter={}", self.p_intra, self.p_inter)
    }

    /// Expected degree of a node, `(m-1)·p_intra + (c-1)·m·p_inter`.
    pub fn expected_degree(&self) -> f64 {
        let m = self.nodes_per_class as f64;
        let c = self.num_classes as f64;
        (m - 1.0) * self.p_intra.value() + (c - 1.0) * m * self.p_inter.value()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(p.value() > 0.0 && p.value() < 1.0) {
                return Err(Error::Config(format!("{name} = {p} must lie in (0, 1)")));
            }
        }
        if self.num_classes == 0 || self.nodes_per_class == 0 {
            return Err(Error::Config(
                "num_classes and nodes_per_class must be at least 1".into(),
            ));
        }
        if !(self.feature_sigma > 0.0) {
            return Err(Error::Config("feature_sigma must be positive".into()));
        }
        check_corners(self.num_classes, self.feature_dim)
    }
}

fn check_corners(num_classes: usize, dim: usize) -> Result<()> {
    let corners = if dim >= 64 { u64::MAX } else { 1u64 << dim };
    if (num_classes as u64) > corners {
        return Err(Error::Config(format!(
            "{num_classes} classes need more than the {corners} corners of a {dim}-dimensional hypercube"
        )));
    }
    Ok(())
}

/// A graph with per-node class labels and feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraphData {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub features: Matrix,
}

impl LabeledGraphData {
    pub fn new(graph: Graph, labels: Vec<usize>, features: Matrix) -> Result<Self> {
        if labels.len() != graph.n() || features.rows() != graph.n() {
            return Err(Error::NodeCountMismatch(format!(
                "graph has {} nodes, {} labels, {} feature rows",
                graph.n(),
                labels.len(),
                features.rows()
            )));
        }
        Ok(LabeledGraphData {
            graph,
            labels,
            features,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&c| c + 1)
    }

    /// Keeps the listed nodes (sorted, distinct), aligning labels and features.
    pub fn restrict(&self, keep: &[usize]) -> LabeledGraphData {
        LabeledGraphData {
            graph: self.graph.induced_subgraph(keep),
            labels: keep.iter().map(|&v| self.labels[v]).collect(),
            features: self.features.select_rows(keep),
        }
    }

    /// Drops isolated nodes together with their labels and feature rows.
    pub fn remove_isolated(&self) -> LabeledGraphData {
        let keep: Vec<usize> = (0..self.n())
            .filter(|&v| self.graph.neighbors(v).iter().any(|&u| u != v))
            .collect();
        self.restrict(&keep)
    }

    pub fn largest_component(&self) -> LabeledGraphData {
        self.restrict(&self.graph.largest_component())
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<LabeledGraphData> {
        let graph = self.graph.permute(perm)?;
        let mut labels = vec![0; self.n()];
        let mut features = Matrix::zeros(self.n(), self.features.cols());
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[v];
            features.row_mut(p).copy_from_slice(self.features.row(v));
        }
        LabeledGraphData::new(graph, labels, features)
    }
}

/// Erased configuration model.
///
/// Each node gets `degrees[v]` stubs; the stubs are shuffled uniformly and
/// consecutive stubs are paired. Pairs that would form a self-loop or repeat
/// an edge are discarded, so realized degrees never exceed the requested ones.
pub fn configuration_model(degrees: &[usize], seed: RngSeed) -> Result<Graph> {
    if degrees.is_empty() {
        return Err(Error::InvalidDegreeSequence("empty sequence".into()));
    }
    let total: usize = degrees.iter().sum();
    if !total.is_multiple_of(2) {
        return Err(Error::InvalidDegreeSequence(format!(
            "stub count {total} is odd"
        )));
    }
    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    let mut rng = seed.stream_rng(Stream::Graph);
    stubs.shuffle(&mut rng);
    let pairs: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    // from_edge_list drops self-pairs and collapses duplicates
    Graph::from_edge_list(pairs, degrees.len())
}

/// Samples a stochastic block model with contiguous class blocks and
/// hypercube features. The graph and the features use independent streams
/// of `seed`.
pub fn sbm(config: &SbmConfig, seed: RngSeed) -> Result<LabeledGraphData> {
    config.validate()?;
    let n = config.num_nodes();
    let m = config.nodes_per_class;
    let labels: Vec<usize> = (0..n).map(|v| v / m).collect();
    let (p_in, p_out) = (config.p_intra.value(), config.p_inter.value());

    let mut rng = seed.stream_rng(Stream::Graph);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    let graph = Graph::from_edge_list(pairs, n)?;
    let features = hypercube_features(&labels, config.feature_dim, config.feature_sigma, seed)?;
    LabeledGraphData::new(graph, labels, features)
}

/// Corner of the unit hypercube for class `class`: bit `j` of the class index
/// becomes coordinate `j`.
pub fn hypercube_corner(class: usize, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|j| {
            if j < usize::BITS as usize && (class >> j) & 1 == 1 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Features drawn as `corner(label) + N(0, sigma²)` per coordinate.
pub fn hypercube_features(
    labels: &[usize],
    dim: usize,
    sigma: f64,
    seed: RngSeed,
) -> Result<Matrix> {
    let num_classes = labels.iter().max().map_or(0, |&c| c + 1);
    check_corners(num_classes, dim)?;
    let noise = Normal::new(0.0, sigma)
        .map_err(|e| Error::Config(format!("feature sigma {sigma}: {e}")))?;
    let mut rng = seed.stream_rng(Stream::Features);
    let mut features = Matrix::zeros(labels.len(), dim);
    for (v, &label) in labels.iter().enumerate() {
        let corner = hypercube_corner(label, dim);
        for (x, c) in features.row_mut(v).iter_mut().zip(corner) {
            *x = c + noise.sample(&mut rng);
        }
    }
    Ok(features)
}
