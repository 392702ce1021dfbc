use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ensembles::LabeledGraphData;
use crate::error::{Error, Result};
use crate::gnn::{
    loss_and_grads, propagation_matrix, Adam, AdamConfig, Dropout, GcnModel, ModelKind,
    PropagationMatrix,
};
use crate::linalg::Matrix;
use crate::rng::{RngSeed, Stream};

/// Architecture of a model to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub num_layers: usize,
    pub self_loops: bool,
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
}

fn default_hidden_dim() -> usize {
    16
}

impl ModelConfig {
    pub fn gcn(num_layers: usize, self_loops: bool) -> Self {
        ModelConfig {
            kind: ModelKind::Gcn,
            num_layers,
            self_loops,
            hidden_dim: default_hidden_dim(),
        }
    }

    pub fn mlp(num_layers: usize) -> Self {
        ModelConfig {
            kind: ModelKind::Mlp,
            num_layers,
            self_loops: false,
            hidden_dim: default_hidden_dim(),
        }
    }
}

/// Full-batch training protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub train_fraction: f64,
    pub dropout: f64,
    pub adam_betas: (f64, f64),
    pub adam_eps: f64,
    pub seed: RngSeed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 70,
            learning_rate: 0.01,
            train_fraction: 0.8,
            dropout: 0.0,
            adam_betas: (0.9, 0.999),
            adam_eps: 1e-8,
            seed: RngSeed(0),
        }
    }
}

impl TrainConfig {
    /// Protocol for real-world datasets: dropout 0.2 after each layer.
    pub fn real_world() -> Self {
        TrainConfig {
            dropout: 0.2,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} must lie in (0, 1)",
                self.train_fraction
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} must lie in [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_betas.0,
            beta2: self.adam_betas.1,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub train_nodes: Vec<usize>,
    pub test_nodes: Vec<usize>,
    pub final_loss: f64,
    pub test_accuracy: f64,
}

/// Uniform split: `round(fraction · n)` training nodes, the rest for testing.
/// Both lists are sorted.
pub fn split_nodes(n: usize, fraction: f64, seed: RngSeed) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.stream_rng(Stream::Split));
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Config(format!(
            "a {fraction} split of {n} nodes leaves an empty side"
        )));
    }
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits the nodes with `train.seed` and trains.
pub fn train(
    data: &LabeledGraphData,
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_cfg.validate()?;
    let (train_nodes, test_nodes) =
        split_nodes(data.n(), train_cfg.train_fraction, train_cfg.seed)?;
    train_with_split(data, model_cfg, train_cfg, train_nodes, test_nodes)
}

/// Trains for exactly `epochs` full-batch Adam steps and reports the
/// final-epoch accuracy on `test_nodes`.
pub fn train_with_split(
    data: &LabeledGraphData,
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    train_nodes: Vec<usize>,
    test_nodes: Vec<usize>,
) -> Result<TrainOutcome> {
    train_cfg.validate()?;
    if train_nodes.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let s = propagation_matrix(&data.graph, model_cfg.self_loops, model_cfg.kind)?;
    let num_classes = data.num_classes();
    let mut model = GcnModel::new(
        model_cfg.kind,
        model_cfg.self_loops,
        data.features.cols(),
        model_cfg.hidden_dim,
        num_classes,
        model_cfg.num_layers,
        train_cfg.seed,
    )?;
    let mut adam = Adam::new(train_cfg.adam(), &model);
    let mut dropout_rng = train_cfg.seed.stream_rng(Stream::Dropout);
    let mut final_loss = f64::NAN;
    for _ in 0..train_cfg.epochs {
        let dropout = (train_cfg.dropout > 0.0).then(|| Dropout {
            rate: train_cfg.dropout,
            rng: &mut dropout_rng,
        });
        let (loss, grads) = loss_and_grads(
            &model,
            &s,
            &data.features,
            &data.labels,
            &train_nodes,
            dropout,
        )?;
        adam.step(&mut model, &grads);
        final_loss = loss;
    }
    let test_accuracy = accuracy(&model, &s, &data.features, &data.labels, &test_nodes)?;
    Ok(TrainOutcome {
        model,
        train_nodes,
        test_nodes,
        final_loss,
        test_accuracy,
    })
}

/// Share of `nodes` whose arg-max prediction equals the label.
pub fn accuracy(
    model: &GcnModel,
    s: &PropagationMatrix,
    x: &Matrix,
    labels: &[usize],
    nodes: &[usize],
) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::Config("accuracy over an empty node set".into()));
    }
    let predictions = model.predict(s, x)?.argmax_rows();
    let correct = nodes
        .iter()
        .filter(|&&v| predictions[v] == labels[v])
        .count();
    Ok(correct as f64 / nodes.len() as f64)
}
