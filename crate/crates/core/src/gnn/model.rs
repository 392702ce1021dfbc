use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::PropagationMatrix;
use crate::linalg::Matrix;
use crate::rng::{RngSeed, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gcn,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gcn => "gcn",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(ModelKind::Gcn),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Hidden-layer nonlinearity. `Identity` gives the linear variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `in_dim x out_dim`
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub kind: ModelKind,
    pub self_loops: bool,
    pub activation: Activation,
    pub layers: Vec<Layer>,
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases. Dimensions chain
    /// `in_dim -> hidden_dim -> ... -> out_dim`.
    pub fn new(
        kind: ModelKind,
        self_loops: bool,
        in_dim: usize,
        hidden_dim: usize,
        out_dim: usize,
        num_layers: usize,
        seed: RngSeed,
    ) -> Result<Self> {
        if num_layers == 0 {
            return Err(Error::Config("a model needs at least one layer".into()));
        }
        let mut rng = seed.stream_rng(Stream::Init);
        let layers = (0..num_layers)
            .map(|l| {
                let fan_in = if l == 0 { in_dim } else { hidden_dim };
                let fan_out = if l + 1 == num_layers {
                    out_dim
                } else {
                    hidden_dim
                };
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut weight = Matrix::zeros(fan_in, fan_out);
                for w in weight.as_mut_slice() {
                    *w = rng.random_range(-limit..=limit);
                }
                Layer {
                    weight,
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(GcnModel {
            kind,
            self_loops,
            activation: Activation::Relu,
            layers,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.cols()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Forward pass. `dropout` is applied to every hidden activation and is
    /// only passed during training.
    pub fn forward(
        &self,
        s: &PropagationMatrix,
        x: &Matrix,
        mut dropout: Option<Dropout<'_>>,
    ) -> Result<ForwardPass> {
        if x.cols() != self.in_dim() {
            return Err(Error::Dimension(format!(
                "features have {} columns, model expects {}",
                x.cols(),
                self.in_dim()
            )));
        }
        if x.rows() != s.n() {
            return Err(Error::Dimension(format!(
                "{} feature rows for {} nodes",
                x.rows(),
                s.n()
            )));
        }
        let last = self.layers.len() - 1;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let propagated = s.apply(&h)?;
            let mut z = propagated.matmul(&layer.weight)?;
            z.add_row_vector(&layer.bias);
            if l == last {
                caches.push(LayerCache {
                    propagated,
                    pre_activation: z.clone(),
                    dropout_mask: None,
                });
                return Ok(ForwardPass { logits: z, caches });
            }
            let mut a = z.clone();
            if self.activation == Activation::Relu {
                a.map_inplace(|v| v.max(0.0));
            }
            let mask = match dropout.as_mut() {
                Some(d) if d.rate > 0.0 => Some(d.apply(&mut a)),
                _ => None,
            };
            caches.push(LayerCache {
                propagated,
                pre_activation: z,
                dropout_mask: mask,
            });
            h = a;
        }
        unreachable!("loop returns on the last layer")
    }

    /// Backpropagates `d_logits` through a cached forward pass.
    pub fn backward(
        &self,
        s: &PropagationMatrix,
        pass: &ForwardPass,
        d_logits: Matrix,
    ) -> Result<Gradients> {
        let mut grads: Vec<Option<Layer>> = vec![None; self.layers.len()];
        let mut dz = d_logits;
        for l in (0..self.layers.len()).rev() {
            let cache = &pass.caches[l];
            let layer = &self.layers[l];
            let weight = cache.propagated.tr_matmul(&dz)?;
            let bias = dz.column_sums();
            grads[l] = Some(Layer { weight, bias });
            if l == 0 {
                break;
            }
            let dp = dz.matmul_tr(&layer.weight)?;
            let mut dh = s.apply_transposed(&dp)?;
            let below = &pass.caches[l - 1];
            if let Some(mask) = &below.dropout_mask {
                for (g, m) in dh.as_mut_slice().iter_mut().zip(mask) {
                    *g *= m;
                }
            }
            if self.activation == Activation::Relu {
                for (g, &z) in dh
                    .as_mut_slice()
                    .iter_mut()
                    .zip(below.pre_activation.as_slice())
                {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            dz = dh;
        }
        Ok(Gradients {
            layers: grads.into_iter().map(|g| g.expect("filled")).collect(),
        })
    }

    /// Logits without dropout.
    pub fn predict(&self, s: &PropagationMatrix, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward(s, x, None)?.logits)
    }
}

/// Inverted dropout drawing from a dedicated stream.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

impl Dropout<'_> {
    /// Zeroes entries with probability `rate`, scales survivors by
    /// `1 / (1 - rate)` and returns the per-entry multipliers.
    fn apply(&mut self, a: &mut Matrix) -> Vec<f64> {
        let keep = 1.0 - self.rate;
        let scale = 1.0 / keep;
        let mask: Vec<f64> = (0..a.as_slice().len())
            .map(|_| {
                if self.rng.random::<f64>() < keep {
                    scale
                } else {
                    0.0
                }
            })
            .collect();
        for (x, m) in a.as_mut_slice().iter_mut().zip(&mask) {
            *x *= m;
        }
        mask
    }
}

#[derive(Debug, Clone)]
pub struct LayerCache {
    /// `S · H` for this layer's input `H`.
    pub propagated: Matrix,
    pub pre_activation: Matrix,
    pub dropout_mask: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Matrix,
    pub caches: Vec<LayerCache>,
}

/// Gradients shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

/// Mean softmax cross-entropy over `train_nodes` and its gradients.
pub fn loss_and_grads(
    model: &GcnModel,
    s: &PropagationMatrix,
    x: &Matrix,
    labels: &[usize],
    train_nodes: &[usize],
    dropout: Option<Dropout<'_>>,
) -> Result<(f64, Gradients)> {
    if train_nodes.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    if labels.len() != x.rows() {
        return Err(Error::Dimension(format!(
            "{} labels for {} nodes",
            labels.len(),
            x.rows()
        )));
    }
    let pass = model.forward(s, x, dropout)?;
    let (loss, d_logits) = cross_entropy(&pass.logits, labels, train_nodes)?;
    let grads = model.backward(s, &pass, d_logits)?;
    Ok((loss, grads))
}

fn cross_entropy(logits: &Matrix, labels: &[usize], nodes: &[usize]) -> Result<(f64, Matrix)> {
    let classes = logits.cols();
    let scale = 1.0 / nodes.len() as f64;
    let mut d = Matrix::zeros(logits.rows(), classes);
    let mut loss = 0.0;
    for &v in nodes {
        let y = labels[v];
        if y >= classes {
            return Err(Error::Dimension(format!(
                "label {y} of node {v} exceeds {classes} classes"
            )));
        }
        let row = logits.row(v);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
        loss += log_sum - row[y];
        let grad = d.row_mut(v);
        for (g, &z) in grad.iter_mut().zip(row) {
            *g = (z - log_sum).exp() * scale;
        }
        grad[y] -= scale;
    }
    Ok((loss * scale, d))
}
