#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use selfloop::gnn::{GcnModel, PropagationMatrix};
use selfloop::linalg::Matrix;
use selfloop::Graph;

/// Every labeled simple graph on `n` nodes.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p);
            Graph::from_edge_list(edges, n).unwrap()
        })
        .collect()
}

pub fn is_connected(g: &Graph) -> bool {
    g.n() > 0 && g.largest_component().len() == g.n()
}

/// Random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(edges, n).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Mean cross-entropy computed directly from logits.
pub fn reference_loss(logits: &Matrix, labels: &[usize], nodes: &[usize]) -> f64 {
    let mut total = 0.0;
    for &v in nodes {
        let row = logits.row(v);
        let partition: f64 = row.iter().map(|z| z.exp()).sum();
        total += -(row[labels[v]].exp() / partition).ln();
    }
    total / nodes.len() as f64
}

/// Central finite differences of [`reference_loss`] for every parameter,
/// in layer order (weights row-major, then biases).
pub fn finite_difference_grads(
    model: &GcnModel,
    s: &PropagationMatrix,
    x: &Matrix,
    labels: &[usize],
    nodes: &[usize],
    step: f64,
) -> Vec<f64> {
    let loss = |m: &GcnModel| reference_loss(&m.predict(s, x).unwrap(), labels, nodes);
    let mut grads = Vec::new();
    let mut probe = model.clone();
    for l in 0..model.layers.len() {
        for i in 0..model.layers[l].weight.as_slice().len() {
            let orig = probe.layers[l].weight.as_slice()[i];
            probe.layers[l].weight.as_mut_slice()[i] = orig + step;
            let up = loss(&probe);
            probe.layers[l].weight.as_mut_slice()[i] = orig - step;
            let down = loss(&probe);
            probe.layers[l].weight.as_mut_slice()[i] = orig;
            grads.push((up - down) / (2.0 * step));
        }
        for i in 0..model.layers[l].bias.len() {
            let orig = probe.layers[l].bias[i];
            probe.layers[l].bias[i] = orig + step;
            let up = loss(&probe);
            probe.layers[l].bias[i] = orig - step;
            let down = loss(&probe);
            probe.layers[l].bias[i] = orig;
            grads.push((up - down) / (2.0 * step));
        }
    }
    grads
}

/// Relative error with a floor on the denominator for near-zero gradients.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Welch's t statistic and two-sided p-value.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (n, mean, var)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    (t, 2.0 * dist.sf(t.abs()))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
