mod common;

use common::{
    finite_difference_grads, random_connected_graph, random_matrix, reference_loss, relative_error,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use selfloop::ensembles::{hypercube_corner, sbm, LabeledGraphData, Probability, SbmConfig};
use selfloop::gnn::{
    influence_distribution, influence_ratio, loss_and_grads, propagation_matrix, softmax_rows,
    train, train_with_split, GcnModel, ModelConfig, ModelKind, TrainConfig,
};
use selfloop::walks::{brute_force_walks, walk_counts};
use selfloop::{Graph, RngSeed};

fn flatten(grads: &selfloop::gnn::Gradients) -> Vec<f64> {
    grads
        .layers
        .iter()
        .flat_map(|l| l.weight.as_slice().iter().chain(&l.bias).copied())
        .collect()
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = RngSeed(41).rng();
    for case in 0..12 {
        let n = rng.random_range(4..=9);
        let g = random_connected_graph(n, 0.3, &mut rng);
        let kind = if case % 4 == 3 {
            ModelKind::Mlp
        } else {
            ModelKind::Gcn
        };
        let loops = case % 2 == 0;
        let layers = 1 + case % 3;
        let x = random_matrix(n, 3, &mut rng);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let nodes: Vec<usize> = (0..n).filter(|v| v % 3 != 1).collect();
        let s = propagation_matrix(&g, loops, kind).unwrap();
        let model = GcnModel::new(kind, loops, 3, 5, 3, layers, RngSeed(case as u64)).unwrap();
        let (loss, grads) = loss_and_grads(&model, &s, &x, &labels, &nodes, None).unwrap();
        let logits = model.predict(&s, &x).unwrap();
        assert!((loss - reference_loss(&logits, &labels, &nodes)).abs() < 1e-12);
        let numeric = finite_difference_grads(&model, &s, &x, &labels, &nodes, 1e-5);
        let analytic = flatten(&grads);
        assert_eq!(numeric.len(), analytic.len());
        for (a, b) in analytic.iter().zip(&numeric) {
            assert!(relative_error(*a, *b) < 1e-4, "case {case}: {a} vs {b}");
        }
    }
}

#[test]
fn propagation_matrix_entries() {
    let g = Graph::path(3);
    let s = propagation_matrix(&g, true, ModelKind::Gcn)
        .unwrap()
        .to_dense();
    // degrees with loops are 2, 3, 2
    let expect = [
        [1.0 / 2.0, 1.0 / 6f64.sqrt(), 0.0],
        [1.0 / 6f64.sqrt(), 1.0 / 3.0, 1.0 / 6f64.sqrt()],
        [0.0, 1.0 / 6f64.sqrt(), 1.0 / 2.0],
    ];
    for i in 0..3 {
        for j in 0..3 {
            assert!((s[(i, j)] - expect[i][j]).abs() < 1e-15);
        }
    }
    let isolated = Graph::from_edge_list([(0, 1)], 3).unwrap();
    assert!(propagation_matrix(&isolated, false, ModelKind::Gcn).is_err());
    assert!(propagation_matrix(&isolated, true, ModelKind::Gcn).is_ok());
}

#[test]
fn influence_equals_walk_share() {
    let mut rng = RngSeed(77).rng();
    for _ in 0..60 {
        let n = rng.random_range(2..=8);
        let g = random_connected_graph(n, 0.35, &mut rng);
        for loops in [false, true] {
            let gl = g.set_self_loops(loops);
            for k in 1..=4 {
                let totals = &walk_counts(&gl, k).unwrap()[k - 1].total_in;
                for v in 0..n {
                    let dist = influence_distribution(&g, loops, k, v).unwrap();
                    assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    for u in 0..n {
                        let share = brute_force_walks(&gl, u, v, k).unwrap() as f64 / totals[v];
                        assert!((dist[u] - share).abs() < 1e-12);
                        assert_eq!(influence_ratio(&g, loops, k, u, v).unwrap(), dist[u]);
                    }
                }
            }
        }
    }
}

#[test]
fn influence_on_star() {
    let g = Graph::star(3);
    // k = 2 without loops: the hub only reaches itself
    assert_eq!(influence_ratio(&g, false, 2, 0, 0).unwrap(), 1.0);
    // with loops the hub gets 4 closed walks out of 4 + 3*2
    assert!((influence_ratio(&g, true, 2, 0, 0).unwrap() - 0.4).abs() < 1e-15);
    assert!(influence_ratio(&Graph::empty(2), false, 1, 0, 0).is_err());
}

fn labeled(seed: u64) -> LabeledGraphData {
    let cfg = SbmConfig::standard(
        Probability::ratio(6, 100).unwrap(),
        Probability::ratio(3, 900).unwrap(),
    );
    sbm(&cfg, RngSeed(seed)).unwrap().remove_isolated()
}

#[test]
fn training_is_permutation_equivariant() {
    let data = labeled(1);
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(&mut RngSeed(2).rng());
    let moved = data.permute(&perm).unwrap();
    let train_cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let split: Vec<usize> = (0..data.n()).collect();
    let (tr, te) = split.split_at(data.n() * 4 / 5);
    let map = |nodes: &[usize]| {
        let mut out: Vec<usize> = nodes.iter().map(|&v| perm[v]).collect();
        out.sort();
        out
    };
    for model in [ModelConfig::gcn(2, true), ModelConfig::gcn(2, false)] {
        let a = train_with_split(&data, &model, &train_cfg, tr.to_vec(), te.to_vec()).unwrap();
        let b = train_with_split(&moved, &model, &train_cfg, map(tr), map(te)).unwrap();
        assert!((a.final_loss - b.final_loss).abs() < 1e-9);
        assert_eq!(a.test_accuracy, b.test_accuracy);
    }
}

#[test]
fn mlp_ignores_topology() {
    let data = labeled(5);
    let other = LabeledGraphData::new(
        Graph::cycle(data.n()),
        data.labels.clone(),
        data.features.clone(),
    )
    .unwrap();
    let cfg = TrainConfig::default();
    let a = train(&data, &ModelConfig::mlp(2), &cfg).unwrap();
    let b = train(&other, &ModelConfig::mlp(2), &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.test_accuracy, b.test_accuracy);
}

#[test]
fn mlp_approaches_nearest_corner_rule() {
    let data = labeled(9);
    let out = train(&data, &ModelConfig::mlp(2), &TrainConfig::default()).unwrap();
    let corners: Vec<Vec<f64>> = (0..10).map(|c| hypercube_corner(c, 16)).collect();
    let correct = out
        .test_nodes
        .iter()
        .filter(|&&v| {
            let x = data.features.row(v);
            let dist = |c: &Vec<f64>| x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let best = (0..10)
                .min_by(|&i, &j| dist(&corners[i]).total_cmp(&dist(&corners[j])))
                .unwrap();
            best == data.labels[v]
        })
        .count();
    let bayes = correct as f64 / out.test_nodes.len() as f64;
    assert!(out.test_accuracy > 0.3, "mlp {}", out.test_accuracy);
    assert!(
        out.test_accuracy <= bayes + 0.08,
        "mlp {} bayes {bayes}",
        out.test_accuracy
    );
}

#[test]
fn training_is_deterministic() {
    let data = labeled(3);
    let cfg = TrainConfig {
        dropout: 0.3,
        epochs: 10,
        ..TrainConfig::default()
    };
    let a = train(&data, &ModelConfig::gcn(3, true), &cfg).unwrap();
    let b = train(&data, &ModelConfig::gcn(3, true), &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.final_loss, b.final_loss);
}

proptest! {
    #[test]
    fn softmax_rows_are_distributions(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, scale in 0.1f64..500.0) {
        let mut rng = RngSeed(seed).rng();
        let mut x = random_matrix(rows, cols, &mut rng);
        x.map_inplace(|v| v * scale);
        let p = softmax_rows(&x);
        for i in 0..rows {
            let row = p.row(i);
            prop_assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // shift invariance
        let mut shifted = x.clone();
        shifted.map_inplace(|v| v + 7.5);
        prop_assert!(softmax_rows(&shifted).max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn loss_is_nonnegative_and_gradients_sum_to_zero(seed in any::<u64>()) {
        let mut rng = RngSeed(seed).rng();
        let n = rng.random_range(3..8);
        let g = random_connected_graph(n, 0.4, &mut rng);
        let x = random_matrix(n, 4, &mut rng);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let nodes: Vec<usize> = (0..n).collect();
        let s = propagation_matrix(&g, true, ModelKind::Gcn).unwrap();
        let model = GcnModel::new(ModelKind::Gcn, true, 4, 6, 3, 1, RngSeed(seed)).unwrap();
        let (loss, grads) = loss_and_grads(&model, &s, &x, &labels, &nodes, None).unwrap();
        prop_assert!(loss >= 0.0);
        // softmax gradients sum to zero across classes, so do the bias grads
        prop_assert!(grads.layers[0].bias.iter().sum::<f64>().abs() < 1e-12);
    }
}
