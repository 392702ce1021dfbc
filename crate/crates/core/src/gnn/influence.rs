//! Relative influence in the linear, unnormalized MPNN `h^(k) = Â h^(k-1)`.
//!
//! With scalar features and no normalization every walk carries the same
//! weight, so `∂h_v^(k)/∂h_u^(0) = Â^k_vu`. The Jacobian row of `v` is
//! obtained by reverse accumulation: an adjoint seeded at `v` is pulled back
//! through the `k` aggregation steps.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `∂h_v^(k) / ∂h_u^(0)` for every `u`, normalized to sum to one.
pub fn influence_distribution(g: &Graph, self_loops: bool, k: usize, v: usize) -> Result<Vec<f64>> {
    let g = g.set_self_loops(self_loops);
    if v >= g.n() {
        return Err(Error::NodeOutOfRange {
            line: 0,
            index: v,
            n: g.n(),
        });
    }
    let mut adjoint = vec![0.0; g.n()];
    adjoint[v] = 1.0;
    for _ in 0..k {
        // forward step is out[w] = Σ_{x ∈ N(w)} h[x]; its adjoint scatters
        // each out[w] back onto the inputs it read
        let mut pulled = vec![0.0; g.n()];
        for (w, &a) in adjoint.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &x in g.neighbors(w) {
                pulled[x] += a;
            }
        }
        adjoint = pulled;
    }
    let total: f64 = adjoint.iter().sum();
    if total == 0.0 {
        return Err(Error::NoIncomingWalks { node: v, k });
    }
    Ok(adjoint.into_iter().map(|a| a / total).collect())
}

/// Relative influence of `h_u^(0)` on `h_v^(k)`.
pub fn influence_ratio(g: &Graph, self_loops: bool, k: usize, u: usize, v: usize) -> Result<f64> {
    if u >= g.n() {
        return Err(Error::NodeOutOfRange {
            line: 0,
            index: u,
            n: g.n(),
        });
    }
    Ok(influence_distribution(g, self_loops, k, v)?[u])
}
