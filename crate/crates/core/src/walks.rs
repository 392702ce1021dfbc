//! Closed-walk statistics.
//!
//! For a node `v` and walk length `k`, the closed-walk proportion is
//! `A^k_vv / Σ_u A^k_uv`: the share of length-`k` walks ending in `v` that
//! also started there. Counts are produced by applying the sparse adjacency
//! to blocks of identity columns, so the diagonal entry and the column sum of
//! every power come from the same vectors.
//!
//! For configuration-model graphs the expected proportions for `k = 1, 2`
//! follow from the degree moments alone ([`estimate_k1`], [`estimate_k2`]).
//! The `k = 2` estimate is always larger without self-loops than with them,
//! which [`paradox_verdict`] checks against the realized graph.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DegreeStats, Graph};

/// Largest integer below which every `f64` count is exact.
pub const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

const BLOCK: usize = 64;

/// Per-node walk counts for one walk length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkCounts {
    pub k: usize,
    /// `A^k_vv`
    pub closed: Vec<f64>,
    /// `Σ_u A^k_uv`
    pub total_in: Vec<f64>,
}

impl WalkCounts {
    /// Counts for `k = 0`, where `A^0 = I`.
    pub fn zero_length(n: usize) -> Self {
        WalkCounts {
            k: 0,
            closed: vec![1.0; n],
            total_in: vec![1.0; n],
        }
    }
}

/// Exact walk counts for `k = 1..=k_max`.
///
/// Fails with [`Error::CountOverflow`] at the first `k` where any count
/// reaches 2^53.
pub fn walk_counts(g: &Graph, k_max: usize) -> Result<Vec<WalkCounts>> {
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::Config("walk counts need a nonempty graph".into()));
    }
    let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
    let blocks: Vec<Result<Vec<(Vec<f64>, Vec<f64>)>>> = starts
        .par_iter()
        .map(|&start| block_counts(g, start, (start + BLOCK).min(n), k_max))
        .collect();

    let mut out: Vec<WalkCounts> = (1..=k_max)
        .map(|k| WalkCounts {
            k,
            closed: Vec::with_capacity(n),
            total_in: Vec::with_capacity(n),
        })
        .collect();
    let mut overflow: Option<usize> = None;
    for block in blocks {
        match block {
            Ok(per_k) => {
                for (counts, (closed, total)) in out.iter_mut().zip(per_k) {
                    counts.closed.extend(closed);
                    counts.total_in.extend(total);
                }
            }
            Err(Error::CountOverflow { k }) => {
                overflow = Some(overflow.map_or(k, |o| o.min(k)));
            }
            Err(e) => return Err(e),
        }
    }
    match overflow {
        Some(k) => Err(Error::CountOverflow { k }),
        None => Ok(out),
    }
}

/// Powers applied to identity columns `start..end`; returns per-k
/// `(closed, total_in)` for those nodes.
fn block_counts(
    g: &Graph,
    start: usize,
    end: usize,
    k_max: usize,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let n = g.n();
    let width = end - start;
    // row-major n x width; column c holds A^k e_{start + c}
    let mut current = vec![0.0f64; n * width];
    for c in 0..width {
        current[(start + c) * width + c] = 1.0;
    }
    let mut next = vec![0.0f64; n * width];
    let mut per_k = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        for v in 0..n {
            let row = &mut next[v * width..(v + 1) * width];
            row.fill(0.0);
            for &u in g.neighbors(v) {
                for (r, &x) in row.iter_mut().zip(&current[u * width..(u + 1) * width]) {
                    *r += x;
                }
            }
        }
        std::mem::swap(&mut current, &mut next);

        let mut totals = vec![0.0f64; width];
        for v in 0..n {
            for (t, &x) in totals.iter_mut().zip(&current[v * width..(v + 1) * width]) {
                *t += x;
            }
        }
        // column sums bound every entry, so checking them suffices
        if totals.iter().any(|&t| t >= EXACT_LIMIT) {
            return Err(Error::CountOverflow { k });
        }
        let closed = (0..width)
            .map(|c| current[(start + c) * width + c])
            .collect();
        per_k.push((closed, totals));
    }
    Ok(per_k)
}

/// Column `v` of `A^k`: entry `u` counts the length-`k` walks from `u` to `v`.
pub fn walk_column(g: &Graph, v: usize, k: usize) -> Result<Vec<f64>> {
    if v >= g.n() {
        return Err(Error::NodeOutOfRange {
            line: 0,
            index: v,
            n: g.n(),
        });
    }
    let mut column = vec![0.0; g.n()];
    column[v] = 1.0;
    let mut next = vec![0.0; g.n()];
    for step in 1..=k {
        g.apply(&column, &mut next);
        std::mem::swap(&mut column, &mut next);
        if column.iter().sum::<f64>() >= EXACT_LIMIT {
            return Err(Error::CountOverflow { k: step });
        }
    }
    Ok(column)
}

/// Number of walks of length `k` from `u` to `v`, by explicit enumeration.
///
/// Independent of [`walk_counts`]; limited to `n <= 12` and `k <= 6`.
pub fn brute_force_walks(g: &Graph, u: usize, v: usize, k: usize) -> Result<u64> {
    if g.n() > 12 || k > 6 {
        return Err(Error::OracleTooLarge { n: g.n(), k });
    }
    if u >= g.n() || v >= g.n() {
        return Err(Error::NodeOutOfRange {
            line: 0,
            index: u.max(v),
            n: g.n(),
        });
    }
    fn walk(g: &Graph, at: usize, target: usize, remaining: usize) -> u64 {
        if remaining == 0 {
            return u64::from(at == target);
        }
        g.neighbors(at)
            .iter()
            .map(|&next| walk(g, next, target, remaining - 1))
            .sum()
    }
    Ok(walk(g, u, v, k))
}

/// Closed-walk proportions of one walk length over a set of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionReport {
    pub k: usize,
    pub self_loops: bool,
    pub per_node: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divides by the node count).
    pub std: f64,
}

impl ProportionReport {
    pub fn from_values(k: usize, self_loops: bool, per_node: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_node);
        ProportionReport {
            k,
            self_loops,
            per_node,
            mean,
            std,
        }
    }

    /// Pools the node values of several reports for the same `k` and mode.
    pub fn pool(reports: &[ProportionReport]) -> Result<ProportionReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Config("nothing to pool".into()))?;
        if reports
            .iter()
            .any(|r| r.k != first.k || r.self_loops != first.self_loops)
        {
            return Err(Error::Config(
                "pooled reports must share k and self-loop mode".into(),
            ));
        }
        let values = reports
            .iter()
            .flat_map(|r| r.per_node.iter().copied())
            .collect();
        Ok(ProportionReport::from_values(
            first.k,
            first.self_loops,
            values,
        ))
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Closed-walk proportions for `k = 1..=k_max` on `g` as given.
pub fn proportions(g: &Graph, k_max: usize) -> Result<Vec<ProportionReport>> {
    let counts = walk_counts(g, k_max)?;
    counts
        .into_iter()
        .map(|c| {
            let per_node = c
                .closed
                .iter()
                .zip(&c.total_in)
                .enumerate()
                .map(|(v, (&closed, &total))| {
                    if total > 0.0 {
                        Ok(closed / total)
                    } else {
                        Err(Error::NoIncomingWalks { node: v, k: c.k })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProportionReport::from_values(
                c.k,
                g.has_self_loops(),
                per_node,
            ))
        })
        .collect()
}

/// Expected `k = 1` proportion: 0 without self-loops, `1/(⟨d⟩+1)` with them.
/// `stats` are the moments of the loop-free graph.
pub fn estimate_k1(stats: &DegreeStats, self_loops: bool) -> f64 {
    if self_loops {
        1.0 / (stats.mean_degree + 1.0)
    } else {
        0.0
    }
}

/// Expected `k = 2` proportion from the moments of the loop-free graph.
///
/// Without self-loops: `⟨d⟩ / ⟨d²⟩`. Adding the identity raises both `⟨d⟩`
/// and `⟨d_N⟩` by one and adds one closed walk, giving
/// `(⟨d⟩+1) / ((⟨d⟩+1)(⟨d_N⟩+1))`.
pub fn estimate_k2(stats: &DegreeStats, self_loops: bool) -> Result<f64> {
    let d = stats.mean_degree;
    let d2 = stats.mean_sq_degree;
    if !(d > 0.0) {
        return Err(Error::EdgelessGraph);
    }
    Ok(if self_loops {
        (d + 1.0) / (d2 + d + d2 / d + 1.0)
    } else {
        d / d2
    })
}

/// Expected number of length-`k` walks into a node, `⟨d⟩ · ⟨d_N⟩^(k-1)`, for `k >= 1`.
pub fn expected_total_walks(stats: &DegreeStats, k: usize) -> f64 {
    let ratio = stats.mean_sq_degree / stats.mean_degree;
    stats.mean_degree * ratio.powi(k as i32 - 1)
}

/// Length-2 proportions with and without self-loops, empirical and estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxVerdict {
    pub k: usize,
    pub empirical_without: f64,
    pub empirical_with: f64,
    pub estimate_without: f64,
    pub estimate_with: f64,
    pub holds_empirically: bool,
    pub holds_analytically: bool,
}

/// Compares the mean `k = 2` proportion of `g` with that of `g + I`.
///
/// `g` must be loop-free without isolated nodes.
pub fn paradox_verdict(g: &Graph) -> Result<ParadoxVerdict> {
    if g.has_self_loops() {
        return Err(Error::Config(
            "paradox verdict expects a loop-free graph".into(),
        ));
    }
    let stats = g.degree_stats()?;
    let without = proportions(g, 2)?;
    let with = proportions(&g.set_self_loops(true), 2)?;
    Ok(verdict_from(without[1].mean, with[1].mean, &stats)?)
}

pub(crate) fn verdict_from(
    empirical_without: f64,
    empirical_with: f64,
    stats: &DegreeStats,
) -> Result<ParadoxVerdict> {
    let estimate_without = estimate_k2(stats, false)?;
    let estimate_with = estimate_k2(stats, true)?;
    Ok(ParadoxVerdict {
        k: 2,
        empirical_without,
        empirical_with,
        estimate_without,
        estimate_with,
        holds_empirically: empirical_without > empirical_with,
        holds_analytically: estimate_without > estimate_with,
    })
}
