//! Undirected graphs in compressed adjacency form.
//!
//! A [`Graph`] stores sorted neighbor lists in CSR layout. The adjacency is
//! 0/1 and symmetric; self-loops are either present on every node (the
//! `A + I` counterpart) or on none, which is recorded in
//! [`Graph::has_self_loops`]. A self-loop contributes exactly 1 to a node's
//! degree.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    has_self_loops: bool,
    node_ids: Option<Vec<usize>>,
}

/// First and second degree moments of a realized graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub n: usize,
    pub mean_degree: f64,
    pub mean_sq_degree: f64,
    pub mean_neighbor_degree: f64,
}

impl DegreeStats {
    /// Builds statistics from raw moments, `⟨d_N⟩ = ⟨d²⟩ / ⟨d⟩`.
    pub fn from_moments(n: usize, mean_degree: f64, mean_sq_degree: f64) -> Result<Self> {
        if !(mean_degree > 0.0) {
            return Err(Error::EdgelessGraph);
        }
        Ok(DegreeStats {
            n,
            mean_degree,
            mean_sq_degree,
            mean_neighbor_degree: mean_sq_degree / mean_degree,
        })
    }

    /// Moments of a degree sequence.
    pub fn from_degrees<I: IntoIterator<Item = usize>>(degrees: I) -> Result<Self> {
        let mut n = 0usize;
        let mut sum = 0u128;
        let mut sum_sq = 0u128;
        for d in degrees {
            n += 1;
            sum += d as u128;
            sum_sq += (d as u128) * (d as u128);
        }
        if n == 0 || sum == 0 {
            return Err(Error::EdgelessGraph);
        }
        Self::from_moments(n, sum as f64 / n as f64, sum_sq as f64 / n as f64)
    }
}

impl Graph {
    /// Builds an undirected simple graph from integer pairs.
    ///
    /// Every pair is inserted in both directions, duplicates collapse and
    /// self-pairs are dropped. Errors report the 1-based position of the
    /// offending pair.
    pub fn from_edge_list<I>(pairs: I, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let pairs = pairs.into_iter().enumerate().map(|(i, p)| (i + 1, p));
        Self::from_numbered_pairs(pairs, n)
    }

    fn from_numbered_pairs<I>(pairs: I, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, (usize, usize))>,
    {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (line, (u, v)) in pairs {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { line, index, n });
                }
            }
            if u == v {
                continue;
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(lists, false))
    }

    /// Sorts and deduplicates each list before packing.
    fn from_lists(mut lists: Vec<Vec<usize>>, has_self_loops: bool) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Graph {
            n,
            offsets,
            neighbors,
            has_self_loops,
            node_ids: None,
        }
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_lists(vec![Vec::new(); n], false)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let lists = (0..n)
            .map(|v| (0..n).filter(|&u| u != v).collect())
            .collect();
        Self::from_lists(lists, false)
    }

    /// Path on `n` nodes.
    pub fn path(n: usize) -> Self {
        Self::from_edge_list((1..n).map(|v| (v - 1, v)), n).expect("indices in range")
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Self {
        Self::from_edge_list((0..n).map(|v| (v, (v + 1) % n)), n).expect("indices in range")
    }

    /// Star with node 0 as center and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::from_edge_list((1..=leaves).map(|v| (0, v)), leaves + 1).expect("indices in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn has_self_loops(&self) -> bool {
        self.has_self_loops
    }

    /// Original node index of each node, present after [`Graph::remove_isolated`].
    pub fn node_ids(&self) -> Option<&[usize]> {
        self.node_ids.as_deref()
    }

    /// Sorted neighbor list of `v`, including `v` itself when self-loops are on.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Degree with a self-loop counted once.
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).map(|v| self.degree(v))
    }

    /// Number of undirected edges, not counting self-loops.
    pub fn num_edges(&self) -> usize {
        let loops = if self.has_self_loops { self.n } else { 0 };
        (self.neighbors.len() - loops) / 2
    }

    /// Undirected edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Returns the graph with adjacency `A + I` if `enabled`, else `A`.
    pub fn set_self_loops(&self, enabled: bool) -> Graph {
        if enabled == self.has_self_loops {
            return self.clone();
        }
        let mut offsets = Vec::with_capacity(self.n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(if enabled {
            self.neighbors.len() + self.n
        } else {
            self.neighbors.len() - self.n
        });
        for v in 0..self.n {
            let list = self.neighbors(v);
            if enabled {
                let at = list.partition_point(|&u| u < v);
                neighbors.extend_from_slice(&list[..at]);
                neighbors.push(v);
                neighbors.extend_from_slice(&list[at..]);
            } else {
                neighbors.extend(list.iter().copied().filter(|&u| u != v));
            }
            offsets.push(neighbors.len());
        }
        Graph {
            n: self.n,
            offsets,
            neighbors,
            has_self_loops: enabled,
            node_ids: self.node_ids.clone(),
        }
    }

    /// Nodes without any neighbor other than themselves.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| self.neighbors(v).iter().all(|&u| u == v))
            .collect()
    }

    /// Drops isolated nodes and reindexes the rest densely.
    ///
    /// Self-loops do not count toward isolation. `node_ids` maps each new
    /// index to the index it had in the graph's original numbering.
    pub fn remove_isolated(&self) -> Graph {
        let keep: Vec<usize> = (0..self.n)
            .filter(|&v| self.neighbors(v).iter().any(|&u| u != v))
            .collect();
        self.induced_subgraph(&keep)
    }

    /// Subgraph induced by `keep` (sorted, distinct), reindexed densely.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Graph {
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let lists = keep
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|&u| {
                        let i = new_index[u];
                        (i != usize::MAX).then_some(i)
                    })
                    .collect()
            })
            .collect();
        let mut g = Self::from_lists(lists, self.has_self_loops);
        g.node_ids = Some(match &self.node_ids {
            Some(ids) => keep.iter().map(|&v| ids[v]).collect(),
            None => keep.to_vec(),
        });
        g
    }

    /// Nodes of the largest connected component, sorted. Ties go to the
    /// component containing the smallest node index.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut component = vec![usize::MAX; self.n];
        let mut best: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if component[start] != usize::MAX {
                continue;
            }
            let mut members = vec![start];
            component[start] = start;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &u in self.neighbors(v) {
                    if component[u] == usize::MAX {
                        component[u] = start;
                        members.push(u);
                        queue.push_back(u);
                    }
                }
            }
            if members.len() > best.len() {
                best = members;
            }
        }
        best.sort_unstable();
        best
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n
            )));
        }
        let mut lists = vec![Vec::new(); self.n];
        for v in 0..self.n {
            lists[perm[v]] = self.neighbors(v).iter().map(|&u| perm[u]).collect();
        }
        Ok(Self::from_lists(lists, self.has_self_loops))
    }

    /// `out[v] = Σ_{u ∈ N(v)} x[u]`, i.e. `A x` (or `(A + I) x`).
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for v in 0..self.n {
            out[v] = self.neighbors(v).iter().map(|&u| x[u]).sum();
        }
    }

    /// ⟨d⟩, ⟨d²⟩ and ⟨d_N⟩ of this graph as stored (self-loops count 1).
    pub fn degree_stats(&self) -> Result<DegreeStats> {
        if self.n == 0 || self.neighbors.is_empty() {
            return Err(Error::EdgelessGraph);
        }
        DegreeStats::from_degrees(self.degrees())
    }

    /// Parses the whitespace-separated edge-list format: one `u v` pair per
    /// line, `#` starts a comment line, blank lines are skipped. The node
    /// count is `max index + 1` unless `n` is given.
    pub fn parse_edge_list(text: &str, n: Option<usize>, source: &str) -> Result<Graph> {
        let pairs = parse_pairs(text, source)?;
        let n = n.unwrap_or_else(|| {
            pairs
                .iter()
                .map(|&(_, (u, v))| u.max(v) + 1)
                .max()
                .unwrap_or(0)
        });
        Self::from_numbered_pairs(pairs, n)
    }

    pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Graph> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, n, &path.display().to_string())
    }

    /// Edge list text with a `# nodes <n>` header and one `u v` line per edge (`u < v`).
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

/// Parses `u v` lines, returning pairs tagged with their 1-based line number.
pub(crate) fn parse_pairs(text: &str, source: &str) -> Result<Vec<(usize, (usize, usize))>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let parse = |field: Option<&str>| -> Result<usize> {
            let field = field.ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line: line_no,
                message: "expected two node indices".to_string(),
            })?;
            field.parse::<usize>().map_err(|_| Error::Parse {
                path: source.to_string(),
                line: line_no,
                message: format!("invalid node index {field:?}"),
            })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                path: source.to_string(),
                line: line_no,
                message: "expected exactly two fields".to_string(),
            });
        }
        pairs.push((line_no, (u, v)));
    }
    Ok(pairs)
}

/// Header line written by [`Graph::to_edge_list`], used to recover the node
/// count of graphs whose last nodes are isolated.
pub fn declared_node_count(text: &str) -> Option<usize> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.is_empty() || l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# nodes ")?.trim().parse().ok())
}
