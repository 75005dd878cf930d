use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Sme,
    Owner,
    Consumer,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Sme => "sme",
            NodeKind::Owner => "owner",
            NodeKind::Consumer => "consumer",
        })
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sme" => Ok(NodeKind::Sme),
            "owner" => Ok(NodeKind::Owner),
            "consumer" => Ok(NodeKind::Consumer),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

/// Undirected attributed graph in CSR form.
///
/// Every undirected edge is stored twice (once per direction). Both stored
/// copies point at the same row of the edge-feature table, which is indexed
/// by stored position: `edge_features.row(k)` belongs to the `k`-th entry of
/// the column-index array.
#[derive(Debug, Clone, PartialEq)]
pub struct SmeGraph {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    node_features: Tensor2,
    edge_features: Tensor2,
    node_kind: Vec<NodeKind>,
}

impl SmeGraph {
    /// Builds a graph from undirected edges. `edge_features`, when given, has
    /// one row per entry of `edges`, in the same order.
    pub fn from_edges(
        node_features: Tensor2,
        node_kind: Vec<NodeKind>,
        edges: &[(usize, usize)],
        edge_features: Option<&Tensor2>,
    ) -> Result<Self> {
        let n = node_features.rows();
        if node_kind.len() != n {
            return Err(Error::InvalidArgument(format!("{} node kinds for {n} feature rows", node_kind.len())));
        }
        let fe = edge_features.map_or(0, Tensor2::cols);
        if let Some(ef) = edge_features {
            if ef.rows() != edges.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} edge feature rows for {} edges",
                    ef.rows(),
                    edges.len()
                )));
            }
        }

        // (row, col, source edge index)
        let mut entries = Vec::with_capacity(edges.len() * 2);
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) references a node outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            entries.push((u, v, i));
            entries.push((v, u, i));
        }
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge ({}, {})",
                    w[0].0.min(w[0].1),
                    w[0].0.max(w[0].1)
                )));
            }
        }

        let mut row_offsets = vec![0usize; n + 1];
        for &(r, _, _) in &entries {
            row_offsets[r + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = entries.iter().map(|&(_, c, _)| c).collect();
        let mut ef_data = Vec::with_capacity(entries.len() * fe);
        if let Some(ef) = edge_features {
            for &(_, _, src) in &entries {
                ef_data.extend_from_slice(ef.row(src));
            }
        }
        let edge_features = Tensor2::from_vec(entries.len(), fe, ef_data)?;

        Ok(SmeGraph { row_offsets, col_indices, node_features, edge_features, node_kind })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_kind.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    /// Number of stored (directed) entries, `2 * num_edges()`.
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[u]..self.row_offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    /// Stored position of the directed entry `u -> v`, if present.
    pub fn edge_position(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.num_nodes() {
            return None;
        }
        self.neighbors(u).binary_search(&v).ok().map(|k| self.row_offsets[u] + k)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_position(u, v).is_some()
    }

    /// Undirected edges as `(u, v, stored position)` with `u < v`, in
    /// row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            let start = self.row_offsets[u];
            self.neighbors(u).iter().enumerate().filter(move |&(_, &v)| u < v).map(move |(k, &v)| (u, v, start + k))
        })
    }

    pub fn node_features(&self) -> &Tensor2 {
        &self.node_features
    }

    pub fn edge_features(&self) -> &Tensor2 {
        &self.edge_features
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.node_kind
    }

    pub fn node_kind(&self, u: usize) -> NodeKind {
        self.node_kind[u]
    }

    /// Nodes of the given kind, ascending.
    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&u| self.node_kind[u] == kind).collect()
    }

    /// Replaces the node-feature matrix, keeping the structure.
    pub fn with_node_features(&self, x: Tensor2) -> Result<SmeGraph> {
        if x.rows() != self.num_nodes() {
            return Err(Error::InvalidArgument(format!("{} feature rows for {} nodes", x.rows(), self.num_nodes())));
        }
        Ok(SmeGraph { node_features: x, ..self.clone() })
    }

    /// Breadth-first distances from `source`, truncated at `max_hops`.
    /// Unreached nodes are `None`.
    pub fn hop_distances(&self, source: usize, max_hops: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            if d == max_hops {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Nodes within `hops` of `source`, including `source`, ascending.
    pub fn ball(&self, source: usize, hops: usize) -> Vec<usize> {
        let mut seen = vec![source];
        let mut mark = std::collections::HashSet::from([source]);
        let mut frontier = vec![source];
        for _ in 0..hops {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.neighbors(u) {
                    if mark.insert(v) {
                        next.push(v);
                        seen.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen.sort_unstable();
        seen
    }

    /// Checks every structural invariant. Used by loaders and tests.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if self.row_offsets.len() != n + 1 || self.node_features.rows() != n {
            return Err(Error::InvalidInput("graph size fields disagree".into()));
        }
        if self.edge_features.rows() != self.col_indices.len() {
            return Err(Error::InvalidInput("edge feature rows differ from stored edge count".into()));
        }
        if !self.node_features.all_finite() || !self.edge_features.all_finite() {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        for u in 0..n {
            let nb = self.neighbors(u);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidInput(format!("row {u} columns not strictly increasing")));
                }
            }
            for (k, &v) in nb.iter().enumerate() {
                if v == u {
                    return Err(Error::InvalidInput(format!("self-loop on node {u}")));
                }
                let Some(back) = self.edge_position(v, u) else {
                    return Err(Error::InvalidInput(format!("edge ({u}, {v}) stored without its reverse")));
                };
                let here = self.row_offsets[u] + k;
                if self.edge_features.row(here) != self.edge_features.row(back) {
                    return Err(Error::InvalidInput(format!("edge ({u}, {v}) directions carry different features")));
                }
            }
        }
        Ok(())
    }
}
