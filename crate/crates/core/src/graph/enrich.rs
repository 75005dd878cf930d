use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SmeGraph;
use crate::error::{Error, Result};
use crate::nn::Tensor2;

/// A scored candidate pair retained by link mining. Always `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinedEdge {
    pub u: usize,
    pub v: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Observed,
    Mined,
}

/// Observed graph plus retained mined edges.
///
/// `graph()` is the merged view used for propagation. Its edge-feature table
/// has one extra trailing column, the provenance indicator: 0 for observed
/// edges (which keep their original features) and 1 for mined edges (whose
/// other features are zero).
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedGraph {
    base: SmeGraph,
    mined: Vec<MinedEdge>,
    tau: f64,
    merged: SmeGraph,
}

impl EnrichedGraph {
    pub fn base(&self) -> &SmeGraph {
        &self.base
    }

    pub fn graph(&self) -> &SmeGraph {
        &self.merged
    }

    pub fn mined_edges(&self) -> &[MinedEdge] {
        &self.mined
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Provenance of the stored entry `u -> v` in the merged graph.
    pub fn provenance(&self, u: usize, v: usize) -> Option<Provenance> {
        let pos = self.merged.edge_position(u, v)?;
        let flag_col = self.merged.edge_features().cols() - 1;
        Some(if self.merged.edge_features().get(pos, flag_col) > 0.5 {
            Provenance::Mined
        } else {
            Provenance::Observed
        })
    }
}

/// Adds every candidate with `score >= tau` that is not already an observed
/// edge. Candidates are canonicalized to `u < v`; repeated pairs keep their
/// highest score.
pub fn enrich(g: &SmeGraph, mined: &[(usize, usize, f64)], tau: f64) -> Result<EnrichedGraph> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("retention threshold {tau} outside [0, 1]")));
    }
    let n = g.num_nodes();
    let mut kept: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(u, v, score) in mined {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidArgument(format!("score {score} for pair ({u}, {v}) outside [0, 1]")));
        }
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidArgument(format!(
                "candidate pair ({u}, {v}) is not a pair of distinct nodes in 0..{n}"
            )));
        }
        if score < tau || g.has_edge(u, v) {
            continue;
        }
        let slot = kept.entry((u.min(v), u.max(v))).or_insert(score);
        if score > *slot {
            *slot = score;
        }
    }
    let mined: Vec<MinedEdge> = kept.into_iter().map(|((u, v), score)| MinedEdge { u, v, score }).collect();

    let fe = g.edge_features().cols();
    let mut pairs = Vec::with_capacity(g.num_edges() + mined.len());
    let mut feats = Vec::with_capacity((g.num_edges() + mined.len()) * (fe + 1));
    for (u, v, pos) in g.edges() {
        pairs.push((u, v));
        feats.extend_from_slice(g.edge_features().row(pos));
        feats.push(0.0);
    }
    for e in &mined {
        pairs.push((e.u, e.v));
        feats.extend(std::iter::repeat_n(0.0, fe));
        feats.push(1.0);
    }
    let ef = Tensor2::from_vec(pairs.len(), fe + 1, feats)?;
    let merged = SmeGraph::from_edges(g.node_features().clone(), g.node_kinds().to_vec(), &pairs, Some(&ef))?;
    Ok(EnrichedGraph { base: g.clone(), mined, tau, merged })
}
