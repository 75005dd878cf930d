use std::collections::HashSet;

use rayon::prelude::*;

use super::data::{sample_negatives, LabeledNodeSet, LabeledPairSet, Split};
use super::grid::{grid_search, GridCell};
use super::train::{
    evaluate, predict, train_task, CandidateScope, Examples, FeatureScaler, LabeledExamples, TaskData, TrainConfig,
    TrainTrace,
};
use crate::error::{Error, Result};
use crate::gcn::{pair_logits, Embeddings, GcnModel, HeadKind};
use crate::graph::{enrich, normalize_adjacency, EnrichedGraph, NodeKind, SmeGraph};
use crate::metrics::EvalReport;
use crate::nn::{sigmoid_scalar, BCE_EPS};

/// Whether to train the configured cell or search the configured grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tuning {
    Fixed,
    Grid,
}

/// Builds the pair set for stage one from labeled rows. Rows are put in
/// canonical order; when no negative row is present, negatives are sampled
/// at `config.negative_ratio`. The split is stratified with `config.seed`.
pub fn prepare_pair_set(g: &SmeGraph, rows: &[(usize, usize, bool)], config: &TrainConfig) -> Result<LabeledPairSet> {
    let n = g.num_nodes();
    let mut pairs = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for &(u, v, y) in rows {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidInput(format!("labeled pair ({u}, {v}) is not a valid node pair")));
        }
        pairs.push((u.min(v), u.max(v)));
        labels.push(y);
    }
    if !labels.contains(&false) {
        let neg = sample_negatives(g, &pairs, config.negative_ratio, config.seed)?;
        labels.extend(std::iter::repeat_n(false, neg.len()));
        pairs.extend(neg);
    }
    LabeledPairSet::split(pairs, labels, config.fractions, config.seed)
}

pub fn prepare_node_set(g: &SmeGraph, rows: &[(usize, bool)], config: &TrainConfig) -> Result<LabeledNodeSet> {
    if let Some(&(u, _)) = rows.iter().find(|&&(u, _)| u >= g.num_nodes()) {
        return Err(Error::InvalidInput(format!("labeled node {u} is not in the graph")));
    }
    let (nodes, labels) = rows.iter().copied().unzip();
    LabeledNodeSet::split(nodes, labels, config.fractions, config.seed)
}

pub fn pair_task_data(g: &SmeGraph, d_sc: &LabeledPairSet, scaler: &FeatureScaler) -> Result<TaskData> {
    if d_sc.max_node().is_some_and(|v| v >= g.num_nodes()) {
        return Err(Error::InvalidInput("pair set references nodes outside the graph".into()));
    }
    let part = |s: Split| {
        let (p, y) = d_sc.subset(s);
        LabeledExamples { examples: Examples::Pairs(p), labels: y }
    };
    Ok(TaskData {
        adj: normalize_adjacency(g),
        x: scaler.transform(g.node_features())?,
        train: part(Split::Train),
        val: part(Split::Val),
        test: part(Split::Test),
    })
}

pub fn node_task_data(g: &SmeGraph, d_dp: &LabeledNodeSet, scaler: &FeatureScaler) -> Result<TaskData> {
    if d_dp.max_node().is_some_and(|v| v >= g.num_nodes()) {
        return Err(Error::InvalidInput("node set references nodes outside the graph".into()));
    }
    let part = |s: Split| {
        let (u, y) = d_dp.subset(s);
        LabeledExamples { examples: Examples::Nodes(u), labels: y }
    };
    Ok(TaskData {
        adj: normalize_adjacency(g),
        x: scaler.transform(g.node_features())?,
        train: part(Split::Train),
        val: part(Split::Val),
        test: part(Split::Test),
    })
}

/// A trained model with everything needed to report on and reload it.
#[derive(Debug, Clone)]
pub struct TrainedTask {
    pub model: GcnModel,
    /// Configuration of the returned model (the winning cell under a grid).
    pub config: TrainConfig,
    pub trace: TrainTrace,
    pub reports: Vec<EvalReport>,
    pub scaler: FeatureScaler,
    pub grid: Option<Vec<GridCell>>,
}

impl TrainedTask {
    pub fn report(&self, split: Split) -> &EvalReport {
        self.reports.iter().find(|r| r.split == split.name()).expect("every split is evaluated")
    }
}

fn fit(
    data: &TaskData,
    kind: HeadKind,
    config: &TrainConfig,
    tuning: Tuning,
    scaler: FeatureScaler,
) -> Result<TrainedTask> {
    config.validate()?;
    let (model, config, trace, grid) = match tuning {
        Tuning::Fixed => {
            let model = GcnModel::init(kind, data.x.cols(), &config.architecture(), config.seed)?;
            let (model, trace) = train_task(model, data, config)?;
            (model, config.clone(), trace, None)
        }
        Tuning::Grid => {
            let out = grid_search(data, kind, config)?;
            (out.model, out.best, out.trace, Some(out.cells))
        }
    };
    let reports = evaluate(&model, data)?;
    Ok(TrainedTask { model, config, trace, reports, scaler, grid })
}

#[derive(Debug, Clone)]
pub struct Stage1Output {
    pub enriched: EnrichedGraph,
    pub task: TrainedTask,
    /// Number of candidate pairs scored while mining.
    pub candidates_scored: usize,
}

/// SME pairs, canonical and not already edges, that stage one scores.
///
/// The scope supplies structural candidates; the labeled pairs of every
/// split are always added.
pub fn candidate_pairs(g: &SmeGraph, scope: CandidateScope, labeled: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let smes = g.nodes_of_kind(NodeKind::Sme);
    let is_sme = |u: usize| g.node_kind(u) == NodeKind::Sme;
    let mut out: Vec<(usize, usize)> = match scope {
        CandidateScope::WithinHops(0) => Vec::new(),
        CandidateScope::WithinHops(k) => smes
            .par_iter()
            .flat_map_iter(|&u| {
                g.ball(u, k).into_iter().filter(move |&v| v > u && is_sme(v) && !g.has_edge(u, v)).map(move |v| (u, v))
            })
            .collect(),
        CandidateScope::AllPairs => smes
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, &u)| {
                smes[i + 1..].iter().copied().filter(move |&v| !g.has_edge(u, v)).map(move |v| (u, v))
            })
            .collect(),
    };
    let present: HashSet<(usize, usize)> = out.iter().copied().collect();
    out.extend(labeled.iter().copied().filter(|&(u, v)| !g.has_edge(u, v) && !present.contains(&(u, v))));
    out.sort_unstable();
    out.dedup();
    out
}

/// Stage-one scores: sigmoid probabilities clamped to `[BCE_EPS, 1 - BCE_EPS]`
/// so that no score reaches 1 and `tau = 1` retains nothing.
pub fn score_pairs(model: &GcnModel, q: &Embeddings, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    const CHUNK: usize = 1 << 14;
    let chunks: Vec<Result<Vec<f64>>> = pairs.par_chunks(CHUNK).map(|c| pair_logits(q, c, &model.head)).collect();
    let mut out = Vec::with_capacity(pairs.len());
    for c in chunks {
        out.extend(c?.into_iter().map(|l| sigmoid_scalar(l).clamp(BCE_EPS, 1.0 - BCE_EPS)));
    }
    Ok(out)
}

/// Stage one: train the pair scorer on `d_sc`, score candidate pairs and
/// add those scoring at least `config.tau` to the graph.
pub fn run_stage1_mining(
    g: &SmeGraph,
    d_sc: &LabeledPairSet,
    config: &TrainConfig,
    tuning: Tuning,
) -> Result<Stage1Output> {
    let scaler = FeatureScaler::fit(g.node_features());
    let data = pair_task_data(g, d_sc, &scaler)?;
    let task = fit(&data, HeadKind::Pair, config, tuning, scaler)?;
    let q = task.model.embed(&data.adj, &data.x)?;
    let candidates = candidate_pairs(g, config.candidates, d_sc.pairs());
    let scores = score_pairs(&task.model, &q, &candidates)?;
    let kept: Vec<(usize, usize, f64)> =
        candidates.iter().zip(&scores).filter(|(_, &s)| s >= config.tau).map(|(&(u, v), &s)| (u, v, s)).collect();
    let enriched = enrich(g, &kept, config.tau)?;
    Ok(Stage1Output { enriched, task, candidates_scored: candidates.len() })
}

#[derive(Debug, Clone)]
pub struct Stage2Output {
    pub task: TrainedTask,
    /// Default probability of every SME node, ascending by node id.
    pub scores: Vec<(usize, f64)>,
}

/// Stage two: train a freshly initialized node scorer on `g` (the enriched
/// graph, or the observed graph for the ablation) and score every SME.
pub fn run_stage2_default(
    g: &SmeGraph,
    d_dp: &LabeledNodeSet,
    config: &TrainConfig,
    tuning: Tuning,
) -> Result<Stage2Output> {
    let scaler = FeatureScaler::fit(g.node_features());
    let data = node_task_data(g, d_dp, &scaler)?;
    let task = fit(&data, HeadKind::Node, config, tuning, scaler)?;
    let smes = g.nodes_of_kind(NodeKind::Sme);
    let p = predict(&task.model, &data, &Examples::Nodes(smes.clone()))?;
    Ok(Stage2Output { task, scores: smes.into_iter().zip(p).collect() })
}
