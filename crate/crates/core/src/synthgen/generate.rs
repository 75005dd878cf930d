use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{Attribute, GenConfig};
use crate::error::{Error, Result};
use crate::graph::{NodeKind, SmeGraph};
use crate::nn::Tensor2;
use crate::pipeline::{sample_negatives, LabeledNodeSet, LabeledPairSet, SplitFractions};
use crate::rng::{seeded, stream, Rng};

/// Column layout of generated node features.
pub mod layout {
    use super::Attribute;

    pub const IS_SME: usize = 0;
    pub const IS_OWNER: usize = 1;
    /// Three columns: upstream, mid, downstream.
    pub const TIER: usize = 2;
    /// Two columns.
    pub const POSITION: usize = 5;
    /// Two columns per attribute: value, then availability indicator.
    pub const ATTRIBUTES: usize = 7;
    pub const WIDTH: usize = ATTRIBUTES + 2 * Attribute::ALL.len();

    pub fn value_col(a: Attribute) -> usize {
        ATTRIBUTES + 2 * a.index()
    }

    pub fn available_col(a: Attribute) -> usize {
        value_col(a) + 1
    }

    /// Edge feature columns: supply flag, owner-tie flag, trade volume.
    pub const EDGE_WIDTH: usize = 3;
}

/// What the generator knows and the observed graph hides.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Tier of each SME: 0 upstream, 1 mid, 2 downstream.
    pub tiers: Vec<u8>,
    pub offline: Vec<bool>,
    /// Every supply edge, canonical and sorted.
    pub supply_edges: Vec<(usize, usize)>,
    /// Parallel to `supply_edges`: withheld from the observed graph.
    pub hidden: Vec<bool>,
    pub defaults: Vec<bool>,
}

impl GroundTruth {
    pub fn num_smes(&self) -> usize {
        self.tiers.len()
    }

    pub fn hidden_edges(&self) -> Vec<(usize, usize)> {
        self.edges_where(true)
    }

    pub fn observed_edges(&self) -> Vec<(usize, usize)> {
        self.edges_where(false)
    }

    fn edges_where(&self, hidden: bool) -> Vec<(usize, usize)> {
        self.supply_edges.iter().zip(&self.hidden).filter(|(_, &h)| h == hidden).map(|(&e, _)| e).collect()
    }

    /// Supply partners of each SME counting hidden edges.
    pub fn true_partner_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_smes()];
        for &(u, v) in &self.supply_edges {
            c[u] += 1;
            c[v] += 1;
        }
        c
    }

    /// The complete supply network over the SMEs, without features.
    pub fn supply_graph(&self) -> SmeGraph {
        let n = self.num_smes();
        SmeGraph::from_edges(Tensor2::zeros(n, 0), vec![NodeKind::Sme; n], &self.supply_edges, None)
            .expect("ground-truth edges are valid")
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub config: GenConfig,
    /// Observed graph: visible supply edges plus owner ties.
    pub graph: SmeGraph,
    /// Hidden supply edges as positives with sampled negatives.
    pub pairs: LabeledPairSet,
    /// Default label of every SME.
    pub nodes: LabeledNodeSet,
    pub truth: GroundTruth,
}

impl Generated {
    pub fn pair_rows(&self) -> Vec<(usize, usize, bool)> {
        self.pairs.pairs().iter().zip(self.pairs.labels()).map(|(&(u, v), &y)| (u, v, y)).collect()
    }

    pub fn node_rows(&self) -> Vec<(usize, bool)> {
        self.nodes.nodes().iter().copied().zip(self.nodes.labels().iter().copied()).collect()
    }
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// The `k` members of `among` closest to `p`, nearest first (ties by id).
fn nearest(p: [f64; 2], among: &[usize], pos: &[[f64; 2]], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = among.iter().map(|&v| (dist2(p, pos[v]), v)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(d.len());
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_unstable_by(cmp);
    d.into_iter().map(|(_, v)| v).collect()
}

/// Indices of the `k` largest keys (ties by lower index).
fn top_k(keys: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_unstable_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Weighted sampling of `k` items without replacement: each item gets the
/// key `ln(r) / w` and the largest keys win.
fn weighted_without_replacement(weights: &[f64], k: usize, rng: &mut Rng) -> Vec<usize> {
    let keys: Vec<f64> = weights
        .iter()
        .map(|&w| {
            let r: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            if w > 0.0 {
                r.ln() / w
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    top_k(&keys, k)
}

/// Builds one synthetic SME economy. A pure function of the config.
pub fn generate(config: &GenConfig) -> Result<Generated> {
    config.validate()?;
    let seed = config.seed;
    let n = config.num_smes;
    let sizes_per_tier = config.tier_sizes();

    // Layout: tier, position, firm size, offline flag.
    let mut rng = seeded(seed, stream::GEN_LAYOUT);
    let mut tiers = Vec::with_capacity(n);
    for (t, &k) in sizes_per_tier.iter().enumerate() {
        tiers.extend(std::iter::repeat_n(t as u8, k));
    }
    let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let size_norm = (config.size_sigma * config.size_sigma / 2.0).exp();
    let size: Vec<f64> = (0..n).map(|_| (config.size_sigma * normal(&mut rng)).exp() / size_norm).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut offline = vec![false; n];
    let n_offline = (config.offline_fraction * n as f64).round() as usize;
    for &u in &order[..n_offline] {
        offline[u] = true;
    }
    let members: Vec<Vec<usize>> = (0..3u8).map(|t| (0..n).filter(|&u| tiers[u] == t).collect()).collect();

    // Supply edges: every buyer in tiers 1 and 2 draws suppliers from its
    // nearest previous-tier SMEs, favouring large ones.
    let buyers: Vec<usize> = (0..n).filter(|&u| tiers[u] > 0).collect();
    let pools: Vec<Vec<usize>> = buyers
        .par_iter()
        .map(|&u| nearest(pos[u], &members[tiers[u] as usize - 1], &pos, config.supplier_pool))
        .collect();
    let mut rng = seeded(seed, stream::GEN_SUPPLY);
    let mut supply_edges = Vec::new();
    for (&u, pool) in buyers.iter().zip(&pools) {
        let p = (config.supply_density * size[u]).min(1.0);
        let k = Binomial::new(pool.len() as u64, p)
            .map_err(|e| Error::InvalidConfig(format!("supplier draw: {e}")))?
            .sample(&mut rng) as usize;
        let w: Vec<f64> = pool.iter().map(|&v| size[v]).collect();
        for i in weighted_without_replacement(&w, k, &mut rng) {
            let v = pool[i];
            supply_edges.push((u.min(v), u.max(v)));
        }
    }
    supply_edges.sort_unstable();
    if supply_edges.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Internal("supplier draw produced a repeated edge".into()));
    }

    // Hiding: exactly round(hidden_fraction * |E|) edges, weighted towards
    // edges with an invisible endpoint.
    let vis = |u: usize| {
        if offline[u] {
            config.offline_visibility
        } else {
            config.online_visibility
        }
    };
    let mut rng = seeded(seed, stream::GEN_HIDING);
    let n_hidden = (config.hidden_fraction * supply_edges.len() as f64).round() as usize;
    let weights: Vec<f64> =
        supply_edges.iter().map(|&(u, v)| (1.0 - vis(u) * vis(v)).powf(config.hiding_exponent)).collect();
    let mut hidden = vec![false; supply_edges.len()];
    for i in weighted_without_replacement(&weights, n_hidden, &mut rng) {
        hidden[i] = true;
    }

    // Owner ties: each owner holds a group of nearby SMEs.
    let mut rng = seeded(seed, stream::GEN_SOCIAL);
    let gs = config.owner_group_size;
    let n_owners = (config.social_tie_density * n as f64 / gs as f64).round() as usize;
    let all_smes: Vec<usize> = (0..n).collect();
    let anchors: Vec<usize> = (0..n_owners).map(|_| rng.random_range(0..n)).collect();
    let groups: Vec<Vec<usize>> = anchors.par_iter().map(|&a| nearest(pos[a], &all_smes, &pos, gs)).collect();
    let mut tied = vec![false; n];
    let mut owner_edges = Vec::new();
    for (o, group) in groups.iter().enumerate() {
        for &u in group {
            tied[u] = true;
            owner_edges.push((u, n + o));
        }
    }
    let total = n + n_owners;

    // Node features.
    let mut rng = seeded(seed, stream::GEN_FEATURES);
    let cs = config.patent_cluster_size;
    let n_clusters = (config.availability.patent * n as f64 / cs as f64).round() as usize;
    let mut patent = vec![false; n];
    for _ in 0..n_clusters {
        let a = rng.random_range(0..n);
        for u in nearest(pos[a], &all_smes, &pos, cs) {
            patent[u] = true;
        }
    }
    let mut x = Tensor2::zeros(total, layout::WIDTH);
    for u in 0..n {
        let row = x.row_mut(u);
        row[layout::IS_SME] = 1.0;
        let shown_tier =
            if rng.random::<f64>() < config.tier_noise { rng.random_range(0..3) } else { tiers[u] as usize };
        row[layout::TIER + shown_tier] = 1.0;
        for d in 0..2 {
            row[layout::POSITION + d] = pos[u][d] + config.position_noise * normal(&mut rng);
        }
        for a in Attribute::ALL {
            let mut p = config.availability.get(a);
            if a == Attribute::Shareholder && tied[u] {
                p = (p + config.social_shareholder_boost).min(1.0);
            }
            let present = if a == Attribute::Patent { patent[u] } else { rng.random::<f64>() < p };
            let z = normal(&mut rng);
            if present {
                row[layout::value_col(a)] = match a {
                    Attribute::Revenue => {
                        config.revenue_size_loading * size[u].ln() + config.revenue_sd[tiers[u] as usize] * z
                    }
                    _ => z,
                };
                row[layout::available_col(a)] = 1.0;
            }
        }
    }
    for o in n..total {
        x.set(o, layout::IS_OWNER, 1.0);
    }

    // Defaults from the logistic protection model on true partner counts.
    let truth_partial = GroundTruth { tiers, offline, supply_edges, hidden, defaults: Vec::new() };
    let partners = truth_partial.true_partner_counts();
    let mut rng = seeded(seed, stream::GEN_DEFAULTS);
    let defaults: Vec<bool> = partners
        .iter()
        .map(|&c| {
            let logit =
                config.default_base - config.default_protection * c as f64 + config.default_noise_sd * normal(&mut rng);
            rng.random::<f64>() < crate::nn::sigmoid_scalar(logit)
        })
        .collect();
    let truth = GroundTruth { defaults, ..truth_partial };

    // Observed graph with edge features.
    let mut rng = seeded(seed, stream::GEN_EDGE_FEATURES);
    let mut edges = truth.observed_edges();
    let mut ef = Vec::with_capacity((edges.len() + owner_edges.len()) * layout::EDGE_WIDTH);
    for &(u, v) in &edges {
        ef.extend_from_slice(&[1.0, 0.0, size[u].ln() + size[v].ln() + 0.5 * normal(&mut rng)]);
    }
    for _ in &owner_edges {
        ef.extend_from_slice(&[0.0, 1.0, 0.0]);
    }
    edges.extend_from_slice(&owner_edges);
    let ef = Tensor2::from_vec(edges.len(), layout::EDGE_WIDTH, ef)?;
    let mut kinds = vec![NodeKind::Sme; n];
    kinds.resize(total, NodeKind::Owner);
    let graph = SmeGraph::from_edges(x, kinds, &edges, Some(&ef))?;

    // Labeled sets.
    let positives = truth.hidden_edges();
    let negatives = sample_negatives(&graph, &positives, 1.0, seed)?;
    let mut labels = vec![true; positives.len()];
    labels.resize(positives.len() + negatives.len(), false);
    let pairs: Vec<(usize, usize)> = positives.into_iter().chain(negatives).collect();
    let fractions = SplitFractions::default();
    let pairs = LabeledPairSet::split(pairs, labels, fractions, seed)?;
    let nodes = LabeledNodeSet::split((0..n).collect(), truth.defaults.clone(), fractions, seed)?;

    Ok(Generated { config: config.clone(), graph, pairs, nodes, truth })
}
