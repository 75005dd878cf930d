use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeKind, SmeGraph};
use crate::rng::{seeded, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.70, val: 0.15, test: 0.15 }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(f.is_finite() && *f > 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must be positive and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }
}

/// Assigns a split tag to every example, stratified by label.
///
/// Each class is shuffled independently and cut into train/val/test blocks
/// whose sizes are the per-class target counts rounded to the nearest
/// integer. Exact halves in the val/test cut alternate between classes so
/// the overall split sizes also stay within one example of target. Every
/// class contributes at least one example to every split.
pub fn stratified_split(labels: &[bool], fractions: SplitFractions, seed: u64) -> Result<Vec<Split>> {
    fractions.validate()?;
    let mut rng = seeded(seed, stream::SPLIT);
    let mut tags = vec![Split::Train; labels.len()];
    for (class_idx, class) in [false, true].into_iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let n = members.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "class {} has {n} examples; at least 3 are needed to populate every split",
                u8::from(class)
            )));
        }
        members.shuffle(&mut rng);
        let n_train = ((n as f64 * fractions.train).round() as usize).clamp(1, n - 2);
        let rest = n - n_train;
        let exact_val = rest as f64 * fractions.val / (fractions.val + fractions.test);
        let n_val = if exact_val.fract() == 0.5 {
            exact_val.floor() as usize + usize::from(class_idx == 0)
        } else {
            exact_val.round() as usize
        }
        .clamp(1, rest - 1);
        for (k, &i) in members.iter().enumerate() {
            tags[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(tags)
}

fn check_split_classes(labels: &[bool], splits: &[Split], what: &str) -> Result<()> {
    for s in Split::ALL {
        let mut seen = [false; 2];
        for (&y, &t) in labels.iter().zip(splits) {
            if t == s {
                seen[usize::from(y)] = true;
            }
        }
        if seen != [true, true] {
            return Err(Error::InvalidInput(format!("{what}: {s} split lacks one of the two classes")));
        }
    }
    Ok(())
}

/// Supervised pairs for link mining; every pair canonical (`u < v`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPairSet {
    pairs: Vec<(usize, usize)>,
    labels: Vec<bool>,
    splits: Vec<Split>,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<(usize, usize)>, labels: Vec<bool>, splits: Vec<Split>) -> Result<Self> {
        if pairs.len() != labels.len() || pairs.len() != splits.len() {
            return Err(Error::InvalidArgument("pairs, labels and splits differ in length".into()));
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        for &(u, v) in &pairs {
            if u >= v {
                return Err(Error::InvalidInput(format!("pair ({u}, {v}) is not canonical (u < v)")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidInput(format!("duplicate pair ({u}, {v})")));
            }
        }
        check_split_classes(&labels, &splits, "pair set")?;
        Ok(LabeledPairSet { pairs, labels, splits })
    }

    /// Tags the pairs with a stratified split and validates the result.
    pub fn split(pairs: Vec<(usize, usize)>, labels: Vec<bool>, fractions: SplitFractions, seed: u64) -> Result<Self> {
        let splits = stratified_split(&labels, fractions, seed)?;
        Self::new(pairs, labels, splits)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn subset(&self, split: Split) -> (Vec<(usize, usize)>, Vec<bool>) {
        self.pairs
            .iter()
            .zip(&self.labels)
            .zip(&self.splits)
            .filter(|(_, &s)| s == split)
            .map(|((&p, &y), _)| (p, y))
            .unzip()
    }

    pub fn max_node(&self) -> Option<usize> {
        self.pairs.iter().map(|&(_, v)| v).max()
    }
}

/// Supervised nodes for default prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledNodeSet {
    nodes: Vec<usize>,
    labels: Vec<bool>,
    splits: Vec<Split>,
}

impl LabeledNodeSet {
    pub fn new(nodes: Vec<usize>, labels: Vec<bool>, splits: Vec<Split>) -> Result<Self> {
        if nodes.len() != labels.len() || nodes.len() != splits.len() {
            return Err(Error::InvalidArgument("nodes, labels and splits differ in length".into()));
        }
        let mut seen = HashSet::with_capacity(nodes.len());
        for &u in &nodes {
            if !seen.insert(u) {
                return Err(Error::InvalidInput(format!("duplicate node {u}")));
            }
        }
        check_split_classes(&labels, &splits, "node set")?;
        Ok(LabeledNodeSet { nodes, labels, splits })
    }

    pub fn split(nodes: Vec<usize>, labels: Vec<bool>, fractions: SplitFractions, seed: u64) -> Result<Self> {
        let splits = stratified_split(&labels, fractions, seed)?;
        Self::new(nodes, labels, splits)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn subset(&self, split: Split) -> (Vec<usize>, Vec<bool>) {
        self.nodes
            .iter()
            .zip(&self.labels)
            .zip(&self.splits)
            .filter(|(_, &s)| s == split)
            .map(|((&u, &y), _)| (u, y))
            .unzip()
    }

    pub fn max_node(&self) -> Option<usize> {
        self.nodes.iter().copied().max()
    }
}

/// Uniformly samples `round(ratio * |positives|)` distinct SME–SME pairs that
/// are neither graph edges nor listed positives, in canonical order.
pub fn sample_negatives(
    g: &SmeGraph,
    positives: &[(usize, usize)],
    ratio: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidArgument(format!("negative ratio must be > 0, got {ratio}")));
    }
    let pool = g.nodes_of_kind(NodeKind::Sme);
    let need = (ratio * positives.len() as f64).round() as usize;
    let excluded: HashSet<(usize, usize)> = positives
        .iter()
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .filter(|&(u, v)| g.node_kind(u) == NodeKind::Sme && g.node_kind(v) == NodeKind::Sme && !g.has_edge(u, v))
        .collect();
    let m = pool.len();
    let total = m * m.saturating_sub(1) / 2;
    let sme_edges =
        g.edges().filter(|&(u, v, _)| g.node_kind(u) == NodeKind::Sme && g.node_kind(v) == NodeKind::Sme).count();
    let available = total - sme_edges - excluded.len();
    if available < need {
        return Err(Error::InvalidInput(format!(
            "graph too dense: {need} negatives requested but only {available} non-edge pairs exist"
        )));
    }
    let mut rng = seeded(seed, stream::NEGATIVES);
    let usable = |u: usize, v: usize| !g.has_edge(u, v) && !excluded.contains(&(u, v));

    if available >= 2 * need {
        let mut chosen = HashSet::with_capacity(need);
        let mut out = Vec::with_capacity(need);
        while out.len() < need {
            let a = pool[rng.random_range(0..m)];
            let b = pool[rng.random_range(0..m)];
            if a == b {
                continue;
            }
            let (u, v) = (a.min(b), a.max(b));
            if usable(u, v) && chosen.insert((u, v)) {
                out.push((u, v));
            }
        }
        Ok(out)
    } else {
        // Dense regime: enumerate what is left and draw without replacement.
        let mut all = Vec::with_capacity(available);
        for (i, &u) in pool.iter().enumerate() {
            for &v in &pool[i + 1..] {
                if usable(u, v) {
                    all.push((u, v));
                }
            }
        }
        all.shuffle(&mut rng);
        all.truncate(need);
        Ok(all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor2;

    fn count(tags: &[Split], labels: &[bool], s: Split, y: bool) -> usize {
        tags.iter().zip(labels).filter(|(&t, &l)| t == s && l == y).count()
    }

    #[test]
    fn balanced_hundred() {
        let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let tags = stratified_split(&labels, SplitFractions::default(), 3).unwrap();
        for y in [false, true] {
            assert_eq!(count(&tags, &labels, Split::Train, y), 35);
            let v = count(&tags, &labels, Split::Val, y);
            assert!((7..=8).contains(&v));
        }
        assert_eq!(tags.iter().filter(|&&t| t == Split::Train).count(), 70);
        assert_eq!(tags.iter().filter(|&&t| t == Split::Val).count(), 15);
        assert_eq!(tags.iter().filter(|&&t| t == Split::Test).count(), 15);
        assert_eq!(stratified_split(&labels, SplitFractions::default(), 3).unwrap(), tags);
    }

    #[test]
    fn positive_rate_preserved() {
        let labels: Vec<bool> = (0..1000).map(|i| i % 10 == 0).collect();
        let tags = stratified_split(&labels, SplitFractions::default(), 11).unwrap();
        for s in Split::ALL {
            let total = tags.iter().filter(|&&t| t == s).count();
            let rate = count(&tags, &labels, s, true) as f64 / total as f64;
            assert!((0.09..=0.11).contains(&rate), "{s}: {rate}");
        }
    }

    #[test]
    fn tiny_classes() {
        let tags = stratified_split(&[true, true, true, false, false, false], SplitFractions::default(), 0).unwrap();
        for s in Split::ALL {
            assert_eq!(tags.iter().filter(|&&t| t == s).count(), 2);
        }
        assert!(matches!(
            stratified_split(&[true, true, false, false, false], SplitFractions::default(), 0),
            Err(Error::InvalidInput(_))
        ));
        let bad = SplitFractions { train: 0.5, val: 0.5, test: 0.5 };
        assert!(stratified_split(&[true; 9], bad, 0).is_err());
    }

    #[test]
    fn all_positive_rejected() {
        assert!(LabeledNodeSet::split(vec![0, 1, 2, 3], vec![true; 4], SplitFractions::default(), 0).is_err());
    }

    #[test]
    fn set_validation() {
        let tags = vec![Split::Train, Split::Train, Split::Val, Split::Val, Split::Test, Split::Test];
        let labels = vec![true, false, true, false, true, false];
        let pairs = vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)];
        assert!(LabeledPairSet::new(pairs.clone(), labels.clone(), tags.clone()).is_ok());
        let mut rev = pairs.clone();
        rev[0] = (1, 0);
        assert!(LabeledPairSet::new(rev, labels.clone(), tags.clone()).is_err());
        let mut dup = pairs;
        dup[1] = (0, 1);
        assert!(LabeledPairSet::new(dup, labels, tags).is_err());
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> SmeGraph {
        SmeGraph::from_edges(Tensor2::zeros(n, 1), vec![NodeKind::Sme; n], edges, None).unwrap()
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let edges: Vec<_> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
        let g = graph(5, &edges);
        assert!(matches!(sample_negatives(&g, &[(0, 1)], 1.0, 0), Err(Error::InvalidInput(_))));
        assert!(sample_negatives(&g, &[(0, 1)], 0.0, 0).is_err());
    }

    #[test]
    fn negatives_are_absent_from_adjacency() {
        let n = 60;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = graph(n, &edges);
        let positives: Vec<_> = (0..20).map(|i| (i, i + 2)).collect();
        let neg = sample_negatives(&g, &positives, 1.0, 4).unwrap();
        assert_eq!(neg.len(), positives.len());
        let uniq: HashSet<_> = neg.iter().collect();
        assert_eq!(uniq.len(), neg.len());
        for &(u, v) in &neg {
            assert!(u < v);
            assert!(!edges.contains(&(u, v)));
            assert!(!positives.contains(&(u, v)));
        }
        assert_eq!(sample_negatives(&g, &positives, 1.0, 4).unwrap(), neg);
    }

    #[test]
    fn dense_regime_enumerates() {
        // 6 nodes, 15 pairs, 10 edges, 2 positives: 3 usable pairs remain
        let edges = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5), (2, 3)];
        let g = graph(6, &edges);
        let neg = sample_negatives(&g, &[(2, 4), (2, 5)], 1.5, 1).unwrap();
        assert_eq!(neg.len(), 3);
        let mut sorted = neg.clone();
        sorted.sort();
        assert_eq!(sorted, vec![(3, 4), (3, 5), (4, 5)]);
    }
}
