use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Attribute;
use super::generate::{layout, GroundTruth};
use crate::error::{Error, Result};
use crate::graph::{NodeKind, SmeGraph};

/// Percentage of SMEs whose `rf_depth`-hop ball (self included) holds at
/// least one SME reporting `attribute`. Balls are taken in `g`, so they pass
/// through owner nodes too.
pub fn attribute_availability(g: &SmeGraph, attribute: &str, rf_depth: usize) -> Result<f64> {
    let a: Attribute = attribute.parse()?;
    if !(1..=4).contains(&rf_depth) {
        return Err(Error::InvalidArgument(format!("rf_depth must be 1..=4, got {rf_depth}")));
    }
    if g.node_features().cols() != layout::WIDTH {
        return Err(Error::InvalidInput(format!(
            "expected {} generated feature columns, found {}",
            layout::WIDTH,
            g.node_features().cols()
        )));
    }
    let col = layout::available_col(a);
    let has = |u: usize| g.node_kind(u) == NodeKind::Sme && g.node_features().get(u, col) > 0.0;
    let smes = g.nodes_of_kind(NodeKind::Sme);
    if smes.is_empty() {
        return Err(Error::InvalidInput("graph has no SME nodes".into()));
    }
    let covered = smes.par_iter().filter(|&&u| g.ball(u, rf_depth).into_iter().any(has)).count();
    Ok(100.0 * covered as f64 / smes.len() as f64)
}

/// Default rate among SMEs whose partner count falls in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRate {
    pub label: String,
    pub lo: usize,
    /// Inclusive upper bound; `None` for the open top bucket.
    pub hi: Option<usize>,
    pub count: usize,
    pub defaults: usize,
    pub rate: f64,
}

pub const PARTNER_BUCKETS: [(usize, Option<usize>); 4] = [(0, Some(2)), (3, Some(5)), (6, Some(10)), (11, None)];

/// Default rate by supply-partner count bucket `{0-2, 3-5, 6-10, >10}`.
/// Partners are SME neighbours in `g`. Empty buckets are omitted.
pub fn partner_default_curve(g: &SmeGraph, labels: &[(usize, bool)]) -> Vec<BucketRate> {
    let mut counts = [(0usize, 0usize); 4];
    for &(u, y) in labels {
        let partners = g.neighbors(u).iter().filter(|&&v| g.node_kind(v) == NodeKind::Sme).count();
        let b = PARTNER_BUCKETS
            .iter()
            .position(|&(lo, hi)| partners >= lo && hi.is_none_or(|h| partners <= h))
            .expect("buckets cover every count");
        counts[b].0 += 1;
        counts[b].1 += usize::from(y);
    }
    PARTNER_BUCKETS
        .iter()
        .zip(counts)
        .filter(|(_, (c, _))| *c > 0)
        .map(|(&(lo, hi), (count, defaults))| BucketRate {
            label: match hi {
                Some(h) => format!("{lo}-{h}"),
                None => format!(">{}", lo - 1),
            },
            lo,
            hi,
            count,
            defaults,
            rate: defaults as f64 / count as f64,
        })
        .collect()
}

/// Population variance of the reported revenue signal per tier.
pub fn revenue_variance_by_tier(g: &SmeGraph, truth: &GroundTruth) -> [f64; 3] {
    let (vc, ac) = (layout::value_col(Attribute::Revenue), layout::available_col(Attribute::Revenue));
    let mut out = [0.0; 3];
    for (t, slot) in out.iter_mut().enumerate() {
        let vals: Vec<f64> = (0..truth.num_smes())
            .filter(|&u| truth.tiers[u] as usize == t && g.node_features().get(u, ac) > 0.0)
            .map(|u| g.node_features().get(u, vc))
            .collect();
        if !vals.is_empty() {
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            *slot = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
        }
    }
    out
}

/// Shareholder availability (percent) among SMEs with and without an owner
/// tie.
pub fn shareholder_availability_by_tie(g: &SmeGraph) -> (f64, f64) {
    let col = layout::available_col(Attribute::Shareholder);
    let mut acc = [(0usize, 0usize); 2];
    for u in g.nodes_of_kind(NodeKind::Sme) {
        let tied = g.neighbors(u).iter().any(|&v| g.node_kind(v) == NodeKind::Owner);
        let slot = &mut acc[usize::from(tied)];
        slot.0 += 1;
        slot.1 += usize::from(g.node_features().get(u, col) > 0.0);
    }
    let pct = |(n, k): (usize, usize)| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
    (pct(acc[1]), pct(acc[0]))
}
