//! Seeded synthetic SME economies with known latent supply links and
//! default labels.
//!
//! SMEs sit in three tiers (upstream, mid, downstream) at random positions
//! in the unit square. Buyers source from nearby SMEs of the previous tier,
//! so supply links form a tiered DAG, rendered undirected. Some SMEs trade
//! mostly offline; their links are the ones most likely to be missing from
//! the observed graph, and those missing links become the positive pairs of
//! the mining task. Shared owners add social ties. Defaults follow a
//! logistic model in the true partner count.

mod analysis;
mod config;
mod generate;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use analysis::{
    attribute_availability, partner_default_curve, revenue_variance_by_tier, shareholder_availability_by_tie,
    BucketRate, PARTNER_BUCKETS,
};
pub use config::{Attribute, Availability, GenConfig, NULL_PRESET, PAPER_CALIBRATED, PRESETS, TOY_PRESET};
pub use generate::{generate, layout, Generated, GroundTruth};

use crate::error::{Error, Result};
use crate::graph::io::{
    write_atomic, write_graph, write_node_labels, write_pair_labels, EDGES_FILE, LABELS_DP_FILE, LABELS_SC_FILE,
    NODES_FILE,
};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.tsv";
pub const CONFIG_ECHO_FILE: &str = "generator.toml";

/// Writes the observed graph, both label files, the ground truth and the
/// effective config into `dir`; returns the written paths.
pub fn write_dataset(dir: &Path, data: &Generated) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_graph(dir, &data.graph)?;
    write_node_labels(&dir.join(LABELS_DP_FILE), &data.node_rows())?;
    write_pair_labels(&dir.join(LABELS_SC_FILE), &data.pair_rows())?;
    write_atomic(&dir.join(GROUND_TRUTH_FILE), &ground_truth_tsv(&data.truth))?;
    write_atomic(&dir.join(CONFIG_ECHO_FILE), &data.config.to_toml_string())?;
    Ok([NODES_FILE, EDGES_FILE, LABELS_DP_FILE, LABELS_SC_FILE, GROUND_TRUTH_FILE, CONFIG_ECHO_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect())
}

/// Tagged rows: `node<TAB>id<TAB>tier<TAB>offline<TAB>default` for every SME,
/// then `supply<TAB>u<TAB>v<TAB>hidden` for every supply edge.
pub fn ground_truth_tsv(t: &GroundTruth) -> String {
    let mut s = String::new();
    for u in 0..t.num_smes() {
        let _ = writeln!(s, "node\t{u}\t{}\t{}\t{}", t.tiers[u], u8::from(t.offline[u]), u8::from(t.defaults[u]));
    }
    for (&(u, v), &h) in t.supply_edges.iter().zip(&t.hidden) {
        let _ = writeln!(s, "supply\t{u}\t{v}\t{}", u8::from(h));
    }
    s
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: &str| Error::Parse { path: path.to_path_buf(), line, msg: msg.into() };
    let mut t = GroundTruth {
        tiers: Vec::new(),
        offline: Vec::new(),
        supply_edges: Vec::new(),
        hidden: Vec::new(),
        defaults: Vec::new(),
    };
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let ln = i + 1;
        let f: Vec<&str> = line.split('\t').collect();
        let num = |k: usize| f[k].parse::<usize>().map_err(|_| err(ln, "bad integer field"));
        let bit = |k: usize| match f[k] {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(err(ln, "flag must be 0 or 1")),
        };
        match (f[0], f.len()) {
            ("node", 5) => {
                if num(1)? != t.tiers.len() {
                    return Err(err(ln, "node rows must be consecutive from 0"));
                }
                let tier = num(2)?;
                if tier > 2 {
                    return Err(err(ln, "tier must be 0, 1 or 2"));
                }
                t.tiers.push(tier as u8);
                t.offline.push(bit(3)?);
                t.defaults.push(bit(4)?);
            }
            ("supply", 4) => {
                t.supply_edges.push((num(1)?, num(2)?));
                t.hidden.push(bit(3)?);
            }
            _ => return Err(err(ln, "expected a `node` row with 5 fields or a `supply` row with 4")),
        }
    }
    Ok(t)
}
