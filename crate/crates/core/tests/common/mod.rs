//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use chainrisk::graph::{NodeKind, SmeGraph};
use chainrisk::nn::Tensor2;
use chainrisk::rng::Rng;
use rand::Rng as _;

/// AUC by counting every positive-negative pair, ties worth one half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &yi) in labels.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// KS by evaluating both empirical CDFs at every distinct score.
pub fn sweep_ks(scores: &[f64], labels: &[bool]) -> f64 {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &y)| y).map(|(&s, _)| s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &y)| !y).map(|(&s, _)| s).collect();
    let cdf = |v: &[f64], t: f64| v.iter().filter(|&&s| s <= t).count() as f64 / v.len() as f64;
    scores.iter().map(|&t| (cdf(&pos, t) - cdf(&neg, t)).abs()).fold(0.0, f64::max)
}

/// Erdos-Renyi SME graph with uniform random features.
pub fn random_graph(n: usize, p: f64, features: usize, rng: &mut Rng) -> SmeGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let x = Tensor2::from_vec(n, features, (0..n * features).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    SmeGraph::from_edges(x, vec![NodeKind::Sme; n], &edges, None).unwrap()
}

/// Runs the command-line binary.
pub fn chainrisk(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chainrisk"));
    cmd.args(args).env_remove("SOURCE_DATE_EPOCH").env_remove("CHAINRISK_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
