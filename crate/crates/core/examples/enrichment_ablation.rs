//! Two-stage run against its ablation: mine supply links, then predict
//! defaults on the enriched graph and on the observed graph alone.
//!
//! cargo run --release --example enrichment_ablation -- [seeds] [num_smes]

use std::time::Instant;

use chainrisk::pipeline::{run_stage1_mining, run_stage2_default, CandidateScope, Split, TrainConfig, Tuning};
use chainrisk::synthgen::{generate, GenConfig};

fn main() -> chainrisk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map_or(5, |s| s.parse().expect("seed count"));
    let num_smes: usize = args.get(1).map_or(5000, |s| s.parse().expect("num_smes"));
    let hops: usize = args.get(2).map_or(2, |s| s.parse().expect("hops"));

    let mut lifts = Vec::new();
    for seed in 1..=seeds {
        let t0 = Instant::now();
        let data = generate(&GenConfig { seed, num_smes, ..GenConfig::paper_calibrated() })?;
        let config = TrainConfig { seed, candidates: CandidateScope::WithinHops(hops), ..TrainConfig::default() };
        let s1 = run_stage1_mining(&data.graph, &data.pairs, &config, Tuning::Fixed)?;
        let hidden: std::collections::HashSet<_> = data.truth.hidden_edges().into_iter().collect();
        let mined = s1.enriched.mined_edges();
        let true_mined = mined.iter().filter(|e| hidden.contains(&(e.u, e.v))).count();
        let enriched = run_stage2_default(s1.enriched.graph(), &data.nodes, &config, Tuning::Fixed)?;
        let ablation = run_stage2_default(&data.graph, &data.nodes, &config, Tuning::Fixed)?;
        let (a_enr, a_abl) = (enriched.task.report(Split::Test).auc, ablation.task.report(Split::Test).auc);
        lifts.push(a_enr - a_abl);
        let (test_nodes, test_y) = data.nodes.subset(Split::Test);
        let sme_deg = |g: &chainrisk::graph::SmeGraph, u: usize| {
            g.neighbors(u).iter().filter(|&&v| g.node_kind(v) == chainrisk::graph::NodeKind::Sme).count() as f64
        };
        let truth = data.truth.true_partner_counts();
        let oracle = |f: &dyn Fn(usize) -> f64| {
            let s: Vec<f64> = test_nodes.iter().map(|&u| -f(u)).collect();
            chainrisk::metrics::auc(&s, &test_y).unwrap()
        };
        println!(
            "  oracle AUC: true {:.3}, observed {:.3}, enriched {:.3}",
            oracle(&|u| truth[u] as f64),
            oracle(&|u| sme_deg(&data.graph, u)),
            oracle(&|u| sme_deg(s1.enriched.graph(), u))
        );
        println!(
            "seed {seed}: mining test AUC {:.3} ({} candidates, {} mined, {} true of {} hidden); \
             default test AUC enriched {a_enr:.3} vs observed {a_abl:.3} [{:.1}s]",
            s1.task.report(Split::Test).auc,
            s1.candidates_scored,
            mined.len(),
            true_mined,
            hidden.len(),
            t0.elapsed().as_secs_f64()
        );
    }
    println!("mean lift {:.4}", lifts.iter().sum::<f64>() / lifts.len() as f64);
    Ok(())
}
