//! Stage one on a generated economy: train the pair scorer on withheld
//! supply links, mine candidates and compare the mined set with the ground
//! truth.
//!
//! cargo run --release --example mine_supply_links -- [num_smes] [seed] [tau]

use std::collections::HashSet;

use chainrisk::pipeline::{run_stage1_mining, Split, TrainConfig, Tuning};
use chainrisk::synthgen::{generate, GenConfig};

fn main() -> chainrisk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num_smes: usize = args.first().map_or(3000, |s| s.parse().expect("num_smes"));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));
    let tau: f64 = args.get(2).map_or(0.9, |s| s.parse().expect("tau"));

    let data = generate(&GenConfig { seed, num_smes, ..GenConfig::paper_calibrated() })?;
    let config = TrainConfig { seed, tau, ..TrainConfig::default() };
    let s1 = run_stage1_mining(&data.graph, &data.pairs, &config, Tuning::Fixed)?;
    for r in &s1.task.reports {
        println!("{:<5} AUC {:.4}  KS {:.4}", r.split, r.auc, r.ks);
    }
    println!("trained {} epochs, best epoch {}", s1.task.trace.stopped_epoch(), s1.task.trace.best_epoch);

    let hidden: HashSet<(usize, usize)> = data.truth.hidden_edges().into_iter().collect();
    let mined = s1.enriched.mined_edges();
    let hits = mined.iter().filter(|e| hidden.contains(&(e.u, e.v))).count();
    println!(
        "{} candidates scored, {} kept at tau {tau}: {hits} are hidden supply links ({:.1}% precision, {:.1}% of {} recovered)",
        s1.candidates_scored,
        mined.len(),
        100.0 * hits as f64 / mined.len().max(1) as f64,
        100.0 * hits as f64 / hidden.len() as f64,
        hidden.len()
    );
    let (test_pairs, _) = data.pairs.subset(Split::Test);
    let test_hidden = test_pairs.iter().filter(|p| hidden.contains(p)).count();
    println!("test split holds {test_hidden} hidden links the scorer never trained on");
    Ok(())
}
