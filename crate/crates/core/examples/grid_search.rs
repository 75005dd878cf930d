//! Hyperparameter grid for default prediction on the observed graph,
//! printed as the per-cell table with the selected cell.
//!
//! cargo run --release --example grid_search -- [num_smes] [seed]

use chainrisk::gcn::HeadKind;
use chainrisk::pipeline::{evaluate, grid_search, grid_table_tsv, node_task_data, FeatureScaler, TrainConfig};
use chainrisk::synthgen::{generate, GenConfig};

fn main() -> chainrisk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num_smes: usize = args.first().map_or(1000, |s| s.parse().expect("num_smes"));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));

    let data = generate(&GenConfig { seed, num_smes, ..GenConfig::paper_calibrated() })?;
    let scaler = FeatureScaler::fit(data.graph.node_features());
    let task = node_task_data(&data.graph, &data.nodes, &scaler)?;
    let base = TrainConfig { seed, ..TrainConfig::default() };
    let out = grid_search(&task, HeadKind::Node, &base)?;
    print!("{}", grid_table_tsv(&out.cells));
    println!(
        "selected lr {} dropout {} layers {} (best epoch {})",
        out.best.learning_rate, out.best.dropout, out.best.num_layers, out.trace.best_epoch
    );
    for r in evaluate(&out.model, &task)? {
        println!("{:<5} AUC {:.4}  KS {:.4}", r.split, r.auc, r.ks);
    }
    Ok(())
}
