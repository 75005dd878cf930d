//! Trains a small default scorer, saves it as a checkpoint with its feature
//! scaler and reloads it to score the same firms.
//!
//! cargo run --release --example checkpoint

use chainrisk::gcn::Checkpoint;
use chainrisk::pipeline::{node_task_data, predict, run_stage2_default, FeatureScaler, TrainConfig, Tuning};
use chainrisk::synthgen::{generate, GenConfig};

fn main() -> chainrisk::Result<()> {
    let data = generate(&GenConfig::toy())?;
    let config = TrainConfig::default();
    let out = run_stage2_default(&data.graph, &data.nodes, &config, Tuning::Fixed)?;
    let task = &out.task;

    let path = std::env::temp_dir().join("chainrisk-example.ckpt");
    let echo = serde_json::to_value(&task.config).expect("config serializes");
    Checkpoint::new(task.model.clone(), config.seed, echo, task.scaler.to_tensors()).save(&path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("saved {} parameters to {} ({bytes} bytes)", task.model.num_params(), path.display());

    let ckpt = Checkpoint::load(&path)?;
    let scaler = FeatureScaler::from_tensors(
        ckpt.extra("feature_mean").expect("scaler saved"),
        ckpt.extra("feature_sd").expect("scaler saved"),
    )?;
    let reloaded = node_task_data(&data.graph, &data.nodes, &scaler)?;
    let p = predict(&ckpt.model, &reloaded, &reloaded.test.examples)?;
    let original = node_task_data(&data.graph, &data.nodes, &task.scaler)?;
    let q = predict(&task.model, &original, &original.test.examples)?;
    println!("reloaded test scores identical: {}", p == q);
    println!("checkpoint metadata: {}", serde_json::to_string(&ckpt.meta).expect("meta serializes"));
    Ok(())
}
