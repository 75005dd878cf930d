//! AUC, KS and ROC vertices for a toy score vector with ties.
//!
//! cargo run --release --example ranking_metrics

use chainrisk::metrics::{auc, ks, roc_points, roc_points_tsv, EvalReport};

fn main() -> chainrisk::Result<()> {
    let scores = [0.9, 0.8, 0.8, 0.6, 0.55, 0.4, 0.3, 0.3, 0.2, 0.1];
    let labels = [true, true, false, true, false, true, false, false, false, false];
    println!("AUC {:.4}  KS {:.4}", auc(&scores, &labels)?, ks(&scores, &labels)?);
    let report = EvalReport::compute("demo", &scores, &labels)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    print!("{}", roc_points_tsv(&roc_points(&scores, &labels)?));
    Ok(())
}
