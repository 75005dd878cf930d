use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use super::manifest::{FileDigest, RunClock, RunManifest};
use super::{EvalArgs, GenerateArgs, Stage, TrainArgs};
use crate::error::{Error, Result};
use crate::gcn::{Checkpoint, HeadKind};
use crate::graph::io::{
    read_graph, read_mined_edges, read_node_labels, read_pair_labels, write_atomic, write_mined_edges, EDGES_FILE,
    LABELS_DP_FILE, LABELS_SC_FILE, MINED_EDGES_FILE, NODES_FILE,
};
use crate::graph::{enrich, MinedEdge, SmeGraph};
use crate::metrics::{roc_points, roc_points_tsv, EvalReport};
use crate::nn::Tensor2;
use crate::pipeline::{
    evaluate, grid_table_tsv, node_task_data, pair_task_data, predict, prepare_node_set, prepare_pair_set,
    run_stage1_mining, run_stage2_default, FeatureScaler, TaskData, TrainConfig, TrainTrace, TrainedTask, Tuning,
};
use crate::synthgen::{generate, write_dataset, GenConfig};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRACE_FILE: &str = "trace.tsv";
pub const GRID_FILE: &str = "grid.tsv";
pub const ROC_FILE: &str = "roc_points.tsv";
pub const DEFAULT_SCORES_FILE: &str = "default_scores.tsv";
pub const EVAL_FILE: &str = "eval_report.json";

const MINED_EXTRA: &str = "mined_edges";

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn toml_error(path: &Path, text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::Parse { path: path.to_path_buf(), line, msg: e.message().trim().to_string() }
}

fn create_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Reads a training config from TOML, or the defaults when `path` is
/// `None`. Also returns the digest of the file read.
pub fn load_train_config(path: Option<&Path>) -> Result<(TrainConfig, Vec<FileDigest>)> {
    match path {
        None => Ok((TrainConfig::default(), Vec::new())),
        Some(p) => {
            let text = read_text(p)?;
            let config = toml::from_str(&text).map_err(|e| toml_error(p, &text, &e))?;
            Ok((config, vec![FileDigest::of(p, &file_name(p))?]))
        }
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<RunManifest> {
    let clock = RunClock::start()?;
    let mut inputs = Vec::new();
    let mut config = match &a.config {
        Some(p) => {
            let text = read_text(p)?;
            inputs.push(FileDigest::of(p, &file_name(p))?);
            GenConfig::from_toml_str(&text).map_err(|e| toml_error(p, &text, &e))?
        }
        None => GenConfig::preset(&a.preset)?,
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(n) = a.num_smes {
        config.num_smes = n;
    }
    let data = generate(&config)?;
    let written = write_dataset(&a.out, &data)?;
    let outputs: Vec<String> = written.iter().map(|p| file_name(p)).collect();
    let t = &data.truth;
    let defaults = t.defaults.iter().filter(|&&d| d).count();
    let metrics = json!({
        "num_nodes": data.graph.num_nodes(),
        "num_smes": t.num_smes(),
        "observed_edges": data.graph.num_edges(),
        "supply_edges": t.supply_edges.len(),
        "hidden_supply_edges": t.hidden.iter().filter(|&&h| h).count(),
        "labeled_pairs": data.pairs.len(),
        "default_rate": defaults as f64 / t.num_smes() as f64,
    });
    let config_echo = serde_json::to_value(&config).expect("config serializes");
    RunManifest::write(&a.out, "generate", config.seed, config_echo, inputs, &outputs, &clock, metrics)
}

fn read_dataset_graph(dir: &Path, inputs: &mut Vec<FileDigest>) -> Result<SmeGraph> {
    let g = read_graph(dir)?;
    for f in [NODES_FILE, EDGES_FILE] {
        inputs.push(FileDigest::of(&dir.join(f), f)?);
    }
    Ok(g)
}

fn mined_tensor(edges: &[MinedEdge]) -> Tensor2 {
    let data = edges.iter().flat_map(|e| [e.u as f64, e.v as f64, e.score]).collect();
    Tensor2::from_vec(edges.len(), 3, data).expect("three columns per edge")
}

fn mined_from_tensor(t: &Tensor2) -> Result<Vec<(usize, usize, f64)>> {
    if t.cols() != 3 {
        return Err(Error::InvalidInput("mined edge tensor must have 3 columns".into()));
    }
    Ok((0..t.rows()).map(|r| (t.get(r, 0) as usize, t.get(r, 1) as usize, t.get(r, 2))).collect())
}

fn trace_tsv(trace: &TrainTrace) -> String {
    let mut s = String::from("epoch\ttrain_loss\tval_loss\n");
    for e in &trace.epochs {
        let _ = writeln!(s, "{}\t{}\t{}", e.epoch, e.train_loss, e.val_loss);
    }
    s
}

fn test_roc(task: &TrainedTask, data: &TaskData) -> Result<String> {
    let p = predict(&task.model, data, &data.test.examples)?;
    Ok(roc_points_tsv(&roc_points(&p, &data.test.labels)?))
}

pub fn cmd_train(a: &TrainArgs) -> Result<RunManifest> {
    let clock = RunClock::start()?;
    let (mut config, mut inputs) = load_train_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(t) = a.tau {
        config.tau = t;
    }
    config.validate()?;
    let tuning = if a.grid { Tuning::Grid } else { Tuning::Fixed };
    let g = read_dataset_graph(&a.data, &mut inputs)?;
    create_out(&a.out)?;
    let mut outputs = vec![CHECKPOINT_FILE.to_string(), TRACE_FILE.to_string(), ROC_FILE.to_string()];
    let mut extra_metrics = serde_json::Map::new();

    let (task, roc, extras) = match a.stage {
        Stage::Sc => {
            if a.mined.is_some() || a.no_enrich {
                return Err(Error::InvalidArgument("--mined and --no-enrich apply to --stage dp only".into()));
            }
            let labels = a.data.join(LABELS_SC_FILE);
            let rows = read_pair_labels(&labels)?;
            inputs.push(FileDigest::of(&labels, LABELS_SC_FILE)?);
            let d_sc = prepare_pair_set(&g, &rows, &config)?;
            let s1 = run_stage1_mining(&g, &d_sc, &config, tuning)?;
            write_mined_edges(&a.out.join(MINED_EDGES_FILE), s1.enriched.mined_edges())?;
            outputs.push(MINED_EDGES_FILE.into());
            extra_metrics.insert("mined_edges".into(), json!(s1.enriched.mined_edges().len()));
            extra_metrics.insert("candidates_scored".into(), json!(s1.candidates_scored));
            let data = pair_task_data(&g, &d_sc, &s1.task.scaler)?;
            let roc = test_roc(&s1.task, &data)?;
            let extras = s1.task.scaler.to_tensors();
            (s1.task, roc, extras)
        }
        Stage::Dp => {
            let (graph, mined) = match (&a.mined, a.no_enrich) {
                (_, true) => (g, None),
                (Some(path), false) => {
                    let triples: Vec<(usize, usize, f64)> =
                        read_mined_edges(path)?.into_iter().map(|e| (e.u, e.v, e.score)).collect();
                    inputs.push(FileDigest::of(path, &file_name(path))?);
                    let enriched = enrich(&g, &triples, config.tau)?;
                    let kept = enriched.mined_edges().to_vec();
                    (enriched.graph().clone(), Some(kept))
                }
                (None, false) => {
                    return Err(Error::InvalidArgument(
                        "--stage dp needs --mined <mined_edges.tsv> or --no-enrich".into(),
                    ))
                }
            };
            extra_metrics.insert("enriched".into(), json!(mined.is_some()));
            extra_metrics.insert("mined_edges".into(), json!(mined.as_ref().map_or(0, Vec::len)));
            let labels = a.data.join(LABELS_DP_FILE);
            let rows = read_node_labels(&labels)?;
            inputs.push(FileDigest::of(&labels, LABELS_DP_FILE)?);
            let d_dp = prepare_node_set(&graph, &rows, &config)?;
            let s2 = run_stage2_default(&graph, &d_dp, &config, tuning)?;
            let mut scores = String::from("node\tp_default\n");
            for (u, p) in &s2.scores {
                let _ = writeln!(scores, "{u}\t{p}");
            }
            write_atomic(&a.out.join(DEFAULT_SCORES_FILE), &scores)?;
            outputs.push(DEFAULT_SCORES_FILE.into());
            let data = node_task_data(&graph, &d_dp, &s2.task.scaler)?;
            let roc = test_roc(&s2.task, &data)?;
            let mut extras = s2.task.scaler.to_tensors();
            if let Some(m) = &mined {
                extras.push((MINED_EXTRA.into(), mined_tensor(m)));
            }
            (s2.task, roc, extras)
        }
    };

    let config_echo = serde_json::to_value(&task.config).expect("config serializes");
    Checkpoint::new(task.model.clone(), task.config.seed, config_echo.clone(), extras)
        .save(&a.out.join(CHECKPOINT_FILE))?;
    write_atomic(&a.out.join(TRACE_FILE), &trace_tsv(&task.trace))?;
    write_atomic(&a.out.join(ROC_FILE), &roc)?;
    if let Some(cells) = &task.grid {
        write_atomic(&a.out.join(GRID_FILE), &grid_table_tsv(cells))?;
        outputs.push(GRID_FILE.into());
    }

    let mut metrics = serde_json::Map::new();
    metrics.insert("stage".into(), json!(stage_name(a.stage)));
    metrics.insert("tuning".into(), json!(if a.grid { "grid" } else { "fixed" }));
    metrics.insert("tau".into(), json!(config.tau));
    metrics.insert("reports".into(), json!(task.reports));
    metrics.insert("best_epoch".into(), json!(task.trace.best_epoch));
    metrics.insert("stopped_epoch".into(), json!(task.trace.stopped_epoch()));
    metrics.insert("best_val_loss".into(), json!(task.trace.best_val_loss));
    metrics.insert("epochs".into(), json!(task.trace.epochs));
    if let Some(cells) = &task.grid {
        metrics.insert("grid".into(), json!(cells));
    }
    metrics.extend(extra_metrics);
    RunManifest::write(
        &a.out,
        "train",
        task.config.seed,
        config_echo,
        inputs,
        &outputs,
        &clock,
        serde_json::Value::Object(metrics),
    )
}

fn stage_name(s: Stage) -> &'static str {
    match s {
        Stage::Sc => "sc",
        Stage::Dp => "dp",
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<RunManifest> {
    let clock = RunClock::start()?;
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let mut inputs = vec![FileDigest::of(&a.checkpoint, &file_name(&a.checkpoint))?];
    let config: TrainConfig = serde_json::from_value(ckpt.meta.config.clone())
        .map_err(|e| Error::InvalidInput(format!("checkpoint config echo: {e}")))?;
    let (Some(mean), Some(sd)) = (ckpt.extra("feature_mean"), ckpt.extra("feature_sd")) else {
        return Err(Error::InvalidInput("checkpoint lacks the feature scaler".into()));
    };
    let scaler = FeatureScaler::from_tensors(mean, sd)?;
    let g = read_dataset_graph(&a.data, &mut inputs)?;
    let data = match ckpt.meta.kind {
        HeadKind::Pair => {
            let labels = a.data.join(LABELS_SC_FILE);
            let rows = read_pair_labels(&labels)?;
            inputs.push(FileDigest::of(&labels, LABELS_SC_FILE)?);
            let d_sc = prepare_pair_set(&g, &rows, &config)?;
            pair_task_data(&g, &d_sc, &scaler)?
        }
        HeadKind::Node => {
            let graph = match ckpt.extra(MINED_EXTRA) {
                Some(t) => enrich(&g, &mined_from_tensor(t)?, config.tau)?.graph().clone(),
                None => g,
            };
            let labels = a.data.join(LABELS_DP_FILE);
            let rows = read_node_labels(&labels)?;
            inputs.push(FileDigest::of(&labels, LABELS_DP_FILE)?);
            let d_dp = prepare_node_set(&graph, &rows, &config)?;
            node_task_data(&graph, &d_dp, &scaler)?
        }
    };
    let reports: Vec<EvalReport> = evaluate(&ckpt.model, &data)?;
    create_out(&a.out)?;
    let p = predict(&ckpt.model, &data, &data.test.examples)?;
    write_atomic(&a.out.join(ROC_FILE), &roc_points_tsv(&roc_points(&p, &data.test.labels)?))?;
    let report_json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
    write_atomic(&a.out.join(EVAL_FILE), &report_json)?;
    let outputs = [EVAL_FILE.to_string(), ROC_FILE.to_string()];
    RunManifest::write(
        &a.out,
        "eval",
        config.seed,
        ckpt.meta.config.clone(),
        inputs,
        &outputs,
        &clock,
        json!({ "kind": ckpt.meta.kind, "reports": reports }),
    )
}
