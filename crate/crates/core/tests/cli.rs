mod common;

use std::fs;
use std::path::Path;

use chainrisk::cli::{RunManifest, CHECKPOINT_FILE, EVAL_FILE, GRID_FILE, MANIFEST_FILE, ROC_FILE};
use chainrisk::graph::io::{read_graph, read_mined_edges, read_node_labels, read_pair_labels, MINED_EDGES_FILE};
use chainrisk::metrics::EvalReport;
use chainrisk::synthgen::{generate, read_ground_truth, GenConfig, GROUND_TRUTH_FILE};
use common::{chainrisk, exit_code, p};
use rand::seq::SliceRandom;
use tempfile::TempDir;

fn ok(args: &[&str]) -> RunManifest {
    let out = chainrisk(args, &[]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let dir = args.iter().position(|a| *a == "--out").map(|i| args[i + 1]).unwrap();
    RunManifest::read(&Path::new(dir).join(MANIFEST_FILE)).unwrap()
}

fn toy(dir: &Path, seed: u64) {
    ok(&["generate", "--preset", "toy", "--seed", &seed.to_string(), "--out", p(dir)]);
}

fn test_report(m: &RunManifest) -> EvalReport {
    let reports: Vec<EvalReport> = serde_json::from_value(m.metrics["reports"].clone()).unwrap();
    reports.into_iter().find(|r| r.split == "test").unwrap()
}

fn digests(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn generate_is_reproducible_to_the_byte() {
    let t = TempDir::new().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    let env = [("SOURCE_DATE_EPOCH", "1700000000")];
    for dir in [&a, &b] {
        let out = chainrisk(&["generate", "--preset", "paper-calibrated", "--seed", "7", "--out", p(dir)], &env);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(digests(&a), digests(&b));
    let m = RunManifest::read(&a.join(MANIFEST_FILE)).unwrap();
    assert_eq!((m.started_at, m.finished_at, m.wall_clock_secs), (1_700_000_000, 1_700_000_000, 0.0));
    assert_eq!(m.outputs.len(), 6);
    assert!(m.outputs.iter().all(|d| d.sha256.len() == 64));
}

#[test]
fn generated_files_parse_back_losslessly() {
    let t = TempDir::new().unwrap();
    ok(&["generate", "--preset", "toy", "--seed", "3", "--out", p(t.path())]);
    let expected = generate(&GenConfig { seed: 3, ..GenConfig::toy() }).unwrap();
    assert_eq!(read_graph(t.path()).unwrap(), expected.graph);
    assert_eq!(read_pair_labels(&t.path().join("labels_sc.tsv")).unwrap(), expected.pair_rows());
    assert_eq!(read_node_labels(&t.path().join("labels_dp.tsv")).unwrap(), expected.node_rows());
    assert_eq!(read_ground_truth(&t.path().join(GROUND_TRUTH_FILE)).unwrap(), expected.truth);
    let echo = fs::read_to_string(t.path().join("generator.toml")).unwrap();
    assert_eq!(GenConfig::from_toml_str(&echo).unwrap(), expected.config);
}

#[test]
fn invalid_generator_config_exits_2_with_line_diagnostics() {
    let t = TempDir::new().unwrap();
    let out = chainrisk(&["generate", "--num-smes", "0", "--out", p(&t.path().join("x"))], &[]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_smes"));

    let cfg = t.path().join("gen.toml");
    fs::write(&cfg, "preset = \"toy\"\nnum_smes = \"many\"\n").unwrap();
    let out = chainrisk(&["generate", "--config", p(&cfg), "--out", p(&t.path().join("y"))], &[]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gen.toml:2"));

    let out = chainrisk(&["generate", "--config", p(&t.path().join("absent.toml")), "--out", p(t.path())], &[]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn config_file_overrides_only_the_keys_it_names() {
    let t = TempDir::new().unwrap();
    let cfg = t.path().join("gen.toml");
    fs::write(&cfg, "preset = \"toy\"\nnum_smes = 120\n").unwrap();
    let m = ok(&["generate", "--config", p(&cfg), "--out", p(&t.path().join("d"))]);
    assert_eq!(m.config["num_smes"], 120);
    assert_eq!(m.config["hidden_fraction"], GenConfig::toy().hidden_fraction);
    assert_eq!(m.inputs.len(), 1);
}

#[test]
fn two_stage_train_and_eval_round_trip() {
    let t = TempDir::new().unwrap();
    let data = t.path().join("data");
    toy(&data, 1);
    let before = digests(&data);

    let sc = t.path().join("sc");
    let m_sc = ok(&["train", "--stage", "sc", "--data", p(&data), "--out", p(&sc)]);
    assert!(test_report(&m_sc).auc > 0.0);
    let mined = read_mined_edges(&sc.join(MINED_EDGES_FILE)).unwrap();
    assert_eq!(m_sc.metrics["mined_edges"], mined.len());
    assert!(mined.iter().all(|e| e.score >= 0.9 && e.u < e.v));

    let dp = t.path().join("dp");
    let m_dp =
        ok(&["train", "--stage", "dp", "--data", p(&data), "--mined", p(&sc.join(MINED_EDGES_FILE)), "--out", p(&dp)]);
    assert_eq!(m_dp.metrics["enriched"], true);
    let roc = fs::read_to_string(dp.join(ROC_FILE)).unwrap();
    assert!(roc.starts_with("fpr\ttpr\n"));
    for d in &m_dp.outputs {
        let bytes = fs::read(dp.join(&d.path)).unwrap();
        assert!(!bytes.is_empty(), "{}", d.path);
    }

    for (ckpt_dir, manifest) in [(&sc, &m_sc), (&dp, &m_dp)] {
        let ev = t.path().join(format!("eval-{}", ckpt_dir.file_name().unwrap().to_string_lossy()));
        let m = ok(&["eval", "--checkpoint", p(&ckpt_dir.join(CHECKPOINT_FILE)), "--data", p(&data), "--out", p(&ev)]);
        assert_eq!(test_report(&m), test_report(manifest));
        let saved: Vec<EvalReport> = serde_json::from_str(&fs::read_to_string(ev.join(EVAL_FILE)).unwrap()).unwrap();
        assert_eq!(saved.len(), 3);
        assert_eq!(fs::read(ev.join(ROC_FILE)).unwrap(), fs::read(ckpt_dir.join(ROC_FILE)).unwrap());
    }
    assert_eq!(digests(&data), before, "commands must not modify their inputs");
}

#[test]
fn training_is_reproducible_across_thread_counts() {
    let t = TempDir::new().unwrap();
    let data = t.path().join("data");
    toy(&data, 2);
    let env_a = [("SOURCE_DATE_EPOCH", "1"), ("CHAINRISK_THREADS", "1")];
    let env_b = [("SOURCE_DATE_EPOCH", "1"), ("CHAINRISK_THREADS", "4")];
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    for (dir, env) in [(&a, &env_a[..]), (&b, &env_b[..])] {
        let out = chainrisk(&["train", "--stage", "sc", "--data", p(&data), "--seed", "5", "--out", p(dir)], env);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(digests(&a), digests(&b));
}

#[test]
fn grid_flag_writes_one_row_per_cell() {
    let t = TempDir::new().unwrap();
    let data = t.path().join("data");
    toy(&data, 3);
    let out = t.path().join("grid");
    let m = ok(&["train", "--stage", "dp", "--no-enrich", "--grid", "--data", p(&data), "--out", p(&out)]);
    let table = fs::read_to_string(out.join(GRID_FILE)).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 27);
    let best = rows
        .iter()
        .filter_map(|r| r.split('\t').nth(3).and_then(|v| v.parse::<f64>().ok()))
        .fold(f64::NEG_INFINITY, f64::max);
    let cells = m.metrics["grid"].as_array().unwrap();
    assert_eq!(cells.len(), 27);
    let winner = cells
        .iter()
        .find(|c| {
            c["learning_rate"] == m.config["learning_rate"]
                && c["dropout"] == m.config["dropout"]
                && c["num_layers"] == m.config["num_layers"]
        })
        .unwrap();
    assert_eq!(winner["val_auc"].as_f64().unwrap(), best);
}

#[test]
fn shuffled_labels_evaluate_near_chance() {
    let t = TempDir::new().unwrap();
    let data = t.path().join("data");
    ok(&["generate", "--preset", "paper-calibrated", "--num-smes", "2000", "--seed", "4", "--out", p(&data)]);
    let run = t.path().join("run");
    ok(&["train", "--stage", "dp", "--no-enrich", "--data", p(&data), "--out", p(&run)]);

    let shuffled = t.path().join("shuffled");
    fs::create_dir(&shuffled).unwrap();
    for f in ["nodes.csv", "edges.tsv"] {
        fs::copy(data.join(f), shuffled.join(f)).unwrap();
    }
    let rows = read_node_labels(&data.join("labels_dp.tsv")).unwrap();
    let mut ys: Vec<bool> = rows.iter().map(|r| r.1).collect();
    ys.shuffle(&mut chainrisk::rng::seeded(11, 0));
    let rows: Vec<(usize, bool)> = rows.iter().map(|r| r.0).zip(ys).collect();
    chainrisk::graph::io::write_node_labels(&shuffled.join("labels_dp.tsv"), &rows).unwrap();

    let ev = t.path().join("ev");
    let m = ok(&["eval", "--checkpoint", p(&run.join(CHECKPOINT_FILE)), "--data", p(&shuffled), "--out", p(&ev)]);
    let auc = test_report(&m).auc;
    assert!((auc - 0.5).abs() < 0.12, "shuffled-label AUC {auc}");
}

#[test]
fn error_exit_codes() {
    let t = TempDir::new().unwrap();
    let data = t.path().join("data");
    toy(&data, 1);
    let out = |name: &str| t.path().join(name);

    let r =
        chainrisk(&["eval", "--checkpoint", p(&out("missing.ckpt")), "--data", p(&data), "--out", p(&out("e"))], &[]);
    assert_eq!(exit_code(&r), 2);

    let r = chainrisk(&["train", "--stage", "dp", "--data", p(&data), "--out", p(&out("x"))], &[]);
    assert_eq!(exit_code(&r), 2, "dp needs --mined or --no-enrich");

    let r = chainrisk(&["train", "--stage", "sc", "--data", p(&out("nowhere")), "--out", p(&out("x"))], &[]);
    assert_eq!(exit_code(&r), 2);

    let r = chainrisk(&["train", "--stage", "sc", "--data", p(&data), "--tau", "1.5", "--out", p(&out("x"))], &[]);
    assert_eq!(exit_code(&r), 2);

    let cfg = out("lr.toml");
    fs::write(&cfg, "learning_rate = 1e300\n").unwrap();
    let r = chainrisk(
        &["train", "--stage", "dp", "--no-enrich", "--data", p(&data), "--config", p(&cfg), "--out", p(&out("d"))],
        &[],
    );
    assert_eq!(exit_code(&r), 3);
    assert!(String::from_utf8_lossy(&r.stderr).contains("diverged at epoch"));

    let run = out("run");
    ok(&["train", "--stage", "dp", "--no-enrich", "--data", p(&data), "--out", p(&run)]);
    let mut bytes = fs::read(run.join(CHECKPOINT_FILE)).unwrap();
    bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
    let bumped = out("bumped.ckpt");
    fs::write(&bumped, &bytes).unwrap();
    let r = chainrisk(&["eval", "--checkpoint", p(&bumped), "--data", p(&data), "--out", p(&out("e"))], &[]);
    assert_eq!(exit_code(&r), 4);

    bytes[0] = b'X';
    fs::write(&bumped, &bytes).unwrap();
    let r = chainrisk(&["eval", "--checkpoint", p(&bumped), "--data", p(&data), "--out", p(&out("e"))], &[]);
    assert_eq!(exit_code(&r), 2);

    let r = chainrisk(&["generate", "--preset", "toy", "--out", p(&out("g"))], &[("CHAINRISK_THREADS", "zero")]);
    assert_eq!(exit_code(&r), 2);

    let cfg = out("typo.toml");
    fs::write(&cfg, "learning_rate = 0.01\npatiense = 3\n").unwrap();
    let r = chainrisk(&["train", "--stage", "sc", "--data", p(&data), "--config", p(&cfg), "--out", p(&out("x"))], &[]);
    assert_eq!(exit_code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("typo.toml:2"));
}
