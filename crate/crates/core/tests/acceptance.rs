//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! runtime budget. Runs without the libtest harness so the lines always
//! print; exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use chainrisk::gcn::{eval_loss, loss_and_backward, Architecture, Batch, GcnModel, HeadKind};
use chainrisk::graph::normalize_adjacency;
use chainrisk::metrics::{auc, ks};
use chainrisk::nn::grad_check;
use chainrisk::pipeline::{
    grid_search, node_task_data, prepare_node_set, run_stage1_mining, run_stage2_default, train_task, FeatureScaler,
    Split, TrainConfig, Tuning,
};
use chainrisk::rng::seeded;
use chainrisk::synthgen::{attribute_availability, generate, partner_default_curve, Attribute, GenConfig};
use common::{chainrisk, exit_code, pairwise_auc, random_graph, sweep_ks};
use nalgebra::DMatrix;
use rand::Rng as _;

type Check = Result<(bool, String), String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget_secs: f64,
    run: fn() -> Check,
}

fn criterion_1() -> Check {
    let mut rng = seeded(2024, 0);
    let g = random_graph(20, 0.2, 5, &mut rng);
    let adj = normalize_adjacency(&g);
    let x = g.node_features().clone();
    let arch = Architecture { num_layers: 2, ..Architecture::default() };
    let pairs: Vec<(usize, usize)> = (0..20).map(|i| (i % 19, 19.min(i % 19 + 1 + i / 19))).collect();
    let pair_labels: Vec<bool> = (0..pairs.len()).map(|i| i % 3 == 0).collect();
    let nodes: Vec<usize> = (0..20).collect();
    let node_labels: Vec<bool> = (0..20).map(|i| i % 2 == 1).collect();
    let mut worst: f64 = 0.0;
    for (kind, batch, labels) in
        [(HeadKind::Pair, Batch::Pairs(&pairs), &pair_labels), (HeadKind::Node, Batch::Nodes(&nodes), &node_labels)]
    {
        let base = GcnModel::init(kind, x.cols(), &arch, 7).map_err(|e| e.to_string())?;
        let mut model = base.clone();
        loss_and_backward(&mut model, &adj, &x, batch, labels, 0.0, &mut seeded(0, 0), false)
            .map_err(|e| e.to_string())?;
        let report = grad_check(
            |p| {
                let mut probe = base.clone();
                probe.set_flat_values(p).unwrap();
                eval_loss(&probe, &adj, &x, batch, labels).unwrap()
            },
            &model.flat_values(),
            &model.flat_grads(),
            1e-5,
        );
        worst = worst.max(report.max_rel_error);
    }
    Ok((worst < 1e-4, format!("max relative error {worst:.2e} over both heads (limit 1e-4)")))
}

fn criterion_2() -> Check {
    let mut rng = seeded(2025, 0);
    let (mut asym, mut lo, mut hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100 {
        let n = rng.random_range(1..=50);
        let p = [0.05, 0.15, 0.4, 0.9][i % 4];
        let g = random_graph(n, p, 1, &mut rng);
        let a = normalize_adjacency(&g).to_dense();
        let m = DMatrix::from_fn(n, n, |r, c| a.get(r, c));
        asym = asym.max((&m - m.transpose()).abs().max());
        for &l in m.symmetric_eigenvalues().iter() {
            lo = lo.min(l);
            hi = hi.max(l);
        }
    }
    let pass = asym <= 1e-12 && lo >= -1.0 - 1e-9 && hi <= 1.0 + 1e-9;
    Ok((pass, format!("max asymmetry {asym:.1e}, eigenvalues in [{lo:.6}, {hi:.6}]")))
}

fn criterion_3() -> Check {
    let mut rng = seeded(2026, 0);
    let (mut d_auc, mut d_ks) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let n = 200;
        let scores: Vec<f64> = match i % 3 {
            0 => (0..n).map(|_| rng.random::<f64>()).collect(),
            1 => (0..n).map(|_| f64::from(rng.random_range(0..4u8))).collect(),
            _ => (0..n).map(|_| f64::from(rng.random_range(0..2u8)) * 0.5).collect(),
        };
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        d_auc = d_auc.max((auc(&scores, &labels).map_err(|e| e.to_string())? - pairwise_auc(&scores, &labels)).abs());
        d_ks = d_ks.max((ks(&scores, &labels).map_err(|e| e.to_string())? - sweep_ks(&scores, &labels)).abs());
    }
    Ok((d_auc <= 1e-12 && d_ks <= 1e-12, format!("max |AUC - pairwise| {d_auc:.1e}, max |KS - sweep| {d_ks:.1e}")))
}

fn calibrated(seed: u64, num_smes: usize) -> GenConfig {
    GenConfig { seed, num_smes, ..GenConfig::paper_calibrated() }
}

fn criterion_4() -> Check {
    let mut lifts = Vec::new();
    for seed in 1..=5 {
        let data = generate(&calibrated(seed, 5000)).map_err(|e| e.to_string())?;
        let config = TrainConfig { seed, ..TrainConfig::default() };
        let s1 = run_stage1_mining(&data.graph, &data.pairs, &config, Tuning::Fixed).map_err(|e| e.to_string())?;
        let enriched =
            run_stage2_default(s1.enriched.graph(), &data.nodes, &config, Tuning::Fixed).map_err(|e| e.to_string())?;
        let ablation =
            run_stage2_default(&data.graph, &data.nodes, &config, Tuning::Fixed).map_err(|e| e.to_string())?;
        lifts.push(enriched.task.report(Split::Test).auc - ablation.task.report(Split::Test).auc);
    }
    let mean = lifts.iter().sum::<f64>() / lifts.len() as f64;
    let per_seed: Vec<String> = lifts.iter().map(|l| format!("{l:+.3}")).collect();
    Ok((mean >= 0.02, format!("mean test AUC lift {mean:+.4} (need >= 0.02); per seed {}", per_seed.join(" "))))
}

fn criterion_5() -> Check {
    let data = generate(&calibrated(7, 5000)).map_err(|e| e.to_string())?;
    let s1 = run_stage1_mining(&data.graph, &data.pairs, &TrainConfig::default(), Tuning::Fixed)
        .map_err(|e| e.to_string())?;
    let a = s1.task.report(Split::Test).auc;
    Ok((a >= 0.90, format!("mining test AUC {a:.4} (need >= 0.90), {} edges mined", s1.enriched.mined_edges().len())))
}

fn criterion_6() -> Check {
    let data = generate(&calibrated(7, 10_000)).map_err(|e| e.to_string())?;
    let curve = partner_default_curve(&data.truth.supply_graph(), &data.node_rows());
    let (first, last) = (curve.first().ok_or("empty curve")?, curve.last().ok_or("empty curve")?);
    let ratio_ok = first.label == "0-2" && last.label == ">10" && last.rate <= 0.5 * first.rate;

    let null = generate(&GenConfig { num_smes: 10_000, ..GenConfig::null() }).map_err(|e| e.to_string())?;
    let rows = null.node_rows();
    let global = rows.iter().filter(|r| r.1).count() as f64 / rows.len() as f64;
    let null_curve = partner_default_curve(&null.truth.supply_graph(), &rows);
    let spread = null_curve.iter().map(|b| (b.rate - global).abs()).fold(0.0, f64::max);
    Ok((
        ratio_ok && spread <= 0.03,
        format!(
            ">10 bucket {:.3} vs 0-2 bucket {:.3} (ratio {:.2}, need <= 0.50); null max deviation {:.1} points (need <= 3)",
            last.rate,
            first.rate,
            last.rate / first.rate,
            100.0 * spread
        ),
    ))
}

fn criterion_7() -> Check {
    let seeds = 1..=5u64;
    let (mut rf1, mut rf4) = (Vec::new(), Vec::new());
    let mut monotone = true;
    for seed in seeds {
        let data = generate(&calibrated(seed, 10_000)).map_err(|e| e.to_string())?;
        for a in Attribute::ALL {
            let v: Vec<f64> = (1..=4)
                .map(|k| attribute_availability(&data.graph, a.name(), k))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            monotone &= v.windows(2).all(|w| w[0] <= w[1]);
            if a == Attribute::Patent {
                rf1.push(v[0]);
                rf4.push(v[3]);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (m1, m4) = (mean(&rf1), mean(&rf4));
    let pass = monotone && (m1 - 1.5).abs() <= 5.0 && (m4 - 22.7).abs() <= 5.0;
    let per_seed: Vec<String> = rf4.iter().map(|v| format!("{v:.1}")).collect();
    Ok((
        pass,
        format!(
            "patent RF1 {m1:.2}% (target 1.5 +/- 5), RF4 {m4:.2}% (target 22.7 +/- 5) over 5 seeds [RF4 {}]; monotone {monotone}",
            per_seed.join(" ")
        ),
    ))
}

fn criterion_8() -> Check {
    let mut notes = Vec::new();

    let data = generate(&calibrated(7, 5000)).map_err(|e| e.to_string())?;
    let mut split_dev: f64 = 0.0;
    for (labels, splits) in [(data.nodes.labels(), data.nodes.splits()), (data.pairs.labels(), data.pairs.splits())] {
        for class in [false, true] {
            let n = labels.iter().filter(|&&y| y == class).count() as f64;
            for (s, f) in [(Split::Train, 0.70), (Split::Val, 0.15), (Split::Test, 0.15)] {
                let c = labels.iter().zip(splits).filter(|(&y, &t)| y == class && t == s).count() as f64;
                split_dev = split_dev.max((c - f * n).abs());
            }
        }
    }
    let split_ok = split_dev <= 1.0;
    notes.push(format!("split max deviation {split_dev:.2}"));

    let toy = generate(&GenConfig::toy()).map_err(|e| e.to_string())?;
    let scaler = FeatureScaler::fit(toy.graph.node_features());
    let task = node_task_data(&toy.graph, &toy.nodes, &scaler).map_err(|e| e.to_string())?;
    let frozen = TrainConfig { learning_rate: 0.0, patience: 7, ..TrainConfig::default() };
    let model = GcnModel::init(HeadKind::Node, task.x.cols(), &frozen.architecture(), 0).map_err(|e| e.to_string())?;
    let (_, trace) = train_task(model, &task, &frozen).map_err(|e| e.to_string())?;
    let stop_ok = trace.best_epoch == 1 && trace.stopped_epoch() == trace.best_epoch + frozen.patience;
    notes.push(format!(
        "frozen run best epoch {} stopped {} (patience {})",
        trace.best_epoch,
        trace.stopped_epoch(),
        frozen.patience
    ));

    let grid = grid_search(&task, HeadKind::Node, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let table_max = grid.cells.iter().filter_map(|c| c.val_auc).fold(f64::NEG_INFINITY, f64::max);
    let winner = grid
        .cells
        .iter()
        .find(|c| {
            c.learning_rate == grid.best.learning_rate
                && c.dropout == grid.best.dropout
                && c.num_layers == grid.best.num_layers
        })
        .and_then(|c| c.val_auc);
    let grid_ok = grid.cells.len() == 27 && winner == Some(table_max);
    notes.push(format!("grid winner val AUC {:.4} of table max {table_max:.4}", winner.unwrap_or(f64::NAN)));

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifests_ok = identical_manifests(dir.path())?;
    notes.push(format!("repeat-run manifests identical {manifests_ok}"));

    Ok((split_ok && stop_ok && grid_ok && manifests_ok, notes.join("; ")))
}

fn identical_manifests(root: &Path) -> Result<bool, String> {
    let env = [("SOURCE_DATE_EPOCH", "1700000000")];
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let mut manifests = Vec::new();
    for run in ["a", "b"] {
        let data = root.join(run).join("data");
        let out = root.join(run).join("sc");
        for args in [
            vec![
                "generate".into(),
                "--preset".into(),
                "toy".into(),
                "--seed".into(),
                "3".into(),
                "--out".into(),
                s(&data),
            ],
            vec!["train".into(), "--stage".into(), "sc".into(), "--data".into(), s(&data), "--out".into(), s(&out)],
        ] {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = chainrisk(&args, &env);
            if exit_code(&o) != 0 {
                return Err(String::from_utf8_lossy(&o.stderr).into_owned());
            }
        }
        let read = |p: &Path| std::fs::read(p.join("manifest.json")).map_err(|e| e.to_string());
        manifests.push((read(&data)?, read(&out)?));
    }
    Ok(manifests[0] == manifests[1])
}

fn criterion_9() -> Check {
    let mut aucs = Vec::new();
    for seed in 1..=5 {
        let data = generate(&GenConfig { seed, num_smes: 5000, ..GenConfig::null() }).map_err(|e| e.to_string())?;
        let config = TrainConfig { seed, ..TrainConfig::default() };
        let d_dp = prepare_node_set(&data.graph, &data.node_rows(), &config).map_err(|e| e.to_string())?;
        let out = run_stage2_default(&data.graph, &d_dp, &config, Tuning::Fixed).map_err(|e| e.to_string())?;
        aucs.push(out.task.report(Split::Test).auc);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let per_seed: Vec<String> = aucs.iter().map(|a| format!("{a:.3}")).collect();
    Ok((
        (0.45..=0.55).contains(&mean),
        format!("mean null test AUC {mean:.4} (need 0.45..0.55); per seed {}", per_seed.join(" ")),
    ))
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "gradient correctness", budget_secs: 10.0, run: criterion_1 },
    Criterion { id: 2, name: "normalization spectrum", budget_secs: 30.0, run: criterion_2 },
    Criterion { id: 3, name: "metric oracles", budget_secs: 10.0, run: criterion_3 },
    Criterion { id: 4, name: "enrichment lift", budget_secs: 300.0, run: criterion_4 },
    Criterion { id: 5, name: "stage-1 recoverability", budget_secs: 120.0, run: criterion_5 },
    Criterion { id: 6, name: "partner-count calibration", budget_secs: f64::INFINITY, run: criterion_6 },
    Criterion { id: 7, name: "attribute availability calibration", budget_secs: f64::INFINITY, run: criterion_7 },
    Criterion { id: 8, name: "protocol conformance", budget_secs: f64::INFINITY, run: criterion_8 },
    Criterion { id: 9, name: "null sanity", budget_secs: f64::INFINITY, run: criterion_9 },
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in CRITERIA {
        if !filter.is_empty() && !filter.iter().any(|f| *f == c.id.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let result = (c.run)();
        let secs = t0.elapsed().as_secs_f64();
        let in_budget = secs < c.budget_secs;
        let (pass, detail) = match result {
            Ok((ok, detail)) => (ok && in_budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if c.budget_secs.is_finite() {
            format!("{secs:.1}s of {:.0}s", c.budget_secs)
        } else {
            format!("{secs:.1}s")
        };
        println!("{} criterion {}: {} -- {detail} [{budget}]", if pass { "PASS" } else { "FAIL" }, c.id, c.name);
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
