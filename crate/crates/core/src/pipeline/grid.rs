use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{predict, train_task, TaskData, TrainConfig, TrainTrace};
use crate::error::{Error, Result};
use crate::gcn::{GcnModel, HeadKind};
use crate::metrics::auc;

/// Outcome of one grid cell. Divergent cells carry no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub learning_rate: f64,
    pub dropout: f64,
    pub num_layers: usize,
    pub val_auc: Option<f64>,
    pub best_val_loss: Option<f64>,
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best: TrainConfig,
    pub cells: Vec<GridCell>,
    pub model: GcnModel,
    pub trace: TrainTrace,
}

/// Winner ordering: higher validation AUC, then lower learning rate, fewer
/// layers, lower dropout. `Less` means `a` wins.
fn rank(a: &GridCell, b: &GridCell) -> Ordering {
    let (x, y) = (a.val_auc.unwrap_or(f64::NEG_INFINITY), b.val_auc.unwrap_or(f64::NEG_INFINITY));
    y.total_cmp(&x)
        .then(a.learning_rate.total_cmp(&b.learning_rate))
        .then(a.num_layers.cmp(&b.num_layers))
        .then(a.dropout.total_cmp(&b.dropout))
}

/// Index of the winning cell, or `None` when every cell diverged.
pub fn select_cell(cells: &[GridCell]) -> Option<usize> {
    (0..cells.len()).filter(|&i| cells[i].val_auc.is_some()).min_by(|&i, &j| rank(&cells[i], &cells[j]))
}

/// Trains one model per (learning rate, dropout, layers) cell, all from the
/// same seed, and keeps the one with the best validation AUC.
pub fn grid_search(data: &TaskData, kind: HeadKind, base: &TrainConfig) -> Result<GridOutcome> {
    base.validate()?;
    let g = &base.grid;
    let mut configs = Vec::with_capacity(g.num_cells());
    for &learning_rate in &g.learning_rates {
        for &dropout in &g.dropouts {
            for &num_layers in &g.num_layers {
                configs.push(TrainConfig { learning_rate, dropout, num_layers, ..base.clone() });
            }
        }
    }
    let input_dim = data.x.cols();
    let runs: Vec<Result<Option<(GcnModel, TrainTrace, f64)>>> = configs
        .par_iter()
        .map(|cfg| {
            let model = GcnModel::init(kind, input_dim, &cfg.architecture(), cfg.seed)?;
            match train_task(model, data, cfg) {
                Ok((model, trace)) => {
                    let p = predict(&model, data, &data.val.examples)?;
                    let a = auc(&p, &data.val.labels)?;
                    Ok(Some((model, trace, a)))
                }
                Err(Error::TrainingDivergence { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut cells = Vec::with_capacity(configs.len());
    let mut trained = Vec::with_capacity(configs.len());
    for (cfg, run) in configs.iter().zip(runs) {
        let run = run?;
        cells.push(GridCell {
            learning_rate: cfg.learning_rate,
            dropout: cfg.dropout,
            num_layers: cfg.num_layers,
            val_auc: run.as_ref().map(|r| r.2),
            best_val_loss: run.as_ref().map(|r| r.1.best_val_loss),
            best_epoch: run.as_ref().map(|r| r.1.best_epoch),
        });
        trained.push(run);
    }
    let win = select_cell(&cells).ok_or(Error::NoViableConfig)?;
    let (model, trace, _) = trained.swap_remove(win).expect("winner trained");
    Ok(GridOutcome { best: configs.swap_remove(win), cells, model, trace })
}

/// Per-cell table: header then one row per cell; divergent cells show `NA`.
pub fn grid_table_tsv(cells: &[GridCell]) -> String {
    let mut s = String::from("learning_rate\tdropout\tnum_layers\tval_auc\tbest_val_loss\tbest_epoch\n");
    let na = |v: Option<String>| v.unwrap_or_else(|| "NA".into());
    for c in cells {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.learning_rate,
            c.dropout,
            c.num_layers,
            na(c.val_auc.map(|v| v.to_string())),
            na(c.best_val_loss.map(|v| v.to_string())),
            na(c.best_epoch.map(|v| v.to_string())),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(lr: f64, d: f64, l: usize, a: Option<f64>) -> GridCell {
        GridCell {
            learning_rate: lr,
            dropout: d,
            num_layers: l,
            val_auc: a,
            best_val_loss: a.map(|_| 0.5),
            best_epoch: a.map(|_| 3),
        }
    }

    #[test]
    fn tie_break_order() {
        let cells = vec![
            cell(0.01, 0.1, 1, Some(0.9)),
            cell(0.001, 0.5, 3, Some(0.9)),
            cell(0.001, 0.1, 3, Some(0.9)),
            cell(0.001, 0.3, 2, Some(0.9)),
            cell(0.005, 0.1, 1, Some(0.8)),
        ];
        assert_eq!(select_cell(&cells), Some(3));
        let cells = vec![cell(0.01, 0.1, 1, Some(0.91)), cell(0.001, 0.1, 1, Some(0.9))];
        assert_eq!(select_cell(&cells), Some(0));
    }

    #[test]
    fn divergent_cells_are_skipped() {
        let cells = vec![cell(0.01, 0.1, 1, None), cell(0.01, 0.1, 2, Some(0.5))];
        assert_eq!(select_cell(&cells), Some(1));
        assert_eq!(select_cell(&[cell(0.01, 0.1, 1, None)]), None);
    }

    #[test]
    fn table_has_one_row_per_cell() {
        let t = grid_table_tsv(&[cell(0.01, 0.1, 1, None), cell(0.01, 0.1, 2, Some(0.5))]);
        assert_eq!(t.lines().count(), 3);
        assert!(t.lines().nth(1).unwrap().ends_with("NA\tNA\tNA"));
    }
}
