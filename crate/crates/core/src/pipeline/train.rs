use serde::{Deserialize, Serialize};

use super::data::SplitFractions;
use crate::error::{Error, Result};
use crate::gcn::{eval_loss, loss_and_backward, Architecture, Batch, GcnModel};
use crate::graph::NormalizedAdjacency;
use crate::metrics::EvalReport;
use crate::nn::{adam_step, sigmoid_scalar, AdamState, Tensor2};
use crate::rng::{seeded, stream};

/// Which node pairs stage one scores when mining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "hops")]
pub enum CandidateScope {
    /// Non-edge SME pairs within this many hops of each other.
    WithinHops(usize),
    /// Every non-edge SME pair.
    AllPairs,
}

/// Hyperparameter grids for [`grid_search`](super::grid_search).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub learning_rates: Vec<f64>,
    pub dropouts: Vec<f64>,
    pub num_layers: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { learning_rates: vec![0.001, 0.005, 0.01], dropouts: vec![0.1, 0.3, 0.5], num_layers: vec![1, 2, 3] }
    }
}

impl Grid {
    pub fn num_cells(&self) -> usize {
        self.learning_rates.len() * self.dropouts.len() * self.num_layers.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dropout: f64,
    pub num_layers: usize,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Minimum stage-one score for a candidate pair to become a mined edge.
    pub tau: f64,
    /// Sampled negatives per positive pair when the pair labels have none.
    pub negative_ratio: f64,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub head_hidden: Vec<usize>,
    pub candidates: CandidateScope,
    pub fractions: SplitFractions,
    pub grid: Grid,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let arch = Architecture::default();
        TrainConfig {
            learning_rate: 0.01,
            dropout: 0.1,
            num_layers: arch.num_layers,
            weight_decay: 1e-4,
            max_epochs: 200,
            patience: 20,
            seed: 0,
            tau: 0.9,
            negative_ratio: 1.0,
            hidden_dim: arch.hidden_dim,
            embed_dim: arch.embed_dim,
            head_hidden: arch.head_hidden,
            candidates: CandidateScope::WithinHops(2),
            fractions: SplitFractions::default(),
            grid: Grid::default(),
        }
    }
}

impl TrainConfig {
    pub fn architecture(&self) -> Architecture {
        Architecture {
            num_layers: self.num_layers,
            hidden_dim: self.hidden_dim,
            embed_dim: self.embed_dim,
            head_hidden: self.head_hidden.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let lr_ok = |lr: f64| lr.is_finite() && lr >= 0.0;
        let dropout_ok = |d: f64| (0.0..1.0).contains(&d);
        let layers_ok = |l: usize| (1..=3).contains(&l);
        if !lr_ok(self.learning_rate) {
            return bad(format!("learning_rate {} must be finite and >= 0", self.learning_rate));
        }
        if !dropout_ok(self.dropout) {
            return bad(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        if !layers_ok(self.num_layers) {
            return bad(format!("num_layers {} must be 1, 2 or 3", self.num_layers));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay {} must be finite and >= 0", self.weight_decay));
        }
        if self.max_epochs == 0 || self.patience >= self.max_epochs {
            return bad(format!(
                "need 0 < patience < max_epochs, got patience {} and max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau {} must lie in [0, 1]", self.tau));
        }
        if !(self.negative_ratio.is_finite() && self.negative_ratio > 0.0) {
            return bad(format!("negative_ratio {} must be > 0", self.negative_ratio));
        }
        if self.hidden_dim == 0 || self.embed_dim == 0 || self.head_hidden.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        let g = &self.grid;
        if g.learning_rates.is_empty() || g.dropouts.is_empty() || g.num_layers.is_empty() {
            return bad("every grid axis needs at least one value".into());
        }
        if !g.learning_rates.iter().all(|&v| lr_ok(v))
            || !g.dropouts.iter().all(|&v| dropout_ok(v))
            || !g.num_layers.iter().all(|&v| layers_ok(v))
        {
            return bad("grid contains an out-of-range value".into());
        }
        Ok(())
    }
}

/// Column standardization fitted on the node features, followed by a
/// constant intercept column. The GCN layers have no bias, so the intercept
/// is what lets a layer respond to neighborhood size.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(x: &Tensor2) -> Self {
        let (n, f) = x.shape();
        let mut mean = vec![0.0; f];
        let mut sd = vec![0.0; f];
        if n > 0 {
            for r in 0..n {
                for (m, v) in mean.iter_mut().zip(x.row(r)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            for r in 0..n {
                for ((s, v), m) in sd.iter_mut().zip(x.row(r)).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            sd.iter_mut().for_each(|s| *s = (*s / n as f64).sqrt());
        }
        FeatureScaler { mean, sd }
    }

    /// Standardized features with the intercept appended; constant columns
    /// map to zero.
    pub fn transform(&self, x: &Tensor2) -> Result<Tensor2> {
        let (n, f) = x.shape();
        if f != self.mean.len() {
            return Err(Error::InvalidInput(format!("scaler fitted on {} features, got {f}", self.mean.len())));
        }
        let mut out = Tensor2::zeros(n, f + 1);
        for r in 0..n {
            let row = out.row_mut(r);
            for (j, v) in x.row(r).iter().enumerate() {
                row[j] = if self.sd[j] > 0.0 { (v - self.mean[j]) / self.sd[j] } else { 0.0 };
            }
            row[f] = 1.0;
        }
        Ok(out)
    }

    pub fn to_tensors(&self) -> Vec<(String, Tensor2)> {
        let f = self.mean.len();
        vec![
            ("feature_mean".into(), Tensor2::from_vec(1, f, self.mean.clone()).expect("1 x f")),
            ("feature_sd".into(), Tensor2::from_vec(1, f, self.sd.clone()).expect("1 x f")),
        ]
    }

    pub fn from_tensors(mean: &Tensor2, sd: &Tensor2) -> Result<Self> {
        if mean.shape() != sd.shape() || mean.rows() != 1 {
            return Err(Error::InvalidInput("feature scaler tensors are malformed".into()));
        }
        Ok(FeatureScaler { mean: mean.data().to_vec(), sd: sd.data().to_vec() })
    }
}

/// Examples of one task in one split.
#[derive(Debug, Clone, PartialEq)]
pub enum Examples {
    Pairs(Vec<(usize, usize)>),
    Nodes(Vec<usize>),
}

impl Examples {
    pub fn batch(&self) -> Batch<'_> {
        match self {
            Examples::Pairs(p) => Batch::Pairs(p),
            Examples::Nodes(n) => Batch::Nodes(n),
        }
    }

    pub fn len(&self) -> usize {
        self.batch().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExamples {
    pub examples: Examples,
    pub labels: Vec<bool>,
}

/// Everything a training run needs: the propagation operator, model-ready
/// features and the three labeled splits.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub adj: NormalizedAdjacency,
    pub x: Tensor2,
    pub train: LabeledExamples,
    pub val: LabeledExamples,
    pub test: LabeledExamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned (1-based).
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

impl TrainTrace {
    pub fn stopped_epoch(&self) -> usize {
        self.epochs.len()
    }
}

/// Validation-loss decrease needed to count as progress.
pub const MIN_IMPROVEMENT: f64 = 1e-6;

/// Full-batch Adam training with early stopping on validation loss.
///
/// Runs until `patience` consecutive epochs fail to improve the best
/// validation loss by more than [`MIN_IMPROVEMENT`], or `max_epochs`, and
/// returns the parameters of the best epoch.
pub fn train_task(mut model: GcnModel, data: &TaskData, config: &TrainConfig) -> Result<(GcnModel, TrainTrace)> {
    if data.train.examples.is_empty() || data.val.examples.is_empty() {
        return Err(Error::InvalidInput("train and validation splits must be non-empty".into()));
    }
    let mut rng = seeded(config.seed, stream::DROPOUT);
    let mut adam = AdamState::new(model.params());
    let mut best = (model.clone(), f64::INFINITY, 0usize);
    let mut epochs = Vec::new();
    let mut since_improvement = 0;
    let train_batch = data.train.examples.batch();
    let val_batch = data.val.examples.batch();

    for epoch in 1..=config.max_epochs {
        let train_loss = loss_and_backward(
            &mut model,
            &data.adj,
            &data.x,
            train_batch,
            &data.train.labels,
            config.dropout,
            &mut rng,
            true,
        )?;
        if !train_loss.is_finite() {
            return Err(Error::TrainingDivergence { epoch, detail: format!("training loss {train_loss}") });
        }
        adam_step(&mut model.params_mut(), &mut adam, config.learning_rate, config.weight_decay).map_err(
            |e| match e {
                Error::TrainingDivergence { detail, .. } => Error::TrainingDivergence { epoch, detail },
                other => other,
            },
        )?;
        let val_loss = eval_loss(&model, &data.adj, &data.x, val_batch, &data.val.labels)?;
        if !val_loss.is_finite() {
            return Err(Error::TrainingDivergence { epoch, detail: format!("validation loss {val_loss}") });
        }
        epochs.push(EpochRecord { epoch, train_loss, val_loss });
        if val_loss < best.1 - MIN_IMPROVEMENT {
            best = (model.clone(), val_loss, epoch);
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= config.patience {
                break;
            }
        }
    }
    let (model, best_val_loss, best_epoch) = best;
    Ok((model, TrainTrace { epochs, best_epoch, best_val_loss }))
}

/// Evaluation-mode probabilities for a set of examples.
pub fn predict(model: &GcnModel, data: &TaskData, examples: &Examples) -> Result<Vec<f64>> {
    let logits = model.predict_logits(&data.adj, &data.x, examples.batch())?;
    Ok(logits.into_iter().map(sigmoid_scalar).collect())
}

/// AUC/KS on the train, val and test splits.
pub fn evaluate(model: &GcnModel, data: &TaskData) -> Result<Vec<EvalReport>> {
    [("train", &data.train), ("val", &data.val), ("test", &data.test)]
        .into_iter()
        .map(|(name, split)| {
            let p = predict(model, data, &split.examples)?;
            EvalReport::compute(name, &p, &split.labels)
        })
        .collect()
}
