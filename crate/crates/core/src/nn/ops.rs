use rand::Rng as _;

use super::Tensor2;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Probability clamp used by [`bce_loss`]; the loss is undefined at 0 and 1.
pub const BCE_EPS: f64 = 1e-12;

pub fn relu(x: &Tensor2) -> Tensor2 {
    x.map(|v| v.max(0.0))
}

/// Multiplies `grad` by the ReLU derivative at `pre`. The subgradient at 0 is 0.
pub fn relu_backward(grad: &mut Tensor2, pre: &Tensor2) {
    debug_assert_eq!(grad.shape(), pre.shape());
    for (g, &z) in grad.data_mut().iter_mut().zip(pre.data()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
}

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor2) -> Tensor2 {
    x.map(sigmoid_scalar)
}

/// Inverted dropout. Returns the output and, when anything was dropped, the
/// per-entry multiplier (0 or `1/(1-rate)`) needed by the backward pass.
pub fn dropout(x: &Tensor2, rate: f64, rng: &mut Rng, training: bool) -> Result<(Tensor2, Option<Tensor2>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut mask = Tensor2::zeros(x.rows(), x.cols());
    for m in mask.data_mut() {
        if rng.random::<f64>() >= rate {
            *m = keep;
        }
    }
    let mut out = x.clone();
    for (o, m) in out.data_mut().iter_mut().zip(mask.data()) {
        *o *= m;
    }
    Ok((out, Some(mask)))
}

/// Mean binary cross-entropy of probabilities `y_hat` against labels `y`.
pub fn bce_loss(y_hat: &[f64], y: &[bool]) -> Result<f64> {
    if y_hat.len() != y.len() {
        return Err(Error::InvalidArgument(format!("bce_loss: {} predictions for {} labels", y_hat.len(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("bce_loss: empty batch".into()));
    }
    let total: f64 = y_hat
        .iter()
        .zip(y)
        .map(|(&p, &label)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            if label {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / y.len() as f64)
}

/// BCE on logits: returns the loss of `sigmoid(logits)` and its gradient
/// with respect to each logit. Where the clamp is active the loss is flat,
/// so the gradient there is exactly zero.
pub fn bce_from_logits(logits: &[f64], y: &[bool]) -> Result<(f64, Vec<f64>)> {
    let probs: Vec<f64> = logits.iter().map(|&z| sigmoid_scalar(z)).collect();
    let loss = bce_loss(&probs, y)?;
    let n = y.len() as f64;
    let grad = probs
        .iter()
        .zip(y)
        .map(
            |(&p, &label)| {
                if !(BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
                    0.0
                } else {
                    (p - if label { 1.0 } else { 0.0 }) / n
                }
            },
        )
        .collect();
    Ok((loss, grad))
}
