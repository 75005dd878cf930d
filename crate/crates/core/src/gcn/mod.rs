//! GCN encoder with pair and node scoring heads, forward and explicit
//! backward passes, and model checkpoints.

mod checkpoint;
mod model;

pub use checkpoint::{Checkpoint, CheckpointMeta, MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use model::{
    gcn_backward, gcn_forward, head_backward, head_forward, node_inputs, node_logits, pair_inputs, pair_logits,
    Architecture, Batch, Dense, Embeddings, EncoderCache, ForwardPass, GcnModel, GcnParams, HeadCache, HeadKind,
    MlpHead,
};

use crate::error::Result;
use crate::graph::NormalizedAdjacency;
use crate::nn::{bce_from_logits, Tensor2};
use crate::rng::Rng;

/// One training step's loss: zeroes gradients, runs forward and BCE, then
/// backpropagates into every parameter's gradient slot.
#[allow(clippy::too_many_arguments)]
pub fn loss_and_backward(
    model: &mut GcnModel,
    adj: &NormalizedAdjacency,
    x: &Tensor2,
    batch: Batch<'_>,
    labels: &[bool],
    dropout_rate: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<f64> {
    model.zero_grad();
    let pass = model.forward(adj, x, batch, dropout_rate, rng, training)?;
    let (loss, d_logits) = bce_from_logits(&pass.logits, labels)?;
    model.backward(adj, &pass, batch, &d_logits)?;
    Ok(loss)
}

/// Evaluation-mode BCE loss, no gradients.
pub fn eval_loss(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &Tensor2,
    batch: Batch<'_>,
    labels: &[bool],
) -> Result<f64> {
    let logits = model.predict_logits(adj, x, batch)?;
    Ok(bce_from_logits(&logits, labels)?.0)
}
