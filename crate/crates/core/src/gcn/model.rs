use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{spmm, NormalizedAdjacency};
use crate::nn::{dropout, matmul, matmul_a_bt, matmul_at_b, relu, relu_backward, Param, Tensor2};
use crate::rng::Rng;

fn uniform_init(rows: usize, cols: usize, rng: &mut Rng) -> Tensor2 {
    let bound = 1.0 / (rows.max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-bound..=bound)).collect();
    Tensor2::from_vec(rows, cols, data).expect("shape is consistent")
}

/// GCN layer weights `W(0..L)`; layer `l` maps width `F_l` to `F_{l+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub layers: Vec<Param>,
}

impl GcnParams {
    /// `dims = [F_0, F_1, .., F_L]`, so `L = dims.len() - 1` must be 1..=3.
    pub fn init(dims: &[usize], rng: &mut Rng) -> Result<Self> {
        let weights = dims.windows(2).map(|w| uniform_init(w[0], w[1], rng)).collect();
        GcnParams::from_weights(weights)
    }

    pub fn from_weights(weights: Vec<Tensor2>) -> Result<Self> {
        if !(1..=3).contains(&weights.len()) {
            return Err(Error::InvalidArgument(format!("GCN depth {} outside 1..=3", weights.len())));
        }
        for (l, w) in weights.windows(2).enumerate() {
            if w[0].cols() != w[1].rows() {
                return Err(Error::InvalidArgument(format!(
                    "layer {l} outputs width {} but layer {} expects {}",
                    w[0].cols(),
                    l + 1,
                    w[1].rows()
                )));
            }
        }
        if weights.iter().any(|w| !w.all_finite()) {
            return Err(Error::InvalidArgument("non-finite GCN weight".into()));
        }
        Ok(GcnParams { layers: weights.into_iter().map(Param::new).collect() })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].value.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].value.cols()
    }
}

/// Affine layer `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Param,
    pub bias: Param,
}

impl Dense {
    fn init(input: usize, output: usize, rng: &mut Rng) -> Self {
        Dense { weight: Param::new(uniform_init(input, output, rng)), bias: Param::new(Tensor2::zeros(1, output)) }
    }

    fn apply(&self, x: &Tensor2) -> Result<Tensor2> {
        let mut z = matmul(x, &self.weight.value)?;
        z.add_row_vector(self.bias.value.data());
        Ok(z)
    }
}

/// Multi-layer perceptron ending in one logit: hidden affine layers with
/// ReLU, then a final affine layer of width 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpHead {
    pub hidden: Vec<Dense>,
    pub output: Dense,
}

impl MlpHead {
    pub fn init(input: usize, hidden_widths: &[usize], rng: &mut Rng) -> Self {
        let mut width = input;
        let hidden = hidden_widths
            .iter()
            .map(|&h| {
                let d = Dense::init(width, h, rng);
                width = h;
                d
            })
            .collect();
        MlpHead { hidden, output: Dense::init(width, 1, rng) }
    }

    pub fn from_layers(layers: Vec<(Tensor2, Tensor2)>) -> Result<Self> {
        let mut dense: Vec<Dense> = Vec::with_capacity(layers.len());
        for (i, (w, b)) in layers.into_iter().enumerate() {
            if b.rows() != 1 || b.cols() != w.cols() {
                return Err(Error::InvalidArgument(format!(
                    "head layer {i}: bias shape {:?} does not fit weight {:?}",
                    b.shape(),
                    w.shape()
                )));
            }
            if let Some(prev) = dense.last() {
                if prev.weight.value.cols() != w.rows() {
                    return Err(Error::InvalidArgument(format!(
                        "head layer {i} input width {} does not chain",
                        w.rows()
                    )));
                }
            }
            dense.push(Dense { weight: Param::new(w), bias: Param::new(b) });
        }
        let output = dense.pop().ok_or_else(|| Error::InvalidArgument("head needs an output layer".into()))?;
        if output.weight.value.cols() != 1 {
            return Err(Error::InvalidArgument("head output must be one logit".into()));
        }
        Ok(MlpHead { hidden: dense, output })
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().unwrap_or(&self.output).weight.value.rows()
    }

    fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.hidden.iter().chain(std::iter::once(&self.output))
    }
}

/// Node embeddings `Q`; row `u` is `q_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings(pub Tensor2);

impl Embeddings {
    pub fn q(&self, u: usize) -> &[f64] {
        self.0.row(u)
    }

    pub fn num_nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }
}

/// Intermediates of one encoder forward pass, needed by the backward pass.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    /// Per layer: `Â · dropout(H_l)`.
    propagated: Vec<Tensor2>,
    /// Per layer: dropout multipliers on `H_l`, if any.
    masks: Vec<Option<Tensor2>>,
    /// Per layer: pre-activation `Â · dropout(H_l) · W_l`.
    pre: Vec<Tensor2>,
}

impl EncoderCache {
    pub fn pre_activations(&self) -> &[Tensor2] {
        &self.pre
    }
}

/// `H_{l+1} = relu(Â · H_l · W_l)` for every layer, the last one included.
/// Dropout, when training, is applied to each layer's input.
pub fn gcn_forward(
    adj: &NormalizedAdjacency,
    x: &Tensor2,
    params: &GcnParams,
    dropout_rate: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<(Embeddings, EncoderCache)> {
    if x.rows() != adj.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "feature matrix has {} rows for a {}-node operator",
            x.rows(),
            adj.num_nodes()
        )));
    }
    if x.cols() != params.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "feature width {} does not match first layer input {}",
            x.cols(),
            params.input_dim()
        )));
    }
    let mut cache = EncoderCache {
        propagated: Vec::with_capacity(params.depth()),
        masks: Vec::with_capacity(params.depth()),
        pre: Vec::with_capacity(params.depth()),
    };
    let mut h = x.clone();
    for layer in &params.layers {
        let (hd, mask) = dropout(&h, dropout_rate, rng, training)?;
        let ah = spmm(adj, &hd)?;
        let z = matmul(&ah, &layer.value)?;
        h = relu(&z);
        cache.propagated.push(ah);
        cache.masks.push(mask);
        cache.pre.push(z);
    }
    Ok((Embeddings(h), cache))
}

/// Accumulates encoder weight gradients given `d loss / d Q`.
///
/// `Â` is symmetric, so the adjoint of `H -> Â H` is the same product.
pub fn gcn_backward(
    adj: &NormalizedAdjacency,
    params: &mut GcnParams,
    cache: &EncoderCache,
    d_embeddings: Tensor2,
) -> Result<()> {
    let depth = params.depth();
    if cache.pre.len() != depth || cache.propagated.len() != depth {
        return Err(Error::Internal(format!("encoder cache holds {} layers, model has {depth}", cache.pre.len())));
    }
    let mut g = d_embeddings;
    for l in (0..depth).rev() {
        if g.shape() != cache.pre[l].shape() {
            return Err(Error::Internal(format!("gradient shape mismatch at layer {l}")));
        }
        relu_backward(&mut g, &cache.pre[l]);
        let dw = matmul_at_b(&cache.propagated[l], &g)?;
        params.layers[l].grad.add_assign(&dw);
        if l > 0 {
            let d_prop = matmul_a_bt(&g, &params.layers[l].value)?;
            let mut d_in = spmm(adj, &d_prop)?;
            if let Some(mask) = &cache.masks[l] {
                for (d, m) in d_in.data_mut().iter_mut().zip(mask.data()) {
                    *d *= m;
                }
            }
            g = d_in;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct HeadCache {
    /// Input of each affine layer (hidden layers then output).
    inputs: Vec<Tensor2>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Tensor2>,
    masks: Vec<Option<Tensor2>>,
}

impl HeadCache {
    pub fn pre_activations(&self) -> &[Tensor2] {
        &self.pre
    }
}

/// Head forward over a batch of input rows. Dropout, when training, acts on
/// each hidden activation.
pub fn head_forward(
    head: &MlpHead,
    input: Tensor2,
    dropout_rate: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<(Vec<f64>, HeadCache)> {
    if input.cols() != head.input_dim() {
        return Err(Error::InvalidArgument(format!("head expects width {}, got {}", head.input_dim(), input.cols())));
    }
    let mut cache = HeadCache {
        inputs: Vec::with_capacity(head.hidden.len() + 1),
        pre: Vec::with_capacity(head.hidden.len()),
        masks: Vec::with_capacity(head.hidden.len()),
    };
    let mut a = input;
    for layer in &head.hidden {
        let z = layer.apply(&a)?;
        let (r, mask) = dropout(&relu(&z), dropout_rate, rng, training)?;
        cache.inputs.push(a);
        cache.pre.push(z);
        cache.masks.push(mask);
        a = r;
    }
    let logits = head.output.apply(&a)?.into_vec();
    cache.inputs.push(a);
    Ok((logits, cache))
}

/// Accumulates head gradients given `d loss / d logit` and returns the
/// gradient with respect to the head input.
pub fn head_backward(head: &mut MlpHead, cache: &HeadCache, d_logits: &[f64]) -> Result<Tensor2> {
    if cache.inputs.len() != head.hidden.len() + 1 {
        return Err(Error::Internal("head cache does not match head depth".into()));
    }
    let mut g = Tensor2::from_vec(d_logits.len(), 1, d_logits.to_vec())?;
    let last = cache.inputs.len() - 1;
    if cache.inputs[last].rows() != g.rows() {
        return Err(Error::Internal("logit gradient length does not match batch".into()));
    }
    let out = &mut head.output;
    out.weight.grad.add_assign(&matmul_at_b(&cache.inputs[last], &g)?);
    out.bias.grad.data_mut()[0] += g.column_sums()[0];
    g = matmul_a_bt(&g, &out.weight.value)?;
    for l in (0..head.hidden.len()).rev() {
        if let Some(mask) = &cache.masks[l] {
            for (d, m) in g.data_mut().iter_mut().zip(mask.data()) {
                *d *= m;
            }
        }
        relu_backward(&mut g, &cache.pre[l]);
        let layer = &mut head.hidden[l];
        layer.weight.grad.add_assign(&matmul_at_b(&cache.inputs[l], &g)?);
        for (b, s) in layer.bias.grad.data_mut().iter_mut().zip(g.column_sums()) {
            *b += s;
        }
        g = matmul_a_bt(&g, &layer.weight.value)?;
    }
    Ok(g)
}

fn check_node(q: &Embeddings, u: usize) -> Result<()> {
    if u >= q.num_nodes() {
        return Err(Error::InvalidArgument(format!("node {u} outside 0..{}", q.num_nodes())));
    }
    Ok(())
}

/// Rows `[q_u ; q_v]` for each pair, in the given order.
pub fn pair_inputs(q: &Embeddings, pairs: &[(usize, usize)]) -> Result<Tensor2> {
    let d = q.dim();
    let mut data = Vec::with_capacity(pairs.len() * 2 * d);
    for &(u, v) in pairs {
        check_node(q, u)?;
        check_node(q, v)?;
        data.extend_from_slice(q.q(u));
        data.extend_from_slice(q.q(v));
    }
    Tensor2::from_vec(pairs.len(), 2 * d, data)
}

pub fn node_inputs(q: &Embeddings, nodes: &[usize]) -> Result<Tensor2> {
    for &u in nodes {
        check_node(q, u)?;
    }
    Ok(q.0.gather_rows(nodes))
}

/// Pair-head logits in evaluation mode.
pub fn pair_logits(q: &Embeddings, pairs: &[(usize, usize)], head: &MlpHead) -> Result<Vec<f64>> {
    let mut rng = crate::rng::seeded(0, 0);
    head_forward(head, pair_inputs(q, pairs)?, 0.0, &mut rng, false).map(|(l, _)| l)
}

/// Node-head logits in evaluation mode.
pub fn node_logits(q: &Embeddings, nodes: &[usize], head: &MlpHead) -> Result<Vec<f64>> {
    let mut rng = crate::rng::seeded(0, 0);
    head_forward(head, node_inputs(q, nodes)?, 0.0, &mut rng, false).map(|(l, _)| l)
}

/// Which examples a head scores.
#[derive(Debug, Clone, Copy)]
pub enum Batch<'a> {
    Pairs(&'a [(usize, usize)]),
    Nodes(&'a [usize]),
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        match self {
            Batch::Pairs(p) => p.len(),
            Batch::Nodes(n) => n.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    /// Scores `[q_u ; q_v]`: supply-link mining.
    Pair,
    /// Scores `q_u`: default prediction.
    Node,
}

/// Encoder plus one head.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub kind: HeadKind,
    pub encoder: GcnParams,
    pub head: MlpHead,
}

/// Layer widths for a freshly initialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub head_hidden: Vec<usize>,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture { num_layers: 2, hidden_dim: 64, embed_dim: 32, head_hidden: vec![32] }
    }
}

impl Architecture {
    /// Encoder widths `[F_0, hidden.., embed]`.
    pub fn encoder_dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(self.hidden_dim, self.num_layers.saturating_sub(1)));
        dims.push(self.embed_dim);
        dims
    }
}

/// Everything one forward pass leaves behind for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub embeddings: Embeddings,
    pub logits: Vec<f64>,
    encoder: EncoderCache,
    head: HeadCache,
}

impl ForwardPass {
    pub fn encoder_cache(&self) -> &EncoderCache {
        &self.encoder
    }

    pub fn head_cache(&self) -> &HeadCache {
        &self.head
    }
}

impl GcnModel {
    pub fn init(kind: HeadKind, input_dim: usize, arch: &Architecture, seed: u64) -> Result<Self> {
        let mut enc_rng = crate::rng::seeded(seed, crate::rng::stream::INIT_ENCODER);
        let mut head_rng = crate::rng::seeded(seed, crate::rng::stream::INIT_HEAD);
        let encoder = GcnParams::init(&arch.encoder_dims(input_dim), &mut enc_rng)?;
        let head_in = match kind {
            HeadKind::Pair => 2 * arch.embed_dim,
            HeadKind::Node => arch.embed_dim,
        };
        let head = MlpHead::init(head_in, &arch.head_hidden, &mut head_rng);
        Ok(GcnModel { kind, encoder, head })
    }

    pub fn new(kind: HeadKind, encoder: GcnParams, head: MlpHead) -> Result<Self> {
        let expected = match kind {
            HeadKind::Pair => 2 * encoder.embed_dim(),
            HeadKind::Node => encoder.embed_dim(),
        };
        if head.input_dim() != expected {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} head takes width {}, encoder provides {expected}",
                head.input_dim()
            )));
        }
        Ok(GcnModel { kind, encoder, head })
    }

    fn head_input(&self, q: &Embeddings, batch: Batch<'_>) -> Result<Tensor2> {
        match (self.kind, batch) {
            (HeadKind::Pair, Batch::Pairs(p)) => pair_inputs(q, p),
            (HeadKind::Node, Batch::Nodes(n)) => node_inputs(q, n),
            (kind, _) => Err(Error::InvalidArgument(format!("batch type does not match {kind:?} head"))),
        }
    }

    pub fn forward(
        &self,
        adj: &NormalizedAdjacency,
        x: &Tensor2,
        batch: Batch<'_>,
        dropout_rate: f64,
        rng: &mut Rng,
        training: bool,
    ) -> Result<ForwardPass> {
        let (embeddings, encoder) = gcn_forward(adj, x, &self.encoder, dropout_rate, rng, training)?;
        let input = self.head_input(&embeddings, batch)?;
        let (logits, head) = head_forward(&self.head, input, dropout_rate, rng, training)?;
        Ok(ForwardPass { embeddings, logits, encoder, head })
    }

    /// Accumulates gradients of every parameter given `d loss / d logit`.
    pub fn backward(
        &mut self,
        adj: &NormalizedAdjacency,
        pass: &ForwardPass,
        batch: Batch<'_>,
        d_logits: &[f64],
    ) -> Result<()> {
        if d_logits.len() != batch.len() || pass.logits.len() != batch.len() {
            return Err(Error::Internal("backward called with a batch that does not match the forward pass".into()));
        }
        let d_input = head_backward(&mut self.head, &pass.head, d_logits)?;
        let (n, d) = (pass.embeddings.num_nodes(), pass.embeddings.dim());
        let mut dq = Tensor2::zeros(n, d);
        match batch {
            Batch::Pairs(pairs) => {
                for (i, &(u, v)) in pairs.iter().enumerate() {
                    let row = d_input.row(i);
                    for (a, b) in dq.row_mut(u).iter_mut().zip(&row[..d]) {
                        *a += b;
                    }
                    for (a, b) in dq.row_mut(v).iter_mut().zip(&row[d..]) {
                        *a += b;
                    }
                }
            }
            Batch::Nodes(nodes) => {
                for (i, &u) in nodes.iter().enumerate() {
                    for (a, b) in dq.row_mut(u).iter_mut().zip(d_input.row(i)) {
                        *a += b;
                    }
                }
            }
        }
        gcn_backward(adj, &mut self.encoder, &pass.encoder, dq)
    }

    /// Evaluation-mode logits.
    pub fn predict_logits(&self, adj: &NormalizedAdjacency, x: &Tensor2, batch: Batch<'_>) -> Result<Vec<f64>> {
        let mut rng = crate::rng::seeded(0, 0);
        Ok(self.forward(adj, x, batch, 0.0, &mut rng, false)?.logits)
    }

    pub fn embed(&self, adj: &NormalizedAdjacency, x: &Tensor2) -> Result<Embeddings> {
        let mut rng = crate::rng::seeded(0, 0);
        Ok(gcn_forward(adj, x, &self.encoder, 0.0, &mut rng, false)?.0)
    }

    /// All trainable tensors in a fixed order: encoder layers, then each head
    /// layer's weight and bias.
    pub fn params(&self) -> Vec<&Param> {
        let mut out: Vec<&Param> = self.encoder.layers.iter().collect();
        for d in self.head.layers() {
            out.push(&d.weight);
            out.push(&d.bias);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out: Vec<&mut Param> = self.encoder.layers.iter_mut().collect();
        for d in self.head.hidden.iter_mut().chain(std::iter::once(&mut self.head.output)) {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.value.data().len()).sum()
    }

    /// Concatenated parameter values, in `params()` order.
    pub fn flat_values(&self) -> Vec<f64> {
        self.params().iter().flat_map(|p| p.value.data().iter().copied()).collect()
    }

    pub fn flat_grads(&self) -> Vec<f64> {
        self.params().iter().flat_map(|p| p.grad.data().iter().copied()).collect()
    }

    pub fn set_flat_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} parameters",
                values.len(),
                self.num_params()
            )));
        }
        let mut off = 0;
        for p in self.params_mut() {
            let n = p.value.data().len();
            p.value.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        }
        Ok(())
    }
}
