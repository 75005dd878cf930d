use super::Tensor2;
use crate::error::{Error, Result};

/// A trainable tensor with its gradient slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor2,
    pub grad: Tensor2,
}

impl Param {
    pub fn new(value: Tensor2) -> Self {
        let grad = Tensor2::zeros(value.rows(), value.cols());
        Param { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Adam moment buffers, one pair per parameter, in parameter order.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first: Vec<Tensor2>,
    second: Vec<Tensor2>,
}

impl AdamState {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Param>) -> Self {
        let (first, second) = params
            .into_iter()
            .map(|p| {
                let (r, c) = p.value.shape();
                (Tensor2::zeros(r, c), Tensor2::zeros(r, c))
            })
            .unzip();
        AdamState { beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, first, second }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update with L2 decay folded into the gradient
/// (`g + weight_decay * w`) before the moment updates.
pub fn adam_step(params: &mut [&mut Param], state: &mut AdamState, lr: f64, weight_decay: f64) -> Result<()> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate {lr}")));
    }
    if params.len() != state.first.len() {
        return Err(Error::Internal(format!("adam state tracks {} tensors, got {}", state.first.len(), params.len())));
    }
    for (i, p) in params.iter().enumerate() {
        if p.value.shape() != state.first[i].shape() || p.grad.shape() != p.value.shape() {
            return Err(Error::Internal(format!("adam: shape drift on tensor {i}")));
        }
        if !p.grad.all_finite() {
            return Err(Error::TrainingDivergence {
                epoch: state.step as usize + 1,
                detail: format!("non-finite gradient in tensor {i}"),
            });
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        let m = state.first[i].data_mut();
        let v = state.second[i].data_mut();
        let Param { value, grad } = &mut **p;
        for (((w, &g), m), v) in value.data_mut().iter_mut().zip(grad.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
            let g = g + weight_decay * *w;
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64, g: f64) -> Param {
        let mut p = Param::new(Tensor2::filled(1, 1, v));
        p.grad.fill(g);
        p
    }

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let mut p = scalar(0.37, 0.0);
        let mut st = AdamState::new([&p]);
        adam_step(&mut [&mut p], &mut st, 0.01, 0.0).unwrap();
        assert_eq!(p.value.get(0, 0), 0.37);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // Bias-corrected moments equal g and g^2 on step one, so the update
        // is lr * g / (|g| + eps).
        let mut p = scalar(0.0, 1.0);
        let mut st = AdamState::new([&p]);
        adam_step(&mut [&mut p], &mut st, 0.001, 0.0).unwrap();
        let expected = -0.001 * 1.0 / (1.0 + 1e-8);
        assert!((p.value.get(0, 0) - expected).abs() < 1e-15);
        assert_eq!(st.step_count(), 1);
    }

    #[test]
    fn decay_alone_shrinks_positive_weight() {
        let mut p = scalar(1.0, 0.0);
        let mut st = AdamState::new([&p]);
        adam_step(&mut [&mut p], &mut st, 0.001, 1e-4).unwrap();
        assert!(p.value.get(0, 0) < 1.0);
    }

    #[test]
    fn zero_learning_rate_freezes_params() {
        let mut p = scalar(-2.0, 3.0);
        let mut st = AdamState::new([&p]);
        for _ in 0..5 {
            adam_step(&mut [&mut p], &mut st, 0.0, 1e-4).unwrap();
        }
        assert_eq!(p.value.get(0, 0), -2.0);
    }

    #[test]
    fn non_finite_gradient_is_divergence() {
        let mut p = scalar(1.0, f64::NAN);
        let mut st = AdamState::new([&p]);
        let err = adam_step(&mut [&mut p], &mut st, 0.01, 0.0).unwrap_err();
        assert!(matches!(err, Error::TrainingDivergence { .. }));
        assert_eq!(p.value.get(0, 0), 1.0);
    }
}
