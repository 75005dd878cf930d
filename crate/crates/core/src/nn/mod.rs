//! Dense numeric kernel: matrices, activations, dropout, loss, Adam, and
//! finite-difference checking. Everything is 64-bit.

mod adam;
mod gradcheck;
mod ops;
mod tensor;

pub use adam::{adam_step, AdamState, Param};
pub use gradcheck::{grad_check, GradCheck, GRAD_CHECK_FLOOR};
pub use ops::{bce_from_logits, bce_loss, dropout, relu, relu_backward, sigmoid, sigmoid_scalar, BCE_EPS};
pub use tensor::{matmul, matmul_a_bt, matmul_at_b, Tensor2};
