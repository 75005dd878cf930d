//! Two-stage graph convolutional engine for SME credit risk.
//!
//! Stage one mines latent supply-chain links by scoring node pairs over GCN
//! embeddings; stage two predicts loan default by scoring nodes of the
//! graph enriched with the mined links. Sparse kernels and backpropagation
//! are written out by hand, and a seeded generator produces synthetic SME
//! economies with known ground truth.
//!
//! See `examples/` for one runnable program per capability.

pub mod cli;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
