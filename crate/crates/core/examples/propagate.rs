//! Symmetric normalization with self-loops and one propagation step,
//! checked against the dense product.
//!
//! cargo run --release --example propagate

use chainrisk::graph::{normalize_adjacency, spmm, NodeKind, SmeGraph};
use chainrisk::nn::{matmul, Tensor2};

fn main() -> chainrisk::Result<()> {
    // A path 0-1-2 plus an isolated node 3.
    let x = Tensor2::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, -1.0]])?;
    let g = SmeGraph::from_edges(x.clone(), vec![NodeKind::Sme; 4], &[(0, 1), (1, 2)], None)?;
    let adj = normalize_adjacency(&g);
    let dense = adj.to_dense();
    println!("normalized adjacency:");
    for r in 0..dense.rows() {
        let row: Vec<String> = dense.row(r).iter().map(|v| format!("{v:.4}")).collect();
        println!("  [{}]", row.join(", "));
    }
    let h = spmm(&adj, &x)?;
    let check = matmul(&dense, &x)?;
    println!("one propagation step:");
    for r in 0..h.rows() {
        println!("  node {r}: {:?}", h.row(r));
    }
    println!("max difference from dense product: {:.1e}", h.max_abs_diff(&check));
    Ok(())
}
