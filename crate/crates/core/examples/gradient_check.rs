//! Finite-difference check of the hand-written backward pass for both
//! scoring heads.
//!
//! cargo run --release --example gradient_check -- [num_nodes]

use chainrisk::gcn::{eval_loss, loss_and_backward, Architecture, Batch, GcnModel, HeadKind};
use chainrisk::graph::{normalize_adjacency, NodeKind, SmeGraph};
use chainrisk::nn::{grad_check, Tensor2};
use chainrisk::rng::seeded;
use rand::Rng as _;

fn main() -> chainrisk::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(20, |s| s.parse().expect("num_nodes"));
    let mut rng = seeded(3, 0);
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(0.2)).collect();
    let x = Tensor2::from_vec(n, 6, (0..n * 6).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let g = SmeGraph::from_edges(x.clone(), vec![NodeKind::Sme; n], &edges, None)?;
    let adj = normalize_adjacency(&g);

    let pairs: Vec<(usize, usize)> = (0..n - 1).map(|u| (u, u + 1)).collect();
    let pair_labels: Vec<bool> = (0..pairs.len()).map(|i| i % 3 == 0).collect();
    let nodes: Vec<usize> = (0..n).collect();
    let node_labels: Vec<bool> = (0..n).map(|u| u % 2 == 0).collect();

    for (kind, batch, labels) in
        [(HeadKind::Pair, Batch::Pairs(&pairs), &pair_labels), (HeadKind::Node, Batch::Nodes(&nodes), &node_labels)]
    {
        let base = GcnModel::init(kind, x.cols(), &Architecture::default(), 11)?;
        let mut model = base.clone();
        loss_and_backward(&mut model, &adj, &x, batch, labels, 0.0, &mut seeded(0, 0), false)?;
        let report = grad_check(
            |p| {
                let mut probe = base.clone();
                probe.set_flat_values(p).expect("same length");
                eval_loss(&probe, &adj, &x, batch, labels).expect("valid batch")
            },
            &model.flat_values(),
            &model.flat_grads(),
            1e-5,
        );
        println!(
            "{kind:?} head: {} parameters, max relative error {:.2e} (analytic {:.4e}, numeric {:.4e})",
            model.num_params(),
            report.max_rel_error,
            report.analytic,
            report.numeric
        );
    }
    Ok(())
}
