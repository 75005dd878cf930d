//! Builds a k-nearest-neighbour similarity graph from raw firm features,
//! writes it in the dataset text format and reads it back.
//!
//! cargo run --release --example build_graph -- [num_nodes] [k]

use chainrisk::graph::build_graph_from_similarity;
use chainrisk::graph::io::{read_graph, write_graph};
use chainrisk::nn::Tensor2;
use chainrisk::rng::seeded;
use rand::Rng as _;

fn main() -> chainrisk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(200, |s| s.parse().expect("num_nodes"));
    let k: usize = args.get(1).map_or(5, |s| s.parse().expect("k"));

    // Two latent clusters of firms with four noisy financial ratios each.
    let mut rng = seeded(1, 0);
    let x = Tensor2::from_vec(
        n,
        4,
        (0..n)
            .flat_map(|u| {
                let centre = if u % 2 == 0 { 1.0 } else { -1.0 };
                (0..4).map(|_| centre + 0.8 * (rng.random::<f64>() - 0.5)).collect::<Vec<_>>()
            })
            .collect(),
    )?;
    let g = build_graph_from_similarity(&x, k)?;
    let within = g.edges().filter(|&(u, v, _)| u % 2 == v % 2).count();
    println!("{n} nodes, {} undirected edges, {within} within a cluster", g.num_edges());
    let degrees: Vec<usize> = (0..n).map(|u| g.degree(u)).collect();
    println!(
        "degree min {} max {} (every node keeps at least k = {k})",
        degrees.iter().min().unwrap(),
        degrees.iter().max().unwrap()
    );

    let dir = std::env::temp_dir().join("chainrisk-build-graph");
    std::fs::create_dir_all(&dir).expect("temp dir");
    write_graph(&dir, &g)?;
    let back = read_graph(&dir)?;
    println!("round trip through {} exact: {}", dir.display(), back == g);
    Ok(())
}
