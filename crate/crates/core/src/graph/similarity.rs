use rayon::prelude::*;

use super::{NodeKind, SmeGraph};
use crate::error::{Error, Result};
use crate::nn::Tensor2;

/// Per-column standardization to zero mean and unit (population) variance.
/// Constant columns become all zeros.
pub fn standardize_columns(x: &Tensor2) -> Tensor2 {
    let (n, f) = x.shape();
    let mut out = x.clone();
    if n == 0 {
        return out;
    }
    for c in 0..f {
        let mean = (0..n).map(|r| x.get(r, c)).sum::<f64>() / n as f64;
        let var = (0..n).map(|r| (x.get(r, c) - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for r in 0..n {
            let v = if sd > 1e-12 { (x.get(r, c) - mean) / sd } else { 0.0 };
            out.set(r, c, v);
        }
    }
    out
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Connects every node to its `k` most cosine-similar other nodes over
/// standardized features, then symmetrizes by union.
///
/// Equal similarities are broken by ascending node index. The returned graph
/// keeps the raw `x` as node features and stores the cosine similarity of
/// each edge as its single edge feature.
pub fn build_graph_from_similarity(x: &Tensor2, k: usize) -> Result<SmeGraph> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("similarity graph needs at least 2 nodes, got {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("neighbor count k={k} must be in 1..{n}")));
    }
    if !x.all_finite() {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let z = standardize_columns(x);

    let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut sims: Vec<(usize, f64)> =
                (0..n).filter(|&v| v != u).map(|v| (v, cosine(z.row(u), z.row(v)))).collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            sims.truncate(k);
            sims
        })
        .collect();

    let mut edges: Vec<(usize, usize, f64)> = neighbors
        .iter()
        .enumerate()
        .flat_map(|(u, nb)| nb.iter().map(move |&(v, s)| (u.min(v), u.max(v), s)))
        .collect();
    edges.sort_by_key(|e| (e.0, e.1));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let ef = Tensor2::from_vec(edges.len(), 1, edges.iter().map(|e| e.2).collect())?;
    SmeGraph::from_edges(x.clone(), vec![NodeKind::Sme; n], &pairs, Some(&ef))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_link() {
        let x = Tensor2::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let g = build_graph_from_similarity(&x, 1).unwrap();
        assert_eq!(g.edges().map(|e| (e.0, e.1)).collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn argument_errors() {
        let x = Tensor2::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(build_graph_from_similarity(&x, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_graph_from_similarity(&x, 0), Err(Error::InvalidArgument(_))));
        let bad = Tensor2::from_rows(&[vec![1.0], vec![f64::NAN]]).unwrap();
        assert!(matches!(build_graph_from_similarity(&bad, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn standardize_handles_constant_columns() {
        let x = Tensor2::from_rows(&[vec![5.0, 1.0], vec![5.0, 3.0]]).unwrap();
        let z = standardize_columns(&x);
        assert_eq!(z.data(), &[0.0, -1.0, 0.0, 1.0]);
    }
}
