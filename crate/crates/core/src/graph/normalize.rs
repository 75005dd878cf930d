use rayon::prelude::*;

use super::SmeGraph;
use crate::error::{Error, Result};
use crate::nn::Tensor2;

/// Symmetrically normalized adjacency with self-connections,
/// `D^{-1/2} (A + I) D^{-1/2}` where `D[u,u] = 1 + degree(u)`, in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

pub fn normalize_adjacency(g: &SmeGraph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let deg: Vec<f64> = (0..n).map(|u| (1 + g.degree(u)) as f64).collect();
    // 1/sqrt(d_u d_v) in one rounding; exact whenever the product is a square.
    let w = |u: usize, v: usize| 1.0 / (deg[u] * deg[v]).sqrt();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(g.nnz() + n);
    let mut values = Vec::with_capacity(g.nnz() + n);
    row_offsets.push(0);
    for (u, &du) in deg.iter().enumerate() {
        let mut diag_done = false;
        for &v in g.neighbors(u) {
            if !diag_done && v > u {
                col_indices.push(u);
                values.push(1.0 / du);
                diag_done = true;
            }
            col_indices.push(v);
            values.push(w(u, v));
        }
        if !diag_done {
            col_indices.push(u);
            values.push(1.0 / du);
        }
        row_offsets.push(col_indices.len());
    }
    NormalizedAdjacency { row_offsets, col_indices, values }
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `u`, ascending by column.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[u]..self.row_offsets[u + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let r = self.row_offsets[u]..self.row_offsets[u + 1];
        match self.col_indices[r.clone()].binary_search(&v) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Tensor2 {
        let n = self.num_nodes();
        let mut d = Tensor2::zeros(n, n);
        for u in 0..n {
            for (v, a) in self.row(u) {
                d.set(u, v, a);
            }
        }
        d
    }
}

/// Sparse-dense product `adj · h`.
///
/// Rows are computed independently and each row accumulates its terms in
/// ascending column order, so the output is identical for any thread count.
pub fn spmm(adj: &NormalizedAdjacency, h: &Tensor2) -> Result<Tensor2> {
    let n = adj.num_nodes();
    if h.rows() != n {
        return Err(Error::InvalidArgument(format!(
            "spmm: operator is {n}x{n} but dense operand has {} rows",
            h.rows()
        )));
    }
    let f = h.cols();
    let mut out = Tensor2::zeros(n, f);
    if f == 0 {
        return Ok(out);
    }
    let kernel = |(u, orow): (usize, &mut [f64])| {
        for (v, a) in adj.row(u) {
            for (o, &x) in orow.iter_mut().zip(h.row(v)) {
                *o += a * x;
            }
        }
    };
    if n >= 512 {
        out.data_mut().par_chunks_mut(f).enumerate().for_each(kernel);
    } else {
        out.data_mut().chunks_mut(f).enumerate().for_each(kernel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeKind;
    use crate::nn::matmul;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SmeGraph {
        SmeGraph::from_edges(Tensor2::zeros(n, 1), vec![NodeKind::Sme; n], edges, None).unwrap()
    }

    #[test]
    fn isolated_node_is_identity() {
        let a = normalize_adjacency(&graph(1, &[]));
        assert_eq!(a.to_dense().data(), &[1.0]);
    }

    #[test]
    fn single_edge_is_all_halves() {
        let a = normalize_adjacency(&graph(2, &[(0, 1)]));
        assert_eq!(a.to_dense().data(), &[0.5; 4]);
    }

    #[test]
    fn path_of_three() {
        let a = normalize_adjacency(&graph(3, &[(0, 1), (1, 2)]));
        // D = diag(2, 3, 2)
        assert!((a.get(0, 1) - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((a.get(0, 1) - 0.40825).abs() < 1e-5);
        assert!((a.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((a.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn spmm_small_cases() {
        let a = normalize_adjacency(&graph(1, &[]));
        let h = Tensor2::from_vec(1, 3, vec![1.5, -2.0, 7.0]).unwrap();
        assert_eq!(spmm(&a, &h).unwrap(), h);

        let a = normalize_adjacency(&graph(2, &[(0, 1)]));
        let h = Tensor2::from_vec(2, 1, vec![1.0, 3.0]).unwrap();
        assert_eq!(spmm(&a, &h).unwrap().data(), &[2.0, 2.0]);

        assert!(matches!(spmm(&a, &Tensor2::zeros(3, 1)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spmm_matches_dense_product() {
        let edges = [(0, 1), (0, 5), (1, 2), (2, 3), (3, 7), (4, 5), (5, 6), (6, 7), (1, 6)];
        let a = normalize_adjacency(&graph(8, &edges));
        let h = Tensor2::from_vec(8, 3, (0..24).map(|i| (i as f64 * 1.37).cos()).collect()).unwrap();
        let dense = matmul(&a.to_dense(), &h).unwrap();
        assert!(spmm(&a, &h).unwrap().max_abs_diff(&dense) < 1e-12);
    }
}
