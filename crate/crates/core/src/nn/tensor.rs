use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count above which dense products split work across threads. Each
/// output row is produced by one thread with a fixed summation order, so
/// results do not depend on the thread count.
const PAR_ROWS: usize = 256;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor2 { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "tensor data length {} does not match shape {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Tensor2 { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::InvalidArgument(format!("row {i} has {} columns, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Tensor2 { rows: rows.len(), cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor2::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[r * c..(r + 1) * c]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor2 {
        Tensor2 { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn scale_inplace(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += other`, shapes must agree.
    pub fn add_assign(&mut self, other: &Tensor2) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn transpose(&self) -> Tensor2 {
        let mut out = Tensor2::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn gather_rows(&self, idx: &[usize]) -> Tensor2 {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Tensor2 { rows: idx.len(), cols: self.cols, data }
    }

    /// Adds `bias` (length `cols`) to every row.
    pub fn add_row_vector(&mut self, bias: &[f64]) {
        debug_assert_eq!(bias.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            for (x, b) in row.iter_mut().zip(bias) {
                *x += b;
            }
        }
    }

    /// Column sums, accumulated row by row in index order.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols.max(1)) {
            for (o, x) in out.iter_mut().zip(row) {
                *o += x;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Tensor2) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn shape_err(op: &str, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::InvalidArgument(format!("{op}: incompatible shapes {}x{} and {}x{}", a.0, a.1, b.0, b.1))
}

/// `a · b`.
pub fn matmul(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    if a.cols != b.rows {
        return Err(shape_err("matmul", a.shape(), b.shape()));
    }
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = Tensor2::zeros(n, m);
    if m == 0 {
        return Ok(out);
    }
    let kernel = |(i, orow): (usize, &mut [f64])| {
        let arow = &a.data[i * k..(i + 1) * k];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b.data[p * m..(p + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    };
    if n >= PAR_ROWS {
        out.data.par_chunks_mut(m).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(m).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// `aᵀ · b` without materializing the transpose.
///
/// Each output row `i` sums over the shared row index in ascending order.
pub fn matmul_at_b(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    if a.rows != b.rows {
        return Err(shape_err("matmul_at_b", a.shape(), b.shape()));
    }
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = Tensor2::zeros(k, m);
    if m == 0 {
        return Ok(out);
    }
    let kernel = |(i, orow): (usize, &mut [f64])| {
        for r in 0..n {
            let av = a.data[r * k + i];
            if av == 0.0 {
                continue;
            }
            let brow = &b.data[r * m..(r + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    };
    if k >= 16 && n >= PAR_ROWS {
        out.data.par_chunks_mut(m).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(m).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// `a · bᵀ`.
pub fn matmul_a_bt(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    if a.cols != b.cols {
        return Err(shape_err("matmul_a_bt", a.shape(), b.shape()));
    }
    let (n, k, m) = (a.rows, a.cols, b.rows);
    let mut out = Tensor2::zeros(n, m);
    if m == 0 {
        return Ok(out);
    }
    let kernel = |(i, orow): (usize, &mut [f64])| {
        let arow = &a.data[i * k..(i + 1) * k];
        for (j, o) in orow.iter_mut().enumerate() {
            let brow = &b.data[j * k..(j + 1) * k];
            *o = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    };
    if n >= PAR_ROWS {
        out.data.par_chunks_mut(m).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(m).enumerate().for_each(kernel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Tensor2, b: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for p in 0..a.cols() {
                    s += a.get(i, p) * b.get(p, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn ramp(rows: usize, cols: usize, seed: f64) -> Tensor2 {
        let data = (0..rows * cols).map(|i| ((i as f64 + seed) * 0.7311).sin()).collect();
        Tensor2::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn products_match_naive() {
        let a = ramp(300, 7, 0.1);
        let b = ramp(7, 5, 2.0);
        assert!(matmul(&a, &b).unwrap().max_abs_diff(&naive(&a, &b)) < 1e-12);

        let c = ramp(300, 5, 3.0);
        let at_c = matmul_at_b(&a, &c).unwrap();
        assert!(at_c.max_abs_diff(&naive(&a.transpose(), &c)) < 1e-12);

        let d = ramp(4, 7, 1.5);
        let a_dt = matmul_a_bt(&a, &d).unwrap();
        assert!(a_dt.max_abs_diff(&naive(&a, &d.transpose())) < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = Tensor2::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(Error::InvalidArgument(_))));
        assert!(Tensor2::from_vec(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn gather_and_column_sums() {
        let t = Tensor2::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let g = t.gather_rows(&[2, 0, 2]);
        assert_eq!(g.data(), &[5.0, 6.0, 1.0, 2.0, 5.0, 6.0]);
        assert_eq!(t.column_sums(), vec![9.0, 12.0]);
    }
}
