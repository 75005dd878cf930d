//! Central finite-difference gradient checking.

/// Outcome of a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Coordinate where the worst error occurred.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Magnitude below which relative error is taken against this floor
/// instead. In f64 a central difference carries a cancellation error near
/// `ε·|f| / h` (about 1e-11 for `h = 1e-5` and an O(1) loss), so smaller
/// gradients cannot be resolved relatively; they must instead agree to
/// `tolerance · GRAD_CHECK_FLOOR` in absolute terms.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Compares `analytic` against central differences of `f` at `params`.
///
/// The relative error per coordinate is
/// `|a - n| / max(|a|, |n|, GRAD_CHECK_FLOOR)`.
pub fn grad_check<F>(mut f: F, params: &[f64], analytic: &[f64], h: f64) -> GradCheck
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len(), "gradient length mismatch");
    let mut x = params.to_vec();
    let mut worst = GradCheck { max_rel_error: 0.0, worst_index: 0, analytic: 0.0, numeric: 0.0 };
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = f(&x);
        x[i] = orig - h;
        let minus = f(&x);
        x[i] = orig;

        let numeric = (plus - minus) / (2.0 * h);
        let a = analytic[i];
        let denom = a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        let rel = (a - numeric).abs() / denom;
        if rel > worst.max_rel_error || i == 0 {
            worst = GradCheck { max_rel_error: rel, worst_index: i, analytic: a, numeric };
        }
    }
    worst
}
