//! Dense complex matrix aliases and small helpers shared by all modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;

/// Complex unit helpers.
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Identity matrix of size n.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kronecker product, first factor on the left leg (row-major block layout).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude of the difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Residual of a - b normalized by max(1, scale of a, scale of b).
pub fn rel_resid(a: &CMat, b: &CMat) -> f64 {
    max_abs_diff(a, b) / 1.0_f64.max(max_abs(a)).max(max_abs(b))
}

/// Operator (spectral) norm via singular values.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc, &s| acc.max(s))
}

/// Trace of the product a * diag(w), with w real weights.
pub fn trace_weighted(a: &CMat, w: &[f64]) -> Complex64 {
    debug_assert_eq!(a.nrows(), w.len());
    let mut t = Complex64::new(0.0, 0.0);
    for (i, &wi) in w.iter().enumerate() {
        t += a[(i, i)] * wi;
    }
    t
}

/// Weighted partial trace over the left Kronecker leg:
/// out[b, b'] = sum_a w[a] * m[(a,b), (a,b')], where m acts on C^da (x) C^db.
pub fn partial_trace_left(m: &CMat, w: &[f64], db: usize) -> CMat {
    let da = w.len();
    debug_assert_eq!(m.nrows(), da * db);
    let mut out = CMat::zeros(db, db);
    for (a, &wa) in w.iter().enumerate() {
        for b in 0..db {
            for bp in 0..db {
                out[(b, bp)] += m[(a * db + b, a * db + bp)] * wa;
            }
        }
    }
    out
}
