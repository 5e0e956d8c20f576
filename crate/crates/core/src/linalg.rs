//! Small complex-vector helpers shared by the solvers.

use num_complex::Complex64;

/// Inner product `sum_i conj(a_i) * b_i` (conjugate-linear in the first
/// argument).
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm.
pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub(crate) fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean distance between two vectors.
pub(crate) fn l2_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Sum of moduli.
pub(crate) fn l1_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}
