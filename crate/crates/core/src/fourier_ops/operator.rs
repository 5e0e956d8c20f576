//! The sampled Fourier measurement operator and its forward/adjoint actions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fourier_ops::{FrequencySet, SamplingSet};

/// Largest N*D for which the operator matrix is stored densely by default.
/// 2^22 complex entries is 64 MiB.
pub const DEFAULT_MATERIALIZE_THRESHOLD: usize = 1 << 22;

/// The N x D matrix with entries `exp(i k . x_j)` for sampling point `x_j`
/// (row) and frequency `k` (column), applied either through a stored dense
/// matrix, a length-q FFT (grid sampling, d = 1, contiguous frequency band),
/// or direct summation.
///
/// Every column has Euclidean norm sqrt(N). The operator is immutable and
/// safe to share across threads.
#[derive(Clone)]
pub struct MeasurementOperator {
    frequency_set: FrequencySet,
    sampling_set: SamplingSet,
    /// Row-major N x D entries, when materialized.
    dense: Option<Vec<Complex64>>,
    fft: Option<GridFft>,
}

/// FFT fast path: on the grid {2*pi*j/q}, the (j,k) entry equals the DFT
/// twiddle `exp(2*pi*i*(k mod q)*g_j/q)`, so a forward application is a
/// scatter of coefficients into a length-q buffer, one unnormalized inverse
/// DFT, and a gather at the sample rows (and the adjoint is the mirror image
/// with the conjugate transform).
#[derive(Clone)]
struct GridFft {
    q: usize,
    /// `k mod q` per column.
    col_slots: Vec<usize>,
    /// Grid index per sample row.
    row_slots: Vec<usize>,
    /// Unnormalized DFT with the `exp(+2*pi*i/q)` kernel.
    plan_plus: Arc<dyn Fft<f64>>,
    /// Unnormalized DFT with the `exp(-2*pi*i/q)` kernel.
    plan_minus: Arc<dyn Fft<f64>>,
}

impl MeasurementOperator {
    /// Builds the operator, storing the dense matrix when
    /// `N*D <= DEFAULT_MATERIALIZE_THRESHOLD`.
    pub fn new(frequency_set: FrequencySet, sampling_set: SamplingSet) -> Result<Self> {
        Self::with_threshold(frequency_set, sampling_set, DEFAULT_MATERIALIZE_THRESHOLD)
    }

    /// Builds the operator with an explicit materialization threshold
    /// (`0` forces matrix-free evaluation).
    pub fn with_threshold(
        frequency_set: FrequencySet,
        sampling_set: SamplingSet,
        materialize_threshold: usize,
    ) -> Result<Self> {
        if frequency_set.d() != sampling_set.dim() {
            return Err(Error::ShapeError {
                expected: frequency_set.d(),
                got: sampling_set.dim(),
            });
        }
        if let Some(q) = sampling_set.model().grid_size() {
            frequency_set.validate_grid_compatible(q)?;
        }
        let fft = plan_grid_fft(&frequency_set, &sampling_set);
        let mut op = Self {
            frequency_set,
            sampling_set,
            dense: None,
            fft,
        };
        if op.n_samples().saturating_mul(op.n_freqs()) <= materialize_threshold {
            op.dense = Some(op.materialize());
        }
        Ok(op)
    }

    /// Number of rows N (samples).
    pub fn n_samples(&self) -> usize {
        self.sampling_set.len()
    }

    /// Number of columns D (frequencies).
    pub fn n_freqs(&self) -> usize {
        self.frequency_set.len()
    }

    /// The frequency set indexing the columns.
    pub fn frequency_set(&self) -> &FrequencySet {
        &self.frequency_set
    }

    /// The sampling set indexing the rows.
    pub fn sampling_set(&self) -> &SamplingSet {
        &self.sampling_set
    }

    /// True when the dense matrix is stored.
    pub fn is_materialized(&self) -> bool {
        self.dense.is_some()
    }

    /// True when the grid FFT path is active.
    pub fn has_fft_path(&self) -> bool {
        self.fft.is_some()
    }

    /// The stored row-major N x D matrix, when materialized.
    pub fn dense_matrix(&self) -> Option<&[Complex64]> {
        self.dense.as_deref()
    }

    /// The matrix entry `exp(i k . x_j)` at row `j`, column `k`.
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        let x = self.sampling_set.point(j);
        let f = self.frequency_set.freq(k);
        let phase: f64 = f.iter().zip(x).map(|(&kt, &xt)| kt as f64 * xt).sum();
        Complex64::from_polar(1.0, phase)
    }

    /// The column for frequency index `k` (norm sqrt(N)).
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        if let Some(dense) = &self.dense {
            let d_cap = self.n_freqs();
            return (0..self.n_samples())
                .map(|j| dense[j * d_cap + k])
                .collect();
        }
        (0..self.n_samples()).map(|j| self.entry(j, k)).collect()
    }

    /// Applies the operator: `y_j = sum_k c_k exp(i k . x_j)`.
    pub fn forward(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if c.len() != self.n_freqs() {
            return Err(Error::ShapeError {
                expected: self.n_freqs(),
                got: c.len(),
            });
        }
        if let Some(plan) = &self.fft {
            Ok(forward_fft(plan, c))
        } else if let Some(dense) = &self.dense {
            Ok(forward_dense(dense, self.n_samples(), c))
        } else {
            Ok(self.forward_direct(c))
        }
    }

    /// Applies the conjugate transpose: `r_k = sum_j conj(exp(i k . x_j)) v_j`.
    pub fn adjoint(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n_samples() {
            return Err(Error::ShapeError {
                expected: self.n_samples(),
                got: v.len(),
            });
        }
        if let Some(plan) = &self.fft {
            Ok(adjoint_fft(plan, self.n_freqs(), v))
        } else if let Some(dense) = &self.dense {
            Ok(adjoint_dense(dense, self.n_freqs(), v))
        } else {
            Ok(self.adjoint_direct(v))
        }
    }

    fn materialize(&self) -> Vec<Complex64> {
        let (n, d_cap) = (self.n_samples(), self.n_freqs());
        let mut out = Vec::with_capacity(n * d_cap);
        for j in 0..n {
            for k in 0..d_cap {
                out.push(self.entry(j, k));
            }
        }
        out
    }

    fn forward_direct(&self, c: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_samples())
            .map(|j| {
                c.iter()
                    .enumerate()
                    .map(|(k, &ck)| ck * self.entry(j, k))
                    .sum()
            })
            .collect()
    }

    fn adjoint_direct(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_freqs())
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(j, &vj)| self.entry(j, k).conj() * vj)
                    .sum()
            })
            .collect()
    }
}

impl fmt::Debug for MeasurementOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasurementOperator")
            .field("n_samples", &self.n_samples())
            .field("n_freqs", &self.n_freqs())
            .field("model", &self.sampling_set.model())
            .field("materialized", &self.is_materialized())
            .field("fft_path", &self.has_fft_path())
            .finish()
    }
}

fn plan_grid_fft(fs: &FrequencySet, ss: &SamplingSet) -> Option<GridFft> {
    let q = ss.model().grid_size()? as usize;
    fs.contiguous_1d()?;
    let grid = ss.grid_indices()?;
    let col_slots = fs
        .freqs()
        .iter()
        .map(|f| f[0].rem_euclid(q as i64) as usize)
        .collect();
    let row_slots = grid.iter().map(|v| v[0] as usize).collect();
    let mut planner = FftPlanner::new();
    Some(GridFft {
        q,
        col_slots,
        row_slots,
        plan_plus: planner.plan_fft_inverse(q),
        plan_minus: planner.plan_fft_forward(q),
    })
}

fn forward_fft(plan: &GridFft, c: &[Complex64]) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); plan.q];
    // Columns occupy distinct slots (injectivity mod q is validated at
    // construction), so this scatter is an assignment.
    for (&slot, &ck) in plan.col_slots.iter().zip(c) {
        buf[slot] += ck;
    }
    plan.plan_plus.process(&mut buf);
    plan.row_slots.iter().map(|&g| buf[g]).collect()
}

fn adjoint_fft(plan: &GridFft, d_cap: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); plan.q];
    // Repeated sample rows (with-replacement model) accumulate.
    for (&g, &vj) in plan.row_slots.iter().zip(v) {
        buf[g] += vj;
    }
    plan.plan_minus.process(&mut buf);
    let mut out = Vec::with_capacity(d_cap);
    out.extend(plan.col_slots.iter().map(|&slot| buf[slot]));
    out
}

fn forward_dense(dense: &[Complex64], n: usize, c: &[Complex64]) -> Vec<Complex64> {
    let d_cap = c.len();
    (0..n)
        .map(|j| {
            dense[j * d_cap..(j + 1) * d_cap]
                .iter()
                .zip(c)
                .map(|(&f, &ck)| f * ck)
                .sum()
        })
        .collect()
}

fn adjoint_dense(dense: &[Complex64], d_cap: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d_cap];
    for (j, &vj) in v.iter().enumerate() {
        let row = &dense[j * d_cap..(j + 1) * d_cap];
        for (acc, &f) in out.iter_mut().zip(row) {
            *acc += f.conj() * vj;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_ops::{FrequencySpec, SamplingModel};

    fn complex_close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn rand_complex_vec(len: usize, seed: u64) -> Vec<Complex64> {
        use rand::Rng;
        let mut rng = crate::rng::sub_rng(seed, "test-vec", 0);
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn band_op(width: u32, model: SamplingModel, n: usize, seed: u64) -> MeasurementOperator {
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width }).unwrap();
        let ss = SamplingSet::draw(&fs, model, n, seed).unwrap();
        MeasurementOperator::new(fs, ss).unwrap()
    }

    #[test]
    fn unit_vector_extracts_column() {
        for model in [
            SamplingModel::ContinuousUniform,
            SamplingModel::GridSubset { q: 32 },
        ] {
            let op = band_op(32, model, 10, 1);
            let k = 17;
            let mut e = vec![Complex64::new(0.0, 0.0); op.n_freqs()];
            e[k] = Complex64::new(1.0, 0.0);
            let y = op.forward(&e).unwrap();
            let col = op.column(k);
            for (a, b) in y.iter().zip(&col) {
                assert!(complex_close(*a, *b, 1e-12));
                assert!((a.norm() - 1.0).abs() < 1e-12);
            }
            // Adjoint of a column recovers the squared column norm N at k.
            let g = op.adjoint(&y).unwrap();
            assert!((g[k].re - op.n_samples() as f64).abs() < 1e-9 * op.n_samples() as f64);
            assert!(g[k].im.abs() < 1e-9 * op.n_samples() as f64);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let op = band_op(16, SamplingModel::ContinuousUniform, 7, 2);
        let y = op.forward(&[Complex64::new(0.0, 0.0); 16]).unwrap();
        assert!(y.iter().all(|z| z.norm() == 0.0));
        let c = op.adjoint(&[Complex64::new(0.0, 0.0); 7]).unwrap();
        assert!(c.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn forward_matches_dense_oracle() {
        // Independent triple-loop evaluation of y_j = sum_k c_k exp(i k x_j).
        let op = band_op(8, SamplingModel::ContinuousUniform, 5, 3);
        let c = rand_complex_vec(8, 10);
        let y = op.forward(&c).unwrap();
        for (j, &yj) in y.iter().enumerate() {
            let x = op.sampling_set().point(j)[0];
            let mut expect = Complex64::new(0.0, 0.0);
            for (k, &ck) in c.iter().enumerate() {
                let freq = op.frequency_set().freq(k)[0] as f64;
                expect += ck * Complex64::new(0.0, freq * x).exp();
            }
            assert!(complex_close(yj, expect, 1e-10), "row {j}");
        }
    }

    #[test]
    fn fft_dense_and_direct_paths_agree() {
        for model in [
            SamplingModel::GridSubset { q: 256 },
            SamplingModel::GridWithReplacement { q: 256 },
        ] {
            let op = band_op(256, model, 40, 4);
            assert!(op.has_fft_path());
            assert!(op.is_materialized());
            let c = rand_complex_vec(op.n_freqs(), 20);
            let v = rand_complex_vec(op.n_samples(), 21);

            let y_fft = forward_fft(op.fft.as_ref().unwrap(), &c);
            let y_dense = forward_dense(op.dense.as_ref().unwrap(), op.n_samples(), &c);
            let y_direct = op.forward_direct(&c);
            let scale = y_direct.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for j in 0..op.n_samples() {
                assert!(complex_close(y_fft[j], y_direct[j], 1e-10 * scale));
                assert!(complex_close(y_dense[j], y_direct[j], 1e-10 * scale));
            }

            let a_fft = adjoint_fft(op.fft.as_ref().unwrap(), op.n_freqs(), &v);
            let a_dense = adjoint_dense(op.dense.as_ref().unwrap(), op.n_freqs(), &v);
            let a_direct = op.adjoint_direct(&v);
            let scale = a_direct.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for k in 0..op.n_freqs() {
                assert!(complex_close(a_fft[k], a_direct[k], 1e-10 * scale));
                assert!(complex_close(a_dense[k], a_direct[k], 1e-10 * scale));
            }
        }
    }

    #[test]
    fn fft_path_respects_negative_frequencies() {
        // The band {-3,...,4} wraps negative frequencies to slots q-3..q-1.
        let op = band_op(8, SamplingModel::GridSubset { q: 16 }, 12, 9);
        assert!(op.has_fft_path());
        let c = rand_complex_vec(8, 30);
        let y = op.forward(&c).unwrap();
        let y_direct = op.forward_direct(&c);
        for j in 0..12 {
            assert!(complex_close(y[j], y_direct[j], 1e-10));
        }
    }

    #[test]
    fn matrix_free_matches_materialized() {
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 32 }).unwrap();
        let ss = SamplingSet::draw(&fs, SamplingModel::ContinuousUniform, 11, 5).unwrap();
        let dense_op = MeasurementOperator::new(fs.clone(), ss.clone()).unwrap();
        let free_op = MeasurementOperator::with_threshold(fs, ss, 0).unwrap();
        assert!(dense_op.is_materialized());
        assert!(!free_op.is_materialized());
        let c = rand_complex_vec(32, 40);
        let v = rand_complex_vec(11, 41);
        let y_a = dense_op.forward(&c).unwrap();
        let y_b = free_op.forward(&c).unwrap();
        for (a, b) in y_a.iter().zip(&y_b) {
            assert!(complex_close(*a, *b, 1e-10));
        }
        let g_a = dense_op.adjoint(&v).unwrap();
        let g_b = free_op.adjoint(&v).unwrap();
        for (a, b) in g_a.iter().zip(&g_b) {
            assert!(complex_close(*a, *b, 1e-10));
        }
    }

    #[test]
    fn column_norms_are_sqrt_n() {
        for model in [
            SamplingModel::ContinuousUniform,
            SamplingModel::GridWithReplacement { q: 64 },
            SamplingModel::GridSubset { q: 64 },
        ] {
            let op = band_op(64, model, 21, 6);
            for k in 0..op.n_freqs() {
                let norm_sq: f64 = op.column(k).iter().map(|z| z.norm_sqr()).sum();
                assert!(
                    (norm_sq - 21.0).abs() <= 1e-10 * 21.0,
                    "column {k}: {norm_sq}"
                );
            }
        }
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let op = band_op(16, SamplingModel::ContinuousUniform, 7, 2);
        assert!(matches!(
            op.forward(&[Complex64::new(0.0, 0.0); 15]),
            Err(Error::ShapeError {
                expected: 16,
                got: 15
            })
        ));
        assert!(matches!(
            op.adjoint(&[Complex64::new(0.0, 0.0); 8]),
            Err(Error::ShapeError {
                expected: 7,
                got: 8
            })
        ));
    }

    #[test]
    fn dimension_mismatch_rejected_at_construction() {
        let fs = FrequencySet::new(2, &FrequencySpec::Box { q: 3 }).unwrap();
        let fs1 = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 8 }).unwrap();
        let ss = SamplingSet::draw(&fs1, SamplingModel::ContinuousUniform, 5, 1).unwrap();
        assert!(matches!(
            MeasurementOperator::new(fs, ss),
            Err(Error::ShapeError { .. })
        ));
    }

    #[test]
    fn multidim_grid_operator_works_without_fft() {
        let fs = FrequencySet::new(2, &FrequencySpec::Box { q: 4 }).unwrap();
        let ss = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 4 }, 9, 7).unwrap();
        let op = MeasurementOperator::new(fs, ss).unwrap();
        assert!(!op.has_fft_path());
        let c = rand_complex_vec(16, 50);
        let y = op.forward(&c).unwrap();
        let y_direct = op.forward_direct(&c);
        for (a, b) in y.iter().zip(&y_direct) {
            assert!(complex_close(*a, *b, 1e-10));
        }
    }
}
