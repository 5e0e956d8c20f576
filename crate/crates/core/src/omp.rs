//! Orthogonal Matching Pursuit with incremental least squares.
//!
//! Starting from the residual `r_0 = y`, each iteration selects the
//! frequency whose column correlates most strongly with the current
//! residual, then replaces the coefficient estimate by the least-squares
//! fit over all selected columns. The loop stops when the requested
//! sparsity is reached or the residual norm falls below the tolerance.
//!
//! The least-squares problems are solved through an incrementally grown QR
//! factorization (classical Gram-Schmidt with one reorthogonalization pass
//! per column), so iteration `s` costs `O(N * s)` on top of one adjoint
//! application for the correlation sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_ops::{MeasurementOperator, SparseCoefficients};
use crate::linalg::{axpy, inner, l2_norm};

/// Relative correlation level below which the pursuit stops instead of
/// selecting what is effectively noise.
const STALL_REL_TOL: f64 = 1e-12;

/// Condition-number estimate (ratio of extreme R diagonal entries) above
/// which the selected columns are declared rank-deficient.
const COND_LIMIT: f64 = 1e12;

/// Relative residual floor: once the residual is this far below the input
/// norm, no further column can improve the fit in double precision.
const RESIDUAL_FLOOR: f64 = 1e-14;

/// Stopping criteria for [`omp_recover`]. At least one of the two limits
/// must be set. Ties in the correlation arg max are always broken toward
/// the lowest column index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmpConfig {
    /// Stop after this many selected columns.
    pub max_sparsity: Option<usize>,
    /// Stop once the residual norm is at or below this value.
    pub residual_tol: Option<f64>,
}

impl OmpConfig {
    /// Run exactly up to `m` selections.
    pub fn with_sparsity(m: usize) -> Self {
        Self {
            max_sparsity: Some(m),
            residual_tol: None,
        }
    }

    /// Run until the residual norm reaches `eps`.
    pub fn with_tolerance(eps: f64) -> Self {
        Self {
            max_sparsity: None,
            residual_tol: Some(eps),
        }
    }

    /// Stop at whichever of the two limits is hit first.
    pub fn with_sparsity_and_tolerance(m: usize, eps: f64) -> Self {
        Self {
            max_sparsity: Some(m),
            residual_tol: Some(eps),
        }
    }

    fn validate(&self, d_cap: usize) -> Result<()> {
        if self.max_sparsity.is_none() && self.residual_tol.is_none() {
            return Err(Error::InvalidConfig(
                "at least one of max_sparsity / residual_tol must be set".into(),
            ));
        }
        if let Some(m) = self.max_sparsity {
            if m == 0 || m > d_cap {
                return Err(Error::InvalidConfig(format!(
                    "max_sparsity {m} outside 1..={d_cap}"
                )));
            }
        }
        if let Some(eps) = self.residual_tol {
            if !(eps >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "residual_tol must be non-negative, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Why the pursuit stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmpStatus {
    /// The configured sparsity limit was reached.
    HitSparsity,
    /// The residual norm reached the configured tolerance.
    HitTolerance,
    /// No remaining column had a correlation meaningfully above the
    /// floating-point noise floor.
    Stalled,
}

/// Output of [`omp_recover`].
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResult {
    /// Least-squares coefficients over the selected support (length D).
    pub coefficients: SparseCoefficients,
    /// Selected column indices in selection order (no repeats).
    pub support_order: Vec<usize>,
    /// Final residual norm.
    pub residual_norm: f64,
    /// Number of selections performed.
    pub iterations: usize,
    /// Why the loop stopped.
    pub status: OmpStatus,
    /// Residual norm before any selection and after each one
    /// (length `iterations + 1`, non-increasing).
    pub residual_history: Vec<f64>,
    /// How often the raw arg max landed on an already-selected column
    /// (possible only through floating-point noise; the pick is skipped).
    pub reselection_attempts: usize,
}

/// Incrementally grown thin QR factorization of the selected columns.
struct IncrementalQr {
    n: usize,
    /// Orthonormal columns.
    q: Vec<Vec<Complex64>>,
    /// Upper-triangular R, stored column-wise: `r[j]` holds rows `0..=j`.
    r: Vec<Vec<Complex64>>,
    diag_max: f64,
    diag_min: f64,
}

impl IncrementalQr {
    fn new(n: usize) -> Self {
        Self {
            n,
            q: Vec::new(),
            r: Vec::new(),
            diag_max: 0.0,
            diag_min: f64::INFINITY,
        }
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    /// Orthogonalizes `col` against the current basis (two Gram-Schmidt
    /// passes), returning the condition estimate that including it would
    /// produce. The column is appended only if `commit` is then called.
    fn orthogonalize(&self, col: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>, f64) {
        let mut v = col.to_vec();
        let mut rcol = vec![Complex64::new(0.0, 0.0); self.len() + 1];
        for _pass in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let h = inner(qi, &v);
                rcol[i] += h;
                axpy(-h, qi, &mut v);
            }
        }
        let vnorm = l2_norm(&v);
        rcol[self.len()] = Complex64::new(vnorm, 0.0);
        let cond = if vnorm.min(self.diag_min) == 0.0 {
            f64::INFINITY
        } else {
            self.diag_max.max(vnorm) / self.diag_min.min(vnorm)
        };
        (v, rcol, cond)
    }

    fn commit(&mut self, mut v: Vec<Complex64>, rcol: Vec<Complex64>) {
        let vnorm = rcol[self.len()].re;
        let inv = 1.0 / vnorm;
        for z in &mut v {
            *z *= inv;
        }
        debug_assert_eq!(v.len(), self.n);
        self.diag_max = self.diag_max.max(vnorm);
        self.diag_min = self.diag_min.min(vnorm);
        self.q.push(v);
        self.r.push(rcol);
    }

    /// Solves `R d = rhs` by back-substitution.
    #[allow(clippy::needless_range_loop)] // `j` indexes both `r` and `d`
    fn solve_upper(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let s = self.len();
        let mut d = vec![Complex64::new(0.0, 0.0); s];
        for i in (0..s).rev() {
            let mut acc = rhs[i];
            for j in (i + 1)..s {
                acc -= self.r[j][i] * d[j];
            }
            d[i] = acc / self.r[i][i];
        }
        d
    }
}

/// Runs Orthogonal Matching Pursuit on the samples `y`.
///
/// Each iteration computes all D correlations through one adjoint
/// application, picks the largest in modulus (lowest index on ties,
/// already-selected indices skipped), appends the column to the QR
/// factorization, and updates the orthogonal-projection residual.
///
/// Errors with [`Error::RankDeficient`] — carrying the result built so far —
/// if appending a column would push the condition estimate of the selected
/// set beyond 1e12.
pub fn omp_recover(
    op: &MeasurementOperator,
    y: &[Complex64],
    cfg: &OmpConfig,
) -> Result<RecoveryResult> {
    let n = op.n_samples();
    let d_cap = op.n_freqs();
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.len() != n {
        return Err(Error::ShapeError {
            expected: n,
            got: y.len(),
        });
    }
    cfg.validate(d_cap)?;

    let max_picks = cfg.max_sparsity.unwrap_or(d_cap);
    let sqrt_n = (n as f64).sqrt();
    let y_norm = l2_norm(y);

    let mut qr = IncrementalQr::new(n);
    let mut qty: Vec<Complex64> = Vec::new();
    let mut residual = y.to_vec();
    let mut r_norm = y_norm;
    let mut residual_history = vec![r_norm];
    let mut selected = vec![false; d_cap];
    let mut support_order: Vec<usize> = Vec::new();
    let mut reselection_attempts = 0usize;

    let finish = |qr: &IncrementalQr,
                  qty: &[Complex64],
                  support_order: &[usize],
                  r_norm: f64,
                  residual_history: Vec<f64>,
                  reselection_attempts: usize,
                  status: OmpStatus|
     -> Result<RecoveryResult> {
        let d_vals = qr.solve_upper(qty);
        let mut values = vec![Complex64::new(0.0, 0.0); d_cap];
        for (&k, &v) in support_order.iter().zip(&d_vals) {
            values[k] = v;
        }
        let mut support = support_order.to_vec();
        support.sort_unstable();
        Ok(RecoveryResult {
            coefficients: SparseCoefficients::from_parts(values, support)?,
            support_order: support_order.to_vec(),
            residual_norm: r_norm,
            iterations: support_order.len(),
            status,
            residual_history,
            reselection_attempts,
        })
    };

    if let Some(eps) = cfg.residual_tol {
        if r_norm <= eps {
            return finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::HitTolerance,
            );
        }
    }

    loop {
        // Once the residual is at the floating-point floor relative to the
        // input, correlations are pure rounding noise.
        if r_norm <= RESIDUAL_FLOOR * y_norm {
            return finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::Stalled,
            );
        }

        let corr = op.adjoint(&residual)?;
        let mut best_any: Option<(usize, f64)> = None;
        let mut best_new: Option<(usize, f64)> = None;
        for (k, z) in corr.iter().enumerate() {
            let a = z.norm();
            if best_any.is_none_or(|(_, b)| a > b) {
                best_any = Some((k, a));
            }
            if !selected[k] && best_new.is_none_or(|(_, b)| a > b) {
                best_new = Some((k, a));
            }
        }
        let Some((k_pick, pick_corr)) = best_new else {
            // Every column is already selected.
            return finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::Stalled,
            );
        };
        if let Some((k_any, _)) = best_any {
            if selected[k_any] {
                reselection_attempts += 1;
            }
        }
        if pick_corr <= STALL_REL_TOL * sqrt_n * r_norm {
            return finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::Stalled,
            );
        }

        let col = op.column(k_pick);
        let (v, rcol, cond) = qr.orthogonalize(&col);
        if cond > COND_LIMIT {
            let partial = finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::Stalled,
            )?;
            return Err(Error::RankDeficient {
                cond,
                partial: Box::new(partial),
            });
        }
        qr.commit(v, rcol);
        let q_new = qr.q.last().expect("column just committed");
        // The new basis vector is orthogonal to the previous span, so its
        // coefficient against y equals its coefficient against the residual.
        let h = inner(q_new, &residual);
        qty.push(h);
        axpy(-h, q_new, &mut residual);
        r_norm = l2_norm(&residual);
        selected[k_pick] = true;
        support_order.push(k_pick);
        residual_history.push(r_norm);

        if let Some(eps) = cfg.residual_tol {
            if r_norm <= eps {
                return finish(
                    &qr,
                    &qty,
                    &support_order,
                    r_norm,
                    residual_history,
                    reselection_attempts,
                    OmpStatus::HitTolerance,
                );
            }
        }
        if support_order.len() >= max_picks {
            return finish(
                &qr,
                &qty,
                &support_order,
                r_norm,
                residual_history,
                reselection_attempts,
                OmpStatus::HitSparsity,
            );
        }
    }
}

/// True iff the recovered support equals `true_support` as a set.
pub fn support_match(true_support: &[usize], recovered: &RecoveryResult) -> bool {
    use std::collections::HashSet;
    let truth: HashSet<usize> = true_support.iter().copied().collect();
    let found: HashSet<usize> = recovered.support_order.iter().copied().collect();
    truth == found
}

/// Recomputes `‖y − F c̃‖₂` from scratch, independently of the solver's
/// internal bookkeeping.
pub fn residual_certificate(
    op: &MeasurementOperator,
    y: &[Complex64],
    result: &RecoveryResult,
) -> Result<f64> {
    let fitted = op.forward(result.coefficients.values())?;
    if fitted.len() != y.len() {
        return Err(Error::ShapeError {
            expected: fitted.len(),
            got: y.len(),
        });
    }
    Ok(crate::linalg::l2_dist(y, &fitted))
}
