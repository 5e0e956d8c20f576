//! Noise-constrained basis pursuit: minimize `‖c‖₁` subject to
//! `‖F_X c − y‖₂ ≤ σ`, over complex coefficients.
//!
//! The solver is an alternating-direction (operator-splitting) scheme on
//! the equivalent problem
//!
//! ```text
//! minimize ‖w‖₁ + Indicator{‖z − y‖₂ ≤ σ}(z)
//! subject to w = c, z = F_X c
//! ```
//!
//! Each iteration solves a ridge-like least-squares system in `c`, applies
//! complex soft-thresholding to update `w`, projects onto the constraint
//! ball to update `z`, and takes a scaled dual ascent step. Because both
//! couplings share one penalty parameter, the `c`-system `(I + F*F) c = rhs`
//! is independent of the penalty, so its factorization is computed once per
//! solve: by default through the identity
//! `(I + F*F)⁻¹ = I − F*(I + F F*)⁻¹ F` with a single N×N Cholesky
//! factorization, or matrix-free by conjugate gradients when N is too large
//! to materialize an N×N matrix (the two paths agree to solver tolerance and
//! are cross-checked in tests).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_ops::MeasurementOperator;
use crate::linalg::{inner, l1_norm, l2_dist, l2_norm};

/// Error-bound constant C₁ for the stability check, valid for restricted
/// isometry constant 1/5 at triple sparsity.
pub const BP_STABILITY_C1: f64 = 12.04;

/// Error-bound constant C₂ (compressibility term) under the same condition.
pub const BP_STABILITY_C2: f64 = 8.77;

/// Relative tolerance of the conjugate-gradient inner solve.
const CG_TOL: f64 = 1e-10;

/// Largest N for which the N×N system matrix is materialized and factored;
/// beyond this the matrix-free conjugate-gradient path is used.
const DIRECT_SOLVE_MAX_N: usize = 2048;

/// How often (in iterations) the penalty rebalancing runs.
const PENALTY_CHECK_EVERY: usize = 50;

/// Parameters for [`bpdn_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpdnConfig {
    /// Constraint radius σ ≥ 0; `0` asks for an exact-interpolation solution.
    pub sigma: f64,
    /// Iteration budget.
    pub max_iters: usize,
    /// Absolute convergence tolerance.
    pub abs_tol: f64,
    /// Relative convergence tolerance.
    pub rel_tol: f64,
    /// Initial coupling penalty ρ.
    pub penalty: f64,
    /// Rebalance ρ against the primal/dual residual ratio.
    pub adapt_penalty: bool,
    /// Force the direct (`Some(true)`) or conjugate-gradient (`Some(false)`)
    /// inner solver; `None` picks by problem size.
    pub direct_solve: Option<bool>,
}

impl Default for BpdnConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            max_iters: 50_000,
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            penalty: 1.0,
            adapt_penalty: true,
            direct_solve: None,
        }
    }
}

impl BpdnConfig {
    /// Default configuration with constraint radius `sigma`.
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidRadius(self.sigma));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive: abs_tol={}, rel_tol={}",
                self.abs_tol, self.rel_tol
            )));
        }
        if !(self.penalty > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "penalty must be positive, got {}",
                self.penalty
            )));
        }
        Ok(())
    }
}

/// Output of [`bpdn_solve`].
#[derive(Clone, Debug, Serialize)]
pub struct BpdnResult {
    /// The solution candidate, length D.
    pub coefficients: Vec<Complex64>,
    /// `Σ |c_k|`, recomputed from `coefficients`.
    pub l1_norm: f64,
    /// `‖F_X c − y‖₂` at the returned point.
    pub residual_norm: f64,
    /// `max(0, ‖F_X c − y‖₂ − σ)`.
    pub feasibility_gap: f64,
    /// Iterations performed.
    pub iterations: usize,
    /// Whether the convergence criteria (including feasibility within
    /// `abs_tol · (1 + ‖y‖₂)`) were met within the budget.
    pub converged: bool,
}

/// Entry-wise proximal map of the complex modulus ℓ1-norm:
/// `v_k ↦ (1 − κ/|v_k|)₊ · v_k` (phase preserved, zero for `|v_k| ≤ κ`).
///
/// Caller guarantees `kappa > 0`.
pub fn complex_soft_threshold(v: &[Complex64], kappa: f64) -> Vec<Complex64> {
    debug_assert!(kappa > 0.0);
    v.iter()
        .map(|&z| {
            let m = z.norm();
            if m <= kappa {
                Complex64::new(0.0, 0.0)
            } else {
                z * ((m - kappa) / m)
            }
        })
        .collect()
}

/// Euclidean projection of `v` onto the ball of radius `radius` around
/// `center`. Caller guarantees `radius ≥ 0` and equal lengths.
pub fn project_l2_ball(v: &[Complex64], center: &[Complex64], radius: f64) -> Vec<Complex64> {
    debug_assert!(radius >= 0.0);
    debug_assert_eq!(v.len(), center.len());
    let dist = l2_dist(v, center);
    if dist <= radius {
        return v.to_vec();
    }
    let scale = radius / dist;
    v.iter()
        .zip(center)
        .map(|(&vi, &ci)| ci + (vi - ci) * scale)
        .collect()
}

/// Result of [`bp_stability_check`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StabilityCheck {
    /// Measured error `‖c_hat − c_true‖₂`.
    pub lhs: f64,
    /// Bound `C₁·σ/√N + C₂·‖c_true − c_M‖₁/√M`.
    pub rhs: f64,
    /// `lhs ≤ rhs`.
    pub holds: bool,
}

/// Evaluates the stability error bound for a basis-pursuit solution:
/// the error is compared against `C₁·σ/√N + C₂·‖c − c_M‖₁/√M`, where `c_M`
/// keeps the `M` largest-modulus entries of `c_true` (ties broken toward the
/// lower index) and the constants are [`BP_STABILITY_C1`] and
/// [`BP_STABILITY_C2`].
pub fn bp_stability_check(
    c_true: &[Complex64],
    c_hat: &[Complex64],
    sigma: f64,
    n: usize,
    m: usize,
) -> StabilityCheck {
    let lhs = l2_dist(c_hat, c_true);

    // ‖c − c_M‖₁: total modulus mass outside the M largest entries.
    let mut order: Vec<usize> = (0..c_true.len()).collect();
    order.sort_by(|&a, &b| {
        c_true[b]
            .norm()
            .total_cmp(&c_true[a].norm())
            .then(a.cmp(&b))
    });
    let tail: f64 = order.iter().skip(m).map(|&k| c_true[k].norm()).sum();

    let noise_term = if sigma == 0.0 {
        0.0
    } else {
        BP_STABILITY_C1 * sigma / (n as f64).sqrt()
    };
    let tail_term = if tail == 0.0 {
        0.0
    } else {
        BP_STABILITY_C2 * tail / (m as f64).sqrt()
    };
    let rhs = noise_term + tail_term;
    StabilityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

/// The `c`-update solver for `(I + F*F) c = rhs`.
enum NormalSolver {
    /// Cholesky factor of `K = I + F F*` (N×N); by the push-through
    /// identity, `c = rhs − F* K⁻¹ F rhs` and `F c = K⁻¹ F rhs` for free.
    Direct(Box<Cholesky<Complex64, Dyn>>),
    /// Matrix-free conjugate gradients on `I + F*F`, warm-started.
    Cg,
}

impl NormalSolver {
    fn build(op: &MeasurementOperator, cfg: &BpdnConfig) -> Result<Self> {
        let n = op.n_samples();
        let direct = cfg.direct_solve.unwrap_or(n <= DIRECT_SOLVE_MAX_N);
        if !direct {
            return Ok(NormalSolver::Cg);
        }
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let row_conj = op.adjoint(&e)?;
            let col = op.forward(&row_conj)?;
            e[j] = Complex64::new(0.0, 0.0);
            for i in 0..n {
                k[(i, j)] = col[i];
            }
            k[(j, j)] += Complex64::new(1.0, 0.0);
        }
        // Remove rounding asymmetry before factoring.
        let herm = (&k + k.adjoint()) * Complex64::new(0.5, 0.0);
        match Cholesky::new(herm) {
            Some(chol) => Ok(NormalSolver::Direct(Box::new(chol))),
            // K ⪰ I, so failure can only be numerical; fall back.
            None => Ok(NormalSolver::Cg),
        }
    }

    /// Solves `(I + F*F) c = rhs`; returns `(c, F c)`.
    fn solve(
        &self,
        op: &MeasurementOperator,
        rhs: &[Complex64],
        warm: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        match self {
            NormalSolver::Direct(chol) => {
                let t = op.forward(rhs)?;
                let s = chol.solve(&DVector::from_vec(t));
                let fc: Vec<Complex64> = s.iter().copied().collect();
                let correction = op.adjoint(&fc)?;
                let c: Vec<Complex64> = rhs
                    .iter()
                    .zip(&correction)
                    .map(|(&r, &corr)| r - corr)
                    .collect();
                Ok((c, fc))
            }
            NormalSolver::Cg => {
                let c = cg_normal(op, rhs, warm)?;
                let fc = op.forward(&c)?;
                Ok((c, fc))
            }
        }
    }
}

/// Conjugate gradients on the Hermitian positive-definite map
/// `x ↦ x + F*(F x)`, to relative tolerance [`CG_TOL`].
fn cg_normal(
    op: &MeasurementOperator,
    rhs: &[Complex64],
    warm: &[Complex64],
) -> Result<Vec<Complex64>> {
    let apply = |x: &[Complex64]| -> Result<Vec<Complex64>> {
        let fx = op.forward(x)?;
        let mut out = op.adjoint(&fx)?;
        for (o, &xi) in out.iter_mut().zip(x) {
            *o += xi;
        }
        Ok(out)
    };

    let b_norm = l2_norm(rhs);
    if b_norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); rhs.len()]);
    }
    let mut x = warm.to_vec();
    let ax = apply(&x)?;
    let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
    let mut p = r.clone();
    let mut rho = inner(&r, &r).re;
    // The map has eigenvalues ≥ 1, so convergence is fast; the cap is a
    // safety net, not an expected exit.
    let max_cg = 20 * rhs.len() + 100;
    for _ in 0..max_cg {
        if rho.sqrt() <= CG_TOL * b_norm {
            break;
        }
        let ap = apply(&p)?;
        let alpha = rho / inner(&p, &ap).re;
        for i in 0..x.len() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rho_new = inner(&r, &r).re;
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..p.len() {
            p[i] = r[i] + p[i] * beta;
        }
    }
    Ok(x)
}

/// Solves `min ‖c‖₁ s.t. ‖F_X c − y‖₂ ≤ σ`.
///
/// Convergence requires the primal and dual residuals of the splitting to
/// fall below `abs_tol`/`rel_tol`-scaled thresholds *and* the returned point
/// to satisfy the constraint within `abs_tol · (1 + ‖y‖₂)`. On budget
/// exhaustion the best iterate seen is returned with `converged = false`.
pub fn bpdn_solve(
    op: &MeasurementOperator,
    y: &[Complex64],
    cfg: &BpdnConfig,
) -> Result<BpdnResult> {
    cfg.validate()?;
    let n = op.n_samples();
    let d_cap = op.n_freqs();
    if y.len() != n {
        return Err(Error::ShapeError {
            expected: n,
            got: y.len(),
        });
    }

    let y_norm = l2_norm(y);
    let feas_tol = cfg.abs_tol * (1.0 + y_norm);
    let zero = Complex64::new(0.0, 0.0);

    // ‖y‖₂ ≤ σ: the zero vector is feasible, and nothing has smaller ℓ1-norm.
    if y_norm <= cfg.sigma {
        return Ok(BpdnResult {
            coefficients: vec![zero; d_cap],
            l1_norm: 0.0,
            residual_norm: y_norm,
            feasibility_gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let solver = NormalSolver::build(op, cfg)?;
    let mut rho = cfg.penalty;

    let mut c = vec![zero; d_cap];
    let mut w = vec![zero; d_cap];
    let mut z = y.to_vec();
    let mut u_w = vec![zero; d_cap];
    let mut u_z = vec![zero; n];
    let mut fz_adj = op.adjoint(&z)?; // F* z, refreshed each iteration
    let mut fc = vec![zero; n];

    // Best iterate under (feasible-first, then ℓ1-norm) ordering.
    let mut best_c = c.clone();
    let mut best_score = (f64::INFINITY, f64::INFINITY);
    let mut best_fc_dist = y_norm;

    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 1..=cfg.max_iters {
        iterations = iter;

        // c-update: (I + F*F) c = (w − u_w) + F*(z − u_z).
        let fu_adj = op.adjoint(&u_z)?;
        let rhs: Vec<Complex64> = (0..d_cap)
            .map(|k| w[k] - u_w[k] + fz_adj[k] - fu_adj[k])
            .collect();
        let (c_new, fc_new) = solver.solve(op, &rhs, &c)?;
        c = c_new;
        fc = fc_new;

        // w-update: proximal step on the ℓ1 term.
        let w_arg: Vec<Complex64> = (0..d_cap).map(|k| c[k] + u_w[k]).collect();
        let w_new = complex_soft_threshold(&w_arg, 1.0 / rho);

        // z-update: projection onto the constraint ball.
        let z_arg: Vec<Complex64> = (0..n).map(|j| fc[j] + u_z[j]).collect();
        let z_new = project_l2_ball(&z_arg, y, cfg.sigma);

        // Scaled dual ascent.
        for k in 0..d_cap {
            u_w[k] += c[k] - w_new[k];
        }
        for j in 0..n {
            u_z[j] += fc[j] - z_new[j];
        }

        // Residuals of the splitting. The dual residual needs F* of the
        // z-change; adjoint linearity lets us reuse F* z from this and the
        // previous iteration.
        let fz_adj_new = op.adjoint(&z_new)?;
        let pri_sq = l2_dist(&c, &w_new).powi(2) + l2_dist(&fc, &z_new).powi(2);
        let pri = pri_sq.sqrt();
        let dual_vec_sq: f64 = (0..d_cap)
            .map(|k| ((w_new[k] - w[k]) + (fz_adj_new[k] - fz_adj[k])).norm_sqr())
            .sum();
        let dual = rho * dual_vec_sq.sqrt();

        w = w_new;
        z = z_new;
        fz_adj = fz_adj_new;

        let ax_norm = (l2_norm(&c).powi(2) + l2_norm(&fc).powi(2)).sqrt();
        let split_norm = (l2_norm(&w).powi(2) + l2_norm(&z).powi(2)).sqrt();
        let eps_pri =
            ((d_cap + n) as f64).sqrt() * cfg.abs_tol + cfg.rel_tol * ax_norm.max(split_norm);
        let dual_scale_sq: f64 = {
            let fu_now = op.adjoint(&u_z)?;
            (0..d_cap)
                .map(|k| ((u_w[k] + fu_now[k]) * rho).norm_sqr())
                .sum()
        };
        let eps_dual = (d_cap as f64).sqrt() * cfg.abs_tol + cfg.rel_tol * dual_scale_sq.sqrt();

        let fc_dist = l2_dist(&fc, y);
        let feas_gap = (fc_dist - cfg.sigma).max(0.0);
        let score = if feas_gap <= feas_tol {
            (0.0, l1_norm(&c))
        } else {
            (1.0, feas_gap)
        };
        if score < best_score {
            best_score = score;
            best_c = c.clone();
            best_fc_dist = fc_dist;
        }

        if pri <= eps_pri && dual <= eps_dual && feas_gap <= feas_tol {
            converged = true;
            break;
        }

        // Residual balancing keeps the two residuals within a decade of
        // each other; the scaled duals are rescaled so the underlying
        // multipliers are unchanged.
        if cfg.adapt_penalty && iter % PENALTY_CHECK_EVERY == 0 {
            let factor = if pri > 10.0 * dual && rho < 1e8 {
                2.0
            } else if dual > 10.0 * pri && rho > 1e-8 {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                let dual_rescale = 1.0 / factor;
                for v in u_w.iter_mut().chain(u_z.iter_mut()) {
                    *v *= dual_rescale;
                }
            }
        }
    }

    let (coefficients, residual_norm) = if converged {
        (c, l2_dist(&fc, y))
    } else {
        (best_c, best_fc_dist)
    };
    Ok(BpdnResult {
        l1_norm: l1_norm(&coefficients),
        residual_norm,
        feasibility_gap: (residual_norm - cfg.sigma).max(0.0),
        iterations,
        converged,
        coefficients,
    })
}

/// Karush-Kuhn-Tucker residual of the ℓ1 objective at `c`.
///
/// With `h = F*(F c − y)` normalized to unit sup-norm and sign-flipped, the
/// optimality conditions require `h_k = c_k / |c_k|` on the support and
/// `|h_k| ≤ 1` elsewhere; the returned value is the largest deviation of
/// `h_k` from the support phase, over entries with modulus above
/// `support_rel_tol · max_k |c_k|`. Meaningful for σ > 0 (an active,
/// non-degenerate constraint); near zero at an optimum.
pub fn l1_kkt_residual(
    op: &MeasurementOperator,
    y: &[Complex64],
    c: &[Complex64],
    support_rel_tol: f64,
) -> Result<f64> {
    let fc = op.forward(c)?;
    let resid: Vec<Complex64> = fc.iter().zip(y).map(|(&a, &b)| a - b).collect();
    let h = op.adjoint(&resid)?;
    let h_max = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if h_max == 0.0 {
        return Ok(0.0);
    }
    let c_max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = support_rel_tol * c_max;
    let mut worst = 0.0f64;
    for (&hk, &ck) in h.iter().zip(c) {
        if ck.norm() > threshold {
            let aligned = -hk / h_max; // should equal the phase of c_k
            let phase = ck / ck.norm();
            worst = worst.max((aligned - phase).norm());
        }
    }
    Ok(worst)
}
