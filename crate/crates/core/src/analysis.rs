//! Matrix-analytic diagnostics of a measurement operator: column coherence,
//! Gram-submatrix eigenvalue extremes, and exact or randomized restricted
//! isometry constants.
//!
//! All quantities refer to the column-normalized matrix `N^{-1/2} F_X`, whose
//! columns are exactly unit-norm, so coherence lives in `[0, 1]` and the
//! Gram matrix of any column subset has unit diagonal.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_ops::MeasurementOperator;
use crate::linalg::inner;
use crate::rng::sub_rng;

/// Default cap on the number of subsets [`ric_exhaustive`] will enumerate.
pub const DEFAULT_RIC_BUDGET: u64 = 1_000_000;

/// Column coherence of the normalized measurement matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// `max_{j≠k} |⟨φ_j, φ_k⟩| / N`, in `[0, 1]`.
    pub mu: f64,
    /// Lexicographically smallest frequency-index pair attaining the max.
    pub argmax_pair: (usize, usize),
}

/// How a restricted-isometry constant was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicMethod {
    /// Every size-M subset was enumerated; the constant is exact.
    Exhaustive,
    /// The stated number of uniformly drawn subsets; a lower bound.
    MonteCarlo { trials: usize },
}

/// A (possibly randomized) restricted-isometry constant δ_M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicReport {
    /// Subset size M.
    pub m: usize,
    /// `max_{|T| ≤ M} max(λ_max(G_T) − 1, 1 − λ_min(G_T))`, `G_T` the
    /// normalized Gram matrix of the columns in `T`.
    pub delta: f64,
    /// Provenance of the value.
    pub method: RicMethod,
    /// The extremizing subset (exhaustive search only).
    pub witness_subset: Option<Vec<usize>>,
}

/// Computes the coherence `μ = max_{j≠k} |⟨φ_j, φ_k⟩| / N` exactly.
///
/// For one-dimensional contiguous frequency bands the inner product depends
/// only on the index difference, so the maximum is found from `D − 1`
/// exponential sums in `O(D·N)` time; other frequency sets fall back to the
/// all-pairs scan. Ties are broken toward the lexicographically smallest
/// index pair.
pub fn coherence(op: &MeasurementOperator) -> Result<CoherenceReport> {
    let d_cap = op.n_freqs();
    if d_cap < 2 {
        return Err(Error::NeedTwoColumns(d_cap));
    }
    let n = op.n_samples() as f64;

    if let Some(_band) = op.frequency_set().contiguous_1d() {
        // ⟨φ_j, φ_{j+δ}⟩ = Σ_l e^{iδ·x_l}: one exponential sum per offset.
        let xs: Vec<f64> = op.sampling_set().points().iter().map(|p| p[0]).collect();
        let mut best = (f64::NEG_INFINITY, 1usize);
        for delta in 1..d_cap {
            let s: Complex64 = xs
                .iter()
                .map(|&x| Complex64::from_polar(1.0, delta as f64 * x))
                .sum();
            let value = s.norm() / n;
            if value > best.0 {
                best = (value, delta);
            }
        }
        return Ok(CoherenceReport {
            mu: best.0.min(1.0),
            argmax_pair: (0, best.1),
        });
    }

    let columns: Vec<Vec<Complex64>> = (0..d_cap).map(|k| op.column(k)).collect();
    let mut best = (f64::NEG_INFINITY, (0usize, 1usize));
    for j in 0..d_cap {
        for k in (j + 1)..d_cap {
            let value = inner(&columns[j], &columns[k]).norm() / n;
            if value > best.0 {
                best = (value, (j, k));
            }
        }
    }
    Ok(CoherenceReport {
        mu: best.0.min(1.0),
        argmax_pair: best.1,
    })
}

/// Normalized Gram matrix `N^{-1} F*_{TX} F_{TX}` of the columns in `t`.
fn subset_gram(op: &MeasurementOperator, t: &[usize]) -> DMatrix<Complex64> {
    let n = op.n_samples() as f64;
    let columns: Vec<Vec<Complex64>> = t.iter().map(|&k| op.column(k)).collect();
    let m = t.len();
    let mut g = DMatrix::<Complex64>::zeros(m, m);
    for a in 0..m {
        g[(a, a)] = Complex64::new(inner(&columns[a], &columns[a]).re / n, 0.0);
        for b in (a + 1)..m {
            let v = inner(&columns[a], &columns[b]) / n;
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    g
}

/// Eigenvalue extremes of a Hermitian matrix, with the minimum clamped at
/// zero (the Gram matrices here are positive semidefinite by construction).
fn eig_extremes(g: &DMatrix<Complex64>) -> (f64, f64) {
    let eigs = g.clone().symmetric_eigen().eigenvalues;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eigs.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo.max(0.0), hi)
}

/// Extreme eigenvalues of the normalized Gram matrix of the column subset
/// `t` (duplicates are removed; order is irrelevant).
///
/// Returns `(λ_min, λ_max)` with `λ_min ≥ 0`; the eigenvalues sum to `|T|`
/// up to rounding because the normalized columns are unit vectors.
pub fn gram_eig_extremes(op: &MeasurementOperator, t: &[usize]) -> Result<(f64, f64)> {
    if t.is_empty() {
        return Err(Error::EmptySubset);
    }
    let d_cap = op.n_freqs();
    for &k in t {
        if k >= d_cap {
            return Err(Error::SubsetIndexOutOfRange { index: k, d: d_cap });
        }
    }
    let mut t_sorted = t.to_vec();
    t_sorted.sort_unstable();
    t_sorted.dedup();
    Ok(eig_extremes(&subset_gram(op, &t_sorted)))
}

fn deviation(extremes: (f64, f64)) -> f64 {
    (extremes.1 - 1.0).max(1.0 - extremes.0).max(0.0)
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

fn validate_subset_size(m: usize, d_cap: usize) -> Result<()> {
    if m == 0 || m > d_cap {
        return Err(Error::InvalidSparsity { m, d: d_cap });
    }
    Ok(())
}

/// Exact restricted-isometry constant δ_M by enumeration of all `C(D, M)`
/// size-M column subsets.
///
/// By Cauchy interlacing, the eigenvalue deviation of every smaller subset
/// is dominated by some size-M superset, so enumerating only size-M subsets
/// realizes the maximum over `|T| ≤ M`. `budget` (default
/// [`DEFAULT_RIC_BUDGET`]) caps the subset count; past it the call fails
/// with the count so the caller can switch to [`ric_monte_carlo`].
pub fn ric_exhaustive(
    op: &MeasurementOperator,
    m: usize,
    budget: Option<u64>,
) -> Result<RicReport> {
    let d_cap = op.n_freqs();
    validate_subset_size(m, d_cap)?;
    let budget = budget.unwrap_or(DEFAULT_RIC_BUDGET) as u128;
    let count = binomial(d_cap as u64, m as u64).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::CombinatorialBudgetExceeded { count, budget });
    }

    // One pass over column pairs up front; every subset Gram is a principal
    // submatrix of this D×D matrix.
    let full = subset_gram(op, &(0..d_cap).collect::<Vec<_>>());
    let mut best = f64::NEG_INFINITY;
    let mut witness: Vec<usize> = Vec::new();
    for subset in (0..d_cap).combinations(m) {
        let mut g = DMatrix::<Complex64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                g[(a, b)] = full[(subset[a], subset[b])];
            }
        }
        let dev = deviation(eig_extremes(&g));
        // Strict inequality keeps the lexicographically first witness
        // (combinations are emitted in lexicographic order).
        if dev > best {
            best = dev;
            witness = subset;
        }
    }
    Ok(RicReport {
        m,
        delta: best,
        method: RicMethod::Exhaustive,
        witness_subset: Some(witness),
    })
}

/// Uniform random size-M subset as the tail of a partial Fisher-Yates
/// shuffle; for fixed rng state the draws are nested across `m`, so
/// Monte-Carlo estimates are monotone in `m` at equal seeds.
fn random_subset(d_cap: usize, m: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..d_cap).collect();
    let (chosen, _) = pool.partial_shuffle(rng, m);
    let mut subset = chosen.to_vec();
    subset.sort_unstable();
    subset
}

/// Randomized lower bound for δ_M: the maximum eigenvalue deviation over
/// `trials` uniformly drawn size-M subsets.
///
/// Trials run in parallel with per-trial derived seeds, so the result does
/// not depend on thread scheduling.
pub fn ric_monte_carlo(
    op: &MeasurementOperator,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<RicReport> {
    let d_cap = op.n_freqs();
    validate_subset_size(m, d_cap)?;
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "ric_monte_carlo requires at least one trial".into(),
        ));
    }
    let delta = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = sub_rng(seed, "ric-subset", t);
            let subset = random_subset(d_cap, m, &mut rng);
            deviation(eig_extremes(&subset_gram(op, &subset)))
        })
        .reduce(|| 0.0, f64::max);
    Ok(RicReport {
        m,
        delta,
        method: RicMethod::MonteCarlo { trials },
        witness_subset: None,
    })
}
