//! Closed-form evaluators for the sampling-complexity conditions and
//! probability tail bounds that govern when recovery is guaranteed.
//!
//! Conventions: all logarithms are natural; every probability-valued bound
//! is returned both raw (for monotonicity analysis) and clamped to `[0, 1]`;
//! the absolute constants the theory leaves unspecified are exposed as
//! explicit parameters with the proof-derived values as named defaults.

use serde::{Deserialize, Serialize};
use std::f64::consts::{E, SQRT_2};

use crate::error::{Error, Result};

/// Sample-complexity constant of the first-pick condition:
/// `16 + 8/(3√2) ≈ 17.88`.
pub const OMP_FIRST_STEP_CONSTANT: f64 = 16.0 + 8.0 / (3.0 * SQRT_2);

/// Uniform-recovery sample constant for either sampling model:
/// `4 + 4/(3√2) ≈ 4.94`.
pub const UNIFORM_OMP_CONSTANT: f64 = 4.0 + 4.0 / (3.0 * SQRT_2);

/// Sharpened uniform-recovery constant available under continuous sampling.
pub const UNIFORM_OMP_CONSTANT_CONTINUOUS: f64 = 4.0 / 3.0;

/// Sample-complexity constant of the restricted-isometry condition:
/// `(2/(√2−1)) · (ln(1 + 2 ln(1 + (√2−1)/4)))⁻¹ ≈ 26.84`.
///
/// Not a `const` because `ln` is not const-evaluable.
pub fn rip_sample_constant() -> f64 {
    let r = SQRT_2 - 1.0;
    (2.0 / r) / (1.0 + 2.0 * (1.0 + r / 4.0).ln()).ln()
}

/// `c(δ) = (1 − δ²/e)⁻¹`, the prefactor of the eigenvalue condition;
/// bounded by `(1 − e⁻¹)⁻¹ ≈ 1.582` on `δ ∈ (0, 1]`.
pub fn eigval_c_delta(delta: f64) -> f64 {
    1.0 / (1.0 - delta * delta / E)
}

/// Parameter bundle for the CLI `bounds` subcommand; every evaluator uses
/// the subset of fields it documents.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundInputs {
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub d: Option<u64>,
    pub d_prime: Option<u64>,
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub kappa: Option<f64>,
    pub c_norm2: Option<f64>,
    pub c_norm1: Option<f64>,
    pub min_coeff: Option<f64>,
    pub mu: Option<f64>,
    /// Overrides the named default constant of the selected condition.
    pub constant: Option<f64>,
    /// Tail-bound regime for the coherence bound.
    pub model: Option<TailRegime>,
}

/// One inequality of a guarantee: `lhs`, `rhs`, and whether it holds (the
/// comparison direction is documented at each producing operation).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// A probability bound, raw and clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub raw: f64,
    pub clamped: f64,
}

impl TailBound {
    fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }
}

/// Which coherence tail estimate applies: `General` holds under every
/// sampling model; `Continuous` is the sharper estimate available under
/// continuous uniform sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRegime {
    General,
    Continuous,
}

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

fn check_positive_count(name: &'static str, value: u64) -> Result<()> {
    if value == 0 {
        Err(Error::InvalidParameter(format!(
            "{name} must be at least 1"
        )))
    } else {
        Ok(())
    }
}

/// Eigenvalue concentration condition: `⌊δ²N/(3eM)⌋ ≥ ln(c(δ)·M/ε)`
/// guarantees the normalized Gram spectrum of any fixed size-M subset lies
/// in `[1−δ, 1+δ]` with probability at least `1−ε`.
///
/// `lhs` is the (integer-valued) floor, `rhs` the logarithm;
/// `holds = lhs ≥ rhs`.
pub fn eigval_condition(n: u64, m: u64, delta: f64, epsilon: f64) -> Result<ConditionCheck> {
    check_open_unit("delta", delta)?;
    check_open_unit("epsilon", epsilon)?;
    check_positive_count("M", m)?;
    let lhs = (delta * delta * n as f64 / (3.0 * E * m as f64)).floor();
    let rhs = (eigval_c_delta(delta) * m as f64 / epsilon).ln();
    Ok(ConditionCheck {
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// Concentration tail for the correlation of an off-support column with a
/// support-restricted signal:
/// `P(|N⁻¹⟨F_T c, φ_j⟩| ≥ t) ≤ 4·exp(−N t² / (4‖c‖₂² + (4/(3√2))‖c‖₁ t))`.
pub fn omp_correlation_tail(n: u64, t: f64, c_norm2: f64, c_norm1: f64) -> Result<TailBound> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold t must be positive, got {t}"
        )));
    }
    if !(c_norm2 >= 0.0) || !(c_norm1 >= 0.0) || (c_norm2 == 0.0 && c_norm1 == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "norms must be nonnegative and not both zero: ‖c‖₂={c_norm2}, ‖c‖₁={c_norm1}"
        )));
    }
    let denom = 4.0 * c_norm2 * c_norm2 + (4.0 / (3.0 * SQRT_2)) * c_norm1 * t;
    Ok(TailBound::new(4.0 * (-(n as f64) * t * t / denom).exp()))
}

/// Coherence tail bound `P(μ > t)` for the normalized measurement matrix,
/// where `d_prime` counts the distinct nonzero frequency differences.
///
/// `General`: `4D′·exp(−N t²/(4 + (4/(3√2))t))`, valid under every model.
/// `Continuous`: `(1−κ)⁻¹·D′·e^{−Nκt²}` for any `κ ∈ (0,1)`; when `kappa`
/// is `None` the bound is minimized over a 999-point grid in `(0, 1)`.
pub fn coherence_tail(
    n: u64,
    t: f64,
    d_prime: u64,
    regime: TailRegime,
    kappa: Option<f64>,
) -> Result<TailBound> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold t must be positive, got {t}"
        )));
    }
    if d_prime == 0 {
        return Ok(TailBound::new(0.0));
    }
    let n = n as f64;
    let d_prime = d_prime as f64;
    let raw = match regime {
        TailRegime::General => {
            let denom = 4.0 + (4.0 / (3.0 * SQRT_2)) * t;
            4.0 * d_prime * (-n * t * t / denom).exp()
        }
        TailRegime::Continuous => {
            let eval = |k: f64| (1.0 - k).recip() * d_prime * (-n * k * t * t).exp();
            match kappa {
                Some(k) => {
                    check_open_unit("kappa", k)?;
                    eval(k)
                }
                None => (1..1000)
                    .map(|i| eval(i as f64 / 1000.0))
                    .fold(f64::INFINITY, f64::min),
            }
        }
    };
    Ok(TailBound::new(raw))
}

/// Outcome of [`omp_first_step_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstStepReport {
    /// `N ≥ C·M·τ⁻²·ln(8D/ε)`; `holds = lhs ≥ rhs`.
    pub sample_condition: ConditionCheck,
    /// `⌊N/(12eM)⌋ ≥ ln(2(1 − 1/(4e))⁻¹ M/ε)`; `holds = lhs ≥ rhs`.
    pub eigenvalue_condition: ConditionCheck,
    /// `σ ≤ ((1−τ)/4)·√(N/M)·‖c‖₂`; `holds = lhs ≤ rhs`.
    pub noise_condition: ConditionCheck,
    /// Stronger form `σ ≤ ((1−τ)/4)·√N·min_j|c_j|`, when `min_coeff` given.
    pub noise_condition_min_coeff: Option<ConditionCheck>,
    /// Conjunction of the three mandatory conditions.
    pub all_hold: bool,
    /// Human-readable statement of what the conditions imply.
    pub guarantee: String,
}

/// Conditions under which the first greedy pick lands in the true support
/// with probability at least `1−ε`.
///
/// `constant` overrides [`OMP_FIRST_STEP_CONSTANT`].
#[allow(clippy::too_many_arguments)]
pub fn omp_first_step_conditions(
    n: u64,
    m: u64,
    d: u64,
    tau: f64,
    epsilon: f64,
    sigma: f64,
    c_norm2: f64,
    min_coeff: Option<f64>,
    constant: Option<f64>,
) -> Result<FirstStepReport> {
    check_open_unit("tau", tau)?;
    check_open_unit("epsilon", epsilon)?;
    check_positive_count("M", m)?;
    check_positive_count("D", d)?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidRadius(sigma));
    }
    let c = constant.unwrap_or(OMP_FIRST_STEP_CONSTANT);
    let (nf, mf) = (n as f64, m as f64);

    let sample_rhs = c * mf * tau.powi(-2) * (8.0 * d as f64 / epsilon).ln();
    let sample_condition = ConditionCheck {
        lhs: nf,
        rhs: sample_rhs,
        holds: nf >= sample_rhs,
    };

    let eig_lhs = (nf / (12.0 * E * mf)).floor();
    let eig_rhs = (2.0 / (1.0 - 1.0 / (4.0 * E)) * mf / epsilon).ln();
    let eigenvalue_condition = ConditionCheck {
        lhs: eig_lhs,
        rhs: eig_rhs,
        holds: eig_lhs >= eig_rhs,
    };

    let noise_rhs = (1.0 - tau) / 4.0 * (nf / mf).sqrt() * c_norm2;
    let noise_condition = ConditionCheck {
        lhs: sigma,
        rhs: noise_rhs,
        holds: sigma <= noise_rhs,
    };

    let noise_condition_min_coeff = min_coeff.map(|mc| {
        let rhs = (1.0 - tau) / 4.0 * nf.sqrt() * mc;
        ConditionCheck {
            lhs: sigma,
            rhs,
            holds: sigma <= rhs,
        }
    });

    let all_hold = sample_condition.holds && eigenvalue_condition.holds && noise_condition.holds;
    let guarantee = if all_hold {
        format!(
            "first greedy pick lands in the true support with probability at least {}",
            1.0 - epsilon
        )
    } else {
        "conditions not all satisfied; no guarantee implied".to_string()
    };
    Ok(FirstStepReport {
        sample_condition,
        eigenvalue_condition,
        noise_condition,
        noise_condition_min_coeff,
        all_hold,
        guarantee,
    })
}

/// Outcome of [`uniform_omp_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformOmpReport {
    /// `N ≥ C·τ⁻²·(2M−1)²·ln(4D′/ε)`; `holds = lhs ≥ rhs`.
    pub sample_condition: ConditionCheck,
    /// `min_k |c_k| > 2σ/((1−τ)√N)`; `holds = lhs > rhs` (strict).
    pub coefficient_condition: ConditionCheck,
    /// Reconstruction error bound `σ/√(N(1−τ/2))` once both hold.
    pub error_bound: f64,
    /// Conjunction of the two conditions.
    pub all_hold: bool,
}

/// Conditions for uniform noisy recovery: one sampling set that, with
/// probability `1−ε`, recovers the support of *every* M-sparse signal whose
/// smallest coefficient clears the noise threshold (residual stopping rule
/// at `σ`).
///
/// `constant` overrides [`UNIFORM_OMP_CONSTANT`]
/// ([`UNIFORM_OMP_CONSTANT_CONTINUOUS`] is the sharper continuous-model
/// value). The sample bound is `C·τ⁻²(2M−1)²ln(4D′/ε)`: substituting
/// `t = τ/(2M−1)` into the coherence tail yields the inverse-square factor.
#[allow(clippy::too_many_arguments)]
pub fn uniform_omp_conditions(
    n: u64,
    m: u64,
    d_prime: u64,
    tau: f64,
    epsilon: f64,
    sigma: f64,
    min_coeff: f64,
    constant: Option<f64>,
) -> Result<UniformOmpReport> {
    check_open_unit("tau", tau)?;
    check_open_unit("epsilon", epsilon)?;
    check_positive_count("M", m)?;
    check_positive_count("D_prime", d_prime)?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidRadius(sigma));
    }
    let c = constant.unwrap_or(UNIFORM_OMP_CONSTANT);
    let (nf, mf) = (n as f64, m as f64);

    let sample_rhs =
        c * tau.powi(-2) * (2.0 * mf - 1.0).powi(2) * (4.0 * d_prime as f64 / epsilon).ln();
    let sample_condition = ConditionCheck {
        lhs: nf,
        rhs: sample_rhs,
        holds: nf >= sample_rhs,
    };

    let coeff_rhs = 2.0 * sigma / ((1.0 - tau) * nf.sqrt());
    let coefficient_condition = ConditionCheck {
        lhs: min_coeff,
        rhs: coeff_rhs,
        holds: min_coeff > coeff_rhs,
    };

    Ok(UniformOmpReport {
        sample_condition,
        coefficient_condition,
        error_bound: sigma / (nf * (1.0 - tau / 2.0)).sqrt(),
        all_hold: sample_condition.holds && coefficient_condition.holds,
    })
}

/// Outcome of [`dete_guarantee`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeteReport {
    /// `(2M−1)·μ < 1`; `holds = lhs < rhs`.
    pub coherence_condition: ConditionCheck,
    /// `σ < ((1 − (2M−1)μ)/2)·min_k|c_k|`; `holds = lhs < rhs`.
    pub noise_condition: ConditionCheck,
    /// `σ/√(1 − (M−1)μ)`; `None` (not applicable) when `(M−1)μ ≥ 1`.
    pub error_bound: Option<f64>,
    /// Conjunction of the two conditions.
    pub all_hold: bool,
}

/// Deterministic coherence-based recovery guarantee for greedy pursuit with
/// the residual stopping rule at `σ`: if `(2M−1)μ < 1` and the noise is
/// small against the smallest coefficient, the exact support is found and
/// the coefficient error is at most `σ/√(1 − (M−1)μ)`.
pub fn dete_guarantee(mu: f64, m: u64, sigma: f64, min_coeff: f64) -> Result<DeteReport> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "coherence must lie in [0,1], got {mu}"
        )));
    }
    check_positive_count("M", m)?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidRadius(sigma));
    }
    let mf = m as f64;
    let band = (2.0 * mf - 1.0) * mu;
    let coherence_condition = ConditionCheck {
        lhs: band,
        rhs: 1.0,
        holds: band < 1.0,
    };
    let noise_rhs = (1.0 - band) / 2.0 * min_coeff;
    let noise_condition = ConditionCheck {
        lhs: sigma,
        rhs: noise_rhs,
        holds: sigma < noise_rhs,
    };
    let shrink = 1.0 - (mf - 1.0) * mu;
    let error_bound = if shrink > 0.0 {
        Some(sigma / shrink.sqrt())
    } else {
        None
    };
    Ok(DeteReport {
        coherence_condition,
        noise_condition,
        error_bound,
        all_hold: coherence_condition.holds && noise_condition.holds,
    })
}

/// Outcome of [`rip_sample_condition`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RipSampleReport {
    /// `N / ln N`.
    pub lhs: f64,
    /// `δ⁻²·M·ln²(M)·ln(D)·ln(1/ε)` — the right side at unit constant.
    pub rhs_unit: f64,
    /// `M = 1`: the restricted isometry constant is exactly zero, so the
    /// condition holds vacuously for every `C`.
    pub m_is_one: bool,
}

impl RipSampleReport {
    /// Whether `N/ln N ≥ C · rhs_unit` at the supplied constant.
    pub fn holds_under(&self, constant: f64) -> bool {
        self.m_is_one || self.lhs >= constant * self.rhs_unit
    }
}

/// Restricted-isometry sample condition
/// `N/ln N ≥ C·δ⁻²·M·ln²(M)·ln(D)·ln(1/ε)`, returned with the constant
/// factored out so callers can supply or sweep `C`
/// ([`rip_sample_constant`] is the proof-derived default).
pub fn rip_sample_condition(
    n: u64,
    m: u64,
    d: u64,
    delta: f64,
    epsilon: f64,
) -> Result<RipSampleReport> {
    check_open_unit("delta", delta)?;
    check_open_unit("epsilon", epsilon)?;
    check_positive_count("M", m)?;
    check_positive_count("D", d)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "N must be at least 2 so ln(N) is positive, got {n}"
        )));
    }
    let nf = n as f64;
    let lhs = nf / nf.ln();
    if m == 1 {
        return Ok(RipSampleReport {
            lhs,
            rhs_unit: 0.0,
            m_is_one: true,
        });
    }
    let mf = m as f64;
    let rhs_unit = delta.powi(-2) * mf * mf.ln().powi(2) * (d as f64).ln() * (1.0 / epsilon).ln();
    Ok(RipSampleReport {
        lhs,
        rhs_unit,
        m_is_one: false,
    })
}
