//! Monte-Carlo experiment runner: seeded trial generation, both recovery
//! methods on identical data, success/error aggregation, and CSV/JSON
//! emission.
//!
//! Every trial derives its randomness from `(master_seed, trial_index)`
//! alone, and trials are assigned disjoint global indices across the sweep,
//! so results are reproducible bit-for-bit and independent of thread
//! scheduling. Within a trial, all configured methods consume the identical
//! `(c, X, η)` triple; a hash of that triple is stored in each record so the
//! pairing can be asserted after the fact.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::gram_eig_extremes;
use crate::bpdn::{bpdn_solve, BpdnConfig};
use crate::error::{Error, Result};
use crate::fourier_ops::{
    noise_on_sphere, FrequencySet, FrequencySpec, MeasurementOperator, SamplingModel, SamplingSet,
    SparseCoefficients,
};
use crate::linalg::{l2_dist, l2_norm};
use crate::omp::{omp_recover, support_match, OmpConfig, OmpStatus};
use crate::rng::sub_seed;

/// Default relative modulus threshold for extracting a support from a
/// basis-pursuit solution (which is not exactly sparse).
pub const DEFAULT_BPDN_SUPPORT_THRESHOLD: f64 = 1e-3;

/// A recovery method the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Omp,
    Bpdn,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Omp => "omp",
            Method::Bpdn => "bpdn",
        }
    }
}

/// What the sweep varies: the sparsity (at fixed noise) or the noise level
/// (at fixed sparsity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Vary M; the configured `sigma` applies at every point.
    Sparsity { values: Vec<usize> },
    /// Vary σ at fixed sparsity `m`.
    Noise { m: usize, values: Vec<f64> },
}

impl Sweep {
    /// Column name of the swept variable in emitted tables.
    pub fn var_name(&self) -> &'static str {
        match self {
            Sweep::Sparsity { .. } => "M",
            Sweep::Noise { .. } => "sigma",
        }
    }

    fn points(&self, base_sigma: f64) -> Vec<(usize, f64, f64)> {
        // (m, sigma, sweep_value)
        match self {
            Sweep::Sparsity { values } => {
                values.iter().map(|&m| (m, base_sigma, m as f64)).collect()
            }
            Sweep::Noise { m, values } => values.iter().map(|&s| (*m, s, s)).collect(),
        }
    }
}

/// Extra knobs for the greedy solver inside sweeps. The iteration count is
/// always exactly M; an optional residual tolerance adds an early stop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmpOptions {
    pub residual_tol: Option<f64>,
}

/// Full description of a sweep experiment; deserializable from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Frequency-set specification (band, range, box, or explicit list).
    pub frequencies: FrequencySpec,
    /// Spatial dimension d.
    pub d: usize,
    /// Number of samples N.
    pub n: usize,
    /// Noise level used by sparsity sweeps.
    pub sigma: f64,
    /// Trials per (model, sweep point).
    pub trials: usize,
    /// The swept variable and its values.
    pub sweep: Sweep,
    /// Sampling models to run (each gets its own rows).
    pub models: Vec<SamplingModel>,
    /// Recovery methods to run on each trial's data.
    pub methods: Vec<Method>,
    /// Root of the deterministic seed tree.
    pub master_seed: u64,
    /// Greedy-solver options.
    pub omp: OmpOptions,
    /// Basis-pursuit solver options; its `sigma` field is overridden by the
    /// trial's noise level.
    pub bpdn: BpdnConfig,
    /// Relative modulus threshold for basis-pursuit support extraction.
    pub bpdn_support_threshold: f64,
    /// Attach per-trial records to the JSON report.
    pub include_records: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            frequencies: FrequencySpec::Symmetric { width: 256 },
            d: 1,
            n: 50,
            sigma: 0.0,
            trials: 100,
            sweep: Sweep::Sparsity { values: vec![4] },
            models: vec![SamplingModel::ContinuousUniform],
            methods: vec![Method::Omp, Method::Bpdn],
            master_seed: 0,
            omp: OmpOptions::default(),
            bpdn: BpdnConfig::default(),
            bpdn_support_threshold: DEFAULT_BPDN_SUPPORT_THRESHOLD,
            include_records: false,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must be non-empty".into()));
        }
        if self.methods.len() > 2 || (self.methods.len() == 2 && self.methods[0] == self.methods[1])
        {
            return Err(Error::InvalidConfig("duplicate method listed".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidConfig("models must be non-empty".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidRadius(self.sigma));
        }
        let sweep_ok = match &self.sweep {
            Sweep::Sparsity { values } => values.iter().all(|&m| m >= 1),
            Sweep::Noise { m, values } => {
                *m >= 1 && values.iter().all(|&s| s >= 0.0 && s.is_finite())
            }
        };
        if !sweep_ok {
            return Err(Error::InvalidConfig(
                "sweep values must be positive sparsities or nonnegative noise levels".into(),
            ));
        }
        if !(self.bpdn_support_threshold > 0.0 && self.bpdn_support_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "bpdn_support_threshold must lie in (0,1), got {}",
                self.bpdn_support_threshold
            )));
        }
        Ok(())
    }
}

/// One cell of the sweep: a sparsity, a noise level, and a sampling model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub m: usize,
    pub sigma: f64,
    pub model: SamplingModel,
}

/// Outcome of one solver run on one trial's data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Global trial index; the seed derives from it and the master seed.
    pub trial_index: u64,
    pub m: usize,
    pub sigma: f64,
    pub method: Method,
    /// Sampling-model label ("continuous", "grid_replacement", "grid_subset").
    pub model: String,
    /// Extracted support equals the true support exactly.
    pub support_recovered: bool,
    /// `‖c̃ − c‖₂`.
    pub l2_error: f64,
    /// Final data residual of the solver.
    pub residual_norm: f64,
    /// `‖F_X c‖₂` of the trial's clean signal.
    pub sample_norm: f64,
    /// Smallest eigenvalue of the normalized Gram matrix on the true support.
    pub lambda_min: f64,
    /// Solver time in seconds (excluded from determinism comparisons).
    pub wall_time: f64,
    /// The per-trial seed, `sub_seed(master_seed, "trial", trial_index)`.
    pub seed: u64,
    /// Hash of the trial's `(c, X, η)`; equal across methods within a trial.
    pub data_hash: u64,
    /// Whether the solver finished its planned course.
    pub converged: bool,
}

/// One emitted table row: aggregates for a (sweep point, method, model) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub method: String,
    pub model: String,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_l2_error: f64,
    pub mean_sample_norm: f64,
}

/// Result of a sweep: table rows, plus per-trial records when requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub rows: Vec<AggregateRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub records: Option<Vec<TrialRecord>>,
}

fn fnv1a(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
}

fn hash_instance(c: &SparseCoefficients, x: &SamplingSet, eta: &[Complex64]) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for &k in c.support() {
        fnv1a(&mut h, &(k as u64).to_le_bytes());
    }
    for v in c.values() {
        fnv1a(&mut h, &v.re.to_le_bytes());
        fnv1a(&mut h, &v.im.to_le_bytes());
    }
    for p in x.points() {
        for coord in p {
            fnv1a(&mut h, &coord.to_le_bytes());
        }
    }
    for v in eta {
        fnv1a(&mut h, &v.re.to_le_bytes());
        fnv1a(&mut h, &v.im.to_le_bytes());
    }
    h
}

/// Extracts the support of a basis-pursuit solution: the indices whose
/// modulus exceeds `threshold · max_k |c_k|`, in increasing order.
pub fn bpdn_support(coefficients: &[Complex64], threshold: f64) -> Vec<usize> {
    let max_mod = coefficients.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_mod == 0.0 {
        return Vec::new();
    }
    coefficients
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > threshold * max_mod)
        .map(|(k, _)| k)
        .collect()
}

/// Runs every configured method on one freshly drawn instance.
///
/// The instance — support and coefficients, sampling set, and spherical
/// noise — derives entirely from `sub_seed(master_seed, "trial",
/// trial_index)`, and all methods see the identical data. The greedy solver
/// runs exactly `point.m` iterations; the basis-pursuit solver uses the
/// trial's σ as its constraint radius. Solver non-convergence is recorded in
/// the `converged` flag, never raised as an error.
pub fn run_trial(
    cfg: &ExperimentConfig,
    point: SweepPoint,
    trial_index: u64,
) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let fs = FrequencySet::new(cfg.d, &cfg.frequencies)?;
    run_trial_prepared(cfg, &fs, point, trial_index)
}

/// [`run_trial`] with a pre-built frequency set (the sweep loop avoids
/// rebuilding it per trial).
fn run_trial_prepared(
    cfg: &ExperimentConfig,
    fs: &FrequencySet,
    point: SweepPoint,
    trial_index: u64,
) -> Result<Vec<TrialRecord>> {
    let seed = sub_seed(cfg.master_seed, "trial", trial_index);
    let c = SparseCoefficients::draw(fs, point.m, seed)?;
    let x = SamplingSet::draw(fs, point.model, cfg.n, seed)?;
    let eta = noise_on_sphere(cfg.n, point.sigma, seed)?;
    let data_hash = hash_instance(&c, &x, &eta);
    let op = MeasurementOperator::new(fs.clone(), x)?;

    let clean = op.forward(c.values())?;
    let sample_norm = l2_norm(&clean);
    let y: Vec<Complex64> = clean.iter().zip(&eta).map(|(&a, &b)| a + b).collect();
    let (lambda_min, _) = gram_eig_extremes(&op, c.support())?;

    let base = TrialRecord {
        trial_index,
        m: point.m,
        sigma: point.sigma,
        method: Method::Omp,
        model: point.model.label().to_string(),
        support_recovered: false,
        l2_error: 0.0,
        residual_norm: 0.0,
        sample_norm,
        lambda_min,
        wall_time: 0.0,
        seed,
        data_hash,
        converged: false,
    };

    let mut records = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let record = match method {
            Method::Omp => {
                let omp_cfg = match cfg.omp.residual_tol {
                    Some(tol) => OmpConfig::with_sparsity_and_tolerance(point.m, tol),
                    None => OmpConfig::with_sparsity(point.m),
                };
                let start = Instant::now();
                let outcome = omp_recover(&op, &y, &omp_cfg);
                let wall_time = start.elapsed().as_secs_f64();
                let (result, rank_ok) = match outcome {
                    Ok(res) => (res, true),
                    Err(Error::RankDeficient { partial, .. }) => (*partial, false),
                    Err(other) => return Err(other),
                };
                TrialRecord {
                    method,
                    support_recovered: support_match(c.support(), &result),
                    l2_error: l2_dist(result.coefficients.values(), c.values()),
                    residual_norm: result.residual_norm,
                    wall_time,
                    converged: rank_ok && !matches!(result.status, OmpStatus::Stalled),
                    ..base.clone()
                }
            }
            Method::Bpdn => {
                let bpdn_cfg = BpdnConfig {
                    sigma: point.sigma,
                    ..cfg.bpdn
                };
                let start = Instant::now();
                let res = bpdn_solve(&op, &y, &bpdn_cfg)?;
                let wall_time = start.elapsed().as_secs_f64();
                let support = bpdn_support(&res.coefficients, cfg.bpdn_support_threshold);
                TrialRecord {
                    method,
                    support_recovered: support == c.support(),
                    l2_error: l2_dist(&res.coefficients, c.values()),
                    residual_norm: res.residual_norm,
                    wall_time,
                    converged: res.converged,
                    ..base.clone()
                }
            }
        };
        records.push(record);
    }
    Ok(records)
}

/// Runs the full sweep: `models × sweep points × trials × methods`.
///
/// Trials execute in parallel; each carries a globally unique index from
/// which its seed derives, and aggregation folds records in index order, so
/// the outcome is identical at any thread count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<AggregateStats> {
    cfg.validate()?;
    let fs = FrequencySet::new(cfg.d, &cfg.frequencies)?;
    let points = cfg.sweep.points(cfg.sigma);
    let var_name = cfg.sweep.var_name();

    let mut rows = Vec::new();
    let mut all_records = Vec::new();
    let mut block = 0u64;
    for &model in &cfg.models {
        for &(m, sigma, sweep_value) in &points {
            let point = SweepPoint { m, sigma, model };
            let base_index = block * cfg.trials as u64;
            block += 1;
            let mut records: Vec<TrialRecord> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_trial_prepared(cfg, &fs, point, base_index + t))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            records.sort_by_key(|r| (r.trial_index, r.method != Method::Omp));

            for &method in &cfg.methods {
                let cell: Vec<&TrialRecord> =
                    records.iter().filter(|r| r.method == method).collect();
                let trials = cell.len();
                let successes = cell.iter().filter(|r| r.support_recovered).count();
                let sum_err: f64 = cell.iter().map(|r| r.l2_error).sum();
                let sum_norm: f64 = cell.iter().map(|r| r.sample_norm).sum();
                rows.push(AggregateRow {
                    sweep_var: var_name.to_string(),
                    sweep_value,
                    method: method.label().to_string(),
                    model: model.label().to_string(),
                    trials,
                    success_rate: successes as f64 / trials as f64,
                    mean_l2_error: sum_err / trials as f64,
                    mean_sample_norm: sum_norm / trials as f64,
                });
            }
            all_records.extend(records);
        }
    }
    Ok(AggregateStats {
        rows,
        records: cfg.include_records.then_some(all_records),
    })
}

/// Output format for [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Csv,
    Json,
}

const CSV_HEADER: [&str; 8] = [
    "sweep_var",
    "sweep_value",
    "method",
    "model",
    "trials",
    "success_rate",
    "mean_l2_error",
    "mean_sample_norm",
];

/// Writes the aggregate table to `path` as CSV (one row per sweep point ×
/// method × model) or as JSON (the whole [`AggregateStats`], including
/// per-trial records when present).
pub fn emit(stats: &AggregateStats, format: EmitFormat, path: &Path) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    emit_to_writer(stats, format, file).map_err(|err| match err {
        // Re-attach the path so the message names the file that failed.
        Error::Io { source, .. } => io_err(source),
        other => other,
    })
}

/// [`emit`] targeting any writer (stdout, a buffer, a socket).
pub fn emit_to_writer<W: Write>(
    stats: &AggregateStats,
    format: EmitFormat,
    writer: W,
) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: "<writer>".into(),
        source,
    };
    match format {
        EmitFormat::Csv => {
            let mut writer = csv::Writer::from_writer(writer);
            if stats.rows.is_empty() {
                writer.write_record(CSV_HEADER)?;
            }
            for row in &stats.rows {
                writer.serialize(row)?;
            }
            writer.flush().map_err(io_err)?;
        }
        EmitFormat::Json => {
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, stats)?;
            writer.write_all(b"\n").map_err(io_err)?;
            writer.flush().map_err(io_err)?;
        }
    }
    Ok(())
}
