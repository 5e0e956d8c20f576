//! Regenerates the small solver-oracle fixture instances under
//! `crates/core/fixtures/`.
//!
//! Each fixture freezes one fully materialized problem instance — frequency
//! band, sampling points, true coefficients, and measurements — small enough
//! (D ≤ 12, N ≤ 10, M ≤ 3) for an independent convex solver to handle
//! comfortably. The companion script `tools/solve_fixtures.py` fills in the
//! `reference_l1_norm` and `reference_solution` fields from that solver;
//! the integration suite then checks `bpdn_solve` against those stored
//! references, so the fixtures are committed and this generator only needs
//! to run when the instance list changes.
//!
//! Usage: `cargo run -p sparsetrig --example gen_fixtures`

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use sparsetrig::{
    noise_on_sphere, FrequencySet, FrequencySpec, MeasurementOperator, SamplingModel, SamplingSet,
    SparseCoefficients,
};

#[derive(Serialize)]
struct Fixture {
    name: String,
    seed: u64,
    d: usize,
    width: u32,
    /// The explicit frequency list, so downstream tools never re-derive the
    /// band convention.
    frequencies: Vec<i64>,
    n: usize,
    m: usize,
    sigma: f64,
    model: String,
    points: Vec<Vec<f64>>,
    support: Vec<usize>,
    /// Full length-D true coefficient vector as `[re, im]` pairs.
    c_true: Vec<[f64; 2]>,
    /// Measurements `y = F c + eta` as `[re, im]` pairs.
    y: Vec<[f64; 2]>,
    /// Filled by `tools/solve_fixtures.py`.
    reference_l1_norm: Option<f64>,
    /// Filled by `tools/solve_fixtures.py`.
    reference_solution: Option<Vec<[f64; 2]>>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // (name, seed, width, n, m, sigma)
    let specs: &[(&str, u64, u32, usize, usize, f64)] = &[
        ("noiseless_w8", 101, 8, 6, 2, 0.0),
        ("noisy_w8", 102, 8, 6, 2, 0.1),
        ("noisy_w10", 103, 10, 6, 2, 0.1),
        ("noisy_w10_m3", 104, 10, 8, 3, 0.3),
        ("noiseless_w12", 105, 12, 10, 3, 0.0),
        ("noisy_w12", 106, 12, 10, 3, 0.5),
        ("single_tone", 107, 6, 5, 1, 0.05),
        ("noisy_w12_m2", 108, 12, 8, 2, 0.2),
        ("noiseless_w10", 109, 10, 10, 3, 0.0),
        ("high_noise", 110, 12, 9, 2, 1.0),
    ];

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir)?;

    for &(name, seed, width, n, m, sigma) in specs {
        let fs_set = FrequencySet::new(1, &FrequencySpec::Symmetric { width })?;
        let c = SparseCoefficients::draw(&fs_set, m, seed)?;
        let x = SamplingSet::draw(&fs_set, SamplingModel::ContinuousUniform, n, seed)?;
        let eta = noise_on_sphere(n, sigma, seed)?;
        let points = x.points().to_vec();
        let op = MeasurementOperator::new(fs_set.clone(), x)?;
        let clean = op.forward(c.values())?;
        let y: Vec<Complex64> = clean.iter().zip(&eta).map(|(&a, &b)| a + b).collect();

        let fixture = Fixture {
            name: name.to_string(),
            seed,
            d: 1,
            width,
            frequencies: fs_set.freqs().iter().map(|k| k[0]).collect(),
            n,
            m,
            sigma,
            model: "continuous_uniform".to_string(),
            points,
            support: c.support().to_vec(),
            c_true: pairs(c.values()),
            y: pairs(&y),
            reference_l1_norm: None,
            reference_solution: None,
        };

        let path = dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(&fixture)?;
        text.push('\n');
        fs::write(&path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
