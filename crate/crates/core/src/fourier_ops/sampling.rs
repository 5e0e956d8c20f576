//! Random sampling points in [0, 2π)^d under three probability models.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_ops::FrequencySet;
use crate::rng::sub_rng;

/// How sampling points are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingModel {
    /// Independent uniform draws from the continuous cube [0, 2π)^d.
    ContinuousUniform,
    /// Independent uniform draws from the grid {2πj/q : j = 0..q-1}^d;
    /// points may repeat.
    GridWithReplacement { q: u32 },
    /// A uniformly random size-N subset of the grid {2πj/q}^d; points are
    /// pairwise distinct.
    GridSubset { q: u32 },
}

impl SamplingModel {
    /// Grid size for the grid-based models, `None` for the continuous model.
    pub fn grid_size(&self) -> Option<u32> {
        match self {
            SamplingModel::ContinuousUniform => None,
            SamplingModel::GridWithReplacement { q } | SamplingModel::GridSubset { q } => Some(*q),
        }
    }

    /// Short stable label used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            SamplingModel::ContinuousUniform => "continuous",
            SamplingModel::GridWithReplacement { .. } => "grid_replacement",
            SamplingModel::GridSubset { .. } => "grid_subset",
        }
    }
}

/// N sampling points in [0, 2π)^d, together with the model and seed that
/// produced them.
///
/// For grid models the integer grid coordinates are kept alongside the
/// floating-point points; they drive the FFT fast path of the measurement
/// operator and are reconstructed (with validation) when a set is
/// deserialized from JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingSet {
    points: Vec<Vec<f64>>,
    model: SamplingModel,
    seed: u64,
    #[serde(skip)]
    grid_indices: Option<Vec<Vec<u32>>>,
}

#[derive(Deserialize)]
struct SamplingSetRaw {
    points: Vec<Vec<f64>>,
    model: SamplingModel,
    seed: u64,
}

impl<'de> Deserialize<'de> for SamplingSet {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = SamplingSetRaw::deserialize(deserializer)?;
        SamplingSet::from_points(raw.points, raw.model, raw.seed).map_err(serde::de::Error::custom)
    }
}

impl SamplingSet {
    /// Draws N points according to `model`, deterministically in `seed`.
    ///
    /// The frequency set is consulted for the spatial dimension and, under
    /// grid models, to reject frequency sets that alias on the grid.
    pub fn draw(fs: &FrequencySet, model: SamplingModel, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample count N must be positive".into(),
            ));
        }
        if let Some(q) = model.grid_size() {
            fs.validate_grid_compatible(q)?;
        }
        let d = fs.d();
        let mut rng = sub_rng(seed, "samples", 0);

        match model {
            SamplingModel::ContinuousUniform => {
                let points = (0..n)
                    .map(|_| (0..d).map(|_| rng.gen_range(0.0..TAU)).collect())
                    .collect();
                Ok(Self {
                    points,
                    model,
                    seed,
                    grid_indices: None,
                })
            }
            SamplingModel::GridWithReplacement { q } => {
                let indices: Vec<Vec<u32>> = (0..n)
                    .map(|_| (0..d).map(|_| rng.gen_range(0..q)).collect())
                    .collect();
                Ok(Self::from_grid_indices(indices, model, q, seed))
            }
            SamplingModel::GridSubset { q } => {
                let total = (u128::from(q)).checked_pow(d as u32).ok_or_else(|| {
                    Error::InvalidParameter(format!("grid q^d overflows: q={q}, d={d}"))
                })?;
                if n as u128 > total {
                    return Err(Error::InsufficientGridPoints {
                        requested: n,
                        available: total,
                    });
                }
                // Floyd's algorithm: a uniform size-n subset of {0,..,total-1}
                // without materializing the full range.
                let mut chosen: HashSet<u128> = HashSet::with_capacity(n);
                for j in (total - n as u128)..total {
                    let r = rng.gen_range(0..=j);
                    if !chosen.insert(r) {
                        chosen.insert(j);
                    }
                }
                let mut flat: Vec<u128> = chosen.into_iter().collect();
                flat.sort_unstable();
                let indices: Vec<Vec<u32>> = flat
                    .into_iter()
                    .map(|mut rem| {
                        let mut idx = vec![0u32; d];
                        for slot in idx.iter_mut().rev() {
                            *slot = (rem % u128::from(q)) as u32;
                            rem /= u128::from(q);
                        }
                        idx
                    })
                    .collect();
                Ok(Self::from_grid_indices(indices, model, q, seed))
            }
        }
    }

    fn from_grid_indices(indices: Vec<Vec<u32>>, model: SamplingModel, q: u32, seed: u64) -> Self {
        let points = indices
            .iter()
            .map(|idx| {
                idx.iter()
                    .map(|&j| TAU * (f64::from(j) / f64::from(q)))
                    .collect()
            })
            .collect();
        Self {
            points,
            model,
            seed,
            grid_indices: Some(indices),
        }
    }

    /// Rebuilds a sampling set from raw points, validating the model
    /// invariants (coordinates in [0, 2π); grid coordinates on the grid;
    /// distinctness under `GridSubset`).
    pub fn from_points(points: Vec<Vec<f64>>, model: SamplingModel, seed: u64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "sample count N must be positive".into(),
            ));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidParameter(
                "sampling points must share one positive dimension".into(),
            ));
        }
        for p in &points {
            for &x in p {
                if !(0.0..TAU).contains(&x) {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {x} outside [0, 2*pi)"
                    )));
                }
            }
        }
        let grid_indices = match model.grid_size() {
            None => None,
            Some(q) => {
                let mut all = Vec::with_capacity(points.len());
                for p in &points {
                    let mut idx = Vec::with_capacity(d);
                    for &x in p {
                        let j = (x * f64::from(q) / TAU).round();
                        let j = if j as u32 >= q { 0 } else { j as u32 };
                        if (x - TAU * (f64::from(j) / f64::from(q))).abs() > 1e-9 {
                            return Err(Error::InvalidParameter(format!(
                                "coordinate {x} is not a multiple of 2*pi/{q}"
                            )));
                        }
                        idx.push(j);
                    }
                    all.push(idx);
                }
                if matches!(model, SamplingModel::GridSubset { .. }) {
                    let total = (u128::from(q)).pow(d as u32);
                    if points.len() as u128 > total {
                        return Err(Error::InsufficientGridPoints {
                            requested: points.len(),
                            available: total,
                        });
                    }
                    let distinct: HashSet<&Vec<u32>> = all.iter().collect();
                    if distinct.len() != all.len() {
                        return Err(Error::InvalidParameter(
                            "grid-subset points must be pairwise distinct".into(),
                        ));
                    }
                }
                Some(all)
            }
        };
        Ok(Self {
            points,
            model,
            seed,
            grid_indices,
        })
    }

    /// Number of points N.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the set is empty (never holds for a constructed set).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spatial dimension of the points.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// The sampling points, one vector in [0, 2π)^d per row.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// The point at row `j`.
    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    /// The sampling model.
    pub fn model(&self) -> SamplingModel {
        self.model
    }

    /// The seed the set was drawn with (provenance only).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Integer grid coordinates per point, for grid models.
    pub fn grid_indices(&self) -> Option<&[Vec<u32>]> {
        self.grid_indices.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_ops::FrequencySpec;

    fn band(width: u32) -> FrequencySet {
        FrequencySet::new(1, &FrequencySpec::Symmetric { width }).unwrap()
    }

    #[test]
    fn continuous_points_in_range_and_reproducible() {
        let fs = band(16);
        let a = SamplingSet::draw(&fs, SamplingModel::ContinuousUniform, 50, 7).unwrap();
        let b = SamplingSet::draw(&fs, SamplingModel::ContinuousUniform, 50, 7).unwrap();
        let c = SamplingSet::draw(&fs, SamplingModel::ContinuousUniform, 50, 8).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), c.points());
        for p in a.points() {
            for &x in p {
                assert!((0.0..TAU).contains(&x));
            }
        }
        assert!(a.grid_indices().is_none());
    }

    #[test]
    fn grid_subset_full_grid_is_every_point_once() {
        let fs = band(16);
        let ss = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 16 }, 16, 3).unwrap();
        let idx: Vec<u32> = ss.grid_indices().unwrap().iter().map(|v| v[0]).collect();
        assert_eq!(idx, (0..16).collect::<Vec<u32>>());
    }

    #[test]
    fn grid_subset_rejects_oversubscription() {
        let fs = band(16);
        let err = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 16 }, 17, 3);
        assert!(matches!(
            err,
            Err(Error::InsufficientGridPoints {
                requested: 17,
                available: 16
            })
        ));
    }

    #[test]
    fn grid_subset_points_distinct_multidim() {
        let fs = FrequencySet::new(2, &FrequencySpec::Box { q: 8 }).unwrap();
        let ss = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 8 }, 40, 11).unwrap();
        let distinct: HashSet<&Vec<u32>> = ss.grid_indices().unwrap().iter().collect();
        assert_eq!(distinct.len(), 40);
        for p in ss.points() {
            for &x in p {
                assert!((0.0..TAU).contains(&x));
                let scaled = x * 8.0 / TAU;
                assert!((scaled - scaled.round()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_replacement_frequencies_concentrate() {
        // q=2: each coordinate hits grid point 0 with probability 1/2; over
        // N=1000 draws the count stays within 3 binomial standard deviations.
        let fs = FrequencySet::new(1, &FrequencySpec::Range { lo: 0, hi: 1 }).unwrap();
        let ss =
            SamplingSet::draw(&fs, SamplingModel::GridWithReplacement { q: 2 }, 1000, 5).unwrap();
        let zeros = ss
            .grid_indices()
            .unwrap()
            .iter()
            .filter(|v| v[0] == 0)
            .count() as f64;
        let sd = (1000.0f64 * 0.25).sqrt();
        assert!((zeros - 500.0).abs() <= 3.0 * sd, "zeros = {zeros}");
    }

    #[test]
    fn grid_replacement_can_repeat() {
        let fs = FrequencySet::new(1, &FrequencySpec::Range { lo: 0, hi: 1 }).unwrap();
        let ss =
            SamplingSet::draw(&fs, SamplingModel::GridWithReplacement { q: 2 }, 100, 5).unwrap();
        let distinct: HashSet<&Vec<u32>> = ss.grid_indices().unwrap().iter().collect();
        assert!(distinct.len() < 100);
    }

    #[test]
    fn aliasing_frequency_set_rejected_for_grid() {
        let fs = band(256);
        let err = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 128 }, 10, 1);
        assert!(matches!(err, Err(Error::GridAliasing { q: 128, .. })));
    }

    #[test]
    fn json_round_trip_reconstructs_grid_indices() {
        let fs = band(16);
        let ss = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 16 }, 9, 42).unwrap();
        let json = serde_json::to_string(&ss).unwrap();
        let back: SamplingSet = serde_json::from_str(&json).unwrap();
        assert_eq!(ss, back);
        assert_eq!(ss.grid_indices(), back.grid_indices());

        let cont = SamplingSet::draw(&fs, SamplingModel::ContinuousUniform, 9, 42).unwrap();
        let json = serde_json::to_string(&cont).unwrap();
        let back: SamplingSet = serde_json::from_str(&json).unwrap();
        assert_eq!(cont, back);
    }

    #[test]
    fn subset_statistics_are_uniform() {
        // Marginal inclusion probability of each grid point is N/q; check a
        // small case against a generous binomial band over repeated draws.
        let fs = band(8);
        let mut counts = [0u32; 8];
        let trials: u64 = 4000;
        for t in 0..trials {
            let ss = SamplingSet::draw(&fs, SamplingModel::GridSubset { q: 8 }, 3, t).unwrap();
            for v in ss.grid_indices().unwrap() {
                counts[v[0] as usize] += 1;
            }
        }
        let expect = trials as f64 * 3.0 / 8.0;
        let sd = (trials as f64 * (3.0 / 8.0) * (5.0 / 8.0)).sqrt();
        for (j, &c) in counts.iter().enumerate() {
            assert!(
                (f64::from(c) - expect).abs() <= 4.0 * sd,
                "grid point {j}: count {c} vs expected {expect}"
            );
        }
    }
}
