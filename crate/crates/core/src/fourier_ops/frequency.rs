//! Frequency sets: ordered collections of integer frequency vectors in Z^d.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the cardinality of a generated frequency set, to keep
/// descriptor typos from exhausting memory.
const MAX_CARDINALITY: usize = 1 << 24;

/// Descriptor for generating a [`FrequencySet`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencySpec {
    /// The symmetric band `{-w/2 + 1, ..., w/2}` of width `w` in each
    /// dimension (for odd `w` this is `{-(w-1)/2, ..., (w-1)/2}`).
    Symmetric { width: u32 },
    /// The inclusive range `{lo, ..., hi}` in each dimension.
    Range { lo: i64, hi: i64 },
    /// The non-negative box `{0, ..., q-1}` in each dimension.
    Box { q: u32 },
    /// An explicit list of frequency vectors, each of length `d`.
    /// The list is sorted lexicographically; duplicates are rejected.
    Explicit { freqs: Vec<Vec<i64>> },
}

/// An ordered set of `D` distinct integer frequency vectors in Z^d.
///
/// The ordering is lexicographic and fixed at construction, so a coefficient
/// vector index always refers to the same frequency across runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencySet {
    d: usize,
    freqs: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct FrequencySetRaw {
    d: usize,
    freqs: Vec<Vec<i64>>,
}

// Hand-written so that deserialized data passes through the validating
// constructor (distinctness, lexicographic order, non-emptiness).
impl<'de> Deserialize<'de> for FrequencySet {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = FrequencySetRaw::deserialize(deserializer)?;
        FrequencySet::new(raw.d, &FrequencySpec::Explicit { freqs: raw.freqs })
            .map_err(serde::de::Error::custom)
    }
}

impl FrequencySet {
    /// Builds a frequency set in dimension `d` from a descriptor.
    ///
    /// The resulting ordering is lexicographic regardless of the order in
    /// which an `Explicit` descriptor lists its vectors.
    pub fn new(d: usize, spec: &FrequencySpec) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidFrequencySet(
                "spatial dimension d must be positive".into(),
            ));
        }
        let per_dim: Option<Vec<i64>> = match spec {
            FrequencySpec::Symmetric { width } => {
                if *width == 0 {
                    return Err(Error::InvalidFrequencySet(
                        "symmetric width must be positive".into(),
                    ));
                }
                let hi = i64::from(*width) / 2;
                let lo = hi - i64::from(*width) + 1;
                Some((lo..=hi).collect())
            }
            FrequencySpec::Range { lo, hi } => {
                if lo > hi {
                    return Err(Error::InvalidFrequencySet(format!(
                        "empty range: lo={lo} > hi={hi}"
                    )));
                }
                Some((*lo..=*hi).collect())
            }
            FrequencySpec::Box { q } => {
                if *q == 0 {
                    return Err(Error::InvalidFrequencySet(
                        "box size q must be positive".into(),
                    ));
                }
                Some((0..i64::from(*q)).collect())
            }
            FrequencySpec::Explicit { .. } => None,
        };

        let mut freqs: Vec<Vec<i64>> = match (per_dim, spec) {
            (Some(axis), _) => {
                let card = axis.len().checked_pow(d as u32);
                if card.is_none() || card.unwrap() > MAX_CARDINALITY {
                    return Err(Error::InvalidFrequencySet(format!(
                        "descriptor generates more than {MAX_CARDINALITY} frequencies"
                    )));
                }
                cartesian_power(&axis, d)
            }
            (None, FrequencySpec::Explicit { freqs }) => {
                for f in freqs {
                    if f.len() != d {
                        return Err(Error::InvalidFrequencySet(format!(
                            "frequency vector {f:?} has length {}, expected d={d}",
                            f.len()
                        )));
                    }
                }
                freqs.clone()
            }
            _ => unreachable!(),
        };

        freqs.sort();
        if freqs.is_empty() {
            return Err(Error::InvalidFrequencySet("empty frequency set".into()));
        }
        if let Some(dup) = freqs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidFrequencySet(format!(
                "duplicate frequency vector {:?}",
                dup[0]
            )));
        }
        Ok(Self { d, freqs })
    }

    /// Spatial dimension d.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Cardinality D of the set.
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    /// True when the set is empty (never holds for a constructed set).
    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// The frequency vectors in lexicographic order.
    pub fn freqs(&self) -> &[Vec<i64>] {
        &self.freqs
    }

    /// The frequency vector at column index `k`.
    pub fn freq(&self, k: usize) -> &[i64] {
        &self.freqs[k]
    }

    /// Cardinality of the difference set `{j - k : j, k distinct in the set}`.
    ///
    /// Always at most D(D-1); zero never occurs because the vectors are
    /// distinct.
    pub fn difference_set_size(&self) -> usize {
        if self.d == 1 {
            let mut diffs: HashSet<i64> = HashSet::new();
            for (a, fj) in self.freqs.iter().enumerate() {
                for fk in self.freqs.iter().take(a) {
                    let delta = fj[0] - fk[0];
                    diffs.insert(delta);
                    diffs.insert(-delta);
                }
            }
            return diffs.len();
        }
        let mut diffs: HashSet<Vec<i64>> = HashSet::new();
        let mut buf = vec![0i64; self.d];
        for (a, fj) in self.freqs.iter().enumerate() {
            for fk in self.freqs.iter().take(a) {
                for sign in [1i64, -1] {
                    for (b, (x, y)) in fj.iter().zip(fk).enumerate() {
                        buf[b] = sign * (x - y);
                    }
                    if !diffs.contains(buf.as_slice()) {
                        diffs.insert(buf.clone());
                    }
                }
            }
        }
        diffs.len()
    }

    /// For d = 1, returns `(k_min, k_max)` when the set is a contiguous run
    /// `{k_min, ..., k_max}`; `None` otherwise.
    pub fn contiguous_1d(&self) -> Option<(i64, i64)> {
        if self.d != 1 {
            return None;
        }
        let lo = self.freqs[0][0];
        let hi = self.freqs[self.freqs.len() - 1][0];
        // Sorted and distinct, so contiguity is equivalent to the count matching.
        if (hi - lo) as usize + 1 == self.freqs.len() {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Checks that the map `k -> k mod q` (componentwise) is injective on the
    /// set, which is required for grid sampling with grid size `q`: on the
    /// grid `{2*pi*j/q}` the characters for `k` and `k + q*e_t` coincide, so
    /// aliased frequencies would be indistinguishable.
    pub fn validate_grid_compatible(&self, q: u32) -> Result<()> {
        if q == 0 {
            return Err(Error::InvalidParameter(
                "grid size q must be positive".into(),
            ));
        }
        let qi = i64::from(q);
        let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(self.freqs.len());
        for f in &self.freqs {
            let reduced: Vec<i64> = f.iter().map(|k| k.rem_euclid(qi)).collect();
            if !seen.insert(reduced.clone()) {
                return Err(Error::GridAliasing {
                    q,
                    detail: format!(
                        "frequency {f:?} collides with an earlier one at residue {reduced:?}"
                    ),
                });
            }
        }
        Ok(())
    }
}

/// All d-fold combinations of `axis`, in lexicographic order.
fn cartesian_power(axis: &[i64], d: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut f = Vec::with_capacity(d);
                f.extend_from_slice(prefix);
                f.push(v);
                next.push(f);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_band_matches_convention() {
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 256 }).unwrap();
        assert_eq!(fs.len(), 256);
        assert_eq!(fs.freq(0), &[-127]);
        assert_eq!(fs.freq(255), &[128]);
        assert_eq!(fs.contiguous_1d(), Some((-127, 128)));

        let odd = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 5 }).unwrap();
        let vals: Vec<i64> = odd.freqs().iter().map(|f| f[0]).collect();
        assert_eq!(vals, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn singleton_range() {
        let fs = FrequencySet::new(1, &FrequencySpec::Range { lo: 0, hi: 0 }).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.freq(0), &[0]);
        assert_eq!(fs.difference_set_size(), 0);
    }

    #[test]
    fn box_2d_is_lexicographic() {
        let fs = FrequencySet::new(2, &FrequencySpec::Box { q: 4 }).unwrap();
        assert_eq!(fs.len(), 16);
        assert_eq!(fs.freq(0), &[0, 0]);
        assert_eq!(fs.freq(1), &[0, 1]);
        assert_eq!(fs.freq(15), &[3, 3]);
    }

    #[test]
    fn difference_set_of_contiguous_band() {
        // For a contiguous run of length D the differences are
        // {-(D-1), ..., D-1} \ {0}.
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 256 }).unwrap();
        assert_eq!(fs.difference_set_size(), 510);
    }

    #[test]
    fn difference_set_brute_force_agreement() {
        let fs = FrequencySet::new(
            1,
            &FrequencySpec::Explicit {
                freqs: vec![vec![0], vec![1], vec![3]],
            },
        )
        .unwrap();
        assert_eq!(fs.difference_set_size(), 6);

        // d=2 cross-check against direct enumeration.
        let fs2 = FrequencySet::new(2, &FrequencySpec::Box { q: 3 }).unwrap();
        let mut brute: HashSet<(i64, i64)> = HashSet::new();
        for a in fs2.freqs() {
            for b in fs2.freqs() {
                if a != b {
                    brute.insert((a[0] - b[0], a[1] - b[1]));
                }
            }
        }
        assert_eq!(fs2.difference_set_size(), brute.len());
    }

    #[test]
    fn explicit_sorted_and_deduplicated() {
        let fs = FrequencySet::new(
            1,
            &FrequencySpec::Explicit {
                freqs: vec![vec![5], vec![-3], vec![0]],
            },
        )
        .unwrap();
        let vals: Vec<i64> = fs.freqs().iter().map(|f| f[0]).collect();
        assert_eq!(vals, vec![-3, 0, 5]);

        let dup = FrequencySet::new(
            1,
            &FrequencySpec::Explicit {
                freqs: vec![vec![1], vec![1]],
            },
        );
        assert!(matches!(dup, Err(Error::InvalidFrequencySet(_))));
    }

    #[test]
    fn empty_specs_rejected() {
        assert!(FrequencySet::new(1, &FrequencySpec::Explicit { freqs: vec![] }).is_err());
        assert!(FrequencySet::new(0, &FrequencySpec::Box { q: 4 }).is_err());
        assert!(FrequencySet::new(1, &FrequencySpec::Range { lo: 3, hi: 1 }).is_err());
    }

    #[test]
    fn grid_compatibility() {
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 256 }).unwrap();
        // The band {-127,...,128} is injective mod 256 but aliases mod 128.
        assert!(fs.validate_grid_compatible(256).is_ok());
        assert!(matches!(
            fs.validate_grid_compatible(128),
            Err(Error::GridAliasing { q: 128, .. })
        ));
    }

    #[test]
    fn json_round_trip_revalidates() {
        let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width: 8 }).unwrap();
        let json = serde_json::to_string(&fs).unwrap();
        let back: FrequencySet = serde_json::from_str(&json).unwrap();
        assert_eq!(fs, back);

        let bad: std::result::Result<FrequencySet, _> =
            serde_json::from_str(r#"{"d":1,"freqs":[[1],[1]]}"#);
        assert!(bad.is_err());
    }
}
