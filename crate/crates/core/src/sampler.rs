//! Missing-data simulation.
//!
//! Two schemes are supported:
//!
//! * **MCAR**: `m` indices drawn uniformly without replacement.
//! * **MAR** (block form): runs of `k` consecutive indices placed at uniform
//!   random starts until exactly `m` indices are withheld. Indices that are
//!   already withheld do not count again, and the last placement is cut short
//!   once the total reaches `m`.
//!
//! Here `m = round(b * N / 100)` with round-half-away-from-zero, and `k` is
//! either `round(block * m / 100)` (percent mode) or `round(block)` (count
//! mode). Every draw is a pure function of `(spec, N)`; the RNG is ChaCha8
//! seeded from `spec.seed`, so masks are identical across platforms.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MissingnessMask;

/// Upper bound on MAR block placements for a single mask.
pub const MAX_PLACEMENTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mcar,
    Mar,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Mcar => "mcar",
            Scheme::Mar => "mar",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcar" => Ok(Scheme::Mcar),
            "mar" => Ok(Scheme::Mar),
            other => Err(Error::Config(format!(
                "unknown sampling scheme `{other}` (expected mcar or mar)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub scheme: Scheme,
    /// Percent of the series to withhold, in `(0, 100)`.
    pub percent_missing: f64,
    /// Block size, as a percent of the withheld count or as a count.
    pub block: f64,
    pub block_is_percent: bool,
    pub seed: u64,
}

impl SampleSpec {
    pub fn mcar(percent_missing: f64, seed: u64) -> Self {
        Self {
            scheme: Scheme::Mcar,
            percent_missing,
            block: 50.0,
            block_is_percent: true,
            seed,
        }
    }

    pub fn mar(percent_missing: f64, block: f64, block_is_percent: bool, seed: u64) -> Self {
        Self {
            scheme: Scheme::Mar,
            percent_missing,
            block,
            block_is_percent,
            seed,
        }
    }

    pub fn validate(&self, series_length: usize) -> Result<()> {
        if !(self.percent_missing > 0.0 && self.percent_missing < 100.0) {
            return Err(Error::Config(format!(
                "percent missing must lie in (0, 100), got {}",
                self.percent_missing
            )));
        }
        if !(self.block.is_finite() && self.block > 0.0) {
            return Err(Error::BlockSize(format!(
                "block must be positive, got {}",
                self.block
            )));
        }
        if self.block_is_percent {
            if self.block > 100.0 {
                return Err(Error::BlockSize(format!(
                    "block percent must be at most 100, got {}",
                    self.block
                )));
            }
        } else if self.block.fract() != 0.0 {
            return Err(Error::BlockSize(format!(
                "block count must be an integer, got {}",
                self.block
            )));
        } else if self.scheme == Scheme::Mar && self.block > series_length as f64 {
            return Err(Error::BlockSize(format!(
                "block of {} exceeds series length {series_length}",
                self.block
            )));
        }
        Ok(())
    }

    /// Number of indices withheld from a series of `series_length`.
    pub fn missing_count(&self, series_length: usize) -> usize {
        round_count(self.percent_missing * series_length as f64 / 100.0)
    }

    /// MAR block length for a withheld count of `missing`.
    pub fn block_length(&self, missing: usize) -> usize {
        if self.block_is_percent {
            round_count(self.block * missing as f64 / 100.0)
        } else {
            round_count(self.block)
        }
    }
}

// f64::round is round-half-away-from-zero.
fn round_count(x: f64) -> usize {
    x.round().max(0.0) as usize
}

/// Draws one mask for a series of `series_length`.
pub fn sample_mask(spec: &SampleSpec, series_length: usize) -> Result<MissingnessMask> {
    if series_length < 2 {
        return Err(Error::Degenerate(format!(
            "series of length {series_length} is too short to sample"
        )));
    }
    spec.validate(series_length)?;
    let m = spec.missing_count(series_length);
    if m == 0 {
        return Err(Error::Degenerate(format!(
            "{}% of {series_length} observations rounds to zero",
            spec.percent_missing
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.scheme {
        Scheme::Mcar => {
            let removed = index::sample(&mut rng, series_length, m).into_vec();
            MissingnessMask::from_unsorted(removed, series_length)
        }
        Scheme::Mar => {
            let k = spec.block_length(m);
            if k == 0 {
                return Err(Error::BlockSize(format!(
                    "block of {}{} rounds to zero observations",
                    spec.block,
                    if spec.block_is_percent { "%" } else { "" }
                )));
            }
            if k > series_length {
                return Err(Error::BlockSize(format!(
                    "block of {k} observations exceeds series length {series_length}"
                )));
            }
            place_blocks(&mut rng, series_length, m, k)
        }
    }
}

fn place_blocks(
    rng: &mut ChaCha8Rng,
    series_length: usize,
    m: usize,
    k: usize,
) -> Result<MissingnessMask> {
    let mut flags = vec![false; series_length];
    let mut count = 0;
    // Starts are restricted so each block fits entirely inside the series;
    // the only block ever cut short is the last one.
    let last_start = series_length - k;
    for _ in 0..MAX_PLACEMENTS {
        let start = rng.gen_range(0..=last_start);
        for flag in &mut flags[start..start + k] {
            if !*flag {
                *flag = true;
                count += 1;
                if count == m {
                    break;
                }
            }
        }
        if count == m {
            let removed = flags
                .iter()
                .enumerate()
                .filter_map(|(i, &f)| f.then_some(i))
                .collect();
            return MissingnessMask::new(removed, series_length);
        }
    }
    Err(Error::Degenerate(format!(
        "could not withhold {m} of {series_length} observations in blocks of {k} \
         within {MAX_PLACEMENTS} placements"
    )))
}

/// Maximal runs of consecutive withheld indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub runs: Vec<usize>,
}

impl RunSummary {
    pub fn count(&self) -> usize {
        self.runs.len()
    }

    pub fn min(&self) -> Option<usize> {
        self.runs.iter().copied().min()
    }

    pub fn max(&self) -> Option<usize> {
        self.runs.iter().copied().max()
    }

    pub fn total(&self) -> usize {
        self.runs.iter().sum()
    }
}

pub fn describe_mask(mask: &MissingnessMask) -> RunSummary {
    let mut runs = Vec::new();
    let mut prev: Option<usize> = None;
    for &i in mask.removed() {
        match prev {
            Some(p) if p + 1 == i => *runs.last_mut().unwrap() += 1,
            _ => runs.push(1),
        }
        prev = Some(i);
    }
    RunSummary { runs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcar_exact_count() {
        let mask = sample_mask(&SampleSpec::mcar(10.0, 1), 100).unwrap();
        assert_eq!(mask.count(), 10);
    }

    #[test]
    fn mar_percent_block_example() {
        let spec = SampleSpec::mar(50.0, 20.0, true, 9);
        assert_eq!(spec.missing_count(1000), 500);
        assert_eq!(spec.block_length(500), 100);
        let mask = sample_mask(&spec, 1000).unwrap();
        assert_eq!(mask.count(), 500);
        let runs = describe_mask(&mask);
        assert!(runs.runs.iter().filter(|&&r| r < 100).count() <= 1);
    }

    #[test]
    fn mar_count_block_runs() {
        for seed in 0..100 {
            let mask = sample_mask(&SampleSpec::mar(10.0, 7.0, false, seed), 200).unwrap();
            assert_eq!(mask.count(), 20);
            let runs = describe_mask(&mask);
            assert_eq!(runs.total(), 20);
            assert!(
                runs.runs.iter().filter(|&&r| r < 7).count() <= 1,
                "{runs:?}"
            );
        }
    }

    #[test]
    fn block_larger_than_missing_count_truncates_to_single_run() {
        // 10% of 240 is 24; a 120-observation block is cut to one run of 24.
        for seed in 0..20 {
            let mask = sample_mask(&SampleSpec::mar(10.0, 120.0, false, seed), 240).unwrap();
            assert_eq!(describe_mask(&mask).runs, vec![24]);
        }
    }

    #[test]
    fn describe_mask_examples() {
        let m = MissingnessMask::new(vec![2, 3, 4, 9], 12).unwrap();
        assert_eq!(describe_mask(&m).runs, vec![3, 1]);
        let m = MissingnessMask::new(vec![], 12).unwrap();
        assert!(describe_mask(&m).runs.is_empty());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        // 50% of 97 = 48.5
        assert_eq!(SampleSpec::mcar(50.0, 0).missing_count(97), 49);
        assert_eq!(SampleSpec::mcar(10.0, 0).missing_count(97), 10);
        assert_eq!(SampleSpec::mcar(10.0, 0).missing_count(20), 2);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            sample_mask(&SampleSpec::mcar(1.0, 0), 20),
            Err(Error::Degenerate(_))
        ));
        // m = 10, and 1% of 10 rounds to a zero-length block.
        assert!(matches!(
            sample_mask(&SampleSpec::mar(10.0, 1.0, true, 0), 100),
            Err(Error::BlockSize(_))
        ));
        assert!(matches!(
            sample_mask(&SampleSpec::mar(10.0, 101.0, false, 0), 100),
            Err(Error::BlockSize(_))
        ));
        assert!(matches!(
            sample_mask(&SampleSpec::mar(10.0, 2.5, false, 0), 100),
            Err(Error::BlockSize(_))
        ));
        assert!(sample_mask(&SampleSpec::mcar(100.0, 0), 100).is_err());
        assert!(sample_mask(&SampleSpec::mcar(50.0, 0), 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        for spec in [
            SampleSpec::mcar(30.0, 5),
            SampleSpec::mar(30.0, 10.0, false, 5),
        ] {
            assert_eq!(
                sample_mask(&spec, 150).unwrap(),
                sample_mask(&spec, 150).unwrap()
            );
            let other = SampleSpec { seed: 6, ..spec };
            assert_ne!(
                sample_mask(&spec, 150).unwrap(),
                sample_mask(&other, 150).unwrap()
            );
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("MCAR".parse::<Scheme>().unwrap(), Scheme::Mcar);
        assert_eq!("mar".parse::<Scheme>().unwrap(), Scheme::Mar);
        assert!("mnar".parse::<Scheme>().is_err());
    }
}
