//! Carry-forward, summary-statistic and random fills.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::GappedSeries;

use super::ImputationResult;

/// Last observation carried forward. Leading gaps take the first observation.
pub fn impute_locf(g: &GappedSeries) -> Result<ImputationResult> {
    let first = g
        .values()
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or_else(|| Error::Unimputable("no observed values".into()))?;
    let mut last = first;
    let values = g
        .values()
        .iter()
        .map(|v| {
            if let Some(y) = v {
                last = *y;
            }
            last
        })
        .collect();
    Ok(ImputationResult::from_builtin(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistic {
    #[default]
    Mean,
    Median,
    Mode,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "median" => Ok(Statistic::Median),
            "mode" => Ok(Statistic::Mode),
            other => Err(Error::param(
                "na.mean",
                format!("option must be mean, median or mode, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
            Statistic::Mode => "mode",
        })
    }
}

impl Statistic {
    /// Evaluates the statistic on a non-empty sample.
    pub fn of(self, sample: &[f64]) -> f64 {
        debug_assert!(!sample.is_empty());
        match self {
            Statistic::Mean => sample.iter().sum::<f64>() / sample.len() as f64,
            Statistic::Median => {
                let mut s = sample.to_vec();
                s.sort_by(f64::total_cmp);
                let mid = s.len() / 2;
                if s.len() % 2 == 1 {
                    s[mid]
                } else {
                    0.5 * (s[mid - 1] + s[mid])
                }
            }
            // Exact-value frequency; ties go to the smallest value. Only
            // meaningful on discretised data.
            Statistic::Mode => {
                let mut s = sample.to_vec();
                s.sort_by(f64::total_cmp);
                let mut best = (s[0], 0usize);
                let mut i = 0;
                while i < s.len() {
                    let j = i + s[i..].iter().take_while(|&&x| x == s[i]).count();
                    if j - i > best.1 {
                        best = (s[i], j - i);
                    }
                    i = j;
                }
                best.0
            }
        }
    }
}

/// Fills every gap with one statistic of the observed values.
pub fn impute_statistic(g: &GappedSeries, option: Statistic) -> Result<ImputationResult> {
    let observed = g.observed_values();
    if observed.is_empty() {
        return Err(Error::Unimputable("no observed values".into()));
    }
    let fill = option.of(&observed);
    Ok(ImputationResult::from_builtin(
        g.values().iter().map(|v| v.unwrap_or(fill)).collect(),
    ))
}

/// Independent uniform draws from the observed range.
pub fn impute_random(g: &GappedSeries, seed: u64) -> Result<ImputationResult> {
    let (lo, hi) = g
        .observed()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
            (lo.min(y), hi.max(y))
        });
    if lo >= hi {
        return Err(Error::DegenerateRange(
            "random fill needs at least two distinct observed values".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = g
        .values()
        .iter()
        .map(|v| v.unwrap_or_else(|| rng.gen_range(lo..=hi)))
        .collect();
    Ok(ImputationResult::from_builtin(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gap(v: &[Option<f64>]) -> GappedSeries {
        GappedSeries::new(v.to_vec(), None).unwrap()
    }

    #[test]
    fn locf_examples() {
        let r = impute_locf(&gap(&[Some(1.), None, None, Some(4.)])).unwrap();
        assert_eq!(r.values(), &[1., 1., 1., 4.]);
        let r = impute_locf(&gap(&[None, Some(7.)])).unwrap();
        assert_eq!(r.values(), &[7., 7.]);
        assert!(impute_locf(&gap(&[None])).is_err());
    }

    #[test]
    fn locf_across_step() {
        let mut v: Vec<Option<f64>> = (0..10)
            .map(|i| Some(if i < 5 { 0. } else { 100. }))
            .collect();
        for slot in &mut v[3..8] {
            *slot = None;
        }
        let r = impute_locf(&gap(&v)).unwrap();
        assert!(r.values()[3..8].iter().all(|&x| x == 0.));
    }

    #[test]
    fn statistic_examples() {
        let r = impute_statistic(&gap(&[Some(2.), None, Some(4.)]), Statistic::Mean).unwrap();
        assert_eq!(r.values(), &[2., 3., 4.]);
        let r =
            impute_statistic(&gap(&[Some(1.), Some(1.), Some(9.), None]), Statistic::Mode).unwrap();
        assert_eq!(r.values(), &[1., 1., 9., 1.]);
        let r = impute_statistic(
            &gap(&[Some(1.), Some(2.), Some(100.), None]),
            Statistic::Median,
        )
        .unwrap();
        assert_eq!(r.values()[3], 2.);
        assert!(impute_statistic(&gap(&[None, None]), Statistic::Mean).is_err());
    }

    #[test]
    fn mode_ties_pick_smallest() {
        assert_eq!(Statistic::Mode.of(&[3., 2., 3., 2., 7.]), 2.);
        assert_eq!(Statistic::Mode.of(&[5.]), 5.);
        assert_eq!(Statistic::Median.of(&[4., 1., 3., 2.]), 2.5);
    }

    #[test]
    fn random_fill() {
        let g = gap(&[Some(0.), None, Some(10.), None, None, Some(5.)]);
        let a = impute_random(&g, 11).unwrap();
        let b = impute_random(&g, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|x| (0.0..=10.0).contains(x)));
        assert_ne!(a, impute_random(&g, 12).unwrap());
        assert!(matches!(
            impute_random(&gap(&[Some(3.), None, Some(3.)]), 0),
            Err(Error::DegenerateRange(_))
        ));
        assert!(impute_random(&gap(&[None, None]), 0).is_err());
    }

    #[test]
    fn option_parsing() {
        assert_eq!("mode".parse::<Statistic>().unwrap(), Statistic::Mode);
        assert!("geometric".parse::<Statistic>().is_err());
    }
}
