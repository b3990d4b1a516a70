//! Seasonally adjusted interpolation.
//!
//! The gapped series is first filled linearly. A classical additive
//! decomposition of the filled copy gives a seasonal profile (per-phase means
//! of the series minus its centred moving average, shifted to sum to zero).
//! Observed values minus that profile are interpolated linearly across the
//! gaps and the profile is added back. The decomposition is then repeated on
//! the refilled series until the gap values stop moving, so the initial
//! linear guesses no longer bias the profile.

use crate::error::Result;
use crate::series::GappedSeries;

use super::interp::fill_linear;
use super::ImputationResult;

pub const MAX_ITERATIONS: usize = 2_000;
const RELATIVE_TOLERANCE: f64 = 1e-10;

pub fn impute_seasonal(g: &GappedSeries) -> Result<ImputationResult> {
    let mut filled = fill_linear(g.values())?;
    let period = match g.period() {
        Some(p) if 2 * p <= g.len() => p,
        _ => return Ok(ImputationResult::from_builtin(filled)),
    };
    if g.missing_count() == 0 {
        return Ok(ImputationResult::from_builtin(filled));
    }

    let scale = g.observed().map(|(_, y)| y.abs()).fold(1.0_f64, f64::max);
    let tolerance = RELATIVE_TOLERANCE * scale;
    let mut adjusted: Vec<Option<f64>> = vec![None; g.len()];

    for _ in 0..MAX_ITERATIONS {
        let profile = seasonal_profile(&filled, period);
        for (i, v) in g.values().iter().enumerate() {
            adjusted[i] = v.map(|y| y - profile[i % period]);
        }
        let smooth = fill_linear(&adjusted)?;
        let mut change = 0.0_f64;
        for (i, v) in g.values().iter().enumerate() {
            if v.is_none() {
                let next = smooth[i] + profile[i % period];
                change = change.max((next - filled[i]).abs());
                filled[i] = next;
            }
        }
        if change <= tolerance {
            break;
        }
    }
    Ok(ImputationResult::from_builtin(filled))
}

/// Centred moving average of window `period`; `None` near the ends where the
/// window does not fit. Even periods use the 2×period weighting with half
/// weights on the two outer points.
pub fn centered_moving_average(values: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = values.len();
    let half = period / 2;
    let mut out = vec![None; n];
    if n < 2 * half + 1 {
        return out;
    }
    let p = period as f64;
    for (i, slot) in out.iter_mut().enumerate().take(n - half).skip(half) {
        let window = &values[i - half..=i + half];
        let sum: f64 = if period.is_multiple_of(2) {
            0.5 * (window[0] + window[2 * half]) + window[1..2 * half].iter().sum::<f64>()
        } else {
            window.iter().sum()
        };
        *slot = Some(sum / p);
    }
    out
}

/// Zero-sum per-phase means of the detrended series.
pub fn seasonal_profile(values: &[f64], period: usize) -> Vec<f64> {
    let trend = centered_moving_average(values, period);
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, (v, t)) in values.iter().zip(&trend).enumerate() {
        if let Some(t) = t {
            sums[i % period] += v - t;
            counts[i % period] += 1;
        }
    }
    let mut profile: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let centre = profile.iter().sum::<f64>() / period as f64;
    for s in &mut profile {
        *s -= centre;
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imputers::impute_linear;

    #[test]
    fn phase_mean_fills_alternating_series() {
        let g = GappedSeries::new(
            vec![
                Some(10.),
                Some(0.),
                Some(10.),
                Some(0.),
                Some(10.),
                None,
                Some(10.),
                Some(0.),
            ],
            Some(4),
        )
        .unwrap();
        let r = impute_seasonal(&g).unwrap();
        assert!(r.values()[5].abs() < 1e-6, "{}", r.values()[5]);
    }

    #[test]
    fn without_period_matches_linear() {
        let v = vec![
            Some(1.),
            None,
            Some(4.),
            None,
            None,
            Some(2.),
            Some(8.),
            None,
        ];
        let g = GappedSeries::new(v.clone(), None).unwrap();
        assert_eq!(impute_seasonal(&g).unwrap(), impute_linear(&g).unwrap());
        // too short for the period as well
        let g = GappedSeries::new(v, Some(5)).unwrap();
        assert_eq!(impute_seasonal(&g).unwrap(), impute_linear(&g).unwrap());
    }

    #[test]
    fn moving_average_even_and_odd() {
        let x = [10., 0., 10., 0., 10., 0., 10., 0.];
        let t = centered_moving_average(&x, 4);
        assert_eq!(t[..2], [None, None]);
        assert!(t[2..6].iter().all(|v| *v == Some(5.0)));
        assert_eq!(t[6..], [None, None]);
        let t = centered_moving_average(&[1., 2., 3., 4., 5.], 3);
        assert_eq!(t, vec![None, Some(2.), Some(3.), Some(4.), None]);
    }

    #[test]
    fn profile_sums_to_zero() {
        let x: Vec<f64> = (0..48)
            .map(|i| (i % 12) as f64 * 1.5 + i as f64 * 0.1)
            .collect();
        let s = seasonal_profile(&x, 12);
        assert!(s.iter().sum::<f64>().abs() < 1e-12);
    }
}
