//! Complete series, gapped series and missingness masks.
//!
//! Indices are zero-based throughout. A withheld observation is represented
//! as `None` inside a [`GappedSeries`], never as a NaN, so missing entries
//! cannot leak into arithmetic by accident. NaN only appears at I/O
//! boundaries (CSV readers, plugin wire formats).

use crate::error::{Error, Result};

/// A complete, finite, univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    period: Option<usize>,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, period: Option<usize>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "value at index {i} is not finite ({})",
                values[i]
            )));
        }
        check_period(period, values.len())?;
        Ok(Self {
            values,
            period,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Returns a copy with a different seasonal period.
    pub fn with_period(&self, period: Option<usize>) -> Result<Self> {
        check_period(period, self.values.len())?;
        Ok(Self {
            period,
            ..self.clone()
        })
    }
}

fn check_period(period: Option<usize>, len: usize) -> Result<()> {
    match period {
        Some(p) if p < 2 || p > len => Err(Error::InvalidSeries(format!(
            "period {p} must satisfy 2 <= period <= {len}"
        ))),
        _ => Ok(()),
    }
}

/// The set of withheld indices for one sampling draw.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MissingnessMask {
    removed: Vec<usize>,
    series_length: usize,
}

impl MissingnessMask {
    /// `removed` must be strictly increasing and inside `0..series_length`.
    pub fn new(removed: Vec<usize>, series_length: usize) -> Result<Self> {
        if series_length == 0 {
            return Err(Error::InvalidMask("series length must be positive".into()));
        }
        if let Some(w) = removed.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMask(format!(
                "indices not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = removed.last() {
            if last >= series_length {
                return Err(Error::InvalidMask(format!(
                    "index {last} out of range for length {series_length}"
                )));
            }
        }
        Ok(Self {
            removed,
            series_length,
        })
    }

    /// Builds a mask from an unordered index collection, sorting and
    /// deduplicating it first.
    pub fn from_unsorted(mut removed: Vec<usize>, series_length: usize) -> Result<Self> {
        removed.sort_unstable();
        removed.dedup();
        Self::new(removed, series_length)
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn count(&self) -> usize {
        self.removed.len()
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn contains(&self, index: usize) -> bool {
        self.removed.binary_search(&index).is_ok()
    }

    /// Per-position flags, `true` where the observation is withheld.
    pub fn flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.series_length];
        for &i in &self.removed {
            flags[i] = true;
        }
        flags
    }
}

/// A series with some observations withheld.
#[derive(Debug, Clone, PartialEq)]
pub struct GappedSeries {
    values: Vec<Option<f64>>,
    period: Option<usize>,
}

impl GappedSeries {
    pub fn new(values: Vec<Option<f64>>, period: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| matches!(v, Some(x) if !x.is_finite()))
        {
            return Err(Error::InvalidSeries(format!(
                "value at index {i} is not finite"
            )));
        }
        check_period(period, values.len())?;
        Ok(Self { values, period })
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Observed `(index, value)` pairs in index order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|x| (i, x)))
    }

    pub fn observed_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

fn check_mask(series: &TimeSeries, mask: &MissingnessMask) -> Result<()> {
    if mask.series_length() != series.len() {
        return Err(Error::Config(format!(
            "mask is for a series of length {}, series has {}",
            mask.series_length(),
            series.len()
        )));
    }
    Ok(())
}

/// Withholds the masked positions of `series`.
pub fn apply_mask(series: &TimeSeries, mask: &MissingnessMask) -> Result<GappedSeries> {
    check_mask(series, mask)?;
    let mut values: Vec<Option<f64>> = series.values().iter().copied().map(Some).collect();
    for &i in mask.removed() {
        values[i] = None;
    }
    Ok(GappedSeries {
        values,
        period: series.period(),
    })
}

/// True values at the removed positions, in index order.
pub fn extract_at(series: &TimeSeries, mask: &MissingnessMask) -> Result<Vec<f64>> {
    check_mask(series, mask)?;
    Ok(mask.removed().iter().map(|&i| series.values()[i]).collect())
}
