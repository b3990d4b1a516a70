//! Error metrics comparing withheld truth with imputed values.
//!
//! `pcv` is the percent change in variance, scaled by the variance of the
//! imputed values: `100 * (var(imputed) - var(truth)) / var(imputed)`, with
//! sample variances (divisor `n - 1`). Dividing by `var(truth)` instead gives
//! a different number in general; the imputed-variance form is the one used
//! throughout this crate.

use std::fmt;

use crate::error::{Error, Result};
use crate::plugin::{decode_metric_reply, encode_metric_request, PluginCommand};

pub const BUILTIN_METRICS: [&str; 4] = ["rmse", "mae", "mape", "pcv"];

fn check_pair(truth: &[f64], imputed: &[f64]) -> Result<()> {
    if truth.len() != imputed.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: imputed.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("empty input".into()));
    }
    Ok(())
}

pub fn rmse(truth: &[f64], imputed: &[f64]) -> Result<f64> {
    check_pair(truth, imputed)?;
    let sse: f64 = truth
        .iter()
        .zip(imputed)
        .map(|(t, i)| (t - i) * (t - i))
        .sum();
    Ok((sse / truth.len() as f64).sqrt())
}

pub fn mae(truth: &[f64], imputed: &[f64]) -> Result<f64> {
    check_pair(truth, imputed)?;
    let sae: f64 = truth.iter().zip(imputed).map(|(t, i)| (t - i).abs()).sum();
    Ok(sae / truth.len() as f64)
}

/// Mean absolute percent error. A zero in `truth` is an error, not skipped.
pub fn mape(truth: &[f64], imputed: &[f64]) -> Result<f64> {
    check_pair(truth, imputed)?;
    if let Some(i) = truth.iter().position(|&t| t == 0.0) {
        return Err(Error::UndefinedMetric(format!(
            "mape is undefined: true value at position {i} is zero"
        )));
    }
    let s: f64 = truth
        .iter()
        .zip(imputed)
        .map(|(t, i)| ((t - i) / t).abs())
        .sum();
    Ok(100.0 * s / truth.len() as f64)
}

/// Sample variance with divisor `n - 1`.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

pub fn pcv(truth: &[f64], imputed: &[f64]) -> Result<f64> {
    check_pair(truth, imputed)?;
    if truth.len() < 2 {
        return Err(Error::UndefinedMetric(
            "pcv needs at least two values".into(),
        ));
    }
    let var_imputed = sample_variance(imputed);
    if var_imputed == 0.0 {
        return Err(Error::UndefinedMetric(
            "pcv is undefined: imputed values have zero variance".into(),
        ));
    }
    Ok(100.0 * (var_imputed - sample_variance(truth)) / var_imputed)
}

/// Runs an external metric plugin.
pub fn metric_external(truth: &[f64], imputed: &[f64], command: &PluginCommand) -> Result<f64> {
    check_pair(truth, imputed)?;
    let reply = command.run(encode_metric_request(truth, imputed))?;
    decode_metric_reply(&reply)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    BuiltIn,
    External,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Rmse,
    Mae,
    Mape,
    Pcv,
    External {
        name: String,
        command: PluginCommand,
    },
}

impl Metric {
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "rmse" => Ok(Metric::Rmse),
            "mae" => Ok(Metric::Mae),
            "mape" => Ok(Metric::Mape),
            "pcv" => Ok(Metric::Pcv),
            _ => Err(Error::UnknownMetric(name.to_string())),
        }
    }

    pub fn external(name: impl Into<String>, command: PluginCommand) -> Self {
        Metric::External {
            name: name.into(),
            command,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
            Metric::Mape => "mape",
            Metric::Pcv => "pcv",
            Metric::External { name, .. } => name,
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::External { .. } => MetricKind::External,
            _ => MetricKind::BuiltIn,
        }
    }

    pub fn evaluate(&self, truth: &[f64], imputed: &[f64]) -> Result<f64> {
        match self {
            Metric::Rmse => rmse(truth, imputed),
            Metric::Mae => mae(truth, imputed),
            Metric::Mape => mape(truth, imputed),
            Metric::Pcv => pcv(truth, imputed),
            Metric::External { command, .. } => metric_external(truth, imputed, command),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 0.0);
        assert_relative_eq!(
            rmse(&[0., 0.], &[3., 4.]).unwrap(),
            12.5_f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            rmse(&[0., 0.], &[3., 4.]).unwrap(),
            3.5355339,
            epsilon = 1e-7
        );
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1., 2.], &[1., 2.]).unwrap(), 0.0);
        assert_eq!(mae(&[0., 0.], &[3., 4.]).unwrap(), 3.5);
    }

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[5., 6.], &[5., 6.]).unwrap(), 0.0);
        assert_relative_eq!(mape(&[100.], &[90.]).unwrap(), 10.0, epsilon = 1e-12);
        assert!(matches!(
            mape(&[1., 0.], &[1., 1.]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn pcv_examples() {
        assert_eq!(pcv(&[1., 3.], &[2., 4.]).unwrap(), 0.0);
        assert_relative_eq!(pcv(&[0., 2.], &[0., 4.]).unwrap(), 75.0, epsilon = 1e-12);
        assert!(matches!(
            pcv(&[1., 2.], &[3., 3.]),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(pcv(&[1.], &[2.]).is_err());
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            rmse(&[1.], &[1., 2.]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(rmse(&[], &[]).is_err());
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn lookup() {
        assert_eq!(Metric::builtin("RMSE").unwrap(), Metric::Rmse);
        assert!(matches!(
            Metric::builtin("r2"),
            Err(Error::UnknownMetric(_))
        ));
        for name in BUILTIN_METRICS {
            assert_eq!(Metric::builtin(name).unwrap().name(), name);
        }
    }
}
