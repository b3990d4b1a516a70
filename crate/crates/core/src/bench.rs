//! The benchmark loop.
//!
//! For every missing percent `g` in the grid and every repetition `r`, one
//! mask is drawn with seed `derive_seed(master, g, r)` and applied once. Every
//! method imputes that same gapped series and is scored against the truth.
//! Cells are independent and may run in parallel; results are assembled by
//! `(g, r, method)` position, so the profile does not depend on scheduling.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imputers::Imputer;
use crate::metrics::Metric;
use crate::sampler::{sample_mask, SampleSpec, Scheme};
use crate::series::{apply_mask, extract_at, MissingnessMask, TimeSeries};

/// Which positions a metric sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreScope {
    /// The whole series: kept positions contribute zero error.
    #[default]
    Full,
    /// Only the withheld positions.
    Removed,
}

impl FromStr for ScoreScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ScoreScope::Full),
            "removed" => Ok(ScoreScope::Removed),
            other => Err(Error::Config(format!(
                "unknown scoring scope `{other}` (expected full or removed)"
            ))),
        }
    }
}

impl fmt::Display for ScoreScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreScope::Full => "full",
            ScoreScope::Removed => "removed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub series: TimeSeries,
    pub scheme: Scheme,
    pub block: f64,
    pub block_is_percent: bool,
    pub methods: Vec<Imputer>,
    pub metric: Metric,
    pub percent_from: f64,
    pub percent_to: f64,
    pub interval: f64,
    pub repetition: usize,
    pub master_seed: u64,
    pub score_on: ScoreScope,
}

impl BenchmarkConfig {
    /// Defaults: MCAR, RMSE, 10 to 90 percent by 10, ten repetitions, blocks
    /// of 50 percent, the five default methods, master seed 0.
    pub fn new(series: TimeSeries) -> Self {
        Self {
            series,
            scheme: Scheme::Mcar,
            block: 50.0,
            block_is_percent: true,
            methods: Imputer::defaults(),
            metric: Metric::Rmse,
            percent_from: 10.0,
            percent_to: 90.0,
            interval: 10.0,
            repetition: 10,
            master_seed: 0,
            score_on: ScoreScope::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (from, to) = (self.percent_from, self.percent_to);
        if !(from > 0.0 && from <= to && to < 100.0) {
            return Err(Error::Config(format!(
                "missing percent range must satisfy 0 < from <= to < 100, got {from}..{to}"
            )));
        }
        if !(self.interval > 0.0 && self.interval.is_finite()) {
            return Err(Error::Config(format!(
                "interval must be positive, got {}",
                self.interval
            )));
        }
        if self.repetition == 0 {
            return Err(Error::Config("repetition must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no imputation methods given".into()));
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(m.name()) {
                return Err(Error::Config(format!("method `{}` listed twice", m.name())));
            }
        }
        self.spec_for(from, 0).validate(self.series.len())
    }

    /// `from, from + interval, ...` up to and including `to`.
    pub fn grid(&self) -> Vec<f64> {
        let steps = ((self.percent_to - self.percent_from) / self.interval + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| self.percent_from + i as f64 * self.interval)
            .collect()
    }

    pub fn spec_for(&self, percent: f64, seed: u64) -> SampleSpec {
        SampleSpec {
            scheme: self.scheme,
            percent_missing: percent,
            block: self.block,
            block_is_percent: self.block_is_percent,
            seed,
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of cell `(grid_index, repetition_index)` under `master`.
pub fn derive_seed(master: u64, grid_index: u64, repetition_index: u64) -> u64 {
    let h = mix64(master.wrapping_add(GOLDEN_GAMMA));
    let h = mix64(h ^ grid_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    mix64(h.wrapping_add(repetition_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed handed to method `method_index` inside a cell.
pub fn method_seed(cell_seed: u64, method_index: usize) -> u64 {
    mix64(
        cell_seed
            ^ mix64(
                (method_index as u64)
                    .wrapping_add(1)
                    .wrapping_mul(GOLDEN_GAMMA),
            ),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodErrors {
    pub name: String,
    pub means: Vec<f64>,
    /// `errall[grid][repetition]`.
    pub errall: Vec<Vec<f64>>,
}

/// Benchmark result: per-method mean errors over the grid plus every raw
/// error and cell seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorProfile {
    pub parameter: String,
    pub missing_percent: Vec<f64>,
    pub methods: Vec<MethodErrors>,
    /// `seeds[grid][repetition]`.
    pub seeds: Vec<Vec<u64>>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl ErrorProfile {
    pub fn method(&self, name: &str) -> Option<&MethodErrors> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn means(&self, name: &str) -> Option<&[f64]> {
        self.method(name).map(|m| m.means.as_slice())
    }

    pub fn method_names(&self) -> impl Iterator<Item = &str> {
        self.methods.iter().map(|m| m.name.as_str())
    }

    pub fn repetitions(&self) -> usize {
        self.seeds.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.missing_percent.len();
        let bad = |msg: String| Err(Error::Input(format!("invalid profile: {msg}")));
        if grid == 0 || self.methods.is_empty() {
            return bad("empty grid or method list".into());
        }
        if self.seeds.len() != grid {
            return bad("seed matrix does not match the grid".into());
        }
        let reps = self.repetitions();
        if reps == 0 || self.seeds.iter().any(|row| row.len() != reps) {
            return bad("ragged seed matrix".into());
        }
        let mut names = HashSet::new();
        for m in &self.methods {
            if !names.insert(m.name.as_str()) {
                return bad(format!("duplicate method `{}`", m.name));
            }
            if m.means.len() != grid || m.errall.len() != grid {
                return bad(format!("`{}` does not match the grid", m.name));
            }
            for (row, &avg) in m.errall.iter().zip(&m.means) {
                if row.len() != reps {
                    return bad(format!("`{}` has a ragged error matrix", m.name));
                }
                if row.iter().any(|e| !e.is_finite()) {
                    return bad(format!("`{}` has a non-finite error", m.name));
                }
                if (mean(row) - avg).abs() > 1e-12 * avg.abs().max(1.0) {
                    return bad(format!("`{}` means disagree with raw errors", m.name));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON: keys in declaration order, methods in benchmark
    /// order, shortest round-trip decimal for every real.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile is always serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("cannot parse profile: {e}")))?;
        p.validate()?;
        Ok(p)
    }
}

pub fn profile_to_json(p: &ErrorProfile) -> String {
    p.to_json()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel { jobs: usize },
}

impl Execution {
    pub fn available() -> Self {
        let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
        Execution::Parallel { jobs }
    }
}

/// Runs the full sweep using all available cores.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<ErrorProfile> {
    run_benchmark_with(cfg, Execution::available())
}

pub fn run_benchmark_with(cfg: &BenchmarkConfig, execution: Execution) -> Result<ErrorProfile> {
    cfg.validate()?;
    let grid = cfg.grid();
    let reps = cfg.repetition;
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    let run = |&(g, r): &(usize, usize)| {
        run_cell(
            cfg,
            grid[g],
            derive_seed(cfg.master_seed, g as u64, r as u64),
            r,
        )
    };

    let results: Vec<Result<Vec<f64>>> = match execution {
        Execution::Serial => cells.iter().map(run).collect(),
        Execution::Parallel { jobs } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run).collect())
        }
    };

    let mut methods: Vec<MethodErrors> = cfg
        .methods
        .iter()
        .map(|m| MethodErrors {
            name: m.name().to_string(),
            means: Vec::with_capacity(grid.len()),
            errall: vec![Vec::with_capacity(reps); grid.len()],
        })
        .collect();
    let mut seeds = vec![Vec::with_capacity(reps); grid.len()];
    for (&(g, r), result) in cells.iter().zip(results) {
        let errors = result?;
        seeds[g].push(derive_seed(cfg.master_seed, g as u64, r as u64));
        for (m, e) in methods.iter_mut().zip(errors) {
            m.errall[g].push(e);
        }
    }
    for m in &mut methods {
        m.means = m.errall.iter().map(|row| mean(row)).collect();
    }
    Ok(ErrorProfile {
        parameter: cfg.metric.name().to_string(),
        missing_percent: grid,
        methods,
        seeds,
    })
}

/// One `(percent, repetition)` cell: one mask, every method, one error each.
fn run_cell(cfg: &BenchmarkConfig, percent: f64, seed: u64, repetition: usize) -> Result<Vec<f64>> {
    let wrap = |method: &str, e: Error| Error::Cell {
        method: method.to_string(),
        percent,
        repetition,
        source: Box::new(e),
    };
    let mask = sample_mask(&cfg.spec_for(percent, seed), cfg.series.len())
        .map_err(|e| wrap("<sampler>", e))?;
    let gapped = apply_mask(&cfg.series, &mask).map_err(|e| wrap("<sampler>", e))?;
    let truth = scored_truth(cfg, &mask)?;
    cfg.methods
        .iter()
        .enumerate()
        .map(|(i, imp)| {
            let result = imp
                .impute(&gapped, method_seed(seed, i))
                .map_err(|e| wrap(imp.name(), e))?;
            let imputed = match cfg.score_on {
                ScoreScope::Full => result.into_values(),
                ScoreScope::Removed => result.at(mask.removed()),
            };
            let e = cfg
                .metric
                .evaluate(&truth, &imputed)
                .map_err(|e| wrap(imp.name(), e))?;
            if !e.is_finite() {
                return Err(wrap(
                    imp.name(),
                    Error::UndefinedMetric(format!("{} is not finite ({e})", cfg.metric)),
                ));
            }
            Ok(e)
        })
        .collect()
}

fn scored_truth(cfg: &BenchmarkConfig, mask: &MissingnessMask) -> Result<Vec<f64>> {
    match cfg.score_on {
        ScoreScope::Full => Ok(cfg.series.values().to_vec()),
        ScoreScope::Removed => extract_at(&cfg.series, mask),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_series(n: usize) -> TimeSeries {
        TimeSeries::new((0..n).map(|i| 3.0 + 0.5 * i as f64).collect(), None, "line").unwrap()
    }

    #[test]
    fn default_grid() {
        let cfg = BenchmarkConfig::new(linear_series(50));
        assert_eq!(
            cfg.grid(),
            vec![10., 20., 30., 40., 50., 60., 70., 80., 90.]
        );
    }

    #[test]
    fn fractional_grid() {
        let mut cfg = BenchmarkConfig::new(linear_series(50));
        cfg.percent_from = 5.0;
        cfg.percent_to = 6.0;
        cfg.interval = 0.25;
        assert_eq!(cfg.grid(), vec![5.0, 5.25, 5.5, 5.75, 6.0]);
        cfg.interval = 0.3;
        assert_eq!(cfg.grid().len(), 4);
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        assert_eq!(derive_seed(42, 0, 0), derive_seed(42, 0, 0));
        assert_ne!(derive_seed(42, 0, 1), derive_seed(42, 1, 0));
        let mut seen = HashSet::new();
        for master in [1u64, 2] {
            for g in 0..9 {
                for r in 0..10 {
                    assert!(seen.insert(derive_seed(master, g, r)));
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let base = BenchmarkConfig::new(linear_series(50));
        let mut c = base.clone();
        c.percent_from = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.percent_to = 100.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.percent_from = 60.0;
        c.percent_to = 50.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.interval = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.repetition = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.methods.clear();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.methods.push(Imputer::named("na.locf").unwrap());
        assert!(c.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn linear_method_is_exact_on_a_line() {
        let mut cfg = BenchmarkConfig::new(linear_series(60));
        cfg.methods = vec![Imputer::named("na.approx").unwrap()];
        cfg.repetition = 3;
        let p = run_benchmark_with(&cfg, Execution::Serial).unwrap();
        let mut interior_cells = 0;
        for (g, &percent) in p.missing_percent.iter().enumerate() {
            for r in 0..cfg.repetition {
                let mask = sample_mask(&cfg.spec_for(percent, p.seeds[g][r]), 60).unwrap();
                if !mask.contains(0) && !mask.contains(59) {
                    interior_cells += 1;
                    assert!(p.methods[0].errall[g][r] < 1e-12);
                }
            }
        }
        assert!(interior_cells > 0);
    }

    #[test]
    fn cell_errors_carry_coordinates() {
        let series = TimeSeries::new(vec![1.0; 30], None, "flat").unwrap();
        let mut cfg = BenchmarkConfig::new(series);
        cfg.methods = vec![Imputer::named("na.random").unwrap()];
        let err = run_benchmark_with(&cfg, Execution::Serial).unwrap_err();
        match err {
            Error::Cell {
                method,
                percent,
                repetition,
                source,
            } => {
                assert_eq!(method, "na.random");
                assert_eq!(percent, 10.0);
                assert_eq!(repetition, 0);
                assert!(matches!(*source, Error::DegenerateRange(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_shape() {
        let p = ErrorProfile {
            parameter: "rmse".into(),
            missing_percent: vec![10.0],
            methods: vec![MethodErrors {
                name: "na.approx".into(),
                means: vec![2.5],
                errall: vec![vec![2.5]],
            }],
            seeds: vec![vec![7]],
        };
        let text = p.to_json();
        assert!(text.contains(r#""means":[2.5]"#), "{text}");
        assert!(text.contains(r#""errall":[[2.5]]"#), "{text}");
        assert!(text.starts_with(r#"{"parameter":"rmse","missing_percent":[10.0],"methods":"#));
        let back = ErrorProfile::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn from_json_rejects_inconsistent_means() {
        let text = r#"{"parameter":"rmse","missing_percent":[10.0],"methods":[{"name":"a","means":[3.0],"errall":[[2.5]]}],"seeds":[[1]]}"#;
        assert!(ErrorProfile::from_json(text).is_err());
        assert!(ErrorProfile::from_json("{").is_err());
    }
}
