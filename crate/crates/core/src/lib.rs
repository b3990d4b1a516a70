//! Benchmarking of univariate time-series imputation.
//!
//! A complete series is masked with a reproducible missingness pattern
//! (MCAR single points or MAR blocks), each imputation method fills the gaps,
//! and an error metric compares the result against the withheld truth. A
//! sweep over missing percentages and repetitions produces an
//! [`ErrorProfile`], which can be charted with [`report::render_errors`].
//!
//! ```
//! use imputebench::{datasets, run_benchmark, BenchmarkConfig};
//!
//! let mut cfg = BenchmarkConfig::new(datasets::austres());
//! cfg.repetition = 2;
//! let profile = run_benchmark(&cfg).unwrap();
//! assert_eq!(profile.missing_percent.len(), 9);
//! ```

pub mod bench;
pub mod cli;
pub mod csvio;
pub mod datasets;
pub mod error;
pub mod imputers;
pub mod metrics;
pub mod plugin;
pub mod report;
pub mod sampler;
pub mod series;

pub use bench::{
    run_benchmark, run_benchmark_with, BenchmarkConfig, ErrorProfile, Execution, MethodErrors,
    ScoreScope,
};
pub use cli::run_cli;
pub use error::{Error, ErrorClass, Result};
pub use imputers::{ImputationResult, Imputer, ImputerRegistry};
pub use metrics::Metric;
pub use plugin::PluginCommand;
pub use report::{PlotSpec, PlotType};
pub use sampler::{sample_mask, SampleSpec, Scheme};
pub use series::{apply_mask, GappedSeries, MissingnessMask, TimeSeries};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series-and-sampling.md")]
    mod series_and_sampling {}
    #[doc = include_str!("../../../book/src/imputers.md")]
    mod imputers {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../book/src/plugins.md")]
    mod plugins {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
