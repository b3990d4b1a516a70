//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 plugin-contract
//! error, 4 internal error. Diagnostics go to standard error; machine output
//! goes to files or standard output.

mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::FileConfig;

use crate::bench::{run_benchmark_with, BenchmarkConfig, ErrorProfile, Execution, ScoreScope};
use crate::csvio::{load_csv, Column};
use crate::datasets;
use crate::error::{Error, ErrorClass, Result};
use crate::imputers::{Imputer, DEFAULT_METHODS};
use crate::metrics::Metric;
use crate::plugin::{PluginCommand, DEFAULT_TIMEOUT};
use crate::report::{render_errors, render_impute, render_masks, PlotSpec, PlotType};
use crate::sampler::{describe_mask, sample_mask, SampleSpec, Scheme};
use crate::series::{apply_mask, TimeSeries};

pub const JOBS_ENV: &str = "IMPUTEBENCH_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "imputebench",
    version,
    about = "Compare imputation methods for univariate time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep missing percentages and repetitions, writing an error profile
    Bench(BenchArgs),
    /// Draw one missingness mask
    Sample(SampleArgs),
    /// Impute one mask with every method and plot the results
    Impute(ImputeArgs),
    /// Chart an error profile
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Bundled dataset (nottem or austres)
    #[arg(long, conflicts_with = "data")]
    pub dataset: Option<String>,
    /// CSV file holding the complete series
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Value column, by header name or zero-based index
    #[arg(long)]
    pub column: Option<String>,
    /// Observations per seasonal cycle
    #[arg(long)]
    pub period: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Sampling scheme: mcar or mar
    #[arg(long)]
    pub smps: Option<String>,
    /// MAR block size (percent of missing count, or count with --no-blckper)
    #[arg(long)]
    pub blck: Option<f64>,
    /// Read --blck as a percent of the missing count (default)
    #[arg(long, conflicts_with = "no_blckper")]
    pub blckper: bool,
    /// Read --blck as a number of observations
    #[arg(long)]
    pub no_blckper: bool,
    /// Master random seed
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SamplingArgs {
    fn blckper(&self) -> Option<bool> {
        if self.no_blckper {
            Some(false)
        } else if self.blckper {
            Some(true)
        } else {
            None
        }
    }
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Comma-separated imputation methods
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Method option as METHOD:KEY=VALUE, e.g. na.mean:option=mode
    #[arg(long = "addl-arg", value_name = "METHOD:KEY=VALUE")]
    pub addl_arg: Vec<String>,
    /// External imputation plugin as NAME=COMMAND
    #[arg(long, value_name = "NAME=COMMAND")]
    pub plugin: Vec<String>,
    /// Seconds allowed per plugin call
    #[arg(long)]
    pub plugin_timeout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub methods: MethodArgs,
    /// Error metric: rmse, mae, mape, pcv or a metric plugin name
    #[arg(long)]
    pub error_parameter: Option<String>,
    /// External metric plugin as NAME=COMMAND
    #[arg(long, value_name = "NAME=COMMAND")]
    pub metric_plugin: Vec<String>,
    /// Smallest missing percent
    #[arg(long)]
    pub miss_from: Option<f64>,
    /// Largest missing percent
    #[arg(long)]
    pub miss_to: Option<f64>,
    /// Step between missing percents
    #[arg(long)]
    pub interval: Option<f64>,
    /// Repetitions per missing percent
    #[arg(long)]
    pub repetition: Option<usize>,
    /// Positions scored: full (whole series) or removed (withheld only)
    #[arg(long)]
    pub score_on: Option<String>,
    /// Worker threads (default: available parallelism)
    #[arg(long, env = JOBS_ENV)]
    pub jobs: Option<usize>,
    /// Profile JSON output (default: standard output)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write an SVG chart of the profile
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Chart type: boxplot, line or bar
    #[arg(long)]
    pub plot_type: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Percent of observations to withhold
    #[arg(long, default_value_t = 50.0)]
    pub percent: f64,
    /// Mask JSON output (default: standard output)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Strip-plot SVG of the mask
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub methods: MethodArgs,
    /// Percent of observations to withhold
    #[arg(long, default_value_t = 50.0)]
    pub percent: f64,
    /// Overlay SVG output (default: standard output)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Directory for one imputed CSV per method
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Draw withheld true values as open circles
    #[arg(long)]
    pub show_missing: bool,
    /// Chart title
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Profile JSON written by `bench`
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Chart type: boxplot, line or bar
    #[arg(long = "type", default_value = "boxplot")]
    pub plot_type: String,
    /// Chart title
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, default_value_t = 900)]
    pub width: u32,
    #[arg(long, default_value_t = 540)]
    pub height: u32,
    /// SVG output (default: standard output)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Plugin => 3,
        ErrorClass::Internal => 4,
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Sample(args) => sample(args),
        Command::Impute(args) => impute(args),
        Command::Plot(args) => plot(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.class())
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load_series(
    dataset: Option<&str>,
    data: Option<&Path>,
    column: Option<&str>,
    period: Option<usize>,
) -> Result<TimeSeries> {
    match (dataset, data) {
        (Some(_), Some(_)) => Err(Error::Config("give either a dataset or a data file".into())),
        (_, Some(path)) => {
            let column = column.map(|c| c.parse::<Column>().unwrap_or_else(|e| match e {}));
            load_csv(path, column.as_ref(), period)
        }
        (name, None) => {
            let series = datasets::builtin(name.unwrap_or("nottem"))?;
            match period {
                Some(p) => series.with_period(Some(p)),
                None => Ok(series),
            }
        }
    }
}

fn split_assignment<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| Error::Config(format!("{what} must look like NAME=VALUE, got `{text}`")))
}

fn parse_addl_arg(text: &str) -> Result<(String, String, String)> {
    let (method, rest) = text.split_once(':').ok_or_else(|| {
        Error::Config(format!(
            "--addl-arg must look like METHOD:KEY=VALUE, got `{text}`"
        ))
    })?;
    let (key, value) = split_assignment(rest, "--addl-arg")?;
    Ok((
        method.trim().to_string(),
        key.to_string(),
        value.to_string(),
    ))
}

fn timeout(secs: Option<f64>) -> Result<Duration> {
    match secs {
        None => Ok(DEFAULT_TIMEOUT),
        Some(s) if s > 0.0 && s.is_finite() => Ok(Duration::from_secs_f64(s)),
        Some(s) => Err(Error::Config(format!(
            "plugin timeout must be positive, got {s}"
        ))),
    }
}

/// Resolves method names against built-ins and plugins.
fn build_methods(
    names: Option<Vec<String>>,
    mut addl: BTreeMap<String, BTreeMap<String, String>>,
    plugins: &BTreeMap<String, PluginCommand>,
    plugin_order: &[String],
) -> Result<Vec<Imputer>> {
    let names = names.unwrap_or_else(|| {
        DEFAULT_METHODS
            .iter()
            .map(|s| s.to_string())
            .chain(plugin_order.iter().cloned())
            .collect()
    });
    let mut methods = Vec::with_capacity(names.len());
    for name in &names {
        let imputer = match plugins.get(name) {
            Some(cmd) => {
                if addl.contains_key(name) {
                    return Err(Error::Config(format!(
                        "options for plugin `{name}` belong on its command line"
                    )));
                }
                Imputer::external(name.clone(), cmd.clone())
            }
            None => Imputer::builtin(name, addl.remove(name).unwrap_or_default())?,
        };
        methods.push(imputer);
    }
    if let Some(name) = addl.keys().next() {
        return Err(Error::Config(format!(
            "options given for `{name}`, which is not among the methods"
        )));
    }
    Ok(methods)
}

fn collect_plugins(
    from_file: &BTreeMap<String, String>,
    from_flags: &[String],
    limit: Duration,
) -> Result<(BTreeMap<String, PluginCommand>, Vec<String>)> {
    let mut map = BTreeMap::new();
    let mut order = Vec::new();
    let file_entries = from_file.iter().map(|(k, v)| (k.as_str(), v.as_str()));
    let flag_entries = from_flags
        .iter()
        .map(|s| split_assignment(s, "plugin"))
        .collect::<Result<Vec<_>>>()?;
    for (name, cmd) in file_entries.chain(flag_entries) {
        let command = PluginCommand::parse(cmd)?.with_timeout(limit);
        if map.insert(name.to_string(), command).is_none() {
            order.push(name.to_string());
        }
    }
    Ok((map, order))
}

fn method_list(flags: &[String], file: Option<Vec<String>>) -> Option<Vec<String>> {
    if flags.is_empty() {
        file
    } else {
        Some(flags.to_vec())
    }
}

fn merged_addl(
    file: BTreeMap<String, BTreeMap<String, String>>,
    flags: &[String],
) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut addl = file;
    for a in flags {
        let (method, key, value) = parse_addl_arg(a)?;
        addl.entry(method).or_default().insert(key, value);
    }
    Ok(addl)
}

fn bench(args: BenchArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let dataset = args.data.dataset.clone().or(file.dataset.clone());
    let data = args.data.data.clone().or(file.data.clone());
    // A dataset flag beats a data file from the config and vice versa.
    let (dataset, data) = match (&args.data.dataset, &args.data.data) {
        (Some(_), None) => (dataset, None),
        (None, Some(_)) => (None, data),
        _ => (dataset, data),
    };
    let series = load_series(
        dataset.as_deref(),
        data.as_deref(),
        args.data.column.as_deref().or(file.column.as_deref()),
        args.data.period.or(file.period),
    )?;

    let limit = timeout(args.methods.plugin_timeout.or(file.plugin_timeout))?;
    let (plugins, plugin_order) = collect_plugins(&file.plugins, &args.methods.plugin, limit)?;
    let addl = merged_addl(file.addl_arg.clone(), &args.methods.addl_arg)?;
    let methods = build_methods(
        method_list(&args.methods.methods, file.methods.clone()),
        addl,
        &plugins,
        &plugin_order,
    )?;

    let (metric_plugins, _) = collect_plugins(&file.metric_plugins, &args.metric_plugin, limit)?;
    let metric_name = args
        .error_parameter
        .clone()
        .or(file.error_parameter.clone())
        .unwrap_or_else(|| "rmse".into());
    let metric = match metric_plugins.get(&metric_name) {
        Some(cmd) => Metric::external(metric_name.clone(), cmd.clone()),
        None => Metric::builtin(&metric_name)?,
    };

    let mut cfg = BenchmarkConfig::new(series);
    if let Some(s) = args.sampling.smps.as_deref().or(file.smps.as_deref()) {
        cfg.scheme = s.parse()?;
    }
    cfg.block = args.sampling.blck.or(file.blck).unwrap_or(cfg.block);
    cfg.block_is_percent = args.sampling.blckper().or(file.blckper).unwrap_or(true);
    cfg.master_seed = args.sampling.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    cfg.methods = methods;
    cfg.metric = metric;
    cfg.percent_from = args
        .miss_from
        .or(file.miss_from)
        .unwrap_or(cfg.percent_from);
    cfg.percent_to = args.miss_to.or(file.miss_to).unwrap_or(cfg.percent_to);
    cfg.interval = args.interval.or(file.interval).unwrap_or(cfg.interval);
    cfg.repetition = args
        .repetition
        .or(file.repetition)
        .unwrap_or(cfg.repetition);
    if let Some(s) = args.score_on.as_deref().or(file.score_on.as_deref()) {
        cfg.score_on = s.parse::<ScoreScope>()?;
    }
    let plot_type: PlotType = args
        .plot_type
        .as_deref()
        .or(file.plot_type.as_deref())
        .unwrap_or("boxplot")
        .parse()?;
    let execution = match args.jobs.or(file.jobs) {
        Some(0) => return Err(Error::Config("jobs must be at least 1".into())),
        Some(1) => Execution::Serial,
        Some(jobs) => Execution::Parallel { jobs },
        None => Execution::available(),
    };

    let profile = run_benchmark_with(&cfg, execution)?;
    let output = args.output.clone().or(file.output.clone());
    write_output(output.as_deref(), &(profile.to_json() + "\n"))?;
    eprint!("{}", summary(&profile));
    if let Some(path) = args.plot.clone().or(file.plot.clone()) {
        let spec = PlotSpec {
            plot_type,
            title: format!(
                "{} by missing percent ({})",
                profile.parameter,
                cfg.series.label()
            ),
            ..PlotSpec::default()
        };
        write_output(Some(&path), &render_errors(&profile, &spec)?)?;
    }
    Ok(())
}

pub const DEFAULT_SEED: u64 = 123;

/// Human-readable table of mean errors.
pub fn summary(profile: &ErrorProfile) -> String {
    let width = profile
        .method_names()
        .map(str::len)
        .max()
        .unwrap_or(0)
        .max(8);
    let mut out = format!("{:<width$}", profile.parameter);
    for p in &profile.missing_percent {
        out.push_str(&format!(" {:>10}", format!("{p}%")));
    }
    out.push('\n');
    for m in &profile.methods {
        out.push_str(&format!("{:<width$}", m.name));
        for v in &m.means {
            out.push_str(&format!(" {:>10.4}", v));
        }
        out.push('\n');
    }
    out
}

fn sampling_spec(args: &SamplingArgs, percent: f64) -> Result<SampleSpec> {
    let scheme: Scheme = args.smps.as_deref().unwrap_or("mcar").parse()?;
    Ok(SampleSpec {
        scheme,
        percent_missing: percent,
        block: args.blck.unwrap_or(50.0),
        block_is_percent: args.blckper().unwrap_or(true),
        seed: args.seed.unwrap_or(DEFAULT_SEED),
    })
}

fn data_series(args: &DataArgs) -> Result<TimeSeries> {
    load_series(
        args.dataset.as_deref(),
        args.data.as_deref(),
        args.column.as_deref(),
        args.period,
    )
}

#[derive(Serialize)]
struct MaskJson<'a> {
    series_length: usize,
    scheme: Scheme,
    percent_missing: f64,
    block_length: Option<usize>,
    seed: u64,
    removed: &'a [usize],
    runs: &'a [usize],
}

fn sample(args: SampleArgs) -> Result<()> {
    let series = data_series(&args.data)?;
    let spec = sampling_spec(&args.sampling, args.percent)?;
    let mask = sample_mask(&spec, series.len())?;
    let runs = describe_mask(&mask);
    let json = MaskJson {
        series_length: series.len(),
        scheme: spec.scheme,
        percent_missing: spec.percent_missing,
        block_length: (spec.scheme == Scheme::Mar).then(|| spec.block_length(mask.count())),
        seed: spec.seed,
        removed: mask.removed(),
        runs: &runs.runs,
    };
    let text = serde_json::to_string(&json).map_err(|e| Error::Internal(e.to_string()))?;
    write_output(args.output.as_deref(), &(text + "\n"))?;
    if let Some(path) = &args.svg {
        let label = match spec.scheme {
            Scheme::Mcar => format!("MCAR, {}% missing", spec.percent_missing),
            Scheme::Mar => format!(
                "MAR, {}% missing, blocks of {}",
                spec.percent_missing,
                spec.block_length(mask.count())
            ),
        };
        let plot = PlotSpec {
            title: series.label().to_string(),
            height: 260,
            ..PlotSpec::default()
        };
        write_output(Some(path), &render_masks(&series, &[(label, mask)], &plot)?)?;
    }
    let n = runs.count();
    eprintln!(
        "withheld {} of {} observations in {n} run{}",
        runs.total(),
        series.len(),
        if n == 1 { "" } else { "s" }
    );
    Ok(())
}

fn impute(args: ImputeArgs) -> Result<()> {
    let series = data_series(&args.data)?;
    let spec = sampling_spec(&args.sampling, args.percent)?;
    let mask = sample_mask(&spec, series.len())?;
    let gapped = apply_mask(&series, &mask)?;
    let limit = timeout(args.methods.plugin_timeout)?;
    let (plugins, order) = collect_plugins(&BTreeMap::new(), &args.methods.plugin, limit)?;
    let addl = merged_addl(BTreeMap::new(), &args.methods.addl_arg)?;
    let names = method_list(&args.methods.methods, None);
    let methods = build_methods(names, addl, &plugins, &order)?;

    let mut results = Vec::with_capacity(methods.len());
    for (i, m) in methods.iter().enumerate() {
        let r = m
            .impute(&gapped, crate::bench::method_seed(spec.seed, i))
            .map_err(|e| Error::Cell {
                method: m.name().to_string(),
                percent: spec.percent_missing,
                repetition: 0,
                source: Box::new(e),
            })?;
        results.push((m.name().to_string(), r));
    }

    if let Some(dir) = &args.csv_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;
        let flags = mask.flags();
        for (name, r) in &results {
            let mut text = String::from("index,value,imputed\n");
            for (i, v) in r.values().iter().enumerate() {
                text.push_str(&format!("{},{v},{}\n", i + 1, u8::from(flags[i])));
            }
            write_output(Some(&dir.join(format!("{name}.csv"))), &text)?;
        }
    }
    let plot = PlotSpec {
        title: args.title.clone().unwrap_or_else(|| {
            format!(
                "{}: {}% missing ({})",
                series.label(),
                spec.percent_missing,
                spec.scheme
            )
        }),
        height: (150 * results.len() as u32 + 90).max(300),
        show_missing: args.show_missing,
        ..PlotSpec::default()
    };
    let svg = render_impute(&series, &mask, &results, &plot)?;
    if args.svg.is_some() || args.csv_dir.is_none() {
        write_output(args.svg.as_deref(), &svg)?;
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let profile = ErrorProfile::from_json(&text)?;
    let spec = PlotSpec {
        plot_type: args.plot_type.parse()?,
        title: args
            .title
            .clone()
            .unwrap_or_else(|| format!("{} by missing percent", profile.parameter)),
        width: args.width,
        height: args.height,
        show_missing: false,
    };
    write_output(args.output.as_deref(), &render_errors(&profile, &spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addl_arg_parsing() {
        assert_eq!(
            parse_addl_arg("na.mean:option=mode").unwrap(),
            ("na.mean".into(), "option".into(), "mode".into())
        );
        assert!(parse_addl_arg("na.mean=mode").is_err());
        assert!(parse_addl_arg("na.mean:option=").is_err());
    }

    #[test]
    fn method_resolution() {
        let plugins = BTreeMap::from([("sss".to_string(), PluginCommand::parse("cat").unwrap())]);
        let order = vec!["sss".to_string()];
        let all = build_methods(None, BTreeMap::new(), &plugins, &order).unwrap();
        let names: Vec<&str> = all.iter().map(Imputer::name).collect();
        assert_eq!(
            names,
            [
                "na.approx",
                "na.interp",
                "na.interpolation",
                "na.locf",
                "na.mean",
                "sss"
            ]
        );

        let addl = BTreeMap::from([(
            "na.mean".to_string(),
            BTreeMap::from([("option".to_string(), "median".to_string())]),
        )]);
        let some =
            build_methods(Some(vec!["na.mean".into()]), addl.clone(), &plugins, &order).unwrap();
        assert_eq!(some[0].params()["option"], "median");

        assert!(build_methods(Some(vec!["na.locf".into()]), addl, &plugins, &order).is_err());
        assert!(matches!(
            build_methods(
                Some(vec!["na.bogus".into()]),
                BTreeMap::new(),
                &plugins,
                &order
            ),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(Error::Config("x".into()).class()), 1);
        assert_eq!(exit_code(Error::IncompleteInput("x".into()).class()), 2);
        assert_eq!(exit_code(Error::Plugin("x".into()).class()), 3);
        let nested = Error::Cell {
            method: "p".into(),
            percent: 10.0,
            repetition: 0,
            source: Box::new(Error::Plugin("x".into())),
        };
        assert_eq!(exit_code(nested.class()), 3);
        assert_eq!(exit_code(Error::Internal("x".into()).class()), 4);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run_cli(["imputebench", "bench", "--bogus"]), 1);
        assert_eq!(run_cli(["imputebench"]), 1);
    }
}
