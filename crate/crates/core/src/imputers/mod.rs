//! Named imputation methods.
//!
//! Built-in names follow the R functions they stand in for:
//!
//! | name               | method                                   | options                       |
//! |--------------------|------------------------------------------|-------------------------------|
//! | `na.approx`        | linear interpolation                     | none                          |
//! | `na.interp`        | seasonally adjusted interpolation        | none                          |
//! | `na.interpolation` | spline (default) or linear interpolation | `option`: `spline`, `linear`  |
//! | `na.locf`          | last observation carried forward         | none                          |
//! | `na.mean`          | summary statistic fill                   | `option`: `mean`, `median`, `mode` |
//! | `na.random`        | uniform draws from the observed range    | none                          |
//!
//! Methods outside this list are added as external plugins (see
//! [`crate::plugin`]) or as in-process closures with [`Imputer::custom`].

mod fill;
mod interp;
mod seasonal;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use fill::{impute_locf, impute_random, impute_statistic, Statistic};
pub use interp::{impute_linear, impute_spline, CubicSpline};
pub use seasonal::{centered_moving_average, impute_seasonal, seasonal_profile};

use crate::error::{Error, Result};
use crate::plugin::{decode_impute_reply, encode_impute_request, PluginCommand};
use crate::series::GappedSeries;

/// The method set used when none is given.
pub const DEFAULT_METHODS: [&str; 5] = [
    "na.approx",
    "na.interp",
    "na.interpolation",
    "na.locf",
    "na.mean",
];

pub const BUILTIN_METHODS: [&str; 6] = [
    "na.approx",
    "na.interp",
    "na.interpolation",
    "na.locf",
    "na.mean",
    "na.random",
];

/// A complete series produced by an imputer.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    values: Vec<f64>,
}

impl ImputationResult {
    fn from_builtin(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Checks `values` against the gapped input: same length, all finite,
    /// and bit-identical at every observed position.
    pub fn validated(g: &GappedSeries, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Unimputable(format!(
                "value at index {i} is not finite"
            )));
        }
        for (i, (out, input)) in values.iter().zip(g.values()).enumerate() {
            if let Some(y) = input {
                if out.to_bits() != y.to_bits() {
                    return Err(Error::Unimputable(format!(
                        "observed value at index {i} changed from {y} to {out}"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values at the given indices, in order.
    pub fn at(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.values[i]).collect()
    }
}

/// Runs an external imputation plugin on `g`.
pub fn impute_external(g: &GappedSeries, command: &PluginCommand) -> Result<ImputationResult> {
    let reply = command.run(encode_impute_request(g))?;
    let values = decode_impute_reply(&reply, g.len())?;
    ImputationResult::validated(g, values).map_err(|e| match e {
        Error::Unimputable(msg) => Error::Plugin(msg),
        other => Error::Plugin(other.to_string()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputerKind {
    BuiltIn,
    External,
    Custom,
}

type CustomFn = dyn Fn(&GappedSeries, u64) -> Result<Vec<f64>> + Send + Sync;

#[derive(Clone)]
enum Method {
    Linear,
    Spline,
    Seasonal,
    Locf,
    Statistic(Statistic),
    Random,
    External(PluginCommand),
    Custom(Arc<CustomFn>),
}

/// A named, parameterised imputation method.
#[derive(Clone)]
pub struct Imputer {
    name: String,
    params: BTreeMap<String, String>,
    method: Method,
}

impl fmt::Debug for Imputer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Imputer")
            .field("name", &self.name)
            .field("kind", &self.kind())
            .field("params", &self.params)
            .finish()
    }
}

fn accepted_options(name: &str) -> Option<&'static [&'static str]> {
    match name {
        "na.interpolation" => Some(&["spline", "linear"]),
        "na.mean" => Some(&["mean", "median", "mode"]),
        "na.approx" | "na.interp" | "na.locf" | "na.random" => Some(&[]),
        _ => None,
    }
}

impl Imputer {
    /// Looks up a built-in method and validates its options.
    pub fn builtin(name: &str, params: BTreeMap<String, String>) -> Result<Self> {
        let options =
            accepted_options(name).ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
        for (key, value) in &params {
            if key != "option" || options.is_empty() {
                return Err(Error::param(name, format!("unknown parameter `{key}`")));
            }
            if !options.contains(&value.as_str()) {
                return Err(Error::param(
                    name,
                    format!(
                        "option must be one of {}, got `{value}`",
                        options.join(", ")
                    ),
                ));
            }
        }
        let option = params.get("option").map(String::as_str);
        let method = match name {
            "na.approx" => Method::Linear,
            "na.interp" => Method::Seasonal,
            "na.interpolation" => match option {
                Some("linear") => Method::Linear,
                _ => Method::Spline,
            },
            "na.locf" => Method::Locf,
            "na.mean" => Method::Statistic(option.map_or(Ok(Statistic::Mean), str::parse)?),
            "na.random" => Method::Random,
            _ => unreachable!("accepted_options covers every built-in"),
        };
        Ok(Self {
            name: name.to_string(),
            params,
            method,
        })
    }

    /// A built-in method with default options.
    pub fn named(name: &str) -> Result<Self> {
        Self::builtin(name, BTreeMap::new())
    }

    pub fn external(name: impl Into<String>, command: PluginCommand) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            method: Method::External(command),
        }
    }

    /// An in-process method. The closure receives the gapped series and a
    /// per-call seed, and its output is validated like a plugin's.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&GappedSeries, u64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            method: Method::Custom(Arc::new(f)),
        }
    }

    pub fn defaults() -> Vec<Self> {
        DEFAULT_METHODS
            .iter()
            .map(|n| Self::named(n).expect("default methods are built in"))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    pub fn kind(&self) -> ImputerKind {
        match self.method {
            Method::External(_) => ImputerKind::External,
            Method::Custom(_) => ImputerKind::Custom,
            _ => ImputerKind::BuiltIn,
        }
    }

    /// Imputes `g`. `seed` is used only by randomised methods.
    pub fn impute(&self, g: &GappedSeries, seed: u64) -> Result<ImputationResult> {
        match &self.method {
            Method::Linear => impute_linear(g),
            Method::Spline => impute_spline(g),
            Method::Seasonal => impute_seasonal(g),
            Method::Locf => impute_locf(g),
            Method::Statistic(s) => impute_statistic(g, *s),
            Method::Random => impute_random(g, seed),
            Method::External(cmd) => impute_external(g, cmd),
            Method::Custom(f) => ImputationResult::validated(g, f(g, seed)?),
        }
    }
}

pub fn dispatch(imputer: &Imputer, g: &GappedSeries, seed: u64) -> Result<ImputationResult> {
    imputer.impute(g, seed)
}

/// An ordered set of imputers with unique names.
#[derive(Debug, Clone, Default)]
pub struct ImputerRegistry {
    imputers: Vec<Imputer>,
}

impl ImputerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        Self {
            imputers: Imputer::defaults(),
        }
    }

    pub fn register(&mut self, imputer: Imputer) -> Result<()> {
        if self.get(imputer.name()).is_some() {
            return Err(Error::Config(format!(
                "method `{}` is already registered",
                imputer.name()
            )));
        }
        self.imputers.push(imputer);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Imputer> {
        self.imputers.iter().find(|i| i.name() == name)
    }

    pub fn dispatch(&self, name: &str, g: &GappedSeries, seed: u64) -> Result<ImputationResult> {
        let imp = self
            .get(name)
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
        dispatch(imp, g, seed)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Imputer> {
        self.imputers.iter()
    }

    pub fn len(&self) -> usize {
        self.imputers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imputers.is_empty()
    }

    pub fn into_vec(self) -> Vec<Imputer> {
        self.imputers
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn dispatch_routes_mode_option() {
        let imp = Imputer::builtin("na.mean", params(&[("option", "mode")])).unwrap();
        let g = GappedSeries::new(vec![Some(1.), Some(1.), Some(9.), None], None).unwrap();
        assert_eq!(dispatch(&imp, &g, 0).unwrap().values(), &[1., 1., 9., 1.]);
    }

    #[test]
    fn unknown_method() {
        assert!(matches!(
            Imputer::named("na.bogus"),
            Err(Error::UnknownMethod(_))
        ));
        let reg = ImputerRegistry::with_defaults();
        let g = GappedSeries::new(vec![Some(1.), None], None).unwrap();
        assert!(matches!(
            reg.dispatch("na.bogus", &g, 0),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn default_routing_is_locf() {
        let reg = ImputerRegistry::with_defaults();
        let g = GappedSeries::new(vec![Some(3.), None, Some(5.), None], None).unwrap();
        assert_eq!(
            reg.dispatch("na.locf", &g, 0).unwrap(),
            impute_locf(&g).unwrap()
        );
    }

    #[test]
    fn invalid_params() {
        assert!(matches!(
            Imputer::builtin("na.mean", params(&[("option", "geometric")])),
            Err(Error::InvalidParam { .. })
        ));
        assert!(matches!(
            Imputer::builtin("na.mean", params(&[("window", "3")])),
            Err(Error::InvalidParam { .. })
        ));
        assert!(matches!(
            Imputer::builtin("na.locf", params(&[("option", "mean")])),
            Err(Error::InvalidParam { .. })
        ));
        assert!(Imputer::builtin("na.interpolation", params(&[("option", "linear")])).is_ok());
    }

    #[test]
    fn interpolation_option_selects_method() {
        let g = GappedSeries::new(
            vec![Some(0.), Some(1.), Some(8.), None, Some(64.), Some(125.)],
            None,
        )
        .unwrap();
        let lin = Imputer::builtin("na.interpolation", params(&[("option", "linear")])).unwrap();
        assert_eq!(lin.impute(&g, 0).unwrap().values()[3], 36.0);
        let spl = Imputer::named("na.interpolation").unwrap();
        assert!((spl.impute(&g, 0).unwrap().values()[3] - 27.0).abs() < 1e-9);
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = ImputerRegistry::with_defaults();
        assert_eq!(reg.len(), 5);
        assert!(reg.register(Imputer::named("na.locf").unwrap()).is_err());
        reg.register(Imputer::named("na.random").unwrap()).unwrap();
        assert_eq!(reg.len(), 6);
    }

    #[test]
    fn custom_output_is_validated() {
        let g = GappedSeries::new(vec![Some(1.), None, Some(3.)], None).unwrap();
        let bad = Imputer::custom("bad", |_, _| Ok(vec![0., 0., 0.]));
        assert!(bad.impute(&g, 0).is_err());
        let short = Imputer::custom("short", |_, _| Ok(vec![1., 2.]));
        assert!(matches!(
            short.impute(&g, 0),
            Err(Error::LengthMismatch { .. })
        ));
        let good = Imputer::custom("good", |_, _| Ok(vec![1., 2., 3.]));
        assert_eq!(good.impute(&g, 0).unwrap().values(), &[1., 2., 3.]);
        assert_eq!(good.kind(), ImputerKind::Custom);
    }

    #[test]
    fn complete_input_is_returned_unchanged() {
        let g = GappedSeries::new((0..24).map(|i| Some((i * i % 7) as f64)).collect(), Some(6))
            .unwrap();
        let expected: Vec<f64> = g.observed_values();
        for imp in Imputer::defaults() {
            assert_eq!(
                imp.impute(&g, 1).unwrap().values(),
                expected.as_slice(),
                "{}",
                imp.name()
            );
        }
    }
}
