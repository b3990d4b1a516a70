//! Optional TOML configuration for `bench`. Command-line flags (and the
//! jobs environment variable) take precedence over values read here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<String>,
    pub data: Option<PathBuf>,
    pub column: Option<String>,
    pub period: Option<usize>,
    pub smps: Option<String>,
    pub blck: Option<f64>,
    pub blckper: Option<bool>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<String>>,
    /// `method -> option -> value`
    #[serde(default)]
    pub addl_arg: BTreeMap<String, BTreeMap<String, String>>,
    /// `method name -> command line`
    #[serde(default)]
    pub plugins: BTreeMap<String, String>,
    pub plugin_timeout: Option<f64>,
    pub error_parameter: Option<String>,
    /// `metric name -> command line`
    #[serde(default)]
    pub metric_plugins: BTreeMap<String, String>,
    pub miss_from: Option<f64>,
    pub miss_to: Option<f64>,
    pub interval: Option<f64>,
    pub repetition: Option<usize>,
    pub score_on: Option<String>,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub plot_type: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }
}
