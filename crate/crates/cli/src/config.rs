use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use riesz_core::multiplier::{BilinearOptions, BilinearPath};
use riesz_core::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Partition,
    Steinweiss,
    Decomposition,
    Plancherel,
    Kernel,
    Telescope,
    Lemma53,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Norm,
    Decay,
    Convergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OpChoice {
    Product,
    Br,
    Maximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PairChoice {
    Gaussian,
    Bandlimited,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    Auto,
    Tensor,
    Loop,
    CrossCheck,
}

impl From<PathChoice> for BilinearPath {
    fn from(p: PathChoice) -> Self {
        match p {
            PathChoice::Auto => BilinearPath::Auto,
            PathChoice::Tensor => BilinearPath::Tensor,
            PathChoice::Loop => BilinearPath::Loop,
            PathChoice::CrossCheck => BilinearPath::CrossCheck,
        }
    }
}

/// Every knob of a run. Unset fields take per-command defaults; the resolved
/// config is echoed into every artifact.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    pub command: Option<String>,
    /// JSON file with any of these fields; flags override it
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, value_enum)]
    pub kind: Option<ProbeKind>,
    #[arg(long, value_enum)]
    pub op: Option<OpChoice>,
    #[arg(long, value_enum)]
    pub pair: Option<PairChoice>,
    /// spatial dimension
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub box_length: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub p1: Option<String>,
    #[arg(long)]
    pub p2: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_count: Option<usize>,
    #[arg(long)]
    pub j_min: Option<u32>,
    #[arg(long)]
    pub j_max: Option<u32>,
    #[arg(long)]
    pub t_nodes: Option<usize>,
    /// explicit evaluation points, comma separated
    #[arg(long, value_delimiter = ',')]
    pub t_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// 1/p steps for region scans
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum)]
    pub path: Option<PathChoice>,
    #[arg(long)]
    pub empirical: Option<bool>,
    #[arg(long)]
    pub compare: Option<bool>,
    #[arg(long, allow_hyphen_values = true)]
    pub max_slope: Option<f64>,
    #[arg(long)]
    pub max_error: Option<f64>,
    #[arg(long)]
    pub min_speedup: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    /// File values first, then every flag that was given.
    pub fn resolve(command: &str, flags: RunConfig) -> anyhow::Result<RunConfig> {
        let mut base = match &flags.config {
            Some(path) => load(path)?,
            None => serde_json::to_value(RunConfig::default())?,
        };
        let over = serde_json::to_value(&flags)?;
        if let (Value::Object(b), Value::Object(o)) = (&mut base, over) {
            for (k, v) in o {
                if !v.is_null() {
                    b.insert(k, v);
                }
            }
        }
        let mut cfg: RunConfig =
            serde_json::from_value(base).map_err(|e| ConfigError(e.to_string()))?;
        cfg.command = Some(command.to_string());
        Ok(cfg)
    }

    /// One-line JSON of the non-null fields.
    pub fn header(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.retain(|_, x| !x.is_null());
        }
        format!("# config: {v}")
    }

    pub fn bilinear(&self) -> BilinearOptions {
        BilinearOptions {
            path: self.path.unwrap_or(PathChoice::Auto).into(),
            ..Default::default()
        }
    }
}

/// Anything wrong with the inputs rather than the numbers; exits with 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn load(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("bad config {}: {e}", path.display())))?;
    Ok(serde_json::to_value(cfg)?)
}

pub fn grid_header(grid: &Grid) -> String {
    format!(
        "# grid: dim={} box_length={} samples_per_axis={}",
        grid.dim, grid.box_length, grid.samples_per_axis
    )
}
