//! Run configuration: presets, config-file parsing and precedence.
//!
//! Precedence is command-line flags over config-file values over preset
//! values over built-in defaults. All drive quantities are ratios to the gap
//! (epsilon/Δ, A/Δ, w/Δ, γ̃/Δ); frequencies and times are in units of Δ and
//! 1/Δ.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown format '{other}' (expected csv or json)"),
        }
    }
}

/// Frequency grid specification `min:max:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| {
                self.omega_min + (self.omega_max - self.omega_min) * i as f64 / (n - 1) as f64
            })
            .collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be min:max:n, got '{s}'");
        }
        Ok(GridSpec {
            omega_min: parts[0].parse().context("grid min")?,
            omega_max: parts[1].parse().context("grid max")?,
            n_points: parts[2].parse().context("grid point count")?,
        })
    }
}

/// One layer of settings; `None` means "not set at this layer".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub amplitude: Option<f64>,
    pub omega_drive: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<GridSpec>,
    pub depth: Option<usize>,
    pub n_gamma: Option<usize>,
    pub dt_factor: Option<f64>,
    pub window: Option<f64>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub coupling: Option<f64>,
    pub dos: Option<f64>,
    pub epsilon_k: Option<f64>,
    pub cutoff: Option<f64>,
}

impl Overrides {
    /// Later layers win field by field.
    pub fn layered_under(self, stronger: Overrides) -> Overrides {
        Overrides {
            epsilon: stronger.epsilon.or(self.epsilon),
            amplitude: stronger.amplitude.or(self.amplitude),
            omega_drive: stronger.omega_drive.or(self.omega_drive),
            gamma: stronger.gamma.or(self.gamma),
            grid: stronger.grid.or(self.grid),
            depth: stronger.depth.or(self.depth),
            n_gamma: stronger.n_gamma.or(self.n_gamma),
            dt_factor: stronger.dt_factor.or(self.dt_factor),
            window: stronger.window.or(self.window),
            tolerance: stronger.tolerance.or(self.tolerance),
            out: stronger.out.or(self.out),
            format: stronger.format.or(self.format),
            coupling: stronger.coupling.or(self.coupling),
            dos: stronger.dos.or(self.dos),
            epsilon_k: stronger.epsilon_k.or(self.epsilon_k),
            cutoff: stronger.cutoff.or(self.cutoff),
        }
    }
}

/// Named parameter sets from the reproduction figure:
/// (w/Δ, ε/Δ, A/Δ), always with γ̃/Δ = 0.01 and the 0–10 window.
pub fn preset(name: &str) -> Result<Overrides> {
    let key = name.strip_prefix("figure5-").unwrap_or(name);
    let (w, eps, a) = match key {
        "a" => (4.0, 4.0, 2.05),
        "b" => (3.0, 4.0, 2.05),
        "c" => (4.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0),
        "d" => (2.0 / 7.0, 1.0 / 7.0, 1.0 / 28.0),
        other => bail!("unknown preset '{other}' (expected figure5-a..figure5-d)"),
    };
    Ok(Overrides {
        epsilon: Some(eps),
        amplitude: Some(a),
        omega_drive: Some(w),
        gamma: Some(1e-2),
        grid: Some(GridSpec { omega_min: 0.0, omega_max: 10.0, n_points: 2000 }),
        ..Overrides::default()
    })
}

/// Flat `key=value` config file with the same keys as the flags.
pub fn parse_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut layer = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got '{raw}'", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let fl = || -> Result<f64> {
            value.parse().with_context(|| format!("line {}: bad number '{value}'", lineno + 1))
        };
        match key {
            "epsilon" => layer.epsilon = Some(fl()?),
            "amplitude" => layer.amplitude = Some(fl()?),
            "omega-drive" => layer.omega_drive = Some(fl()?),
            "gamma" => layer.gamma = Some(fl()?),
            "grid" => layer.grid = Some(value.parse()?),
            "depth" => layer.depth = Some(value.parse().context("depth")?),
            "n-gamma" => layer.n_gamma = Some(value.parse().context("n-gamma")?),
            "dt-factor" => layer.dt_factor = Some(fl()?),
            "window" => layer.window = Some(fl()?),
            "tolerance" => layer.tolerance = Some(fl()?),
            "out" => layer.out = Some(PathBuf::from(value)),
            "format" => layer.format = Some(value.parse()?),
            "coupling" => layer.coupling = Some(fl()?),
            "dos" => layer.dos = Some(fl()?),
            "epsilon-k" => layer.epsilon_k = Some(fl()?),
            "cutoff" => layer.cutoff = Some(fl()?),
            other => bail!("line {}: unknown key '{other}'", lineno + 1),
        }
    }
    Ok(layer)
}

/// Fully resolved run configuration (everything in units of the gap).
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub epsilon: f64,
    pub amplitude: f64,
    pub omega_drive: f64,
    pub gamma: f64,
    pub grid: GridSpec,
    pub depth: usize,
    pub n_gamma: usize,
    pub dt_factor: f64,
    /// trace length in units of 1/Δ
    pub window: f64,
    /// peak-matching tolerance in units of Δ
    pub tolerance: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn resolve(command: &str, layers: Overrides) -> Result<RunConfig> {
        let gamma = layers.gamma.unwrap_or(1e-2);
        let config = RunConfig {
            command: command.to_string(),
            epsilon: layers.epsilon.ok_or_else(|| anyhow!("epsilon not set (flag or preset)"))?,
            amplitude: layers
                .amplitude
                .ok_or_else(|| anyhow!("amplitude not set (flag or preset)"))?,
            omega_drive: layers
                .omega_drive
                .ok_or_else(|| anyhow!("omega-drive not set (flag or preset)"))?,
            gamma,
            grid: layers.grid.unwrap_or(GridSpec {
                omega_min: 0.0,
                omega_max: 10.0,
                n_points: 2000,
            }),
            depth: layers.depth.unwrap_or(5),
            n_gamma: layers.n_gamma.unwrap_or(6),
            dt_factor: layers.dt_factor.unwrap_or(1e-3),
            // default window: damp to 1e-4 residual weight, 5% margin
            window: layers.window.unwrap_or_else(|| -(1e-4f64).ln() / gamma * 1.05),
            tolerance: layers.tolerance.unwrap_or(0.05),
            out: layers.out,
            format: layers.format.unwrap_or(OutputFormat::Csv),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.grid.n_points < 16 {
            bail!("grid needs at least 16 points, got {}", self.grid.n_points);
        }
        if !(self.grid.omega_min >= 0.0) || !(self.grid.omega_max > self.grid.omega_min) {
            bail!(
                "grid window must satisfy 0 <= min < max, got [{}, {}]",
                self.grid.omega_min,
                self.grid.omega_max
            );
        }
        if self.depth < 1 {
            bail!("depth must be at least 1");
        }
        if !(self.gamma > 0.0) {
            bail!("gamma must be positive, got {}", self.gamma);
        }
        if !(self.dt_factor > 0.0) || !(self.window > 0.0) {
            bail!("dt-factor and window must be positive");
        }
        if !(self.tolerance >= 0.0) {
            bail!("tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Resolved pairing-model parameters for the gap-equation command.
#[derive(Debug, Clone, Serialize)]
pub struct BcsConfig {
    pub coupling: f64,
    pub dos: f64,
    pub epsilon_k: f64,
    pub cutoff: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl BcsConfig {
    pub fn resolve(layers: Overrides) -> Result<BcsConfig> {
        Ok(BcsConfig {
            coupling: layers.coupling.unwrap_or(2.0),
            dos: layers.dos.unwrap_or(1.0),
            epsilon_k: layers.epsilon_k.unwrap_or(0.5),
            cutoff: layers.cutoff.unwrap_or(100.0),
            out: layers.out,
            format: layers.format.unwrap_or(OutputFormat::Json),
        })
    }
}
