use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use coarse_entropy::entropy::{ClassifyConfig, GrowthMeasure, Quantity};
use coarse_entropy::Dist;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Step-ball growth series and its slope.
    Growth,
    /// Counts of δ-paths from the basepoint.
    Orbits,
    /// Separated or dense counts and their rates.
    Rates,
    /// Ping-pong lower-bound family and its rate bound.
    Witness,
    /// Zero / infinite coarse-entropy classification.
    Classify,
    /// Quasi-geodesicity check on sampled pairs.
    Qgcheck,
    /// Bounded-geometry evidence over window depths.
    Bgcheck,
    /// Embedding obstruction between two spaces.
    Obstruct,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Growth => "growth",
            Command::Orbits => "orbits",
            Command::Rates => "rates",
            Command::Witness => "witness",
            Command::Classify => "classify",
            Command::Qgcheck => "qgcheck",
            Command::Bgcheck => "bgcheck",
            Command::Obstruct => "obstruct",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Logarithm base for reported rates and slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBase(pub f64);

impl LogBase {
    /// Divisor converting a natural logarithm into this base.
    pub fn ln_base(self) -> f64 {
        self.0.ln()
    }

    pub fn label(self) -> String {
        if self.0 == std::f64::consts::E {
            "e".into()
        } else {
            self.0.to_string()
        }
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let b = match s.trim() {
            "e" => std::f64::consts::E,
            t => t.parse::<f64>().map_err(|_| format!("log base must be `e` or a number, got `{t}`"))?,
        };
        if !(b.is_finite() && b > 0.0 && b != 1.0) {
            return Err(format!("log base must be positive and not 1, got {b}"));
        }
        Ok(LogBase(b))
    }
}

/// A list of lengths: comma-separated integers or inclusive ranges `a..b`.
pub fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad range start in `{item}`"))?;
                let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end in `{item}`"))?;
                if a > b {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| format!("`{item}` is not a nonnegative integer"))?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Everything one invocation needs. Read from `--config` (unknown fields
/// rejected), then overridden by command-line flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub space: Option<String>,
    pub params: Option<serde_json::Value>,
    pub edges: Option<PathBuf>,
    pub target: Option<String>,
    pub target_params: Option<serde_json::Value>,
    pub target_edges: Option<PathBuf>,
    pub n: Option<Vec<u64>>,
    pub delta: Option<Dist>,
    pub radius: Option<Dist>,
    pub window: Option<u64>,
    /// Most δ-paths enumerated.
    pub cap: Option<usize>,
    /// Most points in one window or ball.
    pub point_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub strict: bool,
    pub log_base: Option<String>,
    pub quantity: Option<Quantity>,
    pub measure: Option<GrowthMeasure>,
    pub p: Option<usize>,
    pub depth: Option<u32>,
    pub s: Option<Dist>,
    pub diameter: Option<Dist>,
    pub depths: Option<Vec<u64>>,
    #[serde(default)]
    pub paths: bool,
    #[serde(default)]
    pub sequential: bool,
    pub classify: Option<ClassifyConfig>,
}

pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;
pub const DEFAULT_POINT_CAP: usize = 10_000;

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            command, space, params, edges, target, target_params, target_edges, n, delta, radius, window, cap,
            point_cap, out, format, log_base, quantity, measure, p, depth, s, diameter, depths, classify
        );
        self.strict |= other.strict;
        self.paths |= other.paths;
        self.sequential |= other.sequential;
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cmd = self.command.ok_or_else(|| CliError::Config("no command given".into()))?;
        match (&self.space, &self.edges) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either --space or --edges, not both".into())),
            (None, None) => return Err(CliError::Config("missing --space or --edges".into())),
            _ => {}
        }
        if cmd == Command::Obstruct && self.target.is_none() && self.target_edges.is_none() {
            return Err(CliError::Config("obstruct needs --target or --target-edges".into()));
        }
        if self.edges.is_some() && self.params.is_some() {
            return Err(CliError::Config("--params applies to catalog spaces only".into()));
        }
        for (name, d) in [("delta", &self.delta), ("radius", &self.radius), ("s", &self.s), ("diameter", &self.diameter)] {
            if let Some(d) = d {
                if !d.is_positive() || !d.is_finite() {
                    return Err(CliError::Config(format!("--{name} must be positive and finite, got {d}")));
                }
            }
        }
        if self.cap == Some(0) || self.point_cap == Some(0) {
            return Err(CliError::Config("caps must be positive".into()));
        }
        if self.p == Some(0) {
            return Err(CliError::Config("--p must be positive".into()));
        }
        self.log_base()?;
        Ok(())
    }

    pub fn log_base(&self) -> Result<LogBase, CliError> {
        match &self.log_base {
            None => Ok(LogBase(std::f64::consts::E)),
            Some(s) => s.parse().map_err(CliError::Config),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn orbit_cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_ORBIT_CAP)
    }

    pub fn point_cap(&self) -> usize {
        self.point_cap.unwrap_or(DEFAULT_POINT_CAP)
    }

    pub fn delta(&self) -> Dist {
        self.delta.unwrap_or(Dist::int(1))
    }

    pub fn radius(&self) -> Dist {
        self.radius.unwrap_or(Dist::int(2))
    }

    pub fn n_list(&self, default: &[u64]) -> Vec<usize> {
        self.n.as_deref().unwrap_or(default).iter().map(|&n| n as usize).collect()
    }
}
