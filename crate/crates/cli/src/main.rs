//! `coarse-entropy`: command-line front end.
//!
//! Every command builds one space (or two, for `obstruct`), runs one
//! computation and writes a `v1` JSON report or a CSV table.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use coarse_entropy::Dist;

mod commands;
mod config;
mod output;

use config::{parse_list, Command, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] coarse_entropy::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse entropy of metric spaces at finite scale.
#[derive(Debug, Parser)]
#[command(name = "coarse-entropy", version)]
struct Cli {
    /// What to compute; may instead come from `--config`.
    #[arg(value_enum)]
    command: Option<Command>,

    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Catalog tag (integer_line, ultrametric_product, log_line, prime_cycle,
    /// tree_line, branch_tree, regular_tree, coarse_union).
    #[arg(long)]
    space: Option<String>,

    /// Catalog parameters as a JSON object.
    #[arg(long)]
    params: Option<String>,

    /// Edge-list CSV with header `src,dst[,weight]`.
    #[arg(long)]
    edges: Option<PathBuf>,

    /// Target space for `obstruct`.
    #[arg(long)]
    target: Option<String>,

    #[arg(long)]
    target_params: Option<String>,

    #[arg(long)]
    target_edges: Option<PathBuf>,

    /// Lengths: comma-separated integers or inclusive ranges `a..b`.
    #[arg(long)]
    n: Option<String>,

    /// Step size δ (integer, `p/q`, or decimal).
    #[arg(long)]
    delta: Option<Dist>,

    /// Separation radius R.
    #[arg(long)]
    radius: Option<Dist>,

    /// Budget window of the catalog space (depth for trees).
    #[arg(long)]
    window: Option<u64>,

    /// Most δ-paths enumerated (default 10^6).
    #[arg(long)]
    cap: Option<usize>,

    /// Most points in one window or ball (default 10^4).
    #[arg(long)]
    point_cap: Option<usize>,

    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Exit with status 2 on an inconclusive classification.
    #[arg(long)]
    strict: bool,

    /// Base for reported rates and slopes: `e` (default) or a number.
    #[arg(long)]
    log_base: Option<String>,

    /// `rates`: separated or dense.
    #[arg(long)]
    quantity: Option<String>,

    /// `growth`: counting or measure.
    #[arg(long)]
    measure: Option<String>,

    /// `witness`: ping-pong repetitions.
    #[arg(long)]
    p: Option<usize>,

    /// `witness` on branch_tree: depth of the branching vertex.
    #[arg(long)]
    depth: Option<u32>,

    /// `bgcheck`: separation s.
    #[arg(long)]
    s: Option<Dist>,

    /// `bgcheck`: diameter bound D.
    #[arg(long)]
    diameter: Option<Dist>,

    /// `bgcheck`: window depths, as for `--n`.
    #[arg(long)]
    depths: Option<String>,

    /// `orbits`: include the enumerated paths.
    #[arg(long)]
    paths: bool,

    /// Run without the parallel pool.
    #[arg(long)]
    sequential: bool,
}

fn json_arg(s: Option<String>, name: &str) -> Result<Option<serde_json::Value>, CliError> {
    s.map(|t| serde_json::from_str(&t).map_err(|e| CliError::Config(format!("--{name}: {e}"))))
        .transpose()
}

fn enum_arg<T: serde::de::DeserializeOwned>(s: Option<String>, name: &str) -> Result<Option<T>, CliError> {
    s.map(|t| serde_json::from_value(serde_json::Value::String(t.clone())).map_err(|_| CliError::Config(format!("--{name}: unknown value `{t}`"))))
        .transpose()
}

fn list_arg(s: Option<String>, name: &str) -> Result<Option<Vec<u64>>, CliError> {
    s.map(|t| parse_list(&t).map_err(|e| CliError::Config(format!("--{name}: {e}")))).transpose()
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            command: self.command,
            space: self.space,
            params: json_arg(self.params, "params")?,
            edges: self.edges,
            target: self.target,
            target_params: json_arg(self.target_params, "target-params")?,
            target_edges: self.target_edges,
            n: list_arg(self.n, "n")?,
            delta: self.delta,
            radius: self.radius,
            window: self.window,
            cap: self.cap,
            point_cap: self.point_cap,
            out: self.out,
            format: self.format,
            strict: self.strict,
            log_base: self.log_base,
            quantity: enum_arg(self.quantity, "quantity")?,
            measure: enum_arg(self.measure, "measure")?,
            p: self.p,
            depth: self.depth,
            s: self.s,
            diameter: self.diameter,
            depths: list_arg(self.depths, "depths")?,
            paths: self.paths,
            sequential: self.sequential,
            classify: None,
        };
        Ok(base.merge(flags))
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let config = cli.into_config()?;
    let strict = config.strict;
    let format = config.format();
    let out = config.out.clone();
    let ctx = commands::Ctx::new(config)?;
    let report = ctx.run()?;
    match out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            report.write(format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(format, &mut lock)?;
        }
    }
    Ok(if strict && report.inconclusive { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
