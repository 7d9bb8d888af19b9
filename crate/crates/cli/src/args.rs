//! Command-line surface.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vlmarket_core::verify::CheckName;
use vlmarket_core::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "vlmarket", version)]
#[command(about = "Clear space-time electricity markets with virtual links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, solve and settle a market
    Clear(ClearArgs),
    /// Run the property checks on a market, optionally against a saved solution
    Verify(VerifyArgs),
    /// Capacity sweeps of one link or line, and surplus along scenario chains
    Sweep(SweepArgs),
    /// Write the LP model and the scenario JSON
    Export(ExportArgs),
    /// LMP summary statistics and histogram of a cleared market
    Stats(StatsArgs),
    /// Write a generated 30-bus demand profile
    Profile(ProfileArgs),
}

/// Where the scenario comes from.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Builtin selector: temporal:<1-9>, sevenbus:<1-7>, ieee30 or ieee30:novl
    #[arg(long, conflicts_with = "scenario")]
    pub builtin: Option<String>,

    /// Scenario JSON file
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    /// Demand profile JSON for the 30-bus case
    #[arg(long, conflicts_with = "profile_seed")]
    pub profile: Option<PathBuf>,

    /// Seed of the generated demand profile for the 30-bus case
    #[arg(long)]
    pub profile_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    /// Override a tolerance, e.g. feas=1e-9 (feas, comp, gap, cleared, price)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

impl TolArgs {
    pub fn resolve(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        for item in &self.tol {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("tolerance `{item}` is not NAME=VALUE"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| anyhow!("tolerance `{name}` has a non-numeric value `{value}`"))?;
            if !(v.is_finite() && v >= 0.0) {
                bail!("tolerance `{name}` must be finite and nonnegative");
            }
            match name.trim() {
                "feas" => t.feas = v,
                "comp" => t.comp = v,
                "gap" => t.gap = v,
                "cleared" => t.cleared = v,
                "price" => t.price = v,
                other => bail!("unknown tolerance `{other}`"),
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClearArgs {
    #[command(flatten)]
    pub source: Source,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Run the property checks after clearing
    #[arg(long)]
    pub verify: bool,

    /// Comma-separated checks to run (default: all)
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,

    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,

    #[command(flatten)]
    pub tol: TolArgs,

    /// Also write the final basis with column values and row duals
    #[arg(long)]
    pub dump_basis: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,

    /// Replay a solution.json written by `clear` instead of solving
    #[arg(long)]
    pub solution: Option<PathBuf>,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Comma-separated checks to run (default: all)
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,

    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,

    /// link=<id>|line=<id> followed by grid=<a:b:step> (capacity offsets)
    /// or cap=<a:b:step> (absolute capacities); grid parts may repeat
    #[arg(long)]
    pub sweep: Vec<String>,

    /// Comma-separated builtin selectors, ranges allowed (temporal:1-5)
    #[arg(long)]
    pub chain: Option<String>,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Histogram bins for the LMP histograms
    #[arg(long, default_value_t = 20)]
    pub bins: usize,

    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Export the single-hub disaggregation model instead
    #[arg(long)]
    pub disaggregation: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub source: Source,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Empty input selects every check.
pub fn parse_checks(items: &[String]) -> Result<Vec<CheckName>> {
    if items.is_empty() {
        return Ok(CheckName::ALL.to_vec());
    }
    items
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| CheckName::parse(s).ok_or_else(|| anyhow!("unknown check `{s}`")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    Link,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub id: String,
    /// Offsets from the scenario capacity, unless `absolute`.
    pub values: Vec<f64>,
    /// Values are capacities; the sweep starts from a zero-capacity copy.
    pub absolute: bool,
}

/// Parses `link=v7_1,grid=0:20:1,grid=1000`.
pub fn parse_sweep(spec: &str) -> Result<SweepSpec> {
    let mut target = None;
    let mut values = Vec::new();
    let mut mode: Option<bool> = None;
    for part in spec.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("sweep item `{part}` is not KEY=VALUE"))?;
        match key.trim() {
            "link" => target = Some((SweepTarget::Link, val.trim().to_string())),
            "line" => target = Some((SweepTarget::Line, val.trim().to_string())),
            "grid" | "cap" => {
                let absolute = key.trim() == "cap";
                if mode.is_some_and(|m| m != absolute) {
                    bail!("a sweep cannot mix grid= and cap=");
                }
                mode = Some(absolute);
                values.extend(parse_range(val)?);
            }
            other => bail!("unknown sweep key `{other}`"),
        }
    }
    let (target, id) = target.ok_or_else(|| anyhow!("sweep needs link=<id> or line=<id>"))?;
    if values.is_empty() {
        bail!("sweep grid is empty");
    }
    Ok(SweepSpec {
        target,
        id,
        values,
        absolute: mode.unwrap_or(false),
    })
}

/// `a:b:step` inclusive of `b` when it lands on the lattice, or a single number.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        bail!("sweep grid is empty");
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| -> Result<f64> {
        let v: f64 = x
            .trim()
            .parse()
            .map_err(|_| anyhow!("`{x}` is not a number"))?;
        if !v.is_finite() {
            bail!("grid values must be finite");
        }
        Ok(v)
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 {
                bail!("grid step must be positive");
            }
            if b < a {
                bail!("grid range {a}:{b} is empty");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        _ => bail!("grid `{s}` is neither a number nor a:b:step"),
    }
}

/// Expands `temporal:1-5,sevenbus:2` into single selectors.
pub fn expand_chain(spec: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once(':') {
            Some((family, ids)) if ids.contains('-') => {
                let (a, b) = ids.split_once('-').unwrap();
                let a: usize = a.trim().parse().map_err(|_| anyhow!("bad chain range `{item}`"))?;
                let b: usize = b.trim().parse().map_err(|_| anyhow!("bad chain range `{item}`"))?;
                if b < a {
                    bail!("chain range `{item}` is empty");
                }
                out.extend((a..=b).map(|k| format!("{family}:{k}")));
            }
            _ => out.push(item.to_string()),
        }
    }
    if out.is_empty() {
        bail!("chain is empty");
    }
    Ok(out)
}
