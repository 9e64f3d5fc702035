use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use compdefl::Linesearch;

#[derive(Debug, Parser)]
#[command(name = "compdefl", version, about = "Enumerate solutions of complementarity problems by deflation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the deflation loop on a built-in benchmark or an LCP data file.
    Solve(SolveArgs),
    /// List the built-in benchmarks and their default settings.
    List,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Built-in benchmark: kojima, aggarwal, konno-kuno, gould, tinloi, mathiesen.
    #[arg(long, value_name = "NAME", required_unless_present = "lcp_file")]
    pub problem: Option<String>,
    /// LCP data file (`n`, then `A` row-major, then `b`).
    #[arg(long, value_name = "PATH")]
    pub lcp_file: Option<PathBuf>,
    /// Initial guess, a scalar broadcast to every component or a comma list.
    #[arg(long, value_name = "X0", allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Deflation power.
    #[arg(long)]
    pub p: Option<f64>,
    /// Deflation shift.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bump radius.
    #[arg(long)]
    pub delta: Option<f64>,
    /// ℓ2 tolerance on the residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_solutions: usize,
    /// Newton iterations per solve.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub linesearch: Option<LinesearchArg>,
    /// Points deflated before the first solve, e.g. "0,0;1,2".
    #[arg(long, value_name = "V1;V2", allow_hyphen_values = true)]
    pub pre_deflate: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Elasticity parameter of the mathiesen benchmark.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinesearchArg {
    Sun,
    Armijo,
}

impl From<LinesearchArg> for Linesearch {
    fn from(arg: LinesearchArg) -> Self {
        match arg {
            LinesearchArg::Sun => Linesearch::ProjectedSun,
            LinesearchArg::Armijo => Linesearch::ProjectedArmijo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Parses `"0.4"` (broadcast to `n`) or `"1,2,3"` (must have `n` entries).
pub fn parse_vector(text: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let values = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid number `{p}` in `{text}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(format!("expected 1 or {n} values, got {len} in `{text}`")),
    }
}

/// Semicolon-separated list of vectors, each as in [`parse_vector`].
pub fn parse_vector_list(text: &str, n: usize) -> Result<Vec<Vec<f64>>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_vector(s, n))
        .collect()
}
