//! Command line and file formats for `compdefl`.
//!
//! ```text
//! compdefl solve --problem gould --format json
//! compdefl solve --lcp-file data.txt --p 1 --alpha 1 --x0 0.4 --linesearch armijo
//! ```
//!
//! Exit status is 0 when at least one solution was found, 2 when none was,
//! and 1 on a usage or input error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::Parser;
use compdefl::driver::enumerate_solutions;
use compdefl::problems::{
    benchmark, mathiesen, tinloi, BenchmarkSpec, CoordinateShift, BENCHMARK_NAMES,
};
use compdefl::{DeflationParams, Linesearch, Problem, SolverConfig};

pub mod args;
pub mod lcp;
pub mod report;

use args::{parse_vector, parse_vector_list, Cli, Command, Format, SolveArgs};
pub use lcp::{lcp_from_file, read_lcp, write_lcp};
use report::{ParamsReport, Report, SolutionRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        source: compdefl::Error,
    },
    #[error(transparent)]
    Solver(#[from] compdefl::Error),
    #[error("cannot write report: {0}")]
    Output(#[from] io::Error),
    #[error("cannot write report: {0}")]
    Csv(#[from] csv::Error),
}

/// Everything needed for one enumeration, in the solver frame.
pub struct Job {
    pub name: String,
    pub problem: Problem,
    pub z0: Vec<f64>,
    pub params: DeflationParams,
    pub config: SolverConfig,
    pub pre_deflate: Vec<Vec<f64>>,
    pub max_solutions: usize,
    /// Maps solver coordinates back to the reported ones.
    pub shift: Option<CoordinateShift>,
}

impl Job {
    pub fn from_args(args: &SolveArgs) -> Result<Self, CliError> {
        let usage = |m: String| CliError::Usage(m);
        let spec = match (args.problem.as_deref(), &args.lcp_file) {
            (Some("tinloi"), Some(path)) => tinloi(lcp_from_file(path)?),
            (Some("tinloi"), None) => {
                return Err(usage("tinloi needs its data: pass --lcp-file PATH".into()))
            }
            (Some(name), Some(_)) => {
                return Err(usage(format!(
                    "--lcp-file only combines with --problem tinloi, not `{name}`"
                )))
            }
            (Some("mathiesen"), None) => {
                let gamma = args.gamma.unwrap_or(1.0);
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(usage(format!("--gamma must be positive, got {gamma}")));
                }
                mathiesen(gamma)
            }
            (Some(name), None) => benchmark(name).ok_or_else(|| {
                usage(format!(
                    "unknown problem `{name}`; expected one of {}",
                    BENCHMARK_NAMES.join(", ")
                ))
            })?,
            (None, Some(path)) => generic_lcp(lcp_from_file(path)?),
            (None, None) => return Err(usage("pass --problem NAME or --lcp-file PATH".into())),
        };
        if args.gamma.is_some() && spec.name != "mathiesen" {
            return Err(usage("--gamma only applies to the mathiesen problem".into()));
        }

        let n = spec.problem.dim();
        // User vectors are given in the reported frame.
        let z0 = match &args.x0 {
            Some(text) => spec.to_solver(&parse_vector(text, n).map_err(usage)?),
            None => spec.z0.clone(),
        };
        let pre_deflate = match &args.pre_deflate {
            Some(text) => parse_vector_list(text, n)
                .map_err(usage)?
                .iter()
                .map(|v| spec.to_solver(v))
                .collect(),
            None => spec.pre_deflate.clone(),
        };
        let mut params = spec.params;
        if let Some(p) = args.p {
            params.power = p;
        }
        if let Some(alpha) = args.alpha {
            params.shift = alpha;
        }
        if let Some(delta) = args.delta {
            params.radius = delta;
        }
        params.validate()?;
        let mut config = spec.config();
        config.tol = args.tol;
        if let Some(max_iter) = args.max_iter {
            config.max_iter = max_iter;
        }
        if let Some(ls) = args.linesearch {
            config.linesearch = ls.into();
        }
        config.validate()?;
        if args.max_solutions == 0 {
            return Err(usage("--max-solutions must be at least 1".into()));
        }
        Ok(Self {
            name: spec.name.to_string(),
            problem: spec.problem,
            z0,
            params,
            config,
            pre_deflate,
            max_solutions: args.max_solutions,
            shift: spec.shift,
        })
    }

    pub fn run(&self) -> Result<Report, CliError> {
        let set = enumerate_solutions(
            &self.problem,
            &self.z0,
            self.params,
            &self.config,
            self.max_solutions,
            &self.pre_deflate,
        )?;
        let solutions = set
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| SolutionRecord {
                index: i + 1,
                z: match &self.shift {
                    Some(s) => s.to_original(&e.root),
                    None => e.root.clone(),
                },
                f: e.residual.clone(),
                residual_norm: e.residual_norm,
                iterations: e.iterations,
            })
            .collect();
        Ok(Report {
            problem: self.name.clone(),
            params: ParamsReport {
                p: self.params.power,
                alpha: self.params.shift,
                delta: self.params.radius,
                tol: self.config.tol,
            },
            solutions,
            status: set.termination.to_string(),
        })
    }
}

/// User LCP without benchmark settings: start at the origin with `(p, α) = (1, 1)`.
fn generic_lcp(problem: Problem) -> BenchmarkSpec {
    let mut spec = tinloi(problem);
    spec.name = "lcp";
    spec.z0.iter_mut().for_each(|v| *v = 0.0);
    spec.linesearch = Linesearch::ProjectedSun;
    spec
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::List => {
            for name in BENCHMARK_NAMES {
                match benchmark(name) {
                    Some(b) => writeln!(
                        out,
                        "{name:<11} n = {:<2} p = {} alpha = {} delta = {:e}",
                        b.problem.dim(),
                        b.params.power,
                        b.params.shift,
                        b.params.radius
                    )?,
                    None => writeln!(out, "{name:<11} needs --lcp-file")?,
                }
            }
            Ok(0)
        }
        Command::Solve(args) => {
            let job = Job::from_args(args)?;
            let report = job.run()?;
            match args.format {
                Format::Table => report::write_table(out, &report)?,
                Format::Json => report::write_json(out, &report)?,
                Format::Csv => report::write_csv(out, &report, job.problem.dim())?,
            }
            Ok(if report.solutions.is_empty() { 2 } else { 0 })
        }
    }
}
