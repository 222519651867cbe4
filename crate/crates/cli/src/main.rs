//! `casorati`: discrete Wronskians, inverse solves, verification suites and
//! example tables. Reports are JSON with complex numbers as `[re, im]`.

mod examples;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use casorati::inverse::{newton_inverse, InverseProblem, SolutionSet};
use casorati::quasiexp::{monic_wronskian, theorem1_hypotheses, HypothesisReport};
use casorati::{Complex64, Error, QESpace, QuasiExp};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "casorati", version, about = "Discrete Wronskians and reality checks for quasi-exponential spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monic discrete Wronskian, its roots and the reality-theorem hypotheses.
    Wronskian {
        space: PathBuf,
        /// Half-step as `re,im`.
        #[arg(long, value_parser = parse_complex, default_value = "0,1", allow_hyphen_values = true)]
        h: Complex64,
        #[arg(long, default_value_t = 1e-9, value_parser = parse_tol)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an inverse problem by Newton with random restarts.
    Solve {
        problem: PathBuf,
        /// Overrides the problem's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exit 1 if any assertion fails.
    Verify {
        suite: verify::Suite,
        /// Rank, members or maximal matrix size, depending on the suite.
        #[arg(long = "N")]
        rank: Option<usize>,
        /// Sites or roots, depending on the suite.
        #[arg(long = "n")]
        sites: Option<usize>,
        /// Defaults per suite.
        #[arg(long, value_parser = parse_trials)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults per suite.
        #[arg(long, value_parser = parse_tol)]
        tol: Option<f64>,
        /// Sign pattern of the bases in the theorem1 suite.
        #[arg(long, value_enum, default_value_t = Signs::Mixed)]
        signs: Signs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the closed-form example tables.
    Examples {
        /// Real base of the first example.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, value_parser = parse_complex, default_value = "0,1", allow_hyphen_values = true)]
        h: Complex64,
        /// Cells per axis of the second example scan.
        #[arg(long, default_value_t = 20, value_parser = parse_trials)]
        grid: usize,
        /// Write the second example scan as CSV (ReA, ImA, is_real).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Signs {
    Mixed,
    Positive,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected re,im, got {s:?}"));
    }
    let re = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Complex64::new(re, im))
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

fn parse_trials(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(t) if t >= 1 => Ok(t),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

/// Failure carrying the process exit code.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DependentMembers
            | Error::DegenerateBase
            | Error::NonGeneric(_)
            | Error::KernelDimension { .. }
            | Error::LambdaCollision { .. }
            | Error::Pole(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

pub type CmdResult = Result<bool, Failure>;

/// Writes pretty JSON to `out` or stdout.
pub fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    emit_text(&(text + "\n"), out)
}

pub fn emit_text(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Space as listed in the file; independence is checked afterwards so that
/// dependent members get their own exit code.
#[derive(Deserialize)]
struct SpaceFile {
    members: Vec<QuasiExp>,
}

#[derive(Serialize)]
struct WronskianReport {
    version: &'static str,
    config: WronskianConfig,
    w: Vec<Complex64>,
    roots: Vec<Complex64>,
    mu_total: Complex64,
    hypotheses: HypothesisReport,
}

#[derive(Serialize)]
struct WronskianConfig {
    h: Complex64,
    tol: f64,
}

fn cmd_wronskian(space: &PathBuf, h: Complex64, tol: f64, out: Option<&PathBuf>) -> CmdResult {
    let file: SpaceFile = read_json(space)?;
    let v = QESpace::new(file.members)?;
    let w = monic_wronskian(&v, h)?;
    let roots = if w.w.degree() == Some(0) { Vec::new() } else { w.roots()? };
    let report = WronskianReport {
        version: VERSION,
        config: WronskianConfig { h, tol },
        w: w.w.coeffs().to_vec(),
        roots,
        mu_total: w.mu_total,
        hypotheses: theorem1_hypotheses(&v, h, tol)?,
    };
    emit(&report, out)?;
    Ok(true)
}

#[derive(Serialize)]
struct SolveReport {
    version: &'static str,
    config: InverseProblem,
    #[serde(flatten)]
    set: SolutionSet,
}

fn cmd_solve(problem: &PathBuf, seed: Option<u64>, out: Option<&PathBuf>) -> CmdResult {
    let mut prob: InverseProblem = read_json(problem)?;
    if let Some(s) = seed {
        prob.seed = s;
    }
    let set = newton_inverse(&prob)?;
    emit(&SolveReport { version: VERSION, config: prob, set }, out)?;
    // non-real solutions are data, not failures
    Ok(true)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Wronskian { space, h, tol, out } => cmd_wronskian(&space, h, tol, out.as_ref()),
        Command::Solve { problem, seed, out } => cmd_solve(&problem, seed, out.as_ref()),
        Command::Verify { suite, rank, sites, trials, seed, tol, signs, out } => {
            let cfg = verify::VerifyConfig {
                suite,
                rank,
                sites,
                trials,
                seed,
                tol,
                positive_bases: signs == Signs::Positive,
            };
            verify::run(&cfg, out.as_ref())
        }
        Command::Examples { q, h, grid, csv, out } => examples::run(q, h, grid, csv.as_ref(), out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flag_parsing() {
        assert_eq!(parse_complex("0,-1.5").unwrap(), Complex64::new(0.0, -1.5));
        assert_eq!(parse_complex(" 2 , 3 ").unwrap(), Complex64::new(2.0, 3.0));
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn tol_and_trials_must_be_positive() {
        assert!(parse_tol("0").is_err() && parse_tol("-1e-3").is_err() && parse_tol("nan").is_err());
        assert_eq!(parse_tol("1e-9").unwrap(), 1e-9);
        assert!(parse_trials("0").is_err());
        assert_eq!(parse_trials("3").unwrap(), 3);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(Failure::from(Error::DependentMembers).code, 3);
        assert_eq!(Failure::from(Error::LambdaCollision { i: 0, j: 1 }).code, 3);
        assert_eq!(Failure::from(Error::Shape("x".into())).code, 2);
        assert_eq!(Failure::from(Error::ZeroStep).code, 2);
    }
}
