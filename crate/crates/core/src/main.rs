use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wavecrit::exponents::{classify, exponent_table};
use wavecrit::harness::io::{output_root, OUT_ENV};
use wavecrit::harness::{run, sweep, Scenario, SolverKind, SweepConfig};
use wavecrit::transforms::{apply_transform, ProblemSpec, TransformKind};
use wavecrit::{Error, Result};

#[derive(Parser)]
#[command(name = "wavecrit", version, about = "Critical exponents, solvers and blow-up checks for damped semilinear waves")]
struct Cli {
    /// Scenario (or sweep) TOML file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; run directories are created beneath it.
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Params {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the table of critical exponents as JSON.
    Exponents {
        #[arg(long, default_value_t = 5)]
        max_n: u32,
        /// Damping values for the mass-model exponent.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        mu: Vec<f64>,
    },
    /// Classify (n, mu, m, p) against the known results.
    Classify(Params),
    /// Apply a change of variables to a damped problem.
    Transform {
        #[arg(long, value_enum)]
        kind: TransformArg,
        #[command(flatten)]
        params: Params,
    },
    /// Closed-form linear solution on a grid and its weighted norm.
    SolveLinear,
    /// Picard iteration for the global radial solution.
    SolvePicard,
    /// Finite-difference solve with blow-up detection and F, F1 series.
    SolveFd,
    /// The ODE of the blow-up lemma, optionally with a K0 sweep.
    BlowupOde,
    /// Check the integral estimates for (p, kappa) pairs.
    VerifyEstimates,
    /// Run a parameter sweep described by `[base]` and `[axes]`.
    Sweep,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum TransformArg {
    DissipationShift,
    TimeReparamSub1,
    TimeReparamSuper1,
    ExponentialReparam,
    MassShift,
}

impl From<TransformArg> for TransformKind {
    fn from(k: TransformArg) -> Self {
        match k {
            TransformArg::DissipationShift => TransformKind::DissipationShift,
            TransformArg::TimeReparamSub1 => TransformKind::TimeReparamSub1,
            TransformArg::TimeReparamSuper1 => TransformKind::TimeReparamSuper1,
            TransformArg::ExponentialReparam => TransformKind::ExponentialReparam,
            TransformArg::MassShift => TransformKind::MassShift,
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn require_config(config: Option<&Path>) -> Result<&Path> {
    config.ok_or_else(|| Error::Validation(vec!["--config: required".into()]))
}

/// Flags override the scenario file, which overrides the defaults.
fn params(config: Option<&Path>, flags: Params) -> Result<(u32, f64, f64, f64)> {
    let base = match config {
        Some(path) => Some(Scenario::load(path)?),
        None => None,
    };
    let n = flags.n.or(base.as_ref().map(|s| s.n)).unwrap_or(3);
    let mu = flags.mu.or(base.as_ref().map(|s| s.mu)).unwrap_or(2.0);
    let m = flags.m.or(base.as_ref().map(|s| s.m)).unwrap_or(0.0);
    let p = flags
        .p
        .or(base.as_ref().and_then(|s| s.p))
        .ok_or_else(|| Error::Validation(vec!["p: required".into()]))?;
    Ok((n, mu, m, p))
}

fn solve(cli: &Cli, kind: SolverKind) -> Result<()> {
    let mut scenario = Scenario::load(require_config(cli.config.as_deref())?)?;
    match scenario.solver {
        None => scenario.solver = Some(kind),
        Some(k) if k == kind => {}
        Some(k) => {
            return Err(Error::Validation(vec![format!(
                "solver: the file asks for {} but the subcommand runs {}",
                k.as_str(),
                kind.as_str()
            )]))
        }
    }
    let manifest = run(&scenario, &output_root(cli.out.as_deref()))?;
    print_json(&manifest)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Exponents { max_n, mu } => print_json(&exponent_table(*max_n, mu)?),
        Command::Classify(flags) => {
            let (n, mu, m, p) = params(cli.config.as_deref(), *flags)?;
            print_json(&classify(n, mu, m, p)?)
        }
        Command::Transform { kind, params: flags } => {
            let (n, mu, m, p) = params(cli.config.as_deref(), *flags)?;
            let spec = ProblemSpec::damped(n, mu, m, p)?;
            let (out, map) = apply_transform((*kind).into(), &spec)?;
            print_json(&serde_json::json!({ "input": spec, "output": out, "data_map": map }))
        }
        Command::SolveLinear => solve(cli, SolverKind::Linear),
        Command::SolvePicard => solve(cli, SolverKind::Picard),
        Command::SolveFd => solve(cli, SolverKind::Fd),
        Command::BlowupOde => solve(cli, SolverKind::OdeLemma),
        Command::VerifyEstimates => solve(cli, SolverKind::Verify),
        Command::Sweep => {
            let cfg = SweepConfig::load(require_config(cli.config.as_deref())?)?;
            let out = sweep(&cfg, &output_root(cli.out.as_deref()), cli.jobs)?;
            let failed = out.rows.iter().filter(|r| r.outcome.is_err()).count();
            print_json(&serde_json::json!({
                "summary": out.summary,
                "runs": out.rows.len(),
                "failed": failed,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
