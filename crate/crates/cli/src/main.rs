use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mbhe_cli::config::PRECISION_ENV;
use mbhe_cli::{
    parse_grid, parse_ns, parse_potential, run, Command, ConfigFile, Format, Grid, RunConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mbhe",
    version,
    about = "Hard-edge experiments for Muttalib–Borodin ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Equilibrium constants and checks; CSV gives ψ on the grid.
    Equilibrium(Flags),
    /// Limit kernel on the product grid.
    LimitKernel(Flags),
    /// Scaled finite-n kernel on the product grid.
    FiniteN(Flags),
    /// Sup-norm error of the scaled kernel against the limit, per n.
    Converge(Flags),
    /// Jump, determinant and decay checks of the parametrices.
    CheckParametrix(Flags),
    /// Special-function and matrix identities at seeded random points.
    CheckIdentities(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polynomial such as `x + x^2/2`, or coefficients of x, x², … as `1,0.5`.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Strictly ascending list, e.g. `8,16,32,64`.
    #[arg(long = "ns")]
    n_list: Option<String>,
    /// `x_min:x_max:points`, e.g. `0.5:3:9`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    #[arg(long)]
    precision_bits: Option<u32>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Sub {
    fn split(self) -> (Command, Flags) {
        match self {
            Sub::Equilibrium(f) => (Command::Equilibrium, f),
            Sub::LimitKernel(f) => (Command::LimitKernel, f),
            Sub::FiniteN(f) => (Command::FiniteN, f),
            Sub::Converge(f) => (Command::Converge, f),
            Sub::CheckParametrix(f) => (Command::CheckParametrix, f),
            Sub::CheckIdentities(f) => (Command::CheckIdentities, f),
        }
    }
}

fn resolve(cli: Cli) -> anyhow::Result<RunConfig> {
    let (command, f) = cli.command.split();
    let file = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ConfigFile::from_json(&text)?
        }
        None => ConfigFile::default(),
    };
    if file.command.is_some_and(|c| c != command) {
        anyhow::bail!(
            "config file is for {}, not {}",
            file.command.unwrap().name(),
            command.name()
        );
    }
    let flags = ConfigFile {
        command: Some(command),
        potential: f.potential.as_deref().map(parse_potential).transpose()?,
        theta: f.theta,
        alpha: f.alpha,
        n_list: f.n_list.as_deref().map(parse_ns).transpose()?,
        grid: f.grid,
        precision_bits: f.precision_bits,
        output_path: f.output,
        format: f.format,
        seed: f.seed,
    };
    let env = std::env::var(PRECISION_ENV).ok();
    Ok(RunConfig::resolve(
        file.overridden_by(flags),
        env.as_deref(),
    )?)
}

fn main() -> ExitCode {
    let cfg = match resolve(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!(
                "{{\"error\":{{\"module\":\"cli\",\"operation\":\"config\",\"message\":{}}}}}",
                serde_json::json!(format!("{e:#}"))
            );
            return ExitCode::from(2);
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e }));
            return ExitCode::from(2);
        }
    };
    match &cfg.output_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.artifact) {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": { "module": "cli", "operation": "write", "message": format!("{}: {e}", path.display()) } })
                );
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.artifact),
    }
    for c in &outcome.checks {
        eprintln!(
            "{} {} = {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            mbhe_cli::fmt_num(c.value),
            c.condition
        );
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
