use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpc_tools::{cmd_construct, cmd_gap, cmd_schrodinger, cmd_verify, Failure, RunConfig};

/// Numerical experiments on discontinuity of the Lyapunov exponent for
/// quasiperiodic SL(2,R) cocycles.
#[derive(Parser)]
#[command(name = "qpc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the cocycles A_N, ..., A_{N+levels} and write the run directory.
    Construct(Overrides),
    /// Run the property suites of every module.
    Verify(Overrides),
    /// Compare the exponents of A_n and the destroyed cocycles of a run.
    Gap(Overrides),
    /// Reduce a run to Schrodinger form and transport the gap.
    Schrodinger(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Config file (sections run, construction, gap, schrodinger, verify).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// finite:l or smooth:a
    #[arg(long)]
    mode: Option<String>,
    /// hom or nonhom
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lyapunov horizon K (0 picks 10 q_{n+2} per level).
    #[arg(long)]
    horizon: Option<usize>,
    /// Use A_n in place of the destroyed cocycle.
    #[arg(long)]
    no_destruction: bool,
}

impl Overrides {
    fn config(&self) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.out {
            c.run.out = v.clone();
        }
        if let Some(v) = self.levels {
            c.run.levels = v;
        }
        if let Some(v) = self.seed {
            c.run.seed = v;
        }
        if let Some(v) = self.lambda {
            c.construction.lambda = v;
        }
        if let Some(v) = &self.mode {
            c.construction.mode = v.clone();
        }
        if let Some(v) = &self.variant {
            c.construction.variant = v.clone();
        }
        if let Some(v) = self.horizon {
            c.gap.horizon = v;
        }
        if self.no_destruction {
            c.gap.destruction = false;
        }
        c.params()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(o) => o.config().and_then(|c| cmd_construct(&c)),
        Command::Verify(o) => o.config().and_then(|c| cmd_verify(&c)),
        Command::Gap(o) => o.config().and_then(|c| cmd_gap(&c)),
        Command::Schrodinger(o) => o.config().and_then(|c| cmd_schrodinger(&c)),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
