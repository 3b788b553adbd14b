mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use config::{parse, CriticalConfig, NumapConfig, ReproduceConfig, SccConfig, SimulateConfig};
use output::Output;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also label every cell with the contour oracle and report mismatches.
    #[arg(long, global = true)]
    full_oracle: bool,
    /// Use full-size grids and trial counts.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Debug, Parser)]
#[command(name = "delaygeo", version, about = "Stability regions of linear delay systems")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the stability crossing curves.
    Scc,
    /// Label the L plane by the number of unstable roots.
    Numap,
    /// Closed-form and numerical critical parameters.
    Critical,
    /// Simulate a system and estimate its growth rate.
    Simulate,
    /// Regenerate a figure's data set.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(commands::FIGURES))]
        figure: String,
    },
}

fn read_config(flags: &Flags, required: bool) -> Result<String, CliError> {
    match &flags.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None if required => Err(CliError::Config("--config is required".into())),
        None => Ok("{}".into()),
    }
}

fn resolved<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("configs serialize")
}

fn run(cli: Cli) -> Result<(), CliError> {
    let flags = &cli.flags;
    if let Some(j) = flags.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let start = Instant::now();
    let (name, text) = match &cli.command {
        Command::Reproduce { figure } => (format!("reproduce {figure}"), read_config(flags, false)?),
        Command::Scc => ("scc".into(), read_config(flags, true)?),
        Command::Numap => ("numap".into(), read_config(flags, true)?),
        Command::Critical => ("critical".into(), read_config(flags, true)?),
        Command::Simulate => ("simulate".into(), read_config(flags, true)?),
    };
    // parse before touching the output directory
    let (config, job): (Value, Box<dyn FnOnce(&mut Output) -> Result<Value, CliError>>) = match &cli.command {
        Command::Scc => {
            let c: SccConfig = parse(&text)?;
            (resolved(&c), Box::new(move |o| commands::scc(&c, o)))
        }
        Command::Numap => {
            let c: NumapConfig = parse(&text)?;
            let f = flags.clone();
            (resolved(&c), Box::new(move |o| commands::numap(&c, &f, o)))
        }
        Command::Critical => {
            let c: CriticalConfig = parse(&text)?;
            (
                resolved(&c),
                Box::new(move |o| {
                    let v = commands::critical(&c)?;
                    o.json("critical.json", &v)?;
                    Ok(v)
                }),
            )
        }
        Command::Simulate => {
            let c: SimulateConfig = parse(&text)?;
            (resolved(&c), Box::new(move |o| commands::simulate(&c, o)))
        }
        Command::Reproduce { figure } => {
            let c: ReproduceConfig = parse(&text)?;
            let (fig, f) = (figure.clone(), flags.clone());
            (resolved(&c), Box::new(move |o| commands::reproduce(&fig, &c, &f, o)))
        }
    };
    let mut out = Output::create(&flags.out)?;
    let result = job(&mut out)?;
    println!("{}", serde_json::to_string(&result).expect("values serialize"));
    out.finish(&name, &config, &text, &result, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
