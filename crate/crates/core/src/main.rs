use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kerrnet::cli::{emit_config, parse_config, preset_config, run_sweep, write_csv, SweepSpec};
use kerrnet::model::{validate_timescales, NetworkModel, PRESET_NAMES};
use kerrnet::Error;

#[derive(Parser)]
#[command(name = "kerrnet", version, about = "Steady-state transmission and g2(0) sweeps for driven Kerr networks")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a configuration file and write CSV.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a built-in scenario with its default sweep, or print it as a config.
    Preset {
        name: String,
        #[arg(long)]
        emit_config: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a configuration file without solving anything.
    Validate { config: PathBuf },
    /// Print the names of the built-in scenarios.
    ListPresets,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Solver { .. } | Error::Integrator(_) | Error::Oracle(_) | Error::Elimination(_) => 2,
        _ => 1,
    }
}

fn warn_timescales(network: &NetworkModel) {
    for w in validate_timescales(network) {
        eprintln!("warning: {w}");
    }
}

fn sweep_to(network: &NetworkModel, sweep: &SweepSpec, out: Option<&Path>, workers: Option<usize>) -> Result<u8, Error> {
    warn_timescales(network);
    let result = run_sweep(network, sweep, workers)?;
    match out {
        Some(path) => write_csv(&result, &mut BufWriter::new(File::create(path)?))?,
        None => write_csv(&result, &mut io::stdout().lock())?,
    }
    let failures = result.failures();
    for (value, message) in &failures {
        eprintln!("error: solve failed at {value}: {message}");
    }
    Ok(if failures.is_empty() { 0 } else { 2 })
}

fn run(args: Args) -> Result<u8, Error> {
    match args.command {
        Command::Run { config, out, workers } => {
            let parsed = parse_config(&std::fs::read_to_string(&config)?)?;
            for note in &parsed.notes {
                eprintln!("note: {note}");
            }
            sweep_to(&parsed.network, &parsed.sweep, out.as_deref(), workers)
        }
        Command::Preset { name, emit_config: emit, out, workers } => {
            let (network, sweep) = preset_config(&name)?;
            if emit {
                let text = emit_config(&network, &sweep);
                match out {
                    Some(path) => std::fs::write(path, text)?,
                    None => io::stdout().lock().write_all(text.as_bytes())?,
                }
                Ok(0)
            } else {
                sweep_to(&network, &sweep, out.as_deref(), workers)
            }
        }
        Command::Validate { config } => {
            let parsed = parse_config(&std::fs::read_to_string(&config)?)?;
            for note in &parsed.notes {
                eprintln!("note: {note}");
            }
            warn_timescales(&parsed.network);
            println!(
                "ok: {} modes, {} couplings, {} sweep over {} points",
                parsed.network.modes().len(),
                parsed.network.couplings().len(),
                parsed.sweep.variable.name(),
                parsed.sweep.points
            );
            Ok(0)
        }
        Command::ListPresets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
