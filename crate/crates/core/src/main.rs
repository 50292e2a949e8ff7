use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use signal_elicit::cli::{dispatch, render_json, render_table, Command, COMMANDS};
use signal_elicit::scenario::parse_scenario;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Elicit a source's private value from observer signals: simulation and exact analyses.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// One of: simulate, check-identifiability, check-technical-condition, check-equilibrium,
    /// impossibility-witness, honesty-injection, collusion, location-characterization,
    /// location-lemmas, bandwidth-quasistrict, total-payoff
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario's round count (simulate only).
    #[arg(long)]
    rounds: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn run(args: Args) -> Result<ExitCode, String> {
    if let Ok(t) = std::env::var("SIGNAL_ELICIT_THREADS") {
        let t: usize = t.parse().map_err(|_| format!("SIGNAL_ELICIT_THREADS must be a positive integer, got `{t}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| e.to_string())?;
    }
    let cmd: Command = args.command.parse().map_err(|e: signal_elicit::Error| e.to_string())?;
    let mut sc = parse_scenario(&args.scenario).map_err(|e| e.to_string())?;
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    let (report, outcome) = dispatch(cmd, &sc, args.rounds).map_err(|e| e.to_string())?;
    let text = match args.format {
        Format::Json => render_json(&report),
        Format::Table => render_table(&report),
    };
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn main() -> ExitCode {
    // usage errors exit 1 like every other error; 2 is reserved for negative verdicts
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
