use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::Value as Json;
use valmono_cli::{batch_code, run_batch, verify_trace, RunOptions, EXIT_IO, EXIT_MISMATCH, EXIT_OK, EXIT_SCHEMA};

#[derive(Parser)]
#[command(name = "valmono", version, about = "Run monomialization problems and verify their traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem file (one object or an array) and write its trace.
    Run(RunArgs),
    /// Run a monomial pair problem; the "algorithm" field may be omitted.
    Pair(RunArgs),
    /// Replay a trace file and check every recorded witness.
    Verify {
        trace: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = valmono_core::game::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, value_enum, default_value = "on")]
    auto_independence: Toggle,
    #[arg(long)]
    jobs: Option<usize>,
}

fn read_json(path: &Path) -> Result<Json, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: malformed JSON in {}: {e}", path.display());
        EXIT_SCHEMA
    })
}

fn run(args: &RunArgs, force_pair: bool) -> Result<i32, i32> {
    let input = read_json(&args.file)?;
    let opts = RunOptions { budget: args.budget, auto_independence: matches!(args.auto_independence, Toggle::On) };
    let tag = |mut p: Json| {
        if force_pair {
            if let Json::Object(m) = &mut p {
                m.entry("algorithm").or_insert_with(|| Json::from("pair"));
            }
        }
        p
    };
    let (traces, batch) = match input {
        Json::Array(items) => (run_batch(&items.into_iter().map(tag).collect::<Vec<_>>(), &opts, args.jobs), true),
        single => (run_batch(&[tag(single)], &opts, Some(1)), false),
    };
    for (i, t) in traces.iter().enumerate() {
        if let Some(e) = &t.verdict.error {
            if batch {
                eprintln!("error: item {i}: {e}");
            } else {
                eprintln!("error: {e}");
            }
        }
    }
    let text = if batch {
        serde_json::to_string_pretty(&traces)
    } else {
        serde_json::to_string_pretty(&traces[0])
    }
    .expect("traces serialize");
    match &args.out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_IO
        })?,
        None => println!("{text}"),
    }
    Ok(batch_code(&traces))
}

fn verify(path: &Path, jobs: Option<usize>) -> Result<i32, i32> {
    let input = read_json(path)?;
    let items = match input {
        Json::Array(items) => items,
        single => vec![single],
    };
    let check = || items.par_iter().map(verify_trace).collect::<Vec<_>>();
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|_| EXIT_IO)?.install(check),
        None => check(),
    };
    let mut code = EXIT_OK;
    for (i, r) in results.iter().enumerate() {
        if let Err(e) = r {
            if items.len() > 1 {
                println!("item {i}: {e}");
            } else {
                println!("{e}");
            }
            code = code.max(e.exit_code());
        }
    }
    if code == EXIT_OK {
        println!("ok: {} trace(s) verified", items.len());
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Pair(args) => run(args, true),
        Command::Verify { trace, jobs } => verify(trace, *jobs),
    };
    let code = result.unwrap_or_else(|c| c);
    debug_assert!(code <= EXIT_MISMATCH);
    ExitCode::from(code as u8)
}
