use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use wsurf::mmp::{blow_down_step, classify_terminal, flip_step};
use wsurf::surface::{global_invariants, k_pair};
use wsurf::{SurfaceModel, Q};
use wsurf_cli::run::{build_model, describe_model, execute, load_scenario};
use wsurf_cli::{export, tables, CliError};

#[derive(Parser)]
#[command(
    name = "wsurf",
    version,
    about = "Exact MMP runs on surfaces with Wahl singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario, then summarise its model.
    Check { file: PathBuf },
    /// Execute a scenario's script and evaluate its expectations.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        export: Format,
        /// Write the export here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a scenario in canonical form.
    Fmt { file: PathBuf },
    /// Enumerations.
    #[command(subcommand)]
    Table(Table),
    /// Pick steps by hand from the legal moves of a scenario's model.
    Step { file: PathBuf },
}

#[derive(Subcommand)]
enum Table {
    /// Chains of T-singularities (du Val excluded).
    TChains {
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 8)]
        max_entry: i64,
    },
    /// Markov triples with largest entry at most the bound.
    Markov {
        #[arg(long, default_value_t = 1000)]
        bound: u64,
    },
}

fn write_atomic(path: &Path, text: &str) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn legal_moves(m: &SurfaceModel) -> Vec<(String, SurfaceModel, wsurf::StepRecord)> {
    let mut out = Vec::new();
    for c in m.curves() {
        if m.mark_of(c.id).is_some()
            || c.genus != 0
            || !k_pair(m, c.id).is_ok_and(|k| k < Q::zero())
        {
            continue;
        }
        if let Ok((after, rec)) = flip_step(m, c.id, 0) {
            out.push((format!("flip {}", c.label), after, rec));
        }
        if let Ok((after, rec)) = blow_down_step(m, c.id, 0) {
            out.push((format!("blow_down {}", c.label), after, rec));
        }
    }
    out
}

fn step(file: &Path) -> Result<i32, CliError> {
    let mut m = build_model(&load_scenario(file)?)?;
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut done = 0usize;
    loop {
        let moves = legal_moves(&m);
        println!("{}", global_invariants(&m));
        if moves.is_empty() {
            println!("no legal moves; {}", classify_terminal(&m));
            return Ok(0);
        }
        for (i, (what, _, _)) in moves.iter().enumerate() {
            println!("  {i}: {what}");
        }
        print!("step {done}> ");
        io::stdout().flush()?;
        let Some(line) = lines.next().transpose()? else {
            return Ok(0);
        };
        let line = line.trim();
        if line == "q" || line == "quit" {
            return Ok(0);
        }
        match line
            .parse::<usize>()
            .ok()
            .and_then(|i| moves.into_iter().nth(i))
        {
            Some((what, after, _)) => {
                println!("{what}");
                m = after;
                done += 1;
            }
            None => println!("enter a move number, or q"),
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { file } => {
            let m = build_model(&load_scenario(&file)?)?;
            print!("{}", describe_model(&m));
            Ok(0)
        }
        Command::Run { file, export, out } => {
            let a = execute(&load_scenario(&file)?)?;
            let text = match export {
                Format::Json => export::to_json(&a),
                Format::Dot => export::to_dot(&a),
                Format::Text => export::to_text(&a),
            };
            match out {
                Some(p) => write_atomic(&p, &text)?,
                None => print!("{text}"),
            }
            for e in a.failed_expectations() {
                eprintln!(
                    "expectation failed ({}): {} (actual {})",
                    e.origin, e.text, e.actual
                );
            }
            if let Some(ab) = &a.abort {
                eprintln!(
                    "aborted at directive {} ({}): {}",
                    ab.directive, ab.text, ab.message
                );
            }
            if a.status == wsurf_cli::Status::Stuck {
                if let Some(t) = &a.terminal {
                    eprintln!("{t}");
                }
            }
            Ok(a.status.exit_code())
        }
        Command::Fmt { file } => {
            print!("{}", load_scenario(&file)?);
            Ok(0)
        }
        Command::Table(Table::TChains { max_len, max_entry }) => {
            for r in tables::t_chains(max_len, max_entry) {
                println!("{} {} {}", r.chain, r.fraction, r.form);
            }
            Ok(0)
        }
        Command::Table(Table::Markov { bound }) => {
            for t in tables::markov(bound) {
                println!("{t}");
            }
            Ok(0)
        }
        Command::Step { file } => step(&file),
    }
}

fn main() -> ExitCode {
    let code = dispatch(Cli::parse()).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
