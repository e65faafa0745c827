//! Command-line driver for the compiler library.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use hamc::aais::{builtin_machines, load_machine_config, Aais};
use hamc::emit::parse_schedule;
use hamc::hml::{parse_system, parse_system_with_discretization, QuantumSystem};
use hamc::pipeline::{
    bench, compile, inspect, verify_artifact, CompileOptions, CompileOutcome, VerifyError,
    VerifyOptions, BENCH_CSV_HEADER,
};

#[derive(Parser)]
#[command(name = "hamc", version, about = "Compile Hamiltonian evolution programs to analog pulse schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a system program onto a machine, writing a pulse-schedule JSON.
    Compile {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trotterization number.
        #[arg(long, default_value_t = 4)]
        trotter: u32,
        /// Discretization override for every `steps` clause.
        #[arg(long)]
        disc: Option<u32>,
        /// Residual acceptance tolerance (default: 5% of the target weight).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Selector rounding tolerance.
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Layout-search node budget.
        #[arg(long, default_value_t = 1_000_000)]
        max_nodes: u64,
    },
    /// Check an emitted schedule against the program it was compiled from.
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Pass threshold on the phase-aligned distance.
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        /// Discretization override applied when re-parsing the program.
        #[arg(long)]
        disc: Option<u32>,
    },
    /// Print the coefficient equation system for the first layout.
    Inspect {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        disc: Option<u32>,
    },
    /// List the built-in machine families.
    ListMachines,
    /// Compile every `<case>.hml` + `<case>.machine.json` pair in a directory.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_system(path: &PathBuf, disc: Option<u32>) -> Result<QuantumSystem, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = match disc {
        None => parse_system(&text),
        Some(d) => parse_system_with_discretization(&text, d),
    };
    parsed.map_err(|e| format!("{}:{e}", path.display()))
}

fn load_machine(path: &PathBuf) -> Result<Aais, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    load_machine_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile {
            system,
            machine,
            out,
            trotter,
            disc,
            tolerance,
            delta,
            timeout,
            seed,
            max_nodes,
        } => {
            let parsed = load_system(&system, disc)?;
            let aais = load_machine(&machine)?;
            let opts = CompileOptions {
                trotter,
                disc,
                tolerance,
                delta,
                timeout: timeout.map(Duration::from_secs_f64),
                max_nodes,
                seed,
                restarts: 8,
            };
            let outcome = compile(&parsed, &aais, &opts).map_err(|e| e.to_string())?;
            match &outcome {
                CompileOutcome::Success(artifact) => {
                    std::fs::write(&out, &artifact.json)
                        .map_err(|e| format!("{}: {e}", out.display()))?;
                    println!(
                        "compiled {} onto {}: layout {}, residual {:.6e} (tolerance {:.3e}), {} blocks, {:.3e} s total",
                        parsed.name,
                        aais.name,
                        artifact.layout,
                        artifact.residual,
                        artifact.epsilon,
                        artifact.blocks.num_blocks(),
                        artifact.line_schedule.total_duration_s,
                    );
                    println!("wrote {}", out.display());
                }
                CompileOutcome::NoSolution { layouts_tried, best_residual } => {
                    eprintln!(
                        "no solution: {layouts_tried} layout(s) tried{}",
                        match best_residual {
                            Some(e) => format!(", best residual {e:.6e}"),
                            None => String::new(),
                        }
                    );
                }
                CompileOutcome::Timeout => {
                    eprintln!("timeout: search budget exhausted");
                }
            }
            Ok(outcome.exit_code() as u8)
        }
        Command::Verify { system, machine, schedule, threshold, disc } => {
            let text = std::fs::read_to_string(&schedule)
                .map_err(|e| format!("{}: {e}", schedule.display()))?;
            let (line_schedule, metadata) =
                parse_schedule(&text).map_err(|e| format!("{}: {e}", schedule.display()))?;
            // Re-discretize the program the way it was compiled unless the
            // caller overrides it.
            let disc = disc.or(if metadata.disc > 1 { Some(metadata.disc) } else { None });
            let parsed = load_system(&system, disc)?;
            let aais = load_machine(&machine)?;
            let opts = VerifyOptions { threshold, ..VerifyOptions::default() };
            match verify_artifact(&parsed, &aais, &line_schedule, &metadata, &opts) {
                Ok(report) => {
                    print!("{}", report.render());
                    Ok(if report.pass { 0 } else { 1 })
                }
                Err(VerifyError::TooLarge { n }) => {
                    eprintln!("verification refused: {n} sites exceed the dense cap");
                    Ok(4)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Inspect { system, machine, disc } => {
            let parsed = load_system(&system, disc)?;
            let aais = load_machine(&machine)?;
            match inspect(&parsed, &aais, 1_000_000).map_err(|e| e.to_string())? {
                None => {
                    eprintln!("no layout found to inspect");
                    Ok(2)
                }
                Some((layout, _, rendered)) => {
                    println!("layout {layout}");
                    print!("{rendered}");
                    Ok(0)
                }
            }
        }
        Command::ListMachines => {
            for (name, description) in builtin_machines() {
                println!("{name:15} {description}");
            }
            Ok(0)
        }
        Command::Bench { suite, out, seed } => {
            let opts = CompileOptions { seed, ..CompileOptions::default() };
            let rows = bench(&suite, &opts).map_err(|e| e.to_string())?;
            println!("{BENCH_CSV_HEADER}");
            let mut csv = String::from(BENCH_CSV_HEADER);
            csv.push('\n');
            for row in &rows {
                let line = row.to_csv();
                println!("{line}");
                csv.push_str(&line);
                csv.push('\n');
            }
            if let Some(out) = out {
                std::fs::write(&out, csv).map_err(|e| format!("{}: {e}", out.display()))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
