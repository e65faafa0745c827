//! End-to-end compilation: program in, pulse-schedule JSON out.
//!
//! ```bash
//! cargo run --example compile_ising
//! ```

use hamc::aais::build_ideal_rydberg;
use hamc::hml::parse_system;
use hamc::pipeline::{compile, CompileOptions, CompileOutcome};

const ISING3: &str = "\
system ising3 {
  sites q[3];
  evolve for 1 under q[0].Z*q[1].Z + q[1].Z*q[2].Z + q[0].X + q[1].X + q[2].X;
}
";

fn main() {
    let system = parse_system(ISING3).unwrap();
    let aais = build_ideal_rydberg(3, 5.42e6);
    let opts = CompileOptions { tolerance: Some(0.05), ..CompileOptions::default() };
    match compile(&system, &aais, &opts).unwrap() {
        CompileOutcome::Success(artifact) => {
            println!("layout:         {}", artifact.layout);
            println!("residual e:     {:.6e} (tolerance {:.3e})", artifact.residual, artifact.epsilon);
            println!("atom positions: {:?}", artifact.schedule.globals);
            for (j, (executions, duration)) in artifact.schedule.segments.iter().enumerate() {
                println!("segment {j}: {} executions for {duration:.4} machine units", executions.len());
                for execution in executions {
                    let instruction = aais.instruction(execution.instr);
                    println!("    {:8} locals {:?}", instruction.name, execution.locals);
                }
            }
            println!(
                "blocks: {} ({} signal lines, {:.3e} s wall time)",
                artifact.blocks.num_blocks(),
                artifact.line_schedule.lines.len(),
                artifact.line_schedule.total_duration_s
            );
            println!("\npulse-schedule JSON:\n{}", artifact.json);
        }
        CompileOutcome::NoSolution { layouts_tried, .. } => {
            println!("no solution after {layouts_tried} layouts");
        }
        CompileOutcome::Timeout => println!("search budget exhausted"),
    }
}
