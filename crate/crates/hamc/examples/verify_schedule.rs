//! Compile a program, serialize the schedule, parse it back, and certify
//! that the artifact implements the program's unitary at desk scale.
//!
//! ```bash
//! cargo run --example verify_schedule
//! ```

use hamc::aais::build_ideal_rydberg;
use hamc::emit::parse_schedule;
use hamc::hml::parse_system;
use hamc::pipeline::{compile, verify_artifact, CompileOptions, CompileOutcome, VerifyOptions};

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
    let CompileOutcome::Success(artifact) = compile(&system, &aais, &opts).unwrap() else {
        panic!("running example compiles");
    };

    // The JSON artifact is the interchange format: everything the verifier
    // needs survives the round trip.
    let (schedule, metadata) = parse_schedule(&artifact.json).unwrap();
    let report = verify_artifact(
        &system,
        &aais,
        &schedule,
        &metadata,
        &VerifyOptions { threshold: 0.05, ..VerifyOptions::default() },
    )
    .unwrap();
    print!("{}", report.render());
    assert!(report.pass);

    // Tampering with a parameter is caught by the same check.
    let mut tampered = schedule.clone();
    for executions in tampered.lines.values_mut() {
        for execution in executions.iter_mut() {
            for (name, value) in execution.params.iter_mut() {
                if name == "omega" {
                    *value *= 1.35;
                }
            }
        }
    }
    let report = verify_artifact(
        &system,
        &aais,
        &tampered,
        &metadata,
        &VerifyOptions { threshold: 0.05, ..VerifyOptions::default() },
    )
    .unwrap();
    println!(
        "tampered drive amplitude: distance {:.4} -> {}",
        report.phase_distance,
        if report.pass { "PASS" } else { "FAIL" }
    );
    assert!(!report.pass);
}
