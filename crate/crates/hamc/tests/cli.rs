//! End-to-end checks of the command-line driver: exit codes, the frozen
//! golden artifact, and the benchmark CSV.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hamc"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("hamc_cli_{}_{name}", std::process::id()));
    p
}

#[test]
fn compile_reproduces_the_golden_artifact() {
    let root = repo_root();
    let compile_once = |name: &str| {
        let out = temp_path(name);
        let status = bin()
            .args(["compile", "--system"])
            .arg(root.join("programs/ising3.hml"))
            .arg("--machine")
            .arg(root.join("machines/ideal_rydberg3.json"))
            .arg("--out")
            .arg(&out)
            .args(["--tolerance", "0.05", "--seed", "0"])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(&out).unwrap()
    };

    // The seeded pipeline is bit-reproducible for a given build.
    let produced = compile_once("golden_a.json");
    assert_eq!(produced, compile_once("golden_b.json"));

    // Parsing the frozen artifact and re-emitting it is byte-identical.
    let golden_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/running_example.pulse.json");
    let golden = std::fs::read_to_string(golden_path).unwrap();
    let (schedule, meta) = hamc::emit::parse_schedule(&golden).unwrap();
    assert_eq!(hamc::emit::emit_json(&schedule, &meta), golden);

    // A fresh compilation agrees with the frozen artifact value for value
    // (optimization level may perturb the last couple of solver bits, so
    // the comparison is structural with a tight numeric tolerance).
    let (fresh_schedule, fresh_meta) = hamc::emit::parse_schedule(&produced).unwrap();
    assert_eq!(fresh_meta.layout, meta.layout);
    assert_eq!(fresh_schedule.blocks.len(), schedule.blocks.len());
    assert_eq!(fresh_schedule.lines.len(), schedule.lines.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    assert!(close(fresh_meta.residual, meta.residual));
    for (line, executions) in &schedule.lines {
        let fresh_executions = &fresh_schedule.lines[line];
        assert_eq!(fresh_executions.len(), executions.len());
        for (fresh, frozen) in fresh_executions.iter().zip(executions) {
            assert_eq!(fresh.instruction, frozen.instruction);
            assert_eq!(fresh.block, frozen.block);
            assert!(close(fresh.start_s, frozen.start_s));
            assert!(close(fresh.nominal_duration, frozen.nominal_duration));
            for ((name_a, value_a), (name_b, value_b)) in fresh.params.iter().zip(&frozen.params)
            {
                assert_eq!(name_a, name_b);
                assert!(close(*value_a, *value_b), "{name_a}: {value_a} vs {value_b}");
            }
        }
    }
}

#[test]
fn verify_accepts_the_golden_artifact() {
    let root = repo_root();
    let golden =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/running_example.pulse.json");
    let output = bin()
        .args(["verify", "--system"])
        .arg(root.join("programs/ising3.hml"))
        .arg("--machine")
        .arg(root.join("machines/ideal_rydberg3.json"))
        .arg("--schedule")
        .arg(&golden)
        .args(["--threshold", "0.05"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let report = String::from_utf8_lossy(&output.stdout);
    assert!(report.contains("PASS"), "{report}");
    assert!(report.contains("phase-aligned distance"), "{report}");
}

#[test]
fn no_solution_exits_2() {
    let root = repo_root();
    let status = bin()
        .args(["compile", "--system"])
        .arg(root.join("suite/ising_cycle6.hml"))
        .arg("--machine")
        .arg(root.join("suite/ising_cycle6.machine.json"))
        .arg("--out")
        .arg(temp_path("nosol.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn exhausted_node_budget_exits_3() {
    let root = repo_root();
    let status = bin()
        .args(["compile", "--system"])
        .arg(root.join("suite/ising_chain6.hml"))
        .arg("--machine")
        .arg(root.join("suite/ising_chain6.machine.json"))
        .arg("--out")
        .arg(temp_path("budget.json"))
        .args(["--max-nodes", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn oversized_verification_exits_4() {
    // Compile a 13-site chain (fine) and then ask for dense verification
    // (refused above 12 sites).
    let mut terms = Vec::new();
    for j in 0..12 {
        terms.push(format!("q[{j}].Z*q[{}].Z", j + 1));
    }
    for j in 0..13 {
        terms.push(format!("q[{j}].X"));
    }
    let program = format!(
        "system big {{ sites q[13]; evolve for 1 under {}; }}\n",
        terms.join(" + ")
    );
    let edges: Vec<String> = (0..12).map(|j| format!("[{j},{}]", j + 1)).collect();
    let machine = format!(
        "{{\"aais\": \"heisenberg\", \"num_sites\": 13, \"connectivity\": [{}]}}\n",
        edges.join(",")
    );
    let program_path = temp_path("big.hml");
    let machine_path = temp_path("big.machine.json");
    let out = temp_path("big.pulse.json");
    std::fs::write(&program_path, program).unwrap();
    std::fs::write(&machine_path, machine).unwrap();

    let status = bin()
        .args(["compile", "--system"])
        .arg(&program_path)
        .arg("--machine")
        .arg(&machine_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0), "13-site systems are compile-only but must compile");

    let status = bin()
        .args(["verify", "--system"])
        .arg(&program_path)
        .arg("--machine")
        .arg(&machine_path)
        .arg("--schedule")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn verifying_against_the_wrong_system_fails() {
    let root = repo_root();
    // A schedule compiled for the transverse-field chain, verified against
    // a plain X drive of the same size: nonzero distance, exit 1.
    let wrong = temp_path("wrong.hml");
    std::fs::write(
        &wrong,
        "system other { sites q[3]; evolve for 1 under q[0].X + q[1].X + q[2].X; }\n",
    )
    .unwrap();
    let golden =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/running_example.pulse.json");
    let status = bin()
        .args(["verify", "--system"])
        .arg(&wrong)
        .arg("--machine")
        .arg(root.join("machines/ideal_rydberg3.json"))
        .arg("--schedule")
        .arg(&golden)
        .args(["--threshold", "0.05"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn inspect_prints_the_equation_system() {
    let root = repo_root();
    let output = bin()
        .args(["inspect", "--system"])
        .arg(root.join("programs/ising3.hml"))
        .arg("--machine")
        .arg(root.join("machines/ideal_rydberg3.json"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    let equation_lines = text.lines().filter(|l| l.starts_with("[seg ")).count();
    assert_eq!(equation_lines, 12, "{text}");
    assert!(text.contains("layout ["), "{text}");
    assert!(text.contains("s_1[eta_"), "{text}");
}

#[test]
fn list_machines_names_all_families() {
    let output = bin().arg("list-machines").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    for name in ["ideal_rydberg", "global_rydberg", "heisenberg", "two_pauli", "ibm_native"] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
}

#[test]
fn bench_writes_the_csv() {
    let root = repo_root();
    let out = temp_path("bench.csv");
    let status = bin()
        .args(["bench", "--suite"])
        .arg(root.join("suite"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("case,n,machine,status,compile_ms,duration_s,blocks,residual")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 7);
    assert!(body.iter().any(|l| l.starts_with("ising_cycle6,6,heisenberg,nosolution")));
    assert!(body.iter().any(|l| l.starts_with("ising_chain6,6,heisenberg,ok")));
}

#[test]
fn empty_suite_directory_is_fine() {
    let dir = temp_path("empty_suite");
    std::fs::create_dir_all(&dir).unwrap();
    let output = bin().args(["bench", "--suite"]).arg(&dir).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert_eq!(text.lines().count(), 1, "only the header: {text}");
}
