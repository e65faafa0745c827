//! End-to-end drivers: compile, inspect, verify and the benchmark runner.
//!
//! `compile` walks the full pipeline - layout proposals, equation building,
//! solving, conflict resolution, line scheduling, emission - accepting the
//! first layout whose solution beats the tolerance (generation order breaks
//! ties, keeping runs reproducible). `verify` rebuilds the unitary of an
//! emitted artifact and measures it against the program semantics. `bench`
//! maps `compile` over a directory of program/machine pairs with per-case
//! isolation.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::aais::Aais;
use crate::emit::{emit_json, PulseMetadata};
use crate::hml::QuantumSystem;
use crate::sched::{schedule as line_schedule, SignalLineSchedule};
use crate::solver::{
    default_epsilon, solve, to_instruction_schedule, InstructionSchedule, SolverOptions,
};
use crate::synth::{build_equations, propose_layouts, Layout, SearchBudget, SynthError};
use crate::trotter::{trotter_error_bound, trotterize, BlockSchedule, TrotterInfo};
use crate::verify::{
    self, instruction_schedule_unitary, line_schedule_unitary, phase_aligned_distance,
    total_error_bound, to_dense, tv_distance, DenseError, ErrorBoundParams, MAX_DENSE_SITES,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Trotter(#[from] crate::trotter::TrotterError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Trotterization number.
    pub trotter: u32,
    /// Discretization override recorded in metadata; the parser applies it.
    pub disc: Option<u32>,
    /// Residual acceptance tolerance; `None` selects the scale-aware default.
    pub tolerance: Option<f64>,
    /// Selector rounding tolerance.
    pub delta: f64,
    pub timeout: Option<Duration>,
    /// Layout-search node budget.
    pub max_nodes: u64,
    pub seed: u64,
    /// Solver restarts per layout.
    pub restarts: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            trotter: 4,
            disc: None,
            tolerance: None,
            delta: 1e-2,
            timeout: None,
            max_nodes: 1_000_000,
            seed: 0,
            restarts: 8,
        }
    }
}

/// Everything a successful compilation produces.
#[derive(Clone, Debug)]
pub struct CompiledArtifact {
    pub layout: Layout,
    pub epsilon: f64,
    pub residual: f64,
    pub schedule: InstructionSchedule,
    pub blocks: BlockSchedule,
    pub info: TrotterInfo,
    pub line_schedule: SignalLineSchedule,
    pub metadata: PulseMetadata,
    pub json: String,
    pub layouts_tried: usize,
}

#[derive(Debug)]
pub enum CompileOutcome {
    Success(Box<CompiledArtifact>),
    /// Every layout was rejected (or none exists).
    NoSolution { layouts_tried: usize, best_residual: Option<f64> },
    /// The node or wall-clock budget ran out first.
    Timeout,
}

impl CompileOutcome {
    /// Process exit code: 0 success, 2 no solution, 3 timeout.
    pub fn exit_code(&self) -> i32 {
        match self {
            CompileOutcome::Success(_) => 0,
            CompileOutcome::NoSolution { .. } => 2,
            CompileOutcome::Timeout => 3,
        }
    }
}

/// Compiles a parsed system onto a device model.
pub fn compile(
    system: &QuantumSystem,
    aais: &Aais,
    opts: &CompileOptions,
) -> Result<CompileOutcome, PipelineError> {
    let deadline = opts.timeout.map(|t| Instant::now() + t);
    let budget = SearchBudget { max_nodes: opts.max_nodes, deadline };
    let stream = match propose_layouts(system, aais, budget) {
        Ok(stream) => stream,
        Err(SynthError::TargetLargerThanDevice { .. }) => {
            return Ok(CompileOutcome::NoSolution { layouts_tried: 0, best_residual: None })
        }
        Err(e) => return Err(e.into()),
    };

    let mut layouts_tried = 0usize;
    let mut best_residual: Option<f64> = None;
    for item in stream {
        if let Some(deadline) = deadline {
            if Instant::now() >= deadline {
                return Ok(CompileOutcome::Timeout);
            }
        }
        let layout = match item {
            Ok(layout) => layout,
            Err(_) => return Ok(CompileOutcome::Timeout),
        };
        layouts_tried += 1;
        let eqsys = build_equations(&layout, &system.segments, aais)?;
        let solver_opts = SolverOptions {
            epsilon: opts.tolerance,
            delta: opts.delta,
            max_iterations: 500,
            restarts: opts.restarts,
            seed: opts.seed,
        };
        let epsilon = opts.tolerance.unwrap_or_else(|| default_epsilon(&eqsys));
        match solve(&eqsys, &solver_opts) {
            Err(infeasible) => {
                best_residual = Some(match best_residual {
                    None => infeasible.best_residual,
                    Some(b) => b.min(infeasible.best_residual),
                });
            }
            Ok(solution) => {
                let schedule = to_instruction_schedule(&solution, &eqsys);
                let (blocks, info) = trotterize(&schedule, opts.trotter, aais)?;
                let line_schedule = line_schedule(&blocks, aais);
                let metadata = PulseMetadata {
                    epsilon,
                    delta: opts.delta,
                    trotter: opts.trotter,
                    disc: opts.disc.unwrap_or(1),
                    residual: solution.residual,
                    layout: layout.as_slice().to_vec(),
                    seed: opts.seed,
                    tool_version: TOOL_VERSION.into(),
                    blocks: line_schedule.blocks.clone(),
                };
                let json = emit_json(&line_schedule, &metadata);
                return Ok(CompileOutcome::Success(Box::new(CompiledArtifact {
                    layout,
                    epsilon,
                    residual: solution.residual,
                    schedule,
                    blocks,
                    info,
                    line_schedule,
                    metadata,
                    json,
                    layouts_tried,
                })));
            }
        }
    }
    Ok(CompileOutcome::NoSolution { layouts_tried, best_residual })
}

/// Builds and renders the equation system for the first proposed layout.
pub fn inspect(
    system: &QuantumSystem,
    aais: &Aais,
    max_nodes: u64,
) -> Result<Option<(Layout, crate::synth::EquationSystem, String)>, PipelineError> {
    let budget = SearchBudget { max_nodes, deadline: None };
    let mut stream = propose_layouts(system, aais, budget)?;
    match stream.next() {
        None | Some(Err(_)) => Ok(None),
        Some(Ok(layout)) => {
            let eqsys = build_equations(&layout, &system.segments, aais)?;
            let rendered = eqsys.render();
            Ok(Some((layout, eqsys, rendered)))
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("system of {n} sites exceeds the dense-verification cap of {max} sites", max = MAX_DENSE_SITES)]
    TooLarge { n: usize },
    #[error("schedule does not fit the system: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Pass/fail threshold on the phase-aligned distance.
    pub threshold: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Instruction implementation error assumed in the bound (0: exact).
    pub delta_impl: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { threshold: 0.1, c1: 1.0, c2: 1.0, c3: 1.0, delta_impl: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub n_sites: usize,
    pub residual: f64,
    pub phase_distance: f64,
    pub tv_distance: f64,
    pub trotter_bound: f64,
    pub total_bound: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("sites:                  {}\n", self.n_sites));
        out.push_str(&format!("synthesis residual e:   {:.6e}\n", self.residual));
        out.push_str(&format!("phase-aligned distance: {:.6e}\n", self.phase_distance));
        out.push_str(&format!("total variation:        {:.6e}\n", self.tv_distance));
        out.push_str(&format!("trotterization bound:   {:.6e}\n", self.trotter_bound));
        out.push_str(&format!("total error bound:      {:.6e}\n", self.total_bound));
        out.push_str(&format!(
            "verdict:                {} (threshold {:.3e} on phase-aligned distance)\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.threshold
        ));
        out
    }
}

/// Measures an emitted schedule against the program it claims to implement.
pub fn verify_artifact(
    system: &QuantumSystem,
    aais: &Aais,
    schedule: &SignalLineSchedule,
    metadata: &PulseMetadata,
    opts: &VerifyOptions,
) -> Result<VerifyReport, VerifyError> {
    let n = aais.num_sites;
    if n > MAX_DENSE_SITES {
        return Err(VerifyError::TooLarge { n });
    }
    if metadata.layout.len() != system.num_sites() {
        return Err(VerifyError::Mismatch(format!(
            "layout maps {} sites but the system has {}",
            metadata.layout.len(),
            system.num_sites()
        )));
    }
    let layout = Layout::new(metadata.layout.clone());
    let mapped: Vec<(crate::ham::ConcreteHam, f64)> = system
        .segments
        .iter()
        .map(|(ham, tau)| crate::synth::map_hamiltonian(&layout, ham).map(|h| (h, *tau)))
        .collect::<Result<_, _>>()?;
    let target = verify::evolve(&mapped, n)?;
    let compiled = line_schedule_unitary(schedule, aais)?;

    let phase_distance = phase_aligned_distance(&compiled, &target)?;
    let tv = tv_distance(&compiled, &target)?;

    // Reporting-only Trotter estimate from the artifact. Repetitions show up
    // as the same instruction executing in several blocks; without them no
    // Trotter splitting happened and the bound is zero.
    let mut blocks_per_instruction: std::collections::BTreeMap<&str, std::collections::BTreeSet<usize>> =
        std::collections::BTreeMap::new();
    let mut blocks_with_executions: std::collections::BTreeSet<usize> =
        std::collections::BTreeSet::new();
    for executions in schedule.lines.values() {
        for execution in executions {
            blocks_per_instruction
                .entry(execution.instruction.as_str())
                .or_default()
                .insert(execution.block);
            blocks_with_executions.insert(execution.block);
        }
    }
    let max_reps = blocks_per_instruction.values().map(|s| s.len()).max().unwrap_or(0);
    // One execution per program segment is sequential evolution, not
    // Trotterization; only counts beyond the segment count indicate
    // repetition layers.
    let n_segments = system.segments.len().max(1);
    let trotterized = max_reps > n_segments;
    let gamma = if trotterized {
        (blocks_with_executions.len() as f64 / max_reps as f64).ceil()
    } else {
        1.0
    };
    let mut max_block_norm = 0.0f64;
    {
        // Rebuild per-block Hamiltonians the same way the unitary does.
        let sys = {
            let mut globals = vec![0.0; aais.num_globals];
            for (g, name) in aais.global_names.iter().enumerate() {
                if let Some(pos) = schedule.global_names.iter().position(|n| n == name) {
                    globals[g] = schedule.globals[pos];
                }
            }
            aais.sys_ham
                .eval(&crate::expr::VarEnv::new(&globals, &[]))
                .map_err(DenseError::from)?
        };
        let mut block_hams: Vec<crate::ham::ConcreteHam> =
            schedule.blocks.iter().map(|_| sys.clone()).collect();
        for executions in schedule.lines.values() {
            for execution in executions {
                if let Some((_, instruction)) = aais.instruction_by_name(&execution.instruction) {
                    let mut locals = vec![0.0; instruction.num_locals];
                    for (l, name) in instruction.local_names.iter().enumerate() {
                        if let Some((_, v)) = execution.params.iter().find(|(n, _)| n == name) {
                            locals[l] = *v;
                        }
                    }
                    if let Ok(h) =
                        instruction.ham.eval(&crate::expr::VarEnv::new(&schedule.globals, &locals))
                    {
                        block_hams[execution.block] = block_hams[execution.block].add(&h);
                    }
                }
            }
        }
        for h in &block_hams {
            if h.is_zero() {
                continue;
            }
            let norm = verify::spectral_norm(&to_dense(&h.hermitize(), n)?)?;
            max_block_norm = max_block_norm.max(norm);
        }
    }
    let lambda = if trotterized { gamma * max_block_norm } else { 0.0 };
    let machine_time: f64 =
        schedule.blocks.iter().map(|b| b.duration).sum::<f64>() / gamma.max(1.0);
    let k_terms = system
        .segments
        .iter()
        .map(|(h, _)| h.num_terms())
        .max()
        .unwrap_or(0) as f64;
    let trotter_bound =
        trotter_error_bound(lambda, machine_time, metadata.disc.max(1), metadata.trotter.max(1));
    // The Trotter factor is measured at the machine time scale, so the
    // combined bound is evaluated there as well; with exact implementation
    // (delta_impl = 0) and piecewise-constant inputs the other terms do not
    // depend on it.
    let total_bound = total_error_bound(&ErrorBoundParams {
        c1: opts.c1,
        c2: opts.c2,
        c3: opts.c3,
        d: metadata.disc.max(1),
        m_lipschitz: 0.0,
        k_terms,
        t_total: machine_time,
        epsilon: metadata.residual,
        lambda,
        r: metadata.trotter.max(1),
        delta_impl: opts.delta_impl,
        s_lines: (schedule.lines.len() + usize::from(aais.num_globals > 0)) as f64,
        gamma,
    });

    Ok(VerifyReport {
        n_sites: n,
        residual: metadata.residual,
        phase_distance,
        tv_distance: tv,
        trotter_bound,
        total_bound,
        threshold: opts.threshold,
        pass: phase_distance <= opts.threshold,
    })
}

/// Convenience check used by tests: compile then verify in-process against
/// the block schedule itself (no JSON round trip).
pub fn verify_blocks_against_system(
    system: &QuantumSystem,
    aais: &Aais,
    artifact: &CompiledArtifact,
) -> Result<(f64, f64), VerifyError> {
    let n = aais.num_sites;
    if n > MAX_DENSE_SITES {
        return Err(VerifyError::TooLarge { n });
    }
    let mapped: Vec<(crate::ham::ConcreteHam, f64)> = system
        .segments
        .iter()
        .map(|(ham, tau)| crate::synth::map_hamiltonian(&artifact.layout, ham).map(|h| (h, *tau)))
        .collect::<Result<_, _>>()?;
    let target = verify::evolve(&mapped, n)?;
    let compiled = verify::block_schedule_unitary(&artifact.blocks, aais)?;
    let phase = phase_aligned_distance(&compiled, &target)?;
    let tv = tv_distance(&compiled, &target)?;
    Ok((phase, tv))
}

/// Instruction-schedule-level check (before conflict resolution).
pub fn verify_instruction_schedule(
    system: &QuantumSystem,
    aais: &Aais,
    artifact: &CompiledArtifact,
) -> Result<f64, VerifyError> {
    let mapped: Vec<(crate::ham::ConcreteHam, f64)> = system
        .segments
        .iter()
        .map(|(ham, tau)| crate::synth::map_hamiltonian(&artifact.layout, ham).map(|h| (h, *tau)))
        .collect::<Result<_, _>>()?;
    let target = verify::evolve(&mapped, aais.num_sites)?;
    let compiled = instruction_schedule_unitary(&artifact.schedule, aais)?;
    Ok(phase_aligned_distance(&compiled, &target)?)
}

/// One row of the benchmark table.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub case: String,
    pub n: usize,
    pub machine: String,
    pub status: String,
    pub compile_ms: u128,
    pub duration_s: Option<f64>,
    pub blocks: Option<usize>,
    pub residual: Option<f64>,
}

pub const BENCH_CSV_HEADER: &str = "case,n,machine,status,compile_ms,duration_s,blocks,residual";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.case,
            self.n,
            self.machine,
            self.status,
            self.compile_ms,
            self.duration_s.map(|v| format!("{v:e}")).unwrap_or_default(),
            self.blocks.map(|v| v.to_string()).unwrap_or_default(),
            self.residual.map(|v| format!("{v:e}")).unwrap_or_default(),
        )
    }
}

/// Runs every `<case>.hml` + `<case>.machine.json` pair in a directory, in
/// name order. A failing case becomes an `error` row; it never aborts the
/// suite.
pub fn bench(suite_dir: &Path, opts: &CompileOptions) -> Result<Vec<BenchRow>, std::io::Error> {
    let mut cases: Vec<PathBuf> = std::fs::read_dir(suite_dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "hml").unwrap_or(false))
        .collect();
    cases.sort();
    let mut rows = Vec::new();
    for case_path in cases {
        let case = case_path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let machine_path = case_path.with_extension("machine.json");
        let started = Instant::now();
        let row = run_bench_case(&case, &case_path, &machine_path, opts, started);
        rows.push(row);
    }
    Ok(rows)
}

fn run_bench_case(
    case: &str,
    case_path: &Path,
    machine_path: &Path,
    opts: &CompileOptions,
    started: Instant,
) -> BenchRow {
    let error_row = |status: String, started: Instant| BenchRow {
        case: case.into(),
        n: 0,
        machine: String::new(),
        status,
        compile_ms: started.elapsed().as_millis(),
        duration_s: None,
        blocks: None,
        residual: None,
    };
    let Ok(source) = std::fs::read_to_string(case_path) else {
        return error_row("error".into(), started);
    };
    let Ok(machine_json) = std::fs::read_to_string(machine_path) else {
        return error_row("error".into(), started);
    };
    let system = match opts.disc {
        None => crate::hml::parse_system(&source),
        Some(d) => crate::hml::parse_system_with_discretization(&source, d),
    };
    let system = match system {
        Ok(system) => system,
        Err(_) => return error_row("error".into(), started),
    };
    let aais = match crate::aais::load_machine_config(&machine_json) {
        Ok(aais) => aais,
        Err(_) => return error_row("error".into(), started),
    };
    let outcome = match compile(&system, &aais, opts) {
        Ok(outcome) => outcome,
        Err(_) => return error_row("error".into(), started),
    };
    let compile_ms = started.elapsed().as_millis();
    match outcome {
        CompileOutcome::Success(artifact) => BenchRow {
            case: case.into(),
            n: system.num_sites(),
            machine: aais.name.clone(),
            status: "ok".into(),
            compile_ms,
            duration_s: Some(artifact.line_schedule.total_duration_s),
            blocks: Some(artifact.blocks.num_blocks()),
            residual: Some(artifact.residual),
        },
        CompileOutcome::NoSolution { .. } => BenchRow {
            case: case.into(),
            n: system.num_sites(),
            machine: aais.name.clone(),
            status: "nosolution".into(),
            compile_ms,
            duration_s: None,
            blocks: None,
            residual: None,
        },
        CompileOutcome::Timeout => BenchRow {
            case: case.into(),
            n: system.num_sites(),
            machine: aais.name.clone(),
            status: "timeout".into(),
            compile_ms,
            duration_s: None,
            blocks: None,
            residual: None,
        },
    }
}
