//! Compiler from Hamiltonian evolution programs to executable pulse
//! schedules for analog quantum devices, with a built-in numerical verifier.
//!
//! The pipeline mirrors the stages a schedule goes through:
//!
//! 1. [`hml`] parses a textual program describing a quantum system as a
//!    sequence of Hamiltonian evolution segments, discretizing
//!    time-dependent coefficients.
//! 2. [`aais`] models the target device as an abstract analog instruction
//!    set: parameterized instruction Hamiltonians plus an always-on system
//!    Hamiltonian with global variables.
//! 3. [`synth`] proposes injective site layouts and builds the mixed-binary
//!    coefficient-matching equation system.
//! 4. [`solver`] solves it by relaxation, trust-region least squares with an
//!    analytic Jacobian, rounding, and a re-solve, producing an instruction
//!    schedule.
//! 5. [`trotter`] resolves instruction conflicts into a block-schedule DAG
//!    via greedy coloring and Trotterization.
//! 6. [`sched`] linearizes the DAG onto signal lines with concrete times and
//!    [`emit`] serializes the result as a canonical JSON artifact.
//! 7. [`verify`] realizes Hamiltonians and schedules as dense matrices to
//!    certify that compilation preserved the program semantics at desk
//!    scale.
//!
//! The `examples/` directory walks through each capability; the `hamc`
//! binary wires the same library calls into a command-line driver.

pub mod aais;
pub mod emit;
pub mod expr;
pub mod ham;
pub mod hml;
pub mod pauli;
pub mod pipeline;
pub mod sched;
pub mod solver;
pub mod synth;
pub mod trotter;
pub mod verify;

pub use expr::{ScalarExpr, VarEnv, VarKind};
pub use ham::{ComplexExpr, ConcreteHam, HamiltonianMap, ParamHam};
pub use pauli::{pauli_mul, PauliOp, PauliString, Phase};
