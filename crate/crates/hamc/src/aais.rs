//! Abstract analog instruction sets: device models for the compiler.
//!
//! A device exposes a list of parameterized instructions, each generating an
//! instruction Hamiltonian over its local variables while it executes, plus
//! an always-on system Hamiltonian over time-independent global variables.
//! Instructions carry scheduling decorations: the signal line they occupy,
//! whether they are native or derived (compound-pulse) effects, and an
//! affine wall-clock duration model.
//!
//! Five device families are built in: per-atom and global-laser Rydberg
//! arrays, Heisenberg and 2-Pauli interaction sets, and a cross-resonance
//! native set. [`load_machine_config`] instantiates them from a JSON machine
//! description.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::expr::ScalarExpr;
use crate::ham::ParamHam;
use crate::pauli::{PauliOp, PauliString};

/// Whether an instruction is a directly generated effect or a compound-pulse
/// approximation. Derived instructions conflict with anything overlapping
/// their support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nativeness {
    Native,
    Derived,
}

/// Wall-clock implementation time of an instruction execution, affine in the
/// nominal machine-time duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DurationModel {
    pub base_s: f64,
    pub slope_s_per_unit: f64,
}

impl DurationModel {
    pub fn seconds(&self, nominal: f64) -> f64 {
        (self.base_s + self.slope_s_per_unit * nominal).max(0.0)
    }
}

const ONE_SITE_DURATION: DurationModel = DurationModel { base_s: 5e-8, slope_s_per_unit: 0.0 };
const TWO_SITE_DURATION: DurationModel =
    DurationModel { base_s: 1.3e-7, slope_s_per_unit: 2.0e-7 };
const VIRTUAL_DURATION: DurationModel = DurationModel { base_s: 0.0, slope_s_per_unit: 0.0 };

/// A parameterized analog instruction.
#[derive(Clone, Debug)]
pub struct Instruction {
    pub name: String,
    pub num_locals: usize,
    pub local_names: Vec<String>,
    /// Instruction Hamiltonian; coefficients reference this instruction's
    /// locals.
    pub ham: ParamHam,
    pub signal_line: usize,
    pub nativeness: Nativeness,
    pub duration: DurationModel,
}

impl Instruction {
    /// Sites the instruction Hamiltonian acts on non-trivially.
    pub fn support(&self) -> BTreeSet<u32> {
        self.ham.support().into_iter().collect()
    }

    pub fn is_derived(&self) -> bool {
        self.nativeness == Nativeness::Derived
    }
}

/// Rule rescaling the global variables so that the system Hamiltonian
/// divides by a group count during conflict resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SysScaling {
    /// Stretch all pairwise distances by `L^(1/6)`, dividing every inverse
    /// sixth-power interaction by `L`: `x_j -> x_0 + (x_j - x_0) * L^(1/6)`.
    RydbergDistance,
}

impl SysScaling {
    pub fn apply(&self, globals: &[f64], group_count: f64) -> Vec<f64> {
        match self {
            SysScaling::RydbergDistance => {
                let factor = group_count.powf(1.0 / 6.0);
                let origin = globals.first().copied().unwrap_or(0.0);
                globals.iter().map(|&x| origin + (x - origin) * factor).collect()
            }
        }
    }
}

/// A device model: instructions plus the system Hamiltonian.
#[derive(Clone, Debug)]
pub struct Aais {
    pub name: String,
    pub num_sites: usize,
    pub instructions: Vec<Instruction>,
    pub num_globals: usize,
    pub global_names: Vec<String>,
    /// Always-on effect; coefficients reference only global variables.
    pub sys_ham: ParamHam,
    pub sys_scaling: Option<SysScaling>,
    /// Starting spacing for position-like globals, used to seed the solver.
    pub global_init_spacing: Option<f64>,
}

impl Aais {
    pub fn instruction(&self, index: usize) -> &Instruction {
        &self.instructions[index]
    }

    pub fn instruction_by_name(&self, name: &str) -> Option<(usize, &Instruction)> {
        self.instructions.iter().enumerate().find(|(_, i)| i.name == name)
    }

    pub fn signal_lines(&self) -> BTreeSet<usize> {
        self.instructions.iter().map(|i| i.signal_line).collect()
    }
}

/// Conflict relation over instruction indices: same signal line, or a
/// derived instruction overlapping another instruction's support.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[a].iter().copied()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].len()
    }
}

pub fn conflict_graph(aais: &Aais) -> ConflictGraph {
    let n = aais.instructions.len();
    let supports: Vec<BTreeSet<u32>> = aais.instructions.iter().map(|i| i.support()).collect();
    let mut adj = vec![BTreeSet::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            let ia = &aais.instructions[a];
            let ib = &aais.instructions[b];
            let same_line = ia.signal_line == ib.signal_line;
            let derived_overlap = (ia.is_derived() || ib.is_derived())
                && supports[a].intersection(&supports[b]).next().is_some();
            if same_line || derived_overlap {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    ConflictGraph { adj }
}

fn number_operator(site: u32) -> ParamHam {
    // n = (I - Z) / 2
    let mut h = ParamHam::zero();
    h.insert_add(PauliString::identity(), ScalarExpr::Const(0.5));
    h.insert_add(PauliString::single(site, PauliOp::Z), ScalarExpr::Const(-0.5));
    h
}

fn site_op(site: u32, op: PauliOp) -> ParamHam {
    ParamHam::term(PauliString::single(site, op), ScalarExpr::Const(1.0))
}

/// Laser Hamiltonian `-delta n + (omega/2)(cos(phi) X - sin(phi) Y)` on one
/// atom, over locals `(delta, omega, phi)`.
fn laser_ham(site: u32) -> ParamHam {
    let delta = ScalarExpr::local(0);
    let omega = ScalarExpr::local(1);
    let phi = ScalarExpr::local(2);
    let half_omega = ScalarExpr::mul(ScalarExpr::Const(0.5), omega);
    let detuning = number_operator(site).scale_coeff(&ScalarExpr::neg(delta));
    let drive_x = site_op(site, PauliOp::X)
        .scale_coeff(&ScalarExpr::mul(half_omega.clone(), ScalarExpr::cos(phi.clone())));
    let drive_y = site_op(site, PauliOp::Y)
        .scale_coeff(&ScalarExpr::neg(ScalarExpr::mul(half_omega, ScalarExpr::sin(phi))));
    detuning.add(&drive_x).add(&drive_y)
}

/// Van der Waals system Hamiltonian `sum_{j<k} C6/(x_j - x_k)^6 n_j n_k`
/// over per-atom position globals.
fn rydberg_sys_ham(n: usize, c6: f64) -> ParamHam {
    let mut sys = ParamHam::zero();
    for j in 0..n {
        for k in (j + 1)..n {
            let distance = ScalarExpr::sub(ScalarExpr::global(j), ScalarExpr::global(k));
            let coeff = ScalarExpr::div(ScalarExpr::Const(c6), ScalarExpr::powi(distance, 6));
            let pair = number_operator(j as u32).mul(&number_operator(k as u32));
            sys = sys.add(&pair.scale_coeff(&coeff));
        }
    }
    sys
}

const RYDBERG_LOCALS: [&str; 3] = ["delta", "omega", "phi"];

/// Rydberg atom array with one individually addressed laser per atom.
pub fn build_ideal_rydberg(n: usize, c6: f64) -> Aais {
    assert!(n >= 1, "device needs at least one site");
    assert!(c6 > 0.0, "interaction constant must be positive");
    let instructions = (0..n)
        .map(|j| Instruction {
            name: format!("eta_{j}"),
            num_locals: 3,
            local_names: RYDBERG_LOCALS.iter().map(|s| s.to_string()).collect(),
            ham: laser_ham(j as u32),
            signal_line: j,
            nativeness: Nativeness::Native,
            duration: ONE_SITE_DURATION,
        })
        .collect();
    Aais {
        name: "ideal_rydberg".into(),
        num_sites: n,
        instructions,
        num_globals: n,
        global_names: (0..n).map(|j| format!("x{j}")).collect(),
        sys_ham: rydberg_sys_ham(n, c6),
        sys_scaling: Some(SysScaling::RydbergDistance),
        global_init_spacing: Some((c6 / 4.0).powf(1.0 / 6.0)),
    }
}

/// Rydberg atom array with a single laser addressing every atom at once.
pub fn build_global_rydberg(n: usize, c6: f64) -> Aais {
    assert!(n >= 1, "device needs at least one site");
    assert!(c6 > 0.0, "interaction constant must be positive");
    let mut ham = ParamHam::zero();
    for j in 0..n {
        ham = ham.add(&laser_ham(j as u32));
    }
    let instructions = vec![Instruction {
        name: "eta_global".into(),
        num_locals: 3,
        local_names: RYDBERG_LOCALS.iter().map(|s| s.to_string()).collect(),
        ham,
        signal_line: 0,
        nativeness: Nativeness::Native,
        duration: ONE_SITE_DURATION,
    }];
    Aais {
        name: "global_rydberg".into(),
        num_sites: n,
        instructions,
        num_globals: n,
        global_names: (0..n).map(|j| format!("x{j}")).collect(),
        sys_ham: rydberg_sys_ham(n, c6),
        sys_scaling: Some(SysScaling::RydbergDistance),
        global_init_spacing: Some((c6 / 4.0).powf(1.0 / 6.0)),
    }
}

const PAULIS: [PauliOp; 3] = [PauliOp::X, PauliOp::Y, PauliOp::Z];

fn derived_single_sites(n: usize) -> Vec<Instruction> {
    let mut out = Vec::new();
    for j in 0..n {
        for op in PAULIS {
            let s = op.symbol();
            out.push(Instruction {
                name: format!("eta_{j}_{s}"),
                num_locals: 1,
                local_names: vec!["a".into()],
                ham: site_op(j as u32, op).scale_coeff(&ScalarExpr::local(0)),
                signal_line: j,
                nativeness: Nativeness::Derived,
                duration: ONE_SITE_DURATION,
            });
        }
    }
    out
}

/// Interaction set with `a P_j` singles and `a P_j P_k` pairs on the given
/// connectivity, all derived effects.
pub fn build_heisenberg(n: usize, edges: &[(usize, usize)]) -> Aais {
    assert!(n >= 1, "device needs at least one site");
    let mut instructions = derived_single_sites(n);
    for (edge_index, &(j, k)) in edges.iter().enumerate() {
        for op in PAULIS {
            let s = op.symbol();
            let (_, string) = PauliString::from_factors([(j as u32, op), (k as u32, op)]);
            instructions.push(Instruction {
                name: format!("eta_{j}_{k}_{s}{s}"),
                num_locals: 1,
                local_names: vec!["a".into()],
                ham: ParamHam::term(string, ScalarExpr::local(0)),
                signal_line: n + edge_index,
                nativeness: Nativeness::Derived,
                duration: TWO_SITE_DURATION,
            });
        }
    }
    Aais {
        name: "heisenberg".into(),
        num_sites: n,
        instructions,
        num_globals: 0,
        global_names: Vec::new(),
        sys_ham: ParamHam::zero(),
        sys_scaling: None,
        global_init_spacing: None,
    }
}

/// Extension of the Heisenberg set with mixed `a P_j Q_k` pair interactions.
pub fn build_two_pauli(n: usize, edges: &[(usize, usize)]) -> Aais {
    assert!(n >= 1, "device needs at least one site");
    let mut instructions = derived_single_sites(n);
    for (edge_index, &(j, k)) in edges.iter().enumerate() {
        for p in PAULIS {
            for q in PAULIS {
                let (sp, sq) = (p.symbol(), q.symbol());
                let (_, string) = PauliString::from_factors([(j as u32, p), (k as u32, q)]);
                instructions.push(Instruction {
                    name: format!("eta_{j}_{k}_{sp}{sq}"),
                    num_locals: 1,
                    local_names: vec!["a".into()],
                    ham: ParamHam::term(string, ScalarExpr::local(0)),
                    signal_line: n + edge_index,
                    nativeness: Nativeness::Derived,
                    duration: TWO_SITE_DURATION,
                });
            }
        }
    }
    Aais {
        name: "two_pauli".into(),
        num_sites: n,
        instructions,
        num_globals: 0,
        global_names: Vec::new(),
        sys_ham: ParamHam::zero(),
        sys_scaling: None,
        global_init_spacing: None,
    }
}

/// Cross-resonance constants of a superconducting device.
#[derive(Clone, Copy, Debug)]
pub struct IbmConstants {
    pub omega_zx: f64,
    pub omega_zz: f64,
    pub omega_ix: f64,
    pub omega_zi: f64,
}

/// Native cross-resonance set: one directed CR instruction per ordered edge
/// driven from the control site's line, plus native X/Y and virtual
/// (derived, zero-duration) Z rotations per site.
pub fn build_ibm_native(n: usize, edges: &[(usize, usize)], constants: IbmConstants) -> Aais {
    assert!(n >= 1, "device needs at least one site");
    let mut instructions = Vec::new();
    for j in 0..n {
        for op in PAULIS {
            let derived = op == PauliOp::Z;
            instructions.push(Instruction {
                name: format!("eta_{j}_{}", op.symbol()),
                num_locals: 1,
                local_names: vec!["a".into()],
                ham: site_op(j as u32, op).scale_coeff(&ScalarExpr::local(0)),
                signal_line: j,
                nativeness: if derived { Nativeness::Derived } else { Nativeness::Native },
                duration: if derived { VIRTUAL_DURATION } else { ONE_SITE_DURATION },
            });
        }
    }
    for &(a, b) in edges {
        for (j, k) in [(a, b), (b, a)] {
            let omega = ScalarExpr::local(0);
            let zx = PauliString::from_factors([(j as u32, PauliOp::Z), (k as u32, PauliOp::X)]).1;
            let zz = PauliString::from_factors([(j as u32, PauliOp::Z), (k as u32, PauliOp::Z)]).1;
            let mut ham = ParamHam::zero();
            ham.insert_add(
                zx,
                ScalarExpr::mul(ScalarExpr::Const(constants.omega_zx), omega.clone()),
            );
            ham.insert_add(zz, ScalarExpr::Const(constants.omega_zz));
            ham.insert_add(
                PauliString::single(k as u32, PauliOp::X),
                ScalarExpr::mul(ScalarExpr::Const(constants.omega_ix), omega.clone()),
            );
            ham.insert_add(
                PauliString::single(j as u32, PauliOp::Z),
                ScalarExpr::mul(
                    ScalarExpr::Const(constants.omega_zi),
                    ScalarExpr::mul(omega.clone(), omega),
                ),
            );
            instructions.push(Instruction {
                name: format!("eta_{j}_{k}_CR"),
                num_locals: 1,
                local_names: vec!["omega".into()],
                ham,
                signal_line: j,
                nativeness: Nativeness::Native,
                duration: TWO_SITE_DURATION,
            });
        }
    }
    Aais {
        name: "ibm_native".into(),
        num_sites: n,
        instructions,
        num_globals: 0,
        global_names: Vec::new(),
        sys_ham: ParamHam::zero(),
        sys_scaling: None,
        global_init_spacing: None,
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid machine configuration: {0}")]
    Schema(String),
    #[error("unknown AAIS `{0}`")]
    UnknownAais(String),
    #[error("missing constant `{name}` for AAIS `{aais}`")]
    MissingConstant { aais: String, name: String },
    #[error("unknown constant `{name}` for AAIS `{aais}`")]
    UnknownConstant { aais: String, name: String },
    #[error("invalid edge ({a}, {b}) on a {n}-site machine")]
    InvalidEdge { a: usize, b: usize, n: usize },
    #[error("AAIS `{0}` does not take a connectivity list")]
    UnexpectedConnectivity(String),
    #[error("machine must have at least one site")]
    NoSites,
    #[error("unknown duration family `{0}` (expected `eta_1site`, `eta_2site` or an instruction name)")]
    UnknownDurationFamily(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub aais: String,
    pub num_sites: usize,
    #[serde(default)]
    pub connectivity: Vec<[usize; 2]>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub durations: BTreeMap<String, DurationOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationOverride {
    pub base: f64,
    pub slope: f64,
}

fn require_constant(config: &MachineConfig, name: &str) -> Result<f64, ConfigError> {
    config.constants.get(name).copied().ok_or_else(|| ConfigError::MissingConstant {
        aais: config.aais.clone(),
        name: name.into(),
    })
}

fn check_constant_names(config: &MachineConfig, allowed: &[&str]) -> Result<(), ConfigError> {
    for name in config.constants.keys() {
        if !allowed.contains(&name.as_str()) {
            return Err(ConfigError::UnknownConstant {
                aais: config.aais.clone(),
                name: name.clone(),
            });
        }
    }
    Ok(())
}

fn validate_edges(config: &MachineConfig) -> Result<Vec<(usize, usize)>, ConfigError> {
    let n = config.num_sites;
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(config.connectivity.len());
    for &[a, b] in &config.connectivity {
        if a == b || a >= n || b >= n {
            return Err(ConfigError::InvalidEdge { a, b, n });
        }
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            return Err(ConfigError::InvalidEdge { a, b, n });
        }
        edges.push((a, b));
    }
    Ok(edges)
}

/// Builds the named AAIS from a JSON machine description, applying duration
/// overrides. Unknown top-level keys, constants, edges and duration families
/// are rejected.
pub fn load_machine_config(json: &str) -> Result<Aais, ConfigError> {
    let config: MachineConfig =
        serde_json::from_str(json).map_err(|e| ConfigError::Schema(e.to_string()))?;
    load_machine(&config)
}

pub fn load_machine(config: &MachineConfig) -> Result<Aais, ConfigError> {
    if config.num_sites == 0 {
        return Err(ConfigError::NoSites);
    }
    let edges = validate_edges(config)?;
    let mut aais = match config.aais.as_str() {
        "ideal_rydberg" | "global_rydberg" => {
            if !edges.is_empty() {
                return Err(ConfigError::UnexpectedConnectivity(config.aais.clone()));
            }
            check_constant_names(config, &["C6"])?;
            let c6 = require_constant(config, "C6")?;
            if config.aais == "ideal_rydberg" {
                build_ideal_rydberg(config.num_sites, c6)
            } else {
                build_global_rydberg(config.num_sites, c6)
            }
        }
        "heisenberg" => {
            check_constant_names(config, &[])?;
            build_heisenberg(config.num_sites, &edges)
        }
        "two_pauli" => {
            check_constant_names(config, &[])?;
            build_two_pauli(config.num_sites, &edges)
        }
        "ibm_native" => {
            check_constant_names(config, &["omega_zx", "omega_zz", "omega_ix", "omega_zi"])?;
            let constants = IbmConstants {
                omega_zx: require_constant(config, "omega_zx")?,
                omega_zz: require_constant(config, "omega_zz")?,
                omega_ix: require_constant(config, "omega_ix")?,
                omega_zi: require_constant(config, "omega_zi")?,
            };
            build_ibm_native(config.num_sites, &edges, constants)
        }
        other => return Err(ConfigError::UnknownAais(other.into())),
    };
    for (family, duration) in &config.durations {
        let model = DurationModel { base_s: duration.base, slope_s_per_unit: duration.slope };
        let mut matched = false;
        for instruction in aais.instructions.iter_mut() {
            let applies = match family.as_str() {
                "eta_1site" => instruction.support().len() <= 1,
                "eta_2site" => instruction.support().len() >= 2,
                name => instruction.name == name,
            };
            if applies {
                instruction.duration = model;
                matched = true;
            }
        }
        if !matched && family != "eta_1site" && family != "eta_2site" {
            return Err(ConfigError::UnknownDurationFamily(family.clone()));
        }
    }
    Ok(aais)
}

/// Names and one-line descriptions of the built-in device families.
pub fn builtin_machines() -> Vec<(&'static str, &'static str)> {
    vec![
        ("ideal_rydberg", "per-atom lasers (delta, omega, phi) with 1/r^6 interactions; constant C6"),
        ("global_rydberg", "one global laser over all atoms with 1/r^6 interactions; constant C6"),
        ("heisenberg", "derived a*P singles and a*PP pairs on the connectivity graph"),
        ("two_pauli", "heisenberg plus mixed a*PQ pair interactions"),
        ("ibm_native", "native cross-resonance pairs and X/Y singles, virtual Z; constants omega_zx/zz/ix/zi"),
    ]
}
