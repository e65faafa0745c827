//! Site-layout search and coefficient-equation construction.
//!
//! A layout injectively maps target sites onto device sites. The proposer
//! backtracks over assignments, pruning a partial layout as soon as some
//! target monomial can no longer be matched by any instruction or
//! system-Hamiltonian monomial (unassigned sites act as holes that match any
//! operator). Accepted layouts feed the equation builder, which runs a
//! worklist over monomials and emits one coefficient-matching equation per
//! `(segment, monomial)` pair:
//!
//! ```text
//! t_j * H_sys[P](g) + sum_k t_j * H_eta_k[P](a_kj) * s_kj  =  tau_j * H_tar_j[P]
//! ```
//!
//! with binary selectors `s_kj`, per-segment times `t_j > 0`, per-execution
//! locals `a_kj` and shared globals `g`.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::aais::Aais;
use crate::expr::{ScalarExpr, VarKind};
use crate::ham::{Coeff, ConcreteHam, HamiltonianMap};
use crate::hml::QuantumSystem;
use crate::pauli::{PauliOp, PauliString};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("target system has {target} sites but the device only has {device}")]
    TargetLargerThanDevice { target: usize, device: usize },
    #[error("Hamiltonian references site {site} outside the layout domain")]
    UnmappedSite { site: u32 },
}

/// Injective map from target site to device site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    map: Vec<u32>,
}

impl Layout {
    pub fn new(map: Vec<u32>) -> Layout {
        let mut seen = BTreeSet::new();
        for &d in &map {
            assert!(seen.insert(d), "layout must be injective");
        }
        Layout { map }
    }

    pub fn identity(n: usize) -> Layout {
        Layout { map: (0..n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn device_site(&self, target: u32) -> Option<u32> {
        self.map.get(target as usize).copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}->{d}")?;
        }
        write!(f, "]")
    }
}

/// Relabels the monomials of a Hamiltonian through a layout.
pub fn map_hamiltonian<C: Coeff>(
    layout: &Layout,
    ham: &HamiltonianMap<C>,
) -> Result<HamiltonianMap<C>, SynthError> {
    let mut out = HamiltonianMap::zero();
    for (string, coeff) in ham.terms() {
        for site in string.support() {
            if layout.device_site(site).is_none() {
                return Err(SynthError::UnmappedSite { site });
            }
        }
        let mapped = string
            .map_sites(|s| layout.device_site(s))
            .expect("injective layout cannot collide");
        out.insert_add(mapped, coeff.clone());
    }
    Ok(out)
}

/// Node-count and wall-clock budget for the layout search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 1_000_000, deadline: None }
    }
}

/// Distinguished outcome when the search budget runs out before the stream
/// is exhausted.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("layout search budget exhausted")]
pub struct BudgetExhausted;

struct Frame {
    candidates: Vec<u32>,
    next: usize,
    assigned: Option<u32>,
}

/// Lazy backtracking stream of layouts. Iterating to completion without a
/// `BudgetExhausted` item means no further layout exists.
pub struct LayoutStream {
    num_targets: usize,
    num_device: usize,
    /// Target sites in assignment order (descending interaction degree).
    order: Vec<u32>,
    target_monomials: Vec<PauliString>,
    device_monomials: Vec<PauliString>,
    device_adjacency: Vec<BTreeSet<u32>>,
    assignment: Vec<Option<u32>>,
    device_to_target: Vec<Option<u32>>,
    stack: Vec<Frame>,
    budget: SearchBudget,
    nodes: u64,
    started: bool,
    finished: bool,
    yielded_empty: bool,
}

/// Starts the layout search for a target system on a device.
pub fn propose_layouts(
    system: &QuantumSystem,
    aais: &Aais,
    budget: SearchBudget,
) -> Result<LayoutStream, SynthError> {
    let num_targets = system.num_sites();
    let num_device = aais.num_sites;
    if num_targets > num_device {
        return Err(SynthError::TargetLargerThanDevice { target: num_targets, device: num_device });
    }

    let mut target_monomials: Vec<PauliString> = Vec::new();
    let mut seen = BTreeSet::new();
    for (ham, _) in &system.segments {
        for monomial in ham.monomials() {
            if !monomial.is_identity() && seen.insert(monomial.clone()) {
                target_monomials.push(monomial.clone());
            }
        }
    }

    let mut device_monomials: Vec<PauliString> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut add_device = |p: &PauliString| {
        if !p.is_identity() && seen.insert(p.clone()) {
            device_monomials.push(p.clone());
        }
    };
    for monomial in aais.sys_ham.monomials() {
        add_device(monomial);
    }
    for instruction in &aais.instructions {
        for monomial in instruction.ham.monomials() {
            add_device(monomial);
        }
    }

    // Device adjacency from multi-site monomial supports, used to order
    // candidate sites next to already-used ones.
    let mut device_adjacency = vec![BTreeSet::new(); num_device];
    for monomial in &device_monomials {
        let support: Vec<u32> = monomial.support().collect();
        for (i, &a) in support.iter().enumerate() {
            for &b in &support[i + 1..] {
                device_adjacency[a as usize].insert(b);
                device_adjacency[b as usize].insert(a);
            }
        }
    }

    // Assign target sites in descending interaction-degree order.
    let mut target_degree = vec![BTreeSet::new(); num_targets];
    for monomial in &target_monomials {
        let support: Vec<u32> = monomial.support().collect();
        for (i, &a) in support.iter().enumerate() {
            for &b in &support[i + 1..] {
                target_degree[a as usize].insert(b);
                target_degree[b as usize].insert(a);
            }
        }
    }
    let mut order: Vec<u32> = (0..num_targets as u32).collect();
    order.sort_by_key(|&s| (usize::MAX - target_degree[s as usize].len(), s));

    Ok(LayoutStream {
        num_targets,
        num_device,
        order,
        target_monomials,
        device_monomials,
        device_adjacency,
        assignment: vec![None; num_targets],
        device_to_target: vec![None; num_device],
        stack: Vec::new(),
        budget,
        nodes: 0,
        started: false,
        finished: false,
        yielded_empty: false,
    })
}

impl LayoutStream {
    pub fn nodes_visited(&self) -> u64 {
        self.nodes
    }

    fn candidates_for_depth(&self) -> Vec<u32> {
        let mut free: Vec<u32> = (0..self.num_device as u32)
            .filter(|&d| self.device_to_target[d as usize].is_none())
            .collect();
        let adjacent_to_used: BTreeSet<u32> = self
            .device_to_target
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .flat_map(|(d, _)| self.device_adjacency[d].iter().copied())
            .collect();
        free.sort_by_key(|&d| (!adjacent_to_used.contains(&d), d));
        free
    }

    fn assign(&mut self, target: u32, device: u32) {
        self.assignment[target as usize] = Some(device);
        self.device_to_target[device as usize] = Some(target);
    }

    fn unassign(&mut self, target: u32, device: u32) {
        self.assignment[target as usize] = None;
        self.device_to_target[device as usize] = None;
    }

    /// A partial layout survives when every target monomial still has a
    /// hole-match among the device monomials.
    fn partial_ok(&self) -> bool {
        self.target_monomials.iter().all(|p| {
            self.device_monomials.iter().any(|q| self.matches_partial(p, q))
        })
    }

    /// `q` matches `p` under the current partial assignment when an
    /// injective extension could make the mapped monomial equal `q`:
    /// assigned sites must agree exactly and the leftover operator multisets
    /// must coincide.
    fn matches_partial(&self, p: &PauliString, q: &PauliString) -> bool {
        for (target, assigned) in self.assignment.iter().enumerate() {
            if let Some(device) = assigned {
                if q.op_at(*device) != p.op_at(target as u32) {
                    return false;
                }
            }
        }
        let mut need = [0i32; 3];
        for (site, op) in p.factors() {
            if self.assignment[site as usize].is_none() {
                need[op_slot(op)] += 1;
            }
        }
        let mut have = [0i32; 3];
        for (site, op) in q.factors() {
            if self.device_to_target[site as usize].is_none() {
                have[op_slot(op)] += 1;
            }
        }
        need == have
    }

    fn budget_spent(&self) -> bool {
        if self.nodes >= self.budget.max_nodes {
            return true;
        }
        match self.budget.deadline {
            Some(deadline) => Instant::now() >= deadline,
            None => false,
        }
    }

    fn current_layout(&self) -> Layout {
        Layout::new(self.assignment.iter().map(|d| d.expect("complete")).collect())
    }
}

fn op_slot(op: PauliOp) -> usize {
    match op {
        PauliOp::X => 0,
        PauliOp::Y => 1,
        PauliOp::Z => 2,
        PauliOp::I => unreachable!("identity factors are never stored"),
    }
}

impl Iterator for LayoutStream {
    type Item = Result<Layout, BudgetExhausted>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.num_targets == 0 {
                self.finished = true;
                self.yielded_empty = true;
                return Some(Ok(Layout::new(Vec::new())));
            }
            self.stack.push(Frame { candidates: self.candidates_for_depth(), next: 0, assigned: None });
        }
        loop {
            let depth = match self.stack.len() {
                0 => {
                    self.finished = true;
                    return None;
                }
                len => len - 1,
            };
            let target = self.order[depth];
            // Undo the previous choice at this depth, if any.
            if let Some(device) = self.stack[depth].assigned.take() {
                self.unassign(target, device);
            }
            if self.stack[depth].next >= self.stack[depth].candidates.len() {
                self.stack.pop();
                continue;
            }
            let device = self.stack[depth].candidates[self.stack[depth].next];
            self.stack[depth].next += 1;

            self.nodes += 1;
            if self.budget_spent() {
                self.finished = true;
                return Some(Err(BudgetExhausted));
            }

            self.stack[depth].assigned = Some(device);
            self.assign(target, device);
            if !self.partial_ok() {
                continue;
            }
            if depth + 1 == self.num_targets {
                return Some(Ok(self.current_layout()));
            }
            self.stack.push(Frame { candidates: self.candidates_for_depth(), next: 0, assigned: None });
        }
    }
}

/// One instruction's contribution to an equation's left-hand side; the full
/// term is `t_j * coeff(a_kj) * s_kj`.
#[derive(Clone, Debug)]
pub struct InstrTerm {
    /// Index into [`EquationSystem::instructions`].
    pub instr: usize,
    pub coeff: ScalarExpr,
}

/// One coefficient-matching equation, tagged by segment and monomial.
#[derive(Clone, Debug)]
pub struct Equation {
    pub seg: usize,
    pub monomial: PauliString,
    /// System-Hamiltonian coefficient over the globals, multiplied by `t_j`.
    pub sys_coeff: Option<ScalarExpr>,
    pub terms: Vec<InstrTerm>,
    pub rhs: f64,
}

/// Slim instruction metadata carried by the equation system.
#[derive(Clone, Debug)]
pub struct EqInstruction {
    pub aais_index: usize,
    pub name: String,
    pub num_locals: usize,
    pub local_names: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct EqSegment {
    pub tau: f64,
}

/// The mixed-binary system produced for one layout.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub aais_name: String,
    pub num_globals: usize,
    pub global_names: Vec<String>,
    pub global_init_spacing: Option<f64>,
    pub instructions: Vec<EqInstruction>,
    pub segments: Vec<EqSegment>,
    pub equations: Vec<Equation>,
}

impl EquationSystem {
    /// All `(instruction, segment)` binary selector indices.
    pub fn binary_vars(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.segments.len() {
            for k in 0..self.instructions.len() {
                out.push((k, j));
            }
        }
        out
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    /// Pretty-prints the system, one line per equation:
    /// `[seg j][P] lhs = rhs`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for eq in &self.equations {
            out.push_str(&self.render_equation(eq));
            out.push('\n');
        }
        out
    }

    pub fn render_equation(&self, eq: &Equation) -> String {
        let j = eq.seg + 1;
        let mut lhs = Vec::new();
        if let Some(sys) = &eq.sys_coeff {
            let global_names = self.global_names.clone();
            let rendered = sys.display_with(move |kind, index| match kind {
                VarKind::Global => global_names
                    .get(index)
                    .cloned()
                    .unwrap_or_else(|| format!("g{index}")),
                VarKind::Local => format!("v{index}"),
            });
            lhs.push(format!("t_{j}*({rendered})"));
        }
        for term in &eq.terms {
            let instr = &self.instructions[term.instr];
            let local_names = instr.local_names.clone();
            let rendered = term.coeff.display_with(move |kind, index| match kind {
                VarKind::Local => local_names
                    .get(index)
                    .cloned()
                    .unwrap_or_else(|| format!("v{index}")),
                VarKind::Global => format!("g{index}"),
            });
            lhs.push(format!("t_{j}*({rendered})*s_{j}[{}]", instr.name));
        }
        let lhs = if lhs.is_empty() { "0".to_string() } else { lhs.join(" + ") };
        format!("[seg {j}][{}] {lhs} = {:?}", eq.monomial, eq.rhs)
    }
}

/// Builds the coefficient equation system for a layout.
///
/// The worklist starts from the monomials of the system Hamiltonian and of
/// every mapped target segment; whenever an instruction contributes to some
/// monomial, its remaining monomials join the list so their equations (with
/// zero right-hand sides where the target is silent) are also emitted.
/// Identity monomials never produce equations.
pub fn build_equations(
    layout: &Layout,
    segments: &[(ConcreteHam, f64)],
    aais: &Aais,
) -> Result<EquationSystem, SynthError> {
    let mapped: Vec<ConcreteHam> = segments
        .iter()
        .map(|(ham, _)| map_hamiltonian(layout, ham))
        .collect::<Result<_, _>>()?;

    let mut worklist: Vec<PauliString> = Vec::new();
    let mut seen: BTreeSet<PauliString> = BTreeSet::new();
    for monomial in aais.sys_ham.monomials() {
        if seen.insert(monomial.clone()) {
            worklist.push(monomial.clone());
        }
    }
    for ham in &mapped {
        for monomial in ham.monomials() {
            if seen.insert(monomial.clone()) {
                worklist.push(monomial.clone());
            }
        }
    }

    // Single closure pass: contributors per monomial are segment-independent.
    struct Row {
        monomial: PauliString,
        sys_coeff: Option<ScalarExpr>,
        terms: Vec<InstrTerm>,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut i = 0;
    while i < worklist.len() {
        let monomial = worklist[i].clone();
        i += 1;
        if monomial.is_identity() {
            continue;
        }
        let sys_coeff = {
            let coeff = aais.sys_ham.coeff(&monomial);
            if coeff.prunes_to_zero() {
                None
            } else {
                Some(coeff)
            }
        };
        let mut terms = Vec::new();
        for (k, instruction) in aais.instructions.iter().enumerate() {
            let coeff = instruction.ham.coeff(&monomial);
            if coeff.prunes_to_zero() {
                continue;
            }
            terms.push(InstrTerm { instr: k, coeff });
            for other in instruction.ham.monomials() {
                if seen.insert(other.clone()) {
                    worklist.push(other.clone());
                }
            }
        }
        rows.push(Row { monomial, sys_coeff, terms });
    }

    let mut equations = Vec::with_capacity(rows.len() * segments.len());
    for (j, (_, tau)) in segments.iter().enumerate() {
        for row in &rows {
            let rhs = tau * mapped[j].coeff(&row.monomial).re;
            equations.push(Equation {
                seg: j,
                monomial: row.monomial.clone(),
                sys_coeff: row.sys_coeff.clone(),
                terms: row.terms.clone(),
                rhs,
            });
        }
    }

    Ok(EquationSystem {
        aais_name: aais.name.clone(),
        num_globals: aais.num_globals,
        global_names: aais.global_names.clone(),
        global_init_spacing: aais.global_init_spacing,
        instructions: aais
            .instructions
            .iter()
            .enumerate()
            .map(|(k, instr)| EqInstruction {
                aais_index: k,
                name: instr.name.clone(),
                num_locals: instr.num_locals,
                local_names: instr.local_names.clone(),
            })
            .collect(),
        segments: segments.iter().map(|(_, tau)| EqSegment { tau: *tau }).collect(),
        equations,
    })
}
