//! Conflict resolution: instruction schedules to block-schedule DAGs.
//!
//! Executions that cannot run simultaneously (per the device conflict graph)
//! are partitioned into conflict-free groups by greedy coloring and replayed
//! as a first-order product formula: `R` repetitions of the group sequence,
//! each for a fraction of the segment duration. Executions whose Hamiltonian
//! commutes with everything else are peeled into standalone blocks evolved
//! once for the full duration, which introduces no error.
//!
//! A non-zero system Hamiltonian is always on, so when Trotterization splits
//! a segment into `L` groups the device would feel it `L` times over. The
//! AAIS scaling rule rescales the globals so the system term divides by the
//! maximal group count, and every segment is padded to exactly that many
//! groups.

use thiserror::Error;

use crate::aais::{conflict_graph, Aais, ConflictGraph};
use crate::expr::{ExprError, VarEnv};
use crate::ham::ConcreteHam;
use crate::solver::{Execution, InstructionSchedule};

/// Commutator coefficients below this are treated as exact cancellation.
const COMMUTE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TrotterError {
    #[error(
        "AAIS `{aais}` has a non-zero system Hamiltonian, needs {groups} groups, and provides no scaling rule"
    )]
    ScalingUnavailable { aais: String, groups: usize },
    #[error("instruction Hamiltonian evaluation failed: {0}")]
    Eval(#[from] ExprError),
    #[error("trotterization number must be at least 1")]
    ZeroRepetitions,
}

/// A set of simultaneous executions evolving for a nominal duration.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub executions: Vec<Execution>,
    pub duration: f64,
}

/// DAG of blocks; an edge `a -> b` means every execution of `b` starts after
/// every execution of `a` ends.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSchedule {
    pub blocks: Vec<Block>,
    pub edges: Vec<(usize, usize)>,
    pub globals: Vec<f64>,
}

impl BlockSchedule {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Predecessor lists, indexed by block.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.blocks.len()];
        for &(a, b) in &self.edges {
            preds[b].push(a);
        }
        preds
    }
}

/// Grouping and norm data the verifier needs to evaluate the Trotter bound.
#[derive(Clone, Debug)]
pub struct TrotterInfo {
    /// Maximal group count over segments (1 when nothing conflicts).
    pub l_max: usize,
    /// Concrete group Hamiltonians per segment (standalone peels excluded).
    pub segment_groups: Vec<Vec<ConcreteHam>>,
    /// System Hamiltonian evaluated at the (possibly rescaled) globals.
    pub sys_concrete: ConcreteHam,
}

/// Trotter error bound `(lambda T)^2 / (D R) * exp(lambda T / (D R))`.
pub fn trotter_error_bound(lambda: f64, t_total: f64, d: u32, r: u32) -> f64 {
    let dr = d as f64 * r as f64;
    let lt = lambda * t_total;
    lt * lt / dr * (lt / dr).exp()
}

/// Greedy largest-degree-first coloring of the executions under the device
/// conflict relation. Returns conflict-free groups ordered by color.
pub fn group_executions(executions: &[Execution], conflicts: &ConflictGraph) -> Vec<Vec<usize>> {
    color_executions(executions, conflicts, None)
}

/// Like [`group_executions`], but when several allowed colors contain only
/// members commuting with the execution, it joins the largest such class.
/// Mutually commuting terms then share one exponential, which is exact for
/// them and keeps the non-commuting families from interleaving.
pub fn group_executions_merged(
    executions: &[Execution],
    conflicts: &ConflictGraph,
    hams: &[ConcreteHam],
) -> Vec<Vec<usize>> {
    color_executions(executions, conflicts, Some(hams))
}

fn color_executions(
    executions: &[Execution],
    conflicts: &ConflictGraph,
    hams: Option<&[ConcreteHam]>,
) -> Vec<Vec<usize>> {
    let n = executions.len();
    if n == 0 {
        return Vec::new();
    }
    let conflict =
        |a: usize, b: usize| conflicts.conflicts(executions[a].instr, executions[b].instr);
    let degree: Vec<usize> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && conflict(i, j)).count()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (usize::MAX - degree[i], i));

    let mut color = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        let allowed: Vec<usize> = (0..members.len())
            .filter(|&c| members[c].iter().all(|&u| !conflict(u, v)))
            .collect();
        let preferred = hams.and_then(|hams| {
            allowed
                .iter()
                .copied()
                .filter(|&c| {
                    members[c].iter().all(|&u| hams[v].commutes_with(&hams[u], COMMUTE_TOL))
                })
                .max_by_key(|&c| (members[c].len(), usize::MAX - c))
        });
        let c = preferred.or_else(|| allowed.first().copied()).unwrap_or(members.len());
        if c == members.len() {
            members.push(Vec::new());
        }
        color[v] = c;
        members[c].push(v);
    }
    let mut groups = vec![Vec::new(); members.len()];
    for v in 0..n {
        groups[color[v]].push(v);
    }
    groups
}

fn eval_execution(aais: &Aais, execution: &Execution, globals: &[f64]) -> Result<ConcreteHam, ExprError> {
    let env = VarEnv::new(globals, &execution.locals);
    aais.instruction(execution.instr).ham.eval(&env)
}

/// Splits executions into those whose Hamiltonian commutes with the rest of
/// the segment (including the system Hamiltonian) and the remainder that
/// must be Trotterized. Commuting executions can evolve standalone for the
/// full duration without error.
pub fn split_commuting(
    executions: &[Execution],
    aais: &Aais,
    globals: &[f64],
) -> Result<(Vec<usize>, Vec<usize>), ExprError> {
    let sys = aais.sys_ham.eval(&VarEnv::new(globals, &[]))?;
    let hams: Vec<ConcreteHam> = executions
        .iter()
        .map(|e| eval_execution(aais, e, globals))
        .collect::<Result<_, _>>()?;
    let mut total = sys;
    for h in &hams {
        total = total.add(h);
    }
    let mut standalone = Vec::new();
    let mut rest = Vec::new();
    for (i, h) in hams.iter().enumerate() {
        // [H_i, total] = [H_i, total - H_i], so the check is order-free.
        if h.commutes_with(&total, COMMUTE_TOL) {
            standalone.push(i);
        } else {
            rest.push(i);
        }
    }
    Ok((standalone, rest))
}

/// Resolves conflicts in an instruction schedule, producing a conflict-free
/// block schedule and the grouping data for error reporting.
pub fn trotterize(
    schedule: &InstructionSchedule,
    repetitions: u32,
    aais: &Aais,
) -> Result<(BlockSchedule, TrotterInfo), TrotterError> {
    if repetitions == 0 {
        return Err(TrotterError::ZeroRepetitions);
    }
    let conflicts = conflict_graph(aais);
    let sys_initial = aais.sys_ham.eval(&VarEnv::new(&schedule.globals, &[]))?;
    let sys_is_zero = sys_initial.is_zero();

    // Plan each segment: peeled standalone executions (only sound when the
    // system Hamiltonian vanishes, since standalone blocks still feel it)
    // and conflict groups for the remainder.
    struct Plan {
        duration: f64,
        standalone: Vec<usize>,
        groups: Vec<Vec<usize>>,
    }
    let mut plans = Vec::with_capacity(schedule.segments.len());
    for (executions, duration) in &schedule.segments {
        let (standalone, rest) = if sys_is_zero {
            split_commuting(executions, aais, &schedule.globals)?
        } else {
            (Vec::new(), (0..executions.len()).collect())
        };
        let rest_executions: Vec<Execution> =
            rest.iter().map(|&i| executions[i].clone()).collect();
        let rest_hams: Vec<ConcreteHam> = rest_executions
            .iter()
            .map(|e| eval_execution(aais, e, &schedule.globals))
            .collect::<Result<_, _>>()?;
        let groups_local = group_executions_merged(&rest_executions, &conflicts, &rest_hams);
        let groups: Vec<Vec<usize>> = groups_local
            .into_iter()
            .map(|group| group.into_iter().map(|i| rest[i]).collect())
            .collect();
        plans.push(Plan { duration: *duration, standalone, groups });
    }

    let l_max = plans.iter().map(|p| p.groups.len()).max().unwrap_or(0).max(1);
    let scaled = !sys_is_zero && l_max > 1;
    let globals = if scaled {
        let scaling = aais.sys_scaling.ok_or_else(|| TrotterError::ScalingUnavailable {
            aais: aais.name.clone(),
            groups: l_max,
        })?;
        scaling.apply(&schedule.globals, l_max as f64)
    } else {
        schedule.globals.clone()
    };

    let mut blocks: Vec<Block> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut previous_layer: Vec<usize> = Vec::new();
    let push_layer = |layer: Vec<usize>, edges: &mut Vec<(usize, usize)>, previous: &mut Vec<usize>| {
        if layer.is_empty() {
            return;
        }
        for &a in previous.iter() {
            for &b in &layer {
                edges.push((a, b));
            }
        }
        *previous = layer;
    };

    let mut segment_groups = Vec::with_capacity(plans.len());
    for (plan, (executions, _)) in plans.iter().zip(&schedule.segments) {
        let group_hams: Vec<ConcreteHam> = plan
            .groups
            .iter()
            .map(|group| {
                let mut h = ConcreteHam::zero();
                for &i in group {
                    h = h.add(&eval_execution(aais, &executions[i], &globals)?);
                }
                Ok::<_, ExprError>(h)
            })
            .collect::<Result<_, _>>()?;
        segment_groups.push(group_hams);

        // Standalone peels come first, mutually unordered.
        if !plan.standalone.is_empty() {
            let layer: Vec<usize> = plan
                .standalone
                .iter()
                .map(|&i| {
                    blocks.push(Block {
                        executions: vec![executions[i].clone()],
                        duration: plan.duration,
                    });
                    blocks.len() - 1
                })
                .collect();
            push_layer(layer, &mut edges, &mut previous_layer);
        }

        let effective_groups = if scaled { l_max } else { plan.groups.len().max(1) };
        let single_shot = !scaled && plan.groups.len() <= 1;
        if single_shot {
            // Conflict-free remainder (possibly empty: pure system
            // evolution): one block for the whole duration.
            let group = plan.groups.first().cloned().unwrap_or_default();
            blocks.push(Block {
                executions: group.iter().map(|&i| executions[i].clone()).collect(),
                duration: plan.duration,
            });
            push_layer(vec![blocks.len() - 1], &mut edges, &mut previous_layer);
            continue;
        }
        let slice = plan.duration / repetitions as f64;
        for _rep in 0..repetitions {
            let mut layer = Vec::with_capacity(effective_groups);
            for g in 0..effective_groups {
                let group = plan.groups.get(g).cloned().unwrap_or_default();
                blocks.push(Block {
                    executions: group.iter().map(|&i| executions[i].clone()).collect(),
                    duration: slice,
                });
                layer.push(blocks.len() - 1);
            }
            push_layer(layer, &mut edges, &mut previous_layer);
        }
    }

    let sys_concrete = aais.sys_ham.eval(&VarEnv::new(&globals, &[]))?;
    let info = TrotterInfo { l_max, segment_groups, sys_concrete };
    Ok((BlockSchedule { blocks, edges, globals }, info))
}

/// Coefficient-norm upper bound on the Trotter factor: the maximum over
/// segments of `L_d * max_group ||H_group||`, optionally folding the system
/// Hamiltonian into every group.
pub fn lambda_coeff_bound(info: &TrotterInfo, include_sys: bool) -> f64 {
    let mut lambda: f64 = 0.0;
    for groups in &info.segment_groups {
        let l = groups.len().max(1) as f64;
        for group in groups {
            let h = if include_sys { group.add(&info.sys_concrete) } else { group.clone() };
            lambda = lambda.max(l * h.coeff_one_norm());
        }
        if groups.is_empty() && include_sys {
            lambda = lambda.max(info.sys_concrete.coeff_one_norm());
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aais::{build_heisenberg, build_ideal_rydberg, SysScaling};
    use crate::expr::ScalarExpr;
    use crate::ham::ParamHam;
    use crate::pauli::{PauliOp, PauliString};

    fn exec(instr: usize, locals: &[f64]) -> Execution {
        Execution { instr, locals: locals.to_vec() }
    }

    #[test]
    fn trotter_bound_formula_and_limits() {
        let b4 = trotter_error_bound(2.0, 1.0, 1, 4);
        assert!((b4 - 0.5f64.exp()).abs() < 1e-12, "{b4}");
        // Doubling R more than halves the bound; the limit is zero.
        let b8 = trotter_error_bound(2.0, 1.0, 1, 8);
        assert!(b8 < b4 / 2.0);
        assert!(trotter_error_bound(2.0, 1.0, 1, 1_000_000) < 1e-5);
    }

    #[test]
    fn non_conflicting_set_is_one_group() {
        let aais = build_ideal_rydberg(3, 5.42e6);
        let conflicts = conflict_graph(&aais);
        let executions =
            vec![exec(0, &[1.0, 2.0, 0.0]), exec(1, &[1.0, 2.0, 0.0]), exec(2, &[1.0, 2.0, 0.0])];
        let groups = group_executions(&executions, &conflicts);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0], vec![0, 1, 2]);
    }

    #[test]
    fn conflict_clique_needs_one_group_each() {
        // X, Y, Z on the same site share a line: a 3-clique.
        let aais = build_heisenberg(1, &[]);
        let conflicts = conflict_graph(&aais);
        let executions = vec![exec(0, &[1.0]), exec(1, &[1.0]), exec(2, &[1.0])];
        let groups = group_executions(&executions, &conflicts);
        assert_eq!(groups.len(), 3);
    }

    #[test]
    fn path_conflicts_two_color() {
        // Chain conflicts: ZZ(0,1) vs X0/X1, ZZ(1,2) vs X1/X2, ZZ vs ZZ.
        let aais = build_heisenberg(3, &[(0, 1), (1, 2)]);
        let conflicts = conflict_graph(&aais);
        let (zz01, _) = aais.instruction_by_name("eta_0_1_ZZ").unwrap();
        let (zz12, _) = aais.instruction_by_name("eta_1_2_ZZ").unwrap();
        let (x0, _) = aais.instruction_by_name("eta_0_X").unwrap();
        let executions = vec![exec(zz01, &[1.0]), exec(zz12, &[1.0]), exec(x0, &[1.0])];
        let groups = group_executions(&executions, &conflicts);
        // Pairwise conflicts: zz01-zz12 (share site 1), zz01-x0. zz12 and x0
        // are disjoint, so two groups suffice and greedy finds them.
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn commuting_executions_are_peeled() {
        let aais = build_heisenberg(3, &[(0, 1)]);
        let (z0, _) = aais.instruction_by_name("eta_0_Z").unwrap();
        let (zz01, _) = aais.instruction_by_name("eta_0_1_ZZ").unwrap();
        let (x2, _) = aais.instruction_by_name("eta_2_X").unwrap();
        let executions = vec![exec(z0, &[1.0]), exec(zz01, &[1.0]), exec(x2, &[1.0])];
        let (standalone, rest) = split_commuting(&executions, &aais, &[]).unwrap();
        // Everything here commutes pairwise.
        assert_eq!(standalone, vec![0, 1, 2]);
        assert!(rest.is_empty());

        let (x0, _) = aais.instruction_by_name("eta_0_X").unwrap();
        let executions = vec![exec(x0, &[1.0]), exec(z0, &[1.0])];
        let (standalone, rest) = split_commuting(&executions, &aais, &[]).unwrap();
        assert!(standalone.is_empty());
        assert_eq!(rest, vec![0, 1]);
    }

    #[test]
    fn control_side_compensation_peels_from_cross_resonance() {
        // Z rotations on a CR control commute with both cross-resonance
        // terms and with everything on disjoint sites, so they evolve as
        // standalone blocks and need no Trotterization.
        let constants = crate::aais::IbmConstants {
            omega_zx: 1.0,
            omega_zz: 0.05,
            omega_ix: 0.3,
            omega_zi: 0.02,
        };
        let aais = crate::aais::build_ibm_native(3, &[(0, 1), (2, 1)], constants);
        let (cr01, _) = aais.instruction_by_name("eta_0_1_CR").unwrap();
        let (cr21, _) = aais.instruction_by_name("eta_2_1_CR").unwrap();
        let (z0, _) = aais.instruction_by_name("eta_0_Z").unwrap();
        let executions = vec![exec(cr01, &[2.0]), exec(cr21, &[2.0]), exec(z0, &[0.7])];
        let (standalone, rest) = split_commuting(&executions, &aais, &[]).unwrap();
        assert_eq!(standalone, vec![2]);
        assert_eq!(rest, vec![0, 1]);
        // And the two CRs share no line or derived overlap, so they group
        // together: no repetitions needed at all.
        let schedule = InstructionSchedule {
            globals: vec![],
            segments: vec![(executions, 1.0)],
        };
        let (bs, info) = trotterize(&schedule, 4, &aais).unwrap();
        assert_eq!(info.l_max, 1);
        assert_eq!(bs.num_blocks(), 2); // standalone Z + one CR block
    }

    #[test]
    fn conflict_free_schedule_is_a_chain_of_blocks() {
        let aais = build_ideal_rydberg(2, 5.42e6);
        let schedule = InstructionSchedule {
            globals: vec![0.0, 10.52],
            segments: vec![
                (vec![exec(0, &[1.0, 2.0, 0.0]), exec(1, &[1.0, 2.0, 0.0])], 1.0),
                (vec![exec(0, &[0.5, 1.0, 0.0])], 0.5),
            ],
        };
        let (bs, info) = trotterize(&schedule, 4, &aais).unwrap();
        assert_eq!(bs.num_blocks(), 2);
        assert_eq!(bs.edges, vec![(0, 1)]);
        assert_eq!(bs.blocks[0].duration, 1.0);
        assert_eq!(bs.blocks[1].duration, 0.5);
        assert_eq!(info.l_max, 1);
        // No rescaling happened.
        assert_eq!(bs.globals, schedule.globals);
    }

    #[test]
    fn two_conflicting_executions_trotterize() {
        let aais = build_heisenberg(1, &[]);
        let (x, _) = aais.instruction_by_name("eta_0_X").unwrap();
        let (z, _) = aais.instruction_by_name("eta_0_Z").unwrap();
        let schedule = InstructionSchedule {
            globals: vec![],
            segments: vec![(vec![exec(x, &[1.0]), exec(z, &[1.0])], 1.0)],
        };
        let (bs, info) = trotterize(&schedule, 4, &aais).unwrap();
        assert_eq!(bs.num_blocks(), 8);
        assert_eq!(info.l_max, 2);
        for block in &bs.blocks {
            assert!((block.duration - 0.25).abs() < 1e-15);
            assert_eq!(block.executions.len(), 1);
        }
        // Four two-block antichains chained: edges only between consecutive
        // repetitions (0,1) -> (2,3) -> (4,5) -> (6,7).
        assert_eq!(bs.edges.len(), 3 * 4);
        for &(a, b) in &bs.edges {
            assert_eq!(a / 2 + 1, b / 2);
        }
        // Per-execution duration accounting: each instruction evolves for
        // t_j in total.
        let mut per_instr = std::collections::BTreeMap::new();
        for block in &bs.blocks {
            for e in &block.executions {
                *per_instr.entry(e.instr).or_insert(0.0) += block.duration;
            }
        }
        assert!((per_instr[&x] - 1.0).abs() < 1e-12);
        assert!((per_instr[&z] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blocks_are_conflict_free() {
        let aais = build_heisenberg(3, &[(0, 1), (1, 2)]);
        let conflicts = conflict_graph(&aais);
        let names = ["eta_0_1_ZZ", "eta_1_2_ZZ", "eta_0_X", "eta_1_X", "eta_2_X"];
        let executions: Vec<Execution> = names
            .iter()
            .map(|n| exec(aais.instruction_by_name(n).unwrap().0, &[1.0]))
            .collect();
        let schedule =
            InstructionSchedule { globals: vec![], segments: vec![(executions, 1.0)] };
        let (bs, _) = trotterize(&schedule, 4, &aais).unwrap();
        for block in &bs.blocks {
            for (i, a) in block.executions.iter().enumerate() {
                for b in &block.executions[i + 1..] {
                    assert!(!conflicts.conflicts(a.instr, b.instr));
                }
            }
        }
        // Acyclicity: edges always point from earlier to later blocks by
        // construction.
        for &(a, b) in &bs.edges {
            assert!(a < b);
        }
        // Duration accounting: every execution evolves for the full segment
        // duration across its blocks.
        let mut per_instr = std::collections::BTreeMap::new();
        for block in &bs.blocks {
            for e in &block.executions {
                *per_instr.entry(e.instr).or_insert(0.0) += block.duration;
            }
        }
        for (_, total) in per_instr {
            assert!((total - 1.0f64).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_segment_becomes_system_evolution_block() {
        let aais = build_ideal_rydberg(2, 5.42e6);
        let schedule = InstructionSchedule {
            globals: vec![0.0, 10.52],
            segments: vec![(vec![], 0.7)],
        };
        let (bs, _) = trotterize(&schedule, 4, &aais).unwrap();
        assert_eq!(bs.num_blocks(), 1);
        assert!(bs.blocks[0].executions.is_empty());
        assert_eq!(bs.blocks[0].duration, 0.7);
    }

    /// Two conflicting instructions on the same line, with a non-zero system
    /// Hamiltonian, force system scaling.
    fn conflicting_sys_aais(with_scaling: bool) -> Aais {
        let mut aais = build_ideal_rydberg(2, 5.42e6);
        // Put both lasers on one line to force a conflict.
        aais.instructions[1].signal_line = 0;
        if !with_scaling {
            aais.sys_scaling = None;
        }
        aais
    }

    #[test]
    fn system_scaling_rescales_globals_and_pads() {
        let aais = conflicting_sys_aais(true);
        let schedule = InstructionSchedule {
            globals: vec![0.0, 10.52],
            segments: vec![(vec![exec(0, &[1.0, 2.0, 0.0]), exec(1, &[1.0, 2.0, 0.0])], 1.0)],
        };
        let (bs, info) = trotterize(&schedule, 2, &aais).unwrap();
        assert_eq!(info.l_max, 2);
        // Globals rescaled by 2^(1/6) around x0.
        let expect = SysScaling::RydbergDistance.apply(&[0.0, 10.52], 2.0);
        assert_eq!(bs.globals, expect);
        // R repetitions of exactly l_max blocks each.
        assert_eq!(bs.num_blocks(), 4);
        // The rescaled system Hamiltonian is the original divided by 2.
        let original = aais
            .sys_ham
            .eval(&VarEnv::new(&schedule.globals, &[]))
            .unwrap();
        let halved = info.sys_concrete;
        let zz = PauliString::from_factors([(0, PauliOp::Z), (1, PauliOp::Z)]).1;
        assert!((halved.coeff(&zz).re - original.coeff(&zz).re / 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_scaling_rule_is_an_error() {
        let aais = conflicting_sys_aais(false);
        let schedule = InstructionSchedule {
            globals: vec![0.0, 10.52],
            segments: vec![(vec![exec(0, &[1.0, 2.0, 0.0]), exec(1, &[1.0, 2.0, 0.0])], 1.0)],
        };
        let err = trotterize(&schedule, 2, &aais).unwrap_err();
        assert!(matches!(err, TrotterError::ScalingUnavailable { groups: 2, .. }));
        assert!(err.to_string().contains("ideal_rydberg"));
    }

    #[test]
    fn lambda_bound_uses_group_maxima() {
        let info = TrotterInfo {
            l_max: 2,
            segment_groups: vec![vec![
                ConcreteHam::term(
                    PauliString::single(0, PauliOp::X),
                    num_complex::Complex64::new(1.0, 0.0),
                ),
                ConcreteHam::term(
                    PauliString::single(0, PauliOp::Z),
                    num_complex::Complex64::new(1.0, 0.0),
                ),
            ]],
            sys_concrete: ConcreteHam::zero(),
        };
        assert!((lambda_coeff_bound(&info, false) - 2.0).abs() < 1e-12);
        let _ = ParamHam::term(PauliString::single(0, PauliOp::X), ScalarExpr::local(0));
    }
}
