//! Signal-line scheduling: block DAGs to concretely timed executions.
//!
//! Blocks are visited in a deterministic topological order (lowest index
//! first). A block starts at the earliest instant that satisfies all DAG
//! predecessors and the first-arrive-first-serve availability of every
//! signal line it uses; all of its executions start together and the block
//! ends when its slowest execution's implementation finishes.

use std::collections::BTreeMap;

use crate::aais::Aais;
use crate::trotter::BlockSchedule;

/// One execution pinned to wall-clock seconds on its signal line.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedExecution {
    pub instruction: String,
    /// Named local-variable values in the instruction's declaration order.
    pub params: Vec<(String, f64)>,
    pub start_s: f64,
    pub end_s: f64,
    /// Machine-time duration the execution implements.
    pub nominal_duration: f64,
    /// Position of the owning block in the execution order; executions with
    /// equal `block` ran simultaneously. Zero-duration (virtual)
    /// instructions make `end_s == start_s` legitimate.
    pub block: usize,
}

/// Nominal duration of each block in execution order, including blocks with
/// no executions (pure system evolution), which occupy no signal line.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTiming {
    pub block: usize,
    pub duration: f64,
}

/// Per-line timed executions plus the data needed to reconstruct the block
/// structure.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalLineSchedule {
    pub aais_name: String,
    pub global_names: Vec<String>,
    pub globals: Vec<f64>,
    pub lines: BTreeMap<usize, Vec<TimedExecution>>,
    pub blocks: Vec<BlockTiming>,
    pub total_duration_s: f64,
}

impl SignalLineSchedule {
    pub fn num_executions(&self) -> usize {
        self.lines.values().map(|v| v.len()).sum()
    }
}

/// Deterministic topological order, lowest block index first.
pub fn topological_order(bs: &BlockSchedule) -> Vec<usize> {
    let n = bs.blocks.len();
    let mut indegree = vec![0usize; n];
    let mut succs = vec![Vec::new(); n];
    for &(a, b) in &bs.edges {
        indegree[b] += 1;
        succs[a].push(b);
    }
    let mut ready = std::collections::BinaryHeap::new();
    for (i, &d) in indegree.iter().enumerate() {
        if d == 0 {
            ready.push(std::cmp::Reverse(i));
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        order.push(i);
        for &s in &succs[i] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(std::cmp::Reverse(s));
            }
        }
    }
    assert_eq!(order.len(), n, "block schedule must be acyclic");
    order
}

/// Linearizes a block schedule onto signal lines using the instruction
/// duration models of the device.
pub fn schedule(bs: &BlockSchedule, aais: &Aais) -> SignalLineSchedule {
    let order = topological_order(bs);
    let n = bs.blocks.len();
    let mut block_end = vec![0.0f64; n];
    let preds = bs.predecessors();
    let mut line_free: BTreeMap<usize, f64> = BTreeMap::new();
    let mut lines: BTreeMap<usize, Vec<TimedExecution>> = BTreeMap::new();
    let mut blocks = Vec::with_capacity(n);
    let mut total = 0.0f64;

    for (position, &b) in order.iter().enumerate() {
        let block = &bs.blocks[b];
        let used_lines: Vec<usize> = {
            let mut v: Vec<usize> = block
                .executions
                .iter()
                .map(|e| aais.instruction(e.instr).signal_line)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut start = preds[b].iter().map(|&p| block_end[p]).fold(0.0f64, f64::max);
        for line in &used_lines {
            start = start.max(line_free.get(line).copied().unwrap_or(0.0));
        }
        let mut longest = 0.0f64;
        for execution in &block.executions {
            let instruction = aais.instruction(execution.instr);
            let impl_duration = instruction.duration.seconds(block.duration);
            longest = longest.max(impl_duration);
            let timed = TimedExecution {
                instruction: instruction.name.clone(),
                params: instruction
                    .local_names
                    .iter()
                    .cloned()
                    .zip(execution.locals.iter().copied())
                    .collect(),
                start_s: start,
                end_s: start + impl_duration,
                nominal_duration: block.duration,
                block: position,
            };
            total = total.max(timed.end_s);
            lines.entry(instruction.signal_line).or_default().push(timed);
        }
        let end = start + longest;
        block_end[b] = end;
        for line in used_lines {
            line_free.insert(line, end);
        }
        blocks.push(BlockTiming { block: position, duration: block.duration });
    }

    SignalLineSchedule {
        aais_name: aais.name.clone(),
        global_names: aais.global_names.clone(),
        globals: bs.globals.clone(),
        lines,
        blocks,
        total_duration_s: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aais::{build_heisenberg, build_ideal_rydberg};
    use crate::solver::Execution;
    use crate::trotter::Block;

    fn exec(instr: usize) -> Execution {
        Execution { instr, locals: vec![1.0, 2.0, 0.0] }
    }

    fn rydberg_block(instrs: &[usize], duration: f64) -> Block {
        Block { executions: instrs.iter().map(|&i| exec(i)).collect(), duration }
    }

    #[test]
    fn chain_of_blocks_serializes() {
        let mut aais = build_ideal_rydberg(2, 5.42e6);
        for instruction in aais.instructions.iter_mut() {
            instruction.duration.base_s = 1e-6;
        }
        let bs = BlockSchedule {
            blocks: vec![rydberg_block(&[0], 1.0), rydberg_block(&[0], 1.0)],
            edges: vec![(0, 1)],
            globals: vec![0.0, 10.52],
        };
        let out = schedule(&bs, &aais);
        let line0 = &out.lines[&0];
        assert_eq!(line0.len(), 2);
        assert_eq!(line0[0].start_s, 0.0);
        assert!((line0[1].start_s - 1e-6).abs() < 1e-18);
        assert!((out.total_duration_s - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn parallel_blocks_on_disjoint_lines_share_start() {
        let aais = build_ideal_rydberg(3, 5.42e6);
        let bs = BlockSchedule {
            blocks: vec![
                rydberg_block(&[0], 1.0),
                rydberg_block(&[1], 1.0),
                rydberg_block(&[2], 1.0),
            ],
            edges: vec![(0, 1), (0, 2)],
            globals: vec![0.0, 10.52, 21.04],
        };
        let out = schedule(&bs, &aais);
        let start1 = out.lines[&1][0].start_s;
        let start2 = out.lines[&2][0].start_s;
        assert_eq!(start1, start2);
        let end0 = out.lines[&0][0].end_s;
        assert_eq!(start1, end0);
    }

    #[test]
    fn parallel_blocks_sharing_a_line_serialize_in_index_order() {
        let aais = build_ideal_rydberg(2, 5.42e6);
        // Two DAG-parallel blocks that both use line 0.
        let bs = BlockSchedule {
            blocks: vec![rydberg_block(&[0], 1.0), rydberg_block(&[0], 2.0)],
            edges: vec![],
            globals: vec![0.0, 10.52],
        };
        let out = schedule(&bs, &aais);
        let line0 = &out.lines[&0];
        assert_eq!(line0.len(), 2);
        assert_eq!(line0[0].block, 0);
        assert_eq!(line0[1].block, 1);
        assert_eq!(line0[1].start_s, line0[0].end_s);
        let sum = (line0[0].end_s - line0[0].start_s) + (line0[1].end_s - line0[1].start_s);
        assert!((out.total_duration_s - sum).abs() < 1e-18);
    }

    #[test]
    fn dag_respect_and_disjointness() {
        let aais = build_heisenberg(3, &[(0, 1), (1, 2)]);
        let (zz01, _) = aais.instruction_by_name("eta_0_1_ZZ").unwrap();
        let (x2, _) = aais.instruction_by_name("eta_2_X").unwrap();
        let block = |instr: usize, duration: f64| Block {
            executions: vec![Execution { instr, locals: vec![1.0] }],
            duration,
        };
        let bs = BlockSchedule {
            blocks: vec![block(zz01, 0.5), block(x2, 0.25), block(zz01, 0.5)],
            edges: vec![(0, 2), (1, 2)],
            globals: vec![],
        };
        let out = schedule(&bs, &aais);
        for executions in out.lines.values() {
            for pair in executions.windows(2) {
                assert!(pair[1].start_s >= pair[0].end_s);
            }
        }
        // Block 2 starts after both predecessors.
        let line_pair = &out.lines[&3];
        assert_eq!(line_pair.len(), 2);
        assert!(line_pair[1].start_s >= line_pair[0].end_s);
    }

    #[test]
    fn params_carry_local_names() {
        let aais = build_ideal_rydberg(1, 5.42e6);
        let bs = BlockSchedule {
            blocks: vec![rydberg_block(&[0], 1.0)],
            edges: vec![],
            globals: vec![0.0],
        };
        let out = schedule(&bs, &aais);
        let execution = &out.lines[&0][0];
        assert_eq!(execution.instruction, "eta_0");
        assert_eq!(
            execution.params,
            vec![("delta".into(), 1.0), ("omega".into(), 2.0), ("phi".into(), 0.0)]
        );
        assert_eq!(execution.nominal_duration, 1.0);
    }

    #[test]
    fn empty_blocks_keep_timing_but_use_no_lines() {
        let aais = build_ideal_rydberg(2, 5.42e6);
        let bs = BlockSchedule {
            blocks: vec![
                Block { executions: vec![], duration: 1.0 },
                rydberg_block(&[0], 1.0),
            ],
            edges: vec![(0, 1)],
            globals: vec![0.0, 10.52],
        };
        let out = schedule(&bs, &aais);
        assert_eq!(out.blocks.len(), 2);
        assert_eq!(out.num_executions(), 1);
        // The empty block has zero wall time, so its successor starts at 0.
        assert_eq!(out.lines[&0][0].start_s, 0.0);
        assert_eq!(out.lines[&0][0].block, 1);
    }

    #[test]
    fn deterministic_output() {
        let aais = build_heisenberg(4, &[(0, 1), (1, 2), (2, 3)]);
        let block = |instr: usize| Block {
            executions: vec![Execution { instr, locals: vec![0.3] }],
            duration: 0.5,
        };
        let bs = BlockSchedule {
            blocks: (0..8).map(|i| block(i % aais.instructions.len())).collect(),
            edges: vec![(0, 3), (1, 3), (2, 5), (3, 6), (4, 6), (5, 7)],
            globals: vec![],
        };
        let a = schedule(&bs, &aais);
        let b = schedule(&bs, &aais);
        assert_eq!(a, b);
    }
}
