//! Conflict resolution by Trotterization: measured error against the bound,
//! and the first-order halving as the repetition count doubles.
//!
//! The instance drives X and Z on one site; they share a signal line, so
//! they can never execute simultaneously and the resolver interleaves them.
//!
//! ```bash
//! cargo run --example trotter_scaling
//! ```

use hamc::aais::build_heisenberg;
use hamc::hml::parse_system;
use hamc::solver::{Execution, InstructionSchedule};
use hamc::trotter::{lambda_coeff_bound, trotter_error_bound, trotterize};
use hamc::verify::{block_schedule_unitary, evolve, phase_aligned_distance};

fn main() {
    let aais = build_heisenberg(1, &[]);
    let (x, _) = aais.instruction_by_name("eta_0_X").unwrap();
    let (z, _) = aais.instruction_by_name("eta_0_Z").unwrap();
    let schedule = InstructionSchedule {
        globals: vec![],
        segments: vec![(
            vec![
                Execution { instr: x, locals: vec![1.0] },
                Execution { instr: z, locals: vec![1.0] },
            ],
            1.0,
        )],
    };
    let target =
        parse_system("system s { sites q[1]; evolve for 1 under q[0].X + q[0].Z; }").unwrap();
    let target_u = evolve(&target.segments, 1).unwrap();

    println!("{:>4} {:>10} {:>12} {:>10}", "R", "blocks", "error", "bound");
    let mut previous = None;
    for r in [4u32, 8, 16, 32] {
        let (blocks, info) = trotterize(&schedule, r, &aais).unwrap();
        let u = block_schedule_unitary(&blocks, &aais).unwrap();
        let error = phase_aligned_distance(&u, &target_u).unwrap();
        let bound = trotter_error_bound(lambda_coeff_bound(&info, false), 1.0, 1, r);
        print!("{r:>4} {:>10} {error:>12.6} {bound:>10.4}", blocks.num_blocks());
        if let Some(prev) = previous {
            print!("   error({})/error({r}) = {:.3}", r / 2, prev / error);
        }
        println!();
        previous = Some(error);
    }
}
