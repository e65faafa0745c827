//! The built-in device models and their scheduling decorations.
//!
//! ```bash
//! cargo run --example machines
//! ```

use hamc::aais::{
    build_global_rydberg, build_heisenberg, build_ibm_native, build_ideal_rydberg,
    build_two_pauli, conflict_graph, load_machine_config, IbmConstants, Nativeness,
};

fn main() {
    let line3: Vec<(usize, usize)> = vec![(0, 1), (1, 2)];
    let constants = IbmConstants { omega_zx: 1.0, omega_zz: 0.05, omega_ix: 0.3, omega_zi: 0.02 };
    let machines = vec![
        build_ideal_rydberg(3, 5.42e6),
        build_global_rydberg(3, 5.42e6),
        build_heisenberg(3, &line3),
        build_two_pauli(3, &line3),
        build_ibm_native(3, &line3, constants),
    ];
    for aais in &machines {
        let derived =
            aais.instructions.iter().filter(|i| i.nativeness == Nativeness::Derived).count();
        println!(
            "{:14} {:2} sites, {:2} instructions ({derived} derived), {} signal lines, {} globals, system terms: {}",
            aais.name,
            aais.num_sites,
            aais.instructions.len(),
            aais.signal_lines().len(),
            aais.num_globals,
            aais.sys_ham.num_terms(),
        );
    }

    // Conflicts: same signal line, or a derived instruction overlapping
    // another instruction's support.
    let ibm = &machines[4];
    let graph = conflict_graph(ibm);
    let queries =
        [("eta_0_1_CR", "eta_2_1_CR"), ("eta_0_1_CR", "eta_1_X"), ("eta_0_1_CR", "eta_1_Z")];
    println!();
    for (a, b) in queries {
        let (ia, _) = ibm.instruction_by_name(a).unwrap();
        let (ib, _) = ibm.instruction_by_name(b).unwrap();
        println!(
            "{a} vs {b}: {}",
            if graph.conflicts(ia, ib) { "conflict" } else { "simultaneous ok" }
        );
    }

    // Machines also load from JSON descriptions.
    let config = r#"{
        "aais": "heisenberg",
        "num_sites": 4,
        "connectivity": [[0,1],[1,2],[2,3]],
        "durations": {"eta_2site": {"base": 1.3e-7, "slope": 2.0e-7}}
    }"#;
    let loaded = load_machine_config(config).unwrap();
    let pair = loaded.instructions.iter().find(|i| i.support().len() == 2).unwrap();
    println!(
        "\nloaded `{}` from JSON; a pair execution of nominal duration 1.0 takes {:.1} ns",
        loaded.name,
        pair.duration.seconds(1.0) * 1e9
    );
}
