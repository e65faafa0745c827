//! Left-endpoint discretization of a time-dependent coefficient and the 1/D
//! refinement of the induced evolution error.
//!
//! ```bash
//! cargo run --example discretize_ramp
//! ```

use hamc::hml::{discretization_error_bound, parse_system_with_discretization};
use hamc::verify::{evolve, phase_aligned_distance};

const RAMP: &str = "\
system ramp2 {
  sites q[2];
  evolve for 1 steps 10 under (1 - 2*t)*(n(q[0]) + n(q[1])) + 0.5*(q[0].X + q[1].X) + 4*(n(q[0])*n(q[1]));
}
";

fn main() {
    // The declared step count discretizes the ramp at left endpoints.
    let system = parse_system_with_discretization(RAMP, 5).unwrap();
    println!("D = 5 slices of the detuning ramp:");
    let z0 = hamc::PauliString::single(0, hamc::PauliOp::Z);
    for (d, (ham, tau)) in system.segments.iter().enumerate() {
        println!("  slice {d}: tau = {tau:.2}, coeff(Z0) = {:+.3}", ham.coeff(&z0).re);
    }

    // Refinement: distance to a finely-sliced reference falls as 1/D.
    let reference = parse_system_with_discretization(RAMP, 400).unwrap();
    let reference_u = evolve(&reference.segments, 2).unwrap();
    println!("\n{:>5} {:>12} {:>14}", "D", "distance", "bound (C1=1)");
    for d in [5u32, 10, 20, 40, 80] {
        let coarse = parse_system_with_discretization(RAMP, d).unwrap();
        let u = evolve(&coarse.segments, 2).unwrap();
        let distance = phase_aligned_distance(&u, &reference_u).unwrap();
        // Ramp slope 2 per time unit on each of the K detuning terms.
        let bound = discretization_error_bound(d, 2.0, 2.0, 1.0, 1.0);
        println!("{d:>5} {distance:>12.6} {bound:>14.6}");
    }
}
