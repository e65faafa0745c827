//! Symbolic Pauli-string algebra: the representation everything else is
//! built on.
//!
//! ```bash
//! cargo run --example pauli_algebra
//! ```

use num_complex::Complex64;

use hamc::{ConcreteHam, HamiltonianMap, PauliOp, PauliString};

fn main() {
    // Single-site products close up to a phase in {1, i, -1, -i}.
    let (phase, op) = hamc::pauli_mul(PauliOp::X, PauliOp::Y);
    println!("X * Y = {} * {}", phase.as_complex(), op.symbol());

    // Strings multiply site-wise; disjoint supports commute.
    let (_, xx) = PauliString::from_factors([(1, PauliOp::X), (2, PauliOp::X)]);
    let (_, yy) = PauliString::from_factors([(1, PauliOp::Y), (2, PauliOp::Y)]);
    let (phase, product) = xx.mul(&yy);
    println!("({xx}) * ({yy}) = {} * {product}", phase.as_complex());

    // Hamiltonians are sparse maps from monomials to coefficients.
    let mut ising = ConcreteHam::zero();
    for (a, b) in [(0u32, 1u32), (1, 2)] {
        let (_, zz) = PauliString::from_factors([(a, PauliOp::Z), (b, PauliOp::Z)]);
        ising.insert_add(zz, Complex64::new(1.0, 0.0));
    }
    for site in 0..3 {
        ising.insert_add(PauliString::single(site, PauliOp::X), Complex64::new(1.0, 0.0));
    }
    println!("\ntarget Hamiltonian: {ising}");
    println!("terms: {}, support: {:?}", ising.num_terms(), ising.support());

    // Products accumulate phases per monomial; the coefficient of any
    // monomial reads back in O(log n).
    let squared = ising.mul(&ising);
    println!("H^2 has {} terms", squared.num_terms());
    let (_, zz01) = PauliString::from_factors([(0, PauliOp::Z), (1, PauliOp::Z)]);
    println!("coeff of {zz01} in H: {}", ising.coeff(&zz01));
    println!("coeff of {zz01} in H^2: {}", squared.coeff(&zz01));

    // Hermiticity is a property of the coefficients: X*Y on one site picks
    // up an imaginary phase and fails the check.
    let x = HamiltonianMap::term(PauliString::single(0, PauliOp::X), Complex64::new(1.0, 0.0));
    let y = HamiltonianMap::term(PauliString::single(0, PauliOp::Y), Complex64::new(1.0, 0.0));
    let xy = x.mul(&y);
    println!("\nX0 * Y0 = {xy}  (hermitian: {})", xy.is_hermitian());
}
