//! Single-site Pauli operators and sparse Pauli strings.
//!
//! A [`PauliString`] is a product of single-site Pauli operators stored as a
//! sparse map from site id to operator; identity factors are never stored, so
//! the empty string is the identity monomial. Products are closed up to a
//! phase in `{1, i, -1, -i}`, tracked by [`Phase`].

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// One of the four single-site Pauli operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn symbol(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<PauliOp> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }
}

/// A power of the imaginary unit, `i^k` with `k` in `0..4`.
///
/// This is the full set of phases that can arise from Pauli products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    /// Exponent `k` such that the phase equals `i^k`.
    pub fn i_power(self) -> u8 {
        self.0
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    /// True when the phase is `1` or `-1`.
    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn as_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// The real value `1.0` or `-1.0`; panics on imaginary phases.
    pub fn as_real(self) -> f64 {
        match self.0 {
            0 => 1.0,
            2 => -1.0,
            _ => panic!("phase i^{} is not real", self.0),
        }
    }
}

/// Product table for single-site Paulis: `a * b = phase * c`.
pub fn pauli_mul(a: PauliOp, b: PauliOp) -> (Phase, PauliOp) {
    use PauliOp::*;
    match (a, b) {
        (I, p) => (Phase::ONE, p),
        (p, I) => (Phase::ONE, p),
        (X, X) | (Y, Y) | (Z, Z) => (Phase::ONE, I),
        (X, Y) => (Phase::I, Z),
        (Y, X) => (Phase::MINUS_I, Z),
        (Y, Z) => (Phase::I, X),
        (Z, Y) => (Phase::MINUS_I, X),
        (Z, X) => (Phase::I, Y),
        (X, Z) => (Phase::MINUS_I, Y),
    }
}

/// A sparse product of single-site Pauli operators.
///
/// Site ids are dense non-negative integers. The map never stores identity
/// factors, so structural equality is canonical and the empty map denotes the
/// identity monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PauliString {
    factors: BTreeMap<u32, PauliOp>,
}

impl PauliString {
    /// The identity monomial.
    pub fn identity() -> PauliString {
        PauliString::default()
    }

    /// A single-site operator; `op = I` yields the identity string.
    pub fn single(site: u32, op: PauliOp) -> PauliString {
        let mut factors = BTreeMap::new();
        if op != PauliOp::I {
            factors.insert(site, op);
        }
        PauliString { factors }
    }

    /// Builds a string from `(site, op)` pairs. Later pairs on the same site
    /// are multiplied in, so the returned phase accounts for collisions.
    pub fn from_factors<I: IntoIterator<Item = (u32, PauliOp)>>(iter: I) -> (Phase, PauliString) {
        let mut s = PauliString::identity();
        let mut phase = Phase::ONE;
        for (site, op) in iter {
            let (p, t) = s.mul(&PauliString::single(site, op));
            phase = phase.mul(p);
            s = t;
        }
        (phase, s)
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// The operator at `site` (identity when absent).
    pub fn op_at(&self, site: u32) -> PauliOp {
        self.factors.get(&site).copied().unwrap_or(PauliOp::I)
    }

    /// Non-identity factors in ascending site order.
    pub fn factors(&self) -> impl Iterator<Item = (u32, PauliOp)> + '_ {
        self.factors.iter().map(|(&s, &op)| (s, op))
    }

    /// Sites on which the string acts non-trivially.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.keys().copied()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn max_site(&self) -> Option<u32> {
        self.factors.keys().next_back().copied()
    }

    /// Site-wise product with phase tracking; identity factors are pruned.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut phase = Phase::ONE;
        let mut factors = self.factors.clone();
        for (&site, &b) in &other.factors {
            match factors.remove(&site) {
                None => {
                    factors.insert(site, b);
                }
                Some(a) => {
                    let (p, c) = pauli_mul(a, b);
                    phase = phase.mul(p);
                    if c != PauliOp::I {
                        factors.insert(site, c);
                    }
                }
            }
        }
        (phase, PauliString { factors })
    }

    /// Re-indexes every site through `f`. Returns `None` when `f` maps two
    /// support sites to the same image.
    pub fn map_sites<F: Fn(u32) -> Option<u32>>(&self, f: F) -> Option<PauliString> {
        let mut factors = BTreeMap::new();
        for (&site, &op) in &self.factors {
            let image = f(site)?;
            if factors.insert(image, op).is_some() {
                return None;
            }
        }
        Some(PauliString { factors })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        for (site, op) in self.factors() {
            write!(f, "{}{}", op.symbol(), site)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_products() {
        use PauliOp::*;
        assert_eq!(pauli_mul(X, X), (Phase::ONE, I));
        assert_eq!(pauli_mul(X, Y), (Phase::I, Z));
        assert_eq!(pauli_mul(Y, X), (Phase::MINUS_I, Z));
        assert_eq!(pauli_mul(Z, Y), (Phase::MINUS_I, X));
        assert_eq!(pauli_mul(I, Z), (Phase::ONE, Z));
    }

    #[test]
    fn phase_arithmetic() {
        assert_eq!(Phase::I.mul(Phase::I), Phase::MINUS_ONE);
        assert_eq!(Phase::MINUS_I.mul(Phase::I), Phase::ONE);
        assert_eq!(Phase::I.as_complex(), Complex64::new(0.0, 1.0));
        assert!(Phase::MINUS_ONE.is_real());
        assert!(!Phase::I.is_real());
    }

    #[test]
    fn string_product_xy_pairs() {
        // (X1 X2) * (Y1 Y2) = -1 * (Z1 Z2)
        let (_, a) = PauliString::from_factors([(1, PauliOp::X), (2, PauliOp::X)]);
        let (_, b) = PauliString::from_factors([(1, PauliOp::Y), (2, PauliOp::Y)]);
        let (phase, c) = a.mul(&b);
        assert_eq!(phase, Phase::MINUS_ONE);
        let (_, zz) = PauliString::from_factors([(1, PauliOp::Z), (2, PauliOp::Z)]);
        assert_eq!(c, zz);
    }

    #[test]
    fn identity_is_neutral() {
        let (_, p) = PauliString::from_factors([(0, PauliOp::X), (3, PauliOp::Z)]);
        let (phase, q) = PauliString::identity().mul(&p);
        assert_eq!(phase, Phase::ONE);
        assert_eq!(q, p);
    }

    #[test]
    fn disjoint_supports_commute() {
        let (_, a) = PauliString::from_factors([(1, PauliOp::X), (3, PauliOp::Z)]);
        let b = PauliString::single(2, PauliOp::Y);
        let (phase, c) = a.mul(&b);
        assert_eq!(phase, Phase::ONE);
        let (_, expect) =
            PauliString::from_factors([(1, PauliOp::X), (2, PauliOp::Y), (3, PauliOp::Z)]);
        assert_eq!(c, expect);
        let (phase_rev, c_rev) = b.mul(&a);
        assert_eq!(phase_rev, Phase::ONE);
        assert_eq!(c_rev, expect);
    }

    #[test]
    fn display_is_compact() {
        let (_, p) = PauliString::from_factors([(2, PauliOp::Z), (0, PauliOp::X)]);
        assert_eq!(p.to_string(), "X0Z2");
        assert_eq!(PauliString::identity().to_string(), "I");
    }
}
