//! Hamiltonians as sparse maps from Pauli strings to coefficients.
//!
//! [`HamiltonianMap`] is generic over the coefficient kind: concrete complex
//! numbers for program Hamiltonians, [`ScalarExpr`] for parameterized device
//! Hamiltonians, and [`ComplexExpr`] where symbolic coefficients can pick up
//! imaginary phases. Terms whose coefficient prunes to zero are never stored.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::expr::{ExprError, ScalarExpr, VarEnv};
use crate::pauli::{PauliString, Phase};

/// Magnitude below which concrete coefficients are pruned.
pub const CONCRETE_ZERO: f64 = 1e-15;
/// Imaginary-part magnitude tolerated by the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Coefficient algebra required by [`HamiltonianMap`].
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    /// True when the coefficient should be dropped from the sparse map.
    fn prunes_to_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn mul_phase(&self, phase: Phase) -> Self;
    fn scale(&self, factor: f64) -> Self;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn prunes_to_zero(&self) -> bool {
        self.norm() <= CONCRETE_ZERO
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn mul_phase(&self, phase: Phase) -> Self {
        self * phase.as_complex()
    }

    fn scale(&self, factor: f64) -> Self {
        self * factor
    }
}

impl Coeff for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::Const(0.0)
    }

    /// Only the literal constant zero is pruned; expressions that merely
    /// vanish at some points must be kept.
    fn prunes_to_zero(&self) -> bool {
        self.is_const_zero()
    }

    fn add(&self, other: &Self) -> Self {
        ScalarExpr::add(self.clone(), other.clone())
    }

    fn mul(&self, other: &Self) -> Self {
        ScalarExpr::mul(self.clone(), other.clone())
    }

    fn mul_phase(&self, phase: Phase) -> Self {
        // Real-expression coefficients cannot carry an imaginary phase. Use
        // `ComplexExpr` coefficients for products of anticommuting factors on
        // a shared site.
        self.scale(phase.as_real())
    }

    fn scale(&self, factor: f64) -> Self {
        ScalarExpr::mul(ScalarExpr::Const(factor), self.clone())
    }
}

/// A complex-valued symbolic coefficient as a `(re, im)` expression pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexExpr {
    pub re: ScalarExpr,
    pub im: ScalarExpr,
}

impl ComplexExpr {
    pub fn real(re: ScalarExpr) -> ComplexExpr {
        ComplexExpr { re, im: ScalarExpr::Const(0.0) }
    }

    pub fn constant(v: f64) -> ComplexExpr {
        ComplexExpr::real(ScalarExpr::Const(v))
    }

    pub fn eval(&self, env: &VarEnv) -> Result<Complex64, ExprError> {
        Ok(Complex64::new(self.re.eval(env)?, self.im.eval(env)?))
    }
}

impl Coeff for ComplexExpr {
    fn zero() -> Self {
        ComplexExpr::constant(0.0)
    }

    fn prunes_to_zero(&self) -> bool {
        self.re.is_const_zero() && self.im.is_const_zero()
    }

    fn add(&self, other: &Self) -> Self {
        ComplexExpr {
            re: ScalarExpr::add(self.re.clone(), other.re.clone()),
            im: ScalarExpr::add(self.im.clone(), other.im.clone()),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        ComplexExpr {
            re: ScalarExpr::sub(
                ScalarExpr::mul(self.re.clone(), other.re.clone()),
                ScalarExpr::mul(self.im.clone(), other.im.clone()),
            ),
            im: ScalarExpr::add(
                ScalarExpr::mul(self.re.clone(), other.im.clone()),
                ScalarExpr::mul(self.im.clone(), other.re.clone()),
            ),
        }
    }

    fn mul_phase(&self, phase: Phase) -> Self {
        match phase.i_power() {
            0 => self.clone(),
            1 => ComplexExpr { re: ScalarExpr::neg(self.im.clone()), im: self.re.clone() },
            2 => ComplexExpr {
                re: ScalarExpr::neg(self.re.clone()),
                im: ScalarExpr::neg(self.im.clone()),
            },
            _ => ComplexExpr { re: self.im.clone(), im: ScalarExpr::neg(self.re.clone()) },
        }
    }

    fn scale(&self, factor: f64) -> Self {
        ComplexExpr {
            re: ScalarExpr::mul(ScalarExpr::Const(factor), self.re.clone()),
            im: ScalarExpr::mul(ScalarExpr::Const(factor), self.im.clone()),
        }
    }
}

/// Sparse Hamiltonian: map from Pauli-string monomial to coefficient.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct HamiltonianMap<C> {
    terms: BTreeMap<PauliString, C>,
}

/// Hamiltonian with concrete complex coefficients.
pub type ConcreteHam = HamiltonianMap<Complex64>;
/// Hamiltonian with real-expression coefficients (device models).
pub type ParamHam = HamiltonianMap<ScalarExpr>;

impl<C: Coeff> HamiltonianMap<C> {
    pub fn zero() -> Self {
        HamiltonianMap { terms: BTreeMap::new() }
    }

    pub fn term(string: PauliString, coeff: C) -> Self {
        let mut h = Self::zero();
        h.insert_add(string, coeff);
        h
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Monomials in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.keys()
    }

    /// The stored coefficient, or zero when absent.
    pub fn coeff(&self, string: &PauliString) -> C {
        self.terms.get(string).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `coeff * string`, pruning the entry if the sum cancels.
    pub fn insert_add(&mut self, string: PauliString, coeff: C) {
        if coeff.prunes_to_zero() {
            return;
        }
        match self.terms.remove(&string) {
            None => {
                self.terms.insert(string, coeff);
            }
            Some(existing) => {
                let sum = existing.add(&coeff);
                if !sum.prunes_to_zero() {
                    self.terms.insert(string, sum);
                }
            }
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (string, coeff) in other.terms() {
            out.insert_add(string.clone(), coeff.clone());
        }
        out
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero();
        for (string, coeff) in self.terms() {
            out.insert_add(string.clone(), coeff.scale(factor));
        }
        out
    }

    pub fn scale_coeff(&self, factor: &C) -> Self {
        let mut out = Self::zero();
        for (string, coeff) in self.terms() {
            out.insert_add(string.clone(), coeff.mul(factor));
        }
        out
    }

    /// Monomial-wise product: accumulates `phase * c1 * c2` into the product
    /// monomial for every pair of terms.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (p, a) in self.terms() {
            for (q, b) in other.terms() {
                let (phase, r) = p.mul(q);
                out.insert_add(r, a.mul(b).mul_phase(phase));
            }
        }
        out
    }

    /// Union of non-identity sites over all monomials.
    pub fn support(&self) -> Vec<u32> {
        let mut sites: Vec<u32> = self.terms.keys().flat_map(|p| p.support()).collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    pub fn max_site(&self) -> Option<u32> {
        self.terms.keys().filter_map(|p| p.max_site()).max()
    }
}

impl ConcreteHam {
    /// True when every coefficient's imaginary part is within tolerance.
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= HERMITICITY_TOL)
    }

    /// The monomials whose coefficients violate the Hermiticity tolerance.
    pub fn non_hermitian_terms(&self) -> Vec<(PauliString, Complex64)> {
        self.terms
            .iter()
            .filter(|(_, c)| c.im.abs() > HERMITICITY_TOL)
            .map(|(p, c)| (p.clone(), *c))
            .collect()
    }

    /// Drops imaginary dust below the Hermiticity tolerance. Call after a
    /// successful [`is_hermitian`] check to canonicalize coefficients.
    ///
    /// [`is_hermitian`]: ConcreteHam::is_hermitian
    pub fn hermitize(&self) -> ConcreteHam {
        let mut out = ConcreteHam::zero();
        for (string, coeff) in self.terms() {
            out.insert_add(string.clone(), Complex64::new(coeff.re, 0.0));
        }
        out
    }

    /// Sum of coefficient magnitudes (an upper bound on the spectral norm).
    pub fn coeff_one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest coefficient magnitude of `self*other - other*self`.
    pub fn commutator_norm_bound(&self, other: &ConcreteHam) -> f64 {
        let comm = self.mul(other).sub(&other.mul(self));
        comm.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn commutes_with(&self, other: &ConcreteHam, tol: f64) -> bool {
        self.commutator_norm_bound(other) <= tol
    }
}

impl ParamHam {
    /// Evaluates every coefficient under `env`, pruning concrete zeros.
    pub fn eval(&self, env: &VarEnv) -> Result<ConcreteHam, ExprError> {
        let mut out = ConcreteHam::zero();
        for (string, coeff) in self.terms() {
            let v = coeff.eval(env)?;
            out.insert_add(string.clone(), Complex64::new(v, 0.0));
        }
        Ok(out)
    }
}

impl HamiltonianMap<ComplexExpr> {
    pub fn eval(&self, env: &VarEnv) -> Result<ConcreteHam, ExprError> {
        let mut out = ConcreteHam::zero();
        for (string, coeff) in self.terms() {
            out.insert_add(string.clone(), coeff.eval(env)?);
        }
        Ok(out)
    }
}

impl fmt::Display for ConcreteHam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (string, coeff)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if coeff.im.abs() <= HERMITICITY_TOL {
                write!(f, "{:?}*{}", coeff.re, string)?;
            } else {
                write!(f, "({:?}{:+?}i)*{}", coeff.re, coeff.im, string)?;
            }
        }
        Ok(())
    }
}
