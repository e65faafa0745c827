//! Frontend for the textual Hamiltonian modeling language.
//!
//! Programs declare named site arrays and a sequence of evolution segments:
//!
//! ```text
//! system ising {
//!   sites q[3];
//!   evolve for 1 under q[0].Z*q[1].Z + q[1].Z*q[2].Z + q[0].X + q[1].X + q[2].X;
//! }
//! ```
//!
//! Segment Hamiltonians are algebraic expressions over site operators and
//! scalars. Time dependence is available only through the reserved symbol
//! `t` inside an `evolve ... steps D` clause, which discretizes the segment
//! into `D` piecewise-constant slices sampled at the left endpoint of each
//! interval. Every concrete segment must pass the Hermiticity check.

mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::expr::VarEnv;
use crate::ham::{ComplexExpr, ConcreteHam, HamiltonianMap, HERMITICITY_TOL};

pub use lexer::{tokenize, TokKind, Token};
pub use parser::TIME_VAR;

/// A parse or validation error with a position in the source text.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct SourceError {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

/// A compiled program: sites plus an ordered list of evolution segments,
/// each a Hermitian Hamiltonian with a positive duration in machine time
/// units.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumSystem {
    pub name: String,
    /// Declared site arrays in order; site ids are assigned densely across
    /// arrays in declaration order.
    pub site_arrays: Vec<(String, u32)>,
    pub segments: Vec<(ConcreteHam, f64)>,
}

impl QuantumSystem {
    pub fn new(name: impl Into<String>, site_arrays: Vec<(String, u32)>) -> QuantumSystem {
        QuantumSystem { name: name.into(), site_arrays, segments: Vec::new() }
    }

    pub fn num_sites(&self) -> usize {
        self.site_arrays.iter().map(|(_, n)| *n as usize).sum()
    }

    /// Flat per-site names, e.g. `q[0]`, `q[1]`, `r[0]`.
    pub fn site_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.num_sites());
        for (array, count) in &self.site_arrays {
            for i in 0..*count {
                names.push(format!("{array}[{i}]"));
            }
        }
        names
    }

    /// Validates and appends a segment, canonicalizing away imaginary dust.
    pub fn push_segment(&mut self, ham: ConcreteHam, duration: f64) -> Result<(), SourceError> {
        if duration <= 0.0 {
            return Err(SourceError {
                message: "evolution duration must be positive".into(),
                line: 0,
                col: 0,
            });
        }
        if !ham.is_hermitian() {
            return Err(SourceError {
                message: format!(
                    "non-Hermitian segment Hamiltonian: imaginary parts exceed {HERMITICITY_TOL:e}"
                ),
                line: 0,
                col: 0,
            });
        }
        if let Some(site) = ham.max_site() {
            if site as usize >= self.num_sites() {
                return Err(SourceError {
                    message: format!("segment references undeclared site {site}"),
                    line: 0,
                    col: 0,
                });
            }
        }
        self.segments.push((ham.hermitize(), duration));
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(_, tau)| tau).sum()
    }

    /// Renders the system as program text that re-parses to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("system {} {{\n", self.name));
        for (array, count) in &self.site_arrays {
            out.push_str(&format!("  sites {array}[{count}];\n"));
        }
        let names = self.site_names();
        for (ham, tau) in &self.segments {
            out.push_str(&format!("  evolve for {tau:?} under "));
            out.push_str(&render_ham(ham, &names));
            out.push_str(";\n");
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for QuantumSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn render_ham(ham: &ConcreteHam, site_names: &[String]) -> String {
    if ham.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (string, coeff)) in ham.terms().enumerate() {
        let value = coeff.re;
        let magnitude = value.abs();
        if i == 0 {
            if value < 0.0 {
                out.push('-');
            }
        } else if value < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if string.is_identity() {
            out.push_str(&format!("{magnitude:?}"));
        } else {
            out.push_str(&format!("{magnitude:?}"));
            for (site, op) in string.factors() {
                out.push_str(&format!(
                    "*{}.{}",
                    site_names[site as usize],
                    op.symbol()
                ));
            }
        }
    }
    out
}

/// A segment whose coefficients may reference the reserved time variable.
#[derive(Clone, Debug)]
pub struct TimeDependentSegment {
    /// Coefficients are expressions over the single local variable
    /// [`TIME_VAR`].
    pub ham: HamiltonianMap<ComplexExpr>,
    pub duration: f64,
    pub steps: u32,
}

impl TimeDependentSegment {
    /// Splits the segment into `steps` equal slices, evaluating the
    /// coefficients at the left endpoint `t_d = (d-1) * duration / steps` of
    /// each interval.
    pub fn discretize(&self) -> Result<Vec<(ConcreteHam, f64)>, SourceError> {
        if self.steps == 0 {
            return Err(SourceError {
                message: "step count must be at least 1".into(),
                line: 0,
                col: 0,
            });
        }
        let tau = self.duration / self.steps as f64;
        let mut out = Vec::with_capacity(self.steps as usize);
        for d in 0..self.steps {
            let t_d = d as f64 * tau;
            let locals = [t_d];
            let env = VarEnv::new(&[], &locals);
            let concrete = self.ham.eval(&env).map_err(|e| SourceError {
                message: format!("coefficient evaluation failed at t = {t_d}: {e}"),
                line: 0,
                col: 0,
            })?;
            out.push((concrete, tau));
        }
        Ok(out)
    }
}

/// Parses a program using the step counts declared in the text.
pub fn parse_system(text: &str) -> Result<QuantumSystem, SourceError> {
    parser::Parser::new(text)?.parse_system(None)
}

/// Parses a program, overriding the step count of every `steps` clause.
pub fn parse_system_with_discretization(
    text: &str,
    steps: u32,
) -> Result<QuantumSystem, SourceError> {
    parser::Parser::new(text)?.parse_system(Some(steps))
}

/// Discretization error bound `C1 * D^-1 * M * K * T^2` for a segment with
/// `K` terms, piecewise `M`-Lipschitz coefficients, duration `T` and `D`
/// slices. The constant `C1` is not pinned by theory and is a caller input.
pub fn discretization_error_bound(d: u32, m_lipschitz: f64, k_terms: f64, t_total: f64, c1: f64) -> f64 {
    c1 * m_lipschitz * k_terms * t_total * t_total / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr;
    use crate::pauli::{PauliOp, PauliString};
    use num_complex::Complex64;

    pub const ISING3: &str = "\
system ising3 {
  sites q[3];
  evolve for 1 under q[0].Z*q[1].Z + q[1].Z*q[2].Z + q[0].X + q[1].X + q[2].X;
}
";

    fn zz(a: u32, b: u32) -> PauliString {
        PauliString::from_factors([(a, PauliOp::Z), (b, PauliOp::Z)]).1
    }

    fn x(site: u32) -> PauliString {
        PauliString::single(site, PauliOp::X)
    }

    #[test]
    fn parses_three_site_ising() {
        let system = parse_system(ISING3).unwrap();
        assert_eq!(system.num_sites(), 3);
        assert_eq!(system.segments.len(), 1);
        let (ham, tau) = &system.segments[0];
        assert_eq!(*tau, 1.0);
        assert_eq!(ham.num_terms(), 5);
        for p in [zz(0, 1), zz(1, 2), x(0), x(1), x(2)] {
            assert_eq!(ham.coeff(&p), Complex64::new(1.0, 0.0), "missing {p}");
        }
    }

    #[test]
    fn empty_system_parses() {
        let system = parse_system("system s { sites q[2]; }").unwrap();
        assert_eq!(system.num_sites(), 2);
        assert!(system.segments.is_empty());
    }

    #[test]
    fn non_hermitian_segment_rejected() {
        let err = parse_system(
            "system s { sites q[1]; evolve for 1 under 0.5*(q[0].X*q[0].Y); }",
        )
        .unwrap_err();
        assert!(err.message.contains("non-Hermitian"), "{err}");
        assert!(err.message.contains("Z0"), "{err}");
    }

    #[test]
    fn unknown_site_rejected() {
        let err = parse_system("system s { sites q[2]; evolve for 1 under r[0].X; }").unwrap_err();
        assert!(err.message.contains("unknown site array"), "{err}");
        let err = parse_system("system s { sites q[2]; evolve for 1 under q[5].X; }").unwrap_err();
        assert!(err.message.contains("out of range"), "{err}");
    }

    #[test]
    fn non_positive_duration_rejected() {
        let err = parse_system("system s { sites q[1]; evolve for 0 under q[0].X; }").unwrap_err();
        assert!(err.message.contains("positive"), "{err}");
    }

    #[test]
    fn time_outside_steps_clause_rejected() {
        let err =
            parse_system("system s { sites q[1]; evolve for 1 under t*q[0].X; }").unwrap_err();
        assert!(err.message.contains("steps"), "{err}");
    }

    #[test]
    fn time_ramp_discretizes_left_endpoint() {
        // H(t) = t X on [0, 1) in two slices: the first evaluates at t = 0
        // and prunes to the empty Hamiltonian.
        let system = parse_system(
            "system s { sites q[1]; evolve for 1 steps 2 under t*q[0].X; }",
        )
        .unwrap();
        assert_eq!(system.segments.len(), 2);
        assert!(system.segments[0].0.is_zero());
        assert_eq!(system.segments[0].1, 0.5);
        assert_eq!(system.segments[1].0.coeff(&x(0)), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn constant_segment_with_steps_replicates() {
        let system = parse_system(
            "system s { sites q[1]; evolve for 1 steps 4 under q[0].X; }",
        )
        .unwrap();
        assert_eq!(system.segments.len(), 4);
        for (ham, tau) in &system.segments {
            assert_eq!(*tau, 0.25);
            assert_eq!(ham.coeff(&x(0)), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn ramp_samples_match_left_endpoints() {
        // delta(t) = -1 + 2t over D = 10 samples at -1.0, -0.8, ..., 0.8.
        let mut ham = HamiltonianMap::zero();
        ham.insert_add(
            PauliString::single(0, PauliOp::Z),
            ComplexExpr::real(ScalarExpr::add(
                ScalarExpr::Const(-1.0),
                ScalarExpr::mul(ScalarExpr::Const(2.0), ScalarExpr::local(TIME_VAR)),
            )),
        );
        let segment = TimeDependentSegment { ham, duration: 1.0, steps: 10 };
        let pieces = segment.discretize().unwrap();
        assert_eq!(pieces.len(), 10);
        let z0 = PauliString::single(0, PauliOp::Z);
        for (d, (ham, tau)) in pieces.iter().enumerate() {
            let expect = -1.0 + 2.0 * (d as f64) * 0.1;
            let got = ham.coeff(&z0).re;
            assert!((got - expect).abs() < 1e-12, "slice {d}: {got} vs {expect}");
            assert!((tau - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn discretization_override_applies() {
        let system = parse_system_with_discretization(
            "system s { sites q[1]; evolve for 1 steps 2 under t*q[0].X; }",
            5,
        )
        .unwrap();
        assert_eq!(system.segments.len(), 5);
    }

    #[test]
    fn number_operator_sugar_expands() {
        let system =
            parse_system("system s { sites q[2]; evolve for 1 under 4*n(q[0])*n(q[1]); }").unwrap();
        let (ham, _) = &system.segments[0];
        // 4 n0 n1 = I - Z0 - Z1 + Z0 Z1
        assert_eq!(ham.coeff(&PauliString::identity()), Complex64::new(1.0, 0.0));
        assert_eq!(ham.coeff(&PauliString::single(0, PauliOp::Z)), Complex64::new(-1.0, 0.0));
        assert_eq!(ham.coeff(&zz(0, 1)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pretty_print_round_trips() {
        let original = parse_system(ISING3).unwrap();
        let reparsed = parse_system(&original.to_text()).unwrap();
        assert_eq!(original, reparsed);

        let negative = parse_system(
            "system s { sites q[2]; evolve for 0.25 under (1 - 2*q[0].Z)*0.125 - 3.5e-2*q[1].X; }",
        )
        .unwrap();
        let reparsed = parse_system(&negative.to_text()).unwrap();
        assert_eq!(negative, reparsed);
    }

    #[test]
    fn discretization_error_bound_formula() {
        assert!((discretization_error_bound(10, 1.0, 1.0, 1.0, 1.0) - 0.1).abs() < 1e-15);
        let b1 = discretization_error_bound(10, 2.0, 5.0, 1.0, 1.0);
        assert!((b1 - 1.0).abs() < 1e-15);
        // Doubling D halves the bound.
        assert!((discretization_error_bound(20, 2.0, 5.0, 1.0, 1.0) - b1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_division_allowed_operator_division_rejected() {
        let ok = parse_system("system s { sites q[1]; evolve for 1 under (3/2)*q[0].X; }").unwrap();
        assert_eq!(
            ok.segments[0].0.coeff(&x(0)),
            Complex64::new(1.5, 0.0)
        );
        let err =
            parse_system("system s { sites q[1]; evolve for 1 under q[0].X/2; }").unwrap_err();
        assert!(err.message.contains("scalar"), "{err}");
    }
}
