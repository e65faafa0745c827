//! Recursive-descent parser and evaluator for system programs.

use std::collections::BTreeMap;

use super::lexer::{tokenize, TokKind, Token};
use super::{QuantumSystem, SourceError, TimeDependentSegment};
use crate::expr::ScalarExpr;
use crate::ham::{ComplexExpr, HamiltonianMap};
use crate::pauli::{PauliOp, PauliString};

/// Index of the reserved time variable `t` in coefficient expressions.
pub const TIME_VAR: usize = 0;

const RESERVED: &[&str] = &[
    "system", "sites", "evolve", "for", "steps", "under", "exp", "cos", "sin", "t", "n", "I",
    "X", "Y", "Z",
];

/// A scalar or operator-valued subexpression.
enum HVal {
    Scalar(ScalarExpr),
    Ham(HamiltonianMap<ComplexExpr>),
}

impl HVal {
    fn into_ham(self) -> HamiltonianMap<ComplexExpr> {
        match self {
            HVal::Ham(h) => h,
            // A bare scalar denotes that multiple of the identity.
            HVal::Scalar(s) => HamiltonianMap::term(PauliString::identity(), ComplexExpr::real(s)),
        }
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    arrays: BTreeMap<String, (u32, u32)>, // name -> (first site id, length)
    num_sites: u32,
    allow_t: bool,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser, SourceError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            arrays: BTreeMap::new(),
            num_sites: 0,
            allow_t: false,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> SourceError {
        SourceError { message: message.into(), line: tok.line, col: tok.col }
    }

    fn error_here(&self, message: impl Into<String>) -> SourceError {
        let tok = self.peek().clone();
        self.error_at(&tok, message)
    }

    fn expect_kind(&mut self, kind: &TokKind, what: &str) -> Result<Token, SourceError> {
        if std::mem::discriminant(&self.peek().kind) == std::mem::discriminant(kind)
            && (!matches!(kind, TokKind::Ident(_)) || self.peek().kind == *kind)
        {
            Ok(self.advance())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<Token, SourceError> {
        match &self.peek().kind {
            TokKind::Ident(s) if s == word => Ok(self.advance()),
            _ => Err(self.error_here(format!(
                "expected `{word}`, found {}",
                self.peek().describe()
            ))),
        }
    }

    fn peek_keyword(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Ident(s) if s == word)
    }

    fn expect_int(&mut self, what: &str) -> Result<(u64, Token), SourceError> {
        match self.peek().kind {
            TokKind::Int(v) => Ok((v, self.advance())),
            _ => Err(self.error_here(format!("expected {what}, found {}", self.peek().describe()))),
        }
    }

    fn expect_number(&mut self, what: &str) -> Result<(f64, Token), SourceError> {
        match self.peek().kind {
            TokKind::Int(v) => Ok((v as f64, self.advance())),
            TokKind::Num(v) => Ok((v, self.advance())),
            _ => Err(self.error_here(format!("expected {what}, found {}", self.peek().describe()))),
        }
    }

    /// Parses a full `system` program. `disc_override`, when set, replaces
    /// the declared step count of every `steps` clause.
    pub fn parse_system(&mut self, disc_override: Option<u32>) -> Result<QuantumSystem, SourceError> {
        self.expect_keyword("system")?;
        let name = match &self.peek().kind {
            TokKind::Ident(s) => {
                let n = s.clone();
                self.advance();
                n
            }
            _ => return Err(self.error_here("expected system name")),
        };
        self.expect_kind(&TokKind::LBrace, "`{`")?;
        let mut system = QuantumSystem { name, site_arrays: Vec::new(), segments: Vec::new() };
        loop {
            if matches!(self.peek().kind, TokKind::RBrace) {
                self.advance();
                break;
            }
            if self.peek_keyword("sites") {
                self.parse_sites_decl(&mut system)?;
            } else if self.peek_keyword("evolve") {
                self.parse_evolve_decl(&mut system, disc_override)?;
            } else {
                return Err(self.error_here(format!(
                    "expected `sites`, `evolve` or `}}`, found {}",
                    self.peek().describe()
                )));
            }
        }
        if !matches!(self.peek().kind, TokKind::Eof) {
            return Err(self.error_here(format!(
                "unexpected {} after end of system",
                self.peek().describe()
            )));
        }
        Ok(system)
    }

    fn parse_sites_decl(&mut self, system: &mut QuantumSystem) -> Result<(), SourceError> {
        self.expect_keyword("sites")?;
        let name_tok = self.advance();
        let name = match &name_tok.kind {
            TokKind::Ident(s) => s.clone(),
            _ => return Err(self.error_at(&name_tok, "expected site array name")),
        };
        if RESERVED.contains(&name.as_str()) {
            return Err(self.error_at(&name_tok, format!("`{name}` is a reserved word")));
        }
        if self.arrays.contains_key(&name) {
            return Err(self.error_at(&name_tok, format!("site array `{name}` already declared")));
        }
        self.expect_kind(&TokKind::LBracket, "`[`")?;
        let (count, count_tok) = self.expect_int("site count")?;
        if count == 0 {
            return Err(self.error_at(&count_tok, "site array must contain at least one site"));
        }
        self.expect_kind(&TokKind::RBracket, "`]`")?;
        self.expect_kind(&TokKind::Semi, "`;`")?;
        self.arrays.insert(name.clone(), (self.num_sites, count as u32));
        self.num_sites += count as u32;
        system.site_arrays.push((name, count as u32));
        Ok(())
    }

    fn parse_evolve_decl(
        &mut self,
        system: &mut QuantumSystem,
        disc_override: Option<u32>,
    ) -> Result<(), SourceError> {
        let evolve_tok = self.expect_keyword("evolve")?;
        self.expect_keyword("for")?;
        let (duration, dur_tok) = self.expect_number("evolution duration")?;
        if duration <= 0.0 {
            return Err(self.error_at(&dur_tok, "evolution duration must be positive"));
        }
        let steps = if self.peek_keyword("steps") {
            self.advance();
            let (d, steps_tok) = self.expect_int("step count")?;
            if d == 0 {
                return Err(self.error_at(&steps_tok, "step count must be at least 1"));
            }
            Some(disc_override.map(u64::from).unwrap_or(d) as u32)
        } else {
            None
        };
        self.expect_keyword("under")?;
        self.allow_t = steps.is_some();
        let value = self.parse_hexpr()?;
        self.allow_t = false;
        self.expect_kind(&TokKind::Semi, "`;`")?;

        let ham = value.into_ham();
        match steps {
            None => {
                let concrete = ham
                    .eval(&crate::expr::VarEnv::default())
                    .map_err(|e| self.error_at(&evolve_tok, format!("coefficient evaluation failed: {e}")))?;
                if !concrete.is_hermitian() {
                    return Err(self.error_at(
                        &evolve_tok,
                        format!("non-Hermitian segment Hamiltonian: {}", hermiticity_detail(&concrete)),
                    ));
                }
                system.segments.push((concrete.hermitize(), duration));
            }
            Some(d) => {
                let segment = TimeDependentSegment { ham, duration, steps: d };
                let pieces = segment
                    .discretize()
                    .map_err(|e| self.error_at(&evolve_tok, e.to_string()))?;
                for (concrete, tau) in pieces {
                    if !concrete.is_hermitian() {
                        return Err(self.error_at(
                            &evolve_tok,
                            format!(
                                "non-Hermitian segment Hamiltonian after discretization: {}",
                                hermiticity_detail(&concrete)
                            ),
                        ));
                    }
                    system.segments.push((concrete.hermitize(), tau));
                }
            }
        }
        Ok(())
    }

    // hexpr := ["-"] hterm (("+"|"-") hterm)*
    //
    // The leading unary minus is a strict superset of the published grammar,
    // accepted so that pretty-printed programs with a negative first
    // coefficient re-parse.
    fn parse_hexpr(&mut self) -> Result<HVal, SourceError> {
        let mut acc = if matches!(self.peek().kind, TokKind::Minus) {
            self.advance();
            let first = self.parse_hterm()?;
            negate(first)
        } else {
            self.parse_hterm()?
        };
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.advance();
                    let rhs = self.parse_hterm()?;
                    acc = combine_add(acc, rhs, false);
                }
                TokKind::Minus => {
                    self.advance();
                    let rhs = self.parse_hterm()?;
                    acc = combine_add(acc, rhs, true);
                }
                _ => return Ok(acc),
            }
        }
    }

    // hterm := sfactor (("*"|"/") sfactor)*
    fn parse_hterm(&mut self) -> Result<HVal, SourceError> {
        let mut acc = self.parse_sfactor()?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.advance();
                    let rhs = self.parse_sfactor()?;
                    acc = combine_mul(acc, rhs);
                }
                TokKind::Slash => {
                    let slash = self.advance();
                    let rhs = self.parse_sfactor()?;
                    acc = match (acc, rhs) {
                        (HVal::Scalar(a), HVal::Scalar(b)) => {
                            HVal::Scalar(ScalarExpr::div(a, b))
                        }
                        _ => {
                            return Err(self.error_at(
                                &slash,
                                "division requires scalar operands",
                            ))
                        }
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_sfactor(&mut self) -> Result<HVal, SourceError> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokKind::Int(v) => {
                let v = *v as f64;
                self.advance();
                Ok(HVal::Scalar(ScalarExpr::Const(v)))
            }
            TokKind::Num(v) => {
                let v = *v;
                self.advance();
                Ok(HVal::Scalar(ScalarExpr::Const(v)))
            }
            TokKind::LParen => {
                self.advance();
                let inner = self.parse_hexpr()?;
                self.expect_kind(&TokKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokKind::Ident(word) => match word.as_str() {
                "t" => {
                    if !self.allow_t {
                        return Err(self.error_at(
                            &tok,
                            "the time variable `t` is only allowed inside an `evolve ... steps D` clause",
                        ));
                    }
                    self.advance();
                    Ok(HVal::Scalar(ScalarExpr::local(TIME_VAR)))
                }
                "n" => {
                    self.advance();
                    self.expect_kind(&TokKind::LParen, "`(`")?;
                    let site = self.parse_site_ref()?;
                    self.expect_kind(&TokKind::RParen, "`)`")?;
                    // n(q) = (I - Z_q) / 2
                    let mut h = HamiltonianMap::zero();
                    h.insert_add(PauliString::identity(), ComplexExpr::constant(0.5));
                    h.insert_add(
                        PauliString::single(site, PauliOp::Z),
                        ComplexExpr::constant(-0.5),
                    );
                    Ok(HVal::Ham(h))
                }
                "exp" | "cos" | "sin" => {
                    let func = word.clone();
                    self.advance();
                    self.expect_kind(&TokKind::LParen, "`(`")?;
                    let arg = self.parse_hexpr()?;
                    self.expect_kind(&TokKind::RParen, "`)`")?;
                    match arg {
                        HVal::Scalar(s) => Ok(HVal::Scalar(match func.as_str() {
                            "exp" => ScalarExpr::exp(s),
                            "cos" => ScalarExpr::cos(s),
                            _ => ScalarExpr::sin(s),
                        })),
                        HVal::Ham(_) => Err(self.error_at(
                            &tok,
                            format!("`{func}` takes a scalar argument, not an operator"),
                        )),
                    }
                }
                _ => {
                    let site = self.parse_site_ref()?;
                    self.expect_kind(&TokKind::Dot, "`.` after site reference")?;
                    let op_tok = self.advance();
                    let op = match &op_tok.kind {
                        TokKind::Ident(s) if s.len() == 1 => {
                            PauliOp::from_symbol(s.chars().next().unwrap())
                        }
                        _ => None,
                    }
                    .ok_or_else(|| {
                        self.error_at(&op_tok, "expected a site operator `I`, `X`, `Y` or `Z`")
                    })?;
                    Ok(HVal::Ham(HamiltonianMap::term(
                        PauliString::single(site, op),
                        ComplexExpr::constant(1.0),
                    )))
                }
            },
            _ => Err(self.error_here(format!(
                "expected a number, site operator or `(`, found {}",
                tok.describe()
            ))),
        }
    }

    // IDENT "[" INT "]" resolved against the declared arrays.
    fn parse_site_ref(&mut self) -> Result<u32, SourceError> {
        let name_tok = self.advance();
        let name = match &name_tok.kind {
            TokKind::Ident(s) => s.clone(),
            _ => return Err(self.error_at(&name_tok, "expected a site array name")),
        };
        let (base, len) = *self
            .arrays
            .get(&name)
            .ok_or_else(|| self.error_at(&name_tok, format!("unknown site array `{name}`")))?;
        self.expect_kind(&TokKind::LBracket, "`[`")?;
        let (index, index_tok) = self.expect_int("site index")?;
        self.expect_kind(&TokKind::RBracket, "`]`")?;
        if index as u32 >= len {
            return Err(self.error_at(
                &index_tok,
                format!("site index {index} out of range for `{name}[{len}]`"),
            ));
        }
        Ok(base + index as u32)
    }
}

fn negate(v: HVal) -> HVal {
    match v {
        HVal::Scalar(s) => HVal::Scalar(ScalarExpr::neg(s)),
        HVal::Ham(h) => HVal::Ham(h.scale(-1.0)),
    }
}

fn combine_add(a: HVal, b: HVal, subtract: bool) -> HVal {
    match (a, b) {
        (HVal::Scalar(x), HVal::Scalar(y)) => HVal::Scalar(if subtract {
            ScalarExpr::sub(x, y)
        } else {
            ScalarExpr::add(x, y)
        }),
        (a, b) => {
            let x = a.into_ham();
            let y = b.into_ham();
            HVal::Ham(if subtract { x.sub(&y) } else { x.add(&y) })
        }
    }
}

fn combine_mul(a: HVal, b: HVal) -> HVal {
    match (a, b) {
        (HVal::Scalar(x), HVal::Scalar(y)) => HVal::Scalar(ScalarExpr::mul(x, y)),
        (HVal::Scalar(x), HVal::Ham(h)) | (HVal::Ham(h), HVal::Scalar(x)) => {
            HVal::Ham(h.scale_coeff(&ComplexExpr::real(x)))
        }
        (HVal::Ham(x), HVal::Ham(y)) => HVal::Ham(x.mul(&y)),
    }
}

fn hermiticity_detail(h: &crate::ham::ConcreteHam) -> String {
    h.non_hermitian_terms()
        .iter()
        .map(|(p, c)| format!("coefficient {:+.3}{:+.3}i on {}", c.re, c.im, p))
        .collect::<Vec<_>>()
        .join(", ")
}
