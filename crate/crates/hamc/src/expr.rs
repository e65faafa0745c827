//! Parameterized scalar expressions.
//!
//! [`ScalarExpr`] is the coefficient language shared by device models and the
//! equation system: real constants, global/local variable references, the
//! four arithmetic operators and `exp`/`cos`/`sin`. Expressions evaluate
//! under a [`VarEnv`] and differentiate symbolically, staying inside the same
//! grammar so analytic Jacobians come for free.

use std::fmt;

use thiserror::Error;

/// Which variable vector a reference indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Global,
    Local,
}

/// Evaluation environment: one vector per variable kind.
#[derive(Clone, Copy, Debug, Default)]
pub struct VarEnv<'a> {
    pub globals: &'a [f64],
    pub locals: &'a [f64],
}

impl<'a> VarEnv<'a> {
    pub fn new(globals: &'a [f64], locals: &'a [f64]) -> Self {
        VarEnv { globals, locals }
    }

    fn get(&self, kind: VarKind, index: usize) -> Option<f64> {
        match kind {
            VarKind::Global => self.globals.get(index).copied(),
            VarKind::Local => self.locals.get(index).copied(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unbound {kind:?} variable v{index}")]
    UnboundVariable { kind: VarKind, index: usize },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

/// Expression tree over real constants, variable references, `+ - * /` and
/// the unary functions `exp`, `cos`, `sin`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(VarKind, usize),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Exp(Box<ScalarExpr>),
    Cos(Box<ScalarExpr>),
    Sin(Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn constant(v: f64) -> ScalarExpr {
        ScalarExpr::Const(v)
    }

    pub fn global(index: usize) -> ScalarExpr {
        ScalarExpr::Var(VarKind::Global, index)
    }

    pub fn local(index: usize) -> ScalarExpr {
        ScalarExpr::Var(VarKind::Local, index)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, ScalarExpr::Const(v) if *v == 0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            ScalarExpr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Sum with constant folding and zero elimination.
    #[allow(clippy::should_implement_trait)]
    pub fn add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        match (a, b) {
            (ScalarExpr::Const(x), ScalarExpr::Const(y)) => ScalarExpr::Const(x + y),
            (a, b) if a.is_const_zero() => b,
            (a, b) if b.is_const_zero() => a,
            (a, b) => ScalarExpr::Add(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        match (a, b) {
            (ScalarExpr::Const(x), ScalarExpr::Const(y)) => ScalarExpr::Const(x - y),
            (a, b) if b.is_const_zero() => a,
            (a, b) => ScalarExpr::Sub(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::redundant_guards, clippy::should_implement_trait)]
    pub fn mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        match (a, b) {
            (ScalarExpr::Const(x), ScalarExpr::Const(y)) => ScalarExpr::Const(x * y),
            (a, _) if a.is_const_zero() => ScalarExpr::Const(0.0),
            (_, b) if b.is_const_zero() => ScalarExpr::Const(0.0),
            (ScalarExpr::Const(x), b) if x == 1.0 => b,
            (a, ScalarExpr::Const(y)) if y == 1.0 => a,
            (a, b) => ScalarExpr::Mul(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::redundant_guards, clippy::should_implement_trait)]
    pub fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        match (a, b) {
            (a, _) if a.is_const_zero() => ScalarExpr::Const(0.0),
            (a, ScalarExpr::Const(y)) if y == 1.0 => a,
            (ScalarExpr::Const(x), ScalarExpr::Const(y)) if y != 0.0 => ScalarExpr::Const(x / y),
            (a, b) => ScalarExpr::Div(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(ScalarExpr::Const(-1.0), a)
    }

    pub fn exp(a: ScalarExpr) -> ScalarExpr {
        match a {
            ScalarExpr::Const(x) => ScalarExpr::Const(x.exp()),
            a => ScalarExpr::Exp(Box::new(a)),
        }
    }

    pub fn cos(a: ScalarExpr) -> ScalarExpr {
        match a {
            ScalarExpr::Const(x) => ScalarExpr::Const(x.cos()),
            a => ScalarExpr::Cos(Box::new(a)),
        }
    }

    pub fn sin(a: ScalarExpr) -> ScalarExpr {
        match a {
            ScalarExpr::Const(x) => ScalarExpr::Const(x.sin()),
            a => ScalarExpr::Sin(Box::new(a)),
        }
    }

    /// Integer power by repeated squaring, staying in the `Mul` grammar.
    pub fn powi(a: ScalarExpr, n: u32) -> ScalarExpr {
        match n {
            0 => ScalarExpr::Const(1.0),
            1 => a,
            n if n % 2 == 0 => {
                let half = ScalarExpr::powi(a, n / 2);
                ScalarExpr::mul(half.clone(), half)
            }
            n => {
                let rest = ScalarExpr::powi(a.clone(), n - 1);
                ScalarExpr::mul(a, rest)
            }
        }
    }

    /// Evaluates under `env`. Errors on out-of-bounds variables, division by
    /// an exactly-zero denominator, and non-finite results.
    pub fn eval(&self, env: &VarEnv) -> Result<f64, ExprError> {
        let v = self.eval_inner(env, 0.0)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    /// Evaluates with a sign-preserving clamp `|denominator| >= min_den` on
    /// every division. The numerical solver iterates under this guard so that
    /// near-singular configurations produce large-but-finite residuals; final
    /// candidate solutions are re-validated with the unguarded [`eval`].
    ///
    /// [`eval`]: ScalarExpr::eval
    pub fn eval_guarded(&self, env: &VarEnv, min_den: f64) -> Result<f64, ExprError> {
        let v = self.eval_inner(env, min_den)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    fn eval_inner(&self, env: &VarEnv, min_den: f64) -> Result<f64, ExprError> {
        Ok(match self {
            ScalarExpr::Const(v) => *v,
            ScalarExpr::Var(kind, index) => env
                .get(*kind, *index)
                .ok_or(ExprError::UnboundVariable { kind: *kind, index: *index })?,
            ScalarExpr::Add(a, b) => a.eval_inner(env, min_den)? + b.eval_inner(env, min_den)?,
            ScalarExpr::Sub(a, b) => a.eval_inner(env, min_den)? - b.eval_inner(env, min_den)?,
            ScalarExpr::Mul(a, b) => a.eval_inner(env, min_den)? * b.eval_inner(env, min_den)?,
            ScalarExpr::Div(a, b) => {
                let num = a.eval_inner(env, min_den)?;
                let mut den = b.eval_inner(env, min_den)?;
                if den.abs() < min_den {
                    den = min_den * if den < 0.0 { -1.0 } else { 1.0 };
                }
                if den == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                num / den
            }
            ScalarExpr::Exp(a) => a.eval_inner(env, min_den)?.exp(),
            ScalarExpr::Cos(a) => a.eval_inner(env, min_den)?.cos(),
            ScalarExpr::Sin(a) => a.eval_inner(env, min_den)?.sin(),
        })
    }

    /// Exact symbolic derivative with respect to the given variable.
    pub fn diff(&self, kind: VarKind, index: usize) -> ScalarExpr {
        match self {
            ScalarExpr::Const(_) => ScalarExpr::Const(0.0),
            ScalarExpr::Var(k, i) => {
                if *k == kind && *i == index {
                    ScalarExpr::Const(1.0)
                } else {
                    ScalarExpr::Const(0.0)
                }
            }
            ScalarExpr::Add(a, b) => ScalarExpr::add(a.diff(kind, index), b.diff(kind, index)),
            ScalarExpr::Sub(a, b) => ScalarExpr::sub(a.diff(kind, index), b.diff(kind, index)),
            ScalarExpr::Mul(a, b) => ScalarExpr::add(
                ScalarExpr::mul(a.diff(kind, index), (**b).clone()),
                ScalarExpr::mul((**a).clone(), b.diff(kind, index)),
            ),
            ScalarExpr::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = ScalarExpr::sub(
                    ScalarExpr::mul(a.diff(kind, index), (**b).clone()),
                    ScalarExpr::mul((**a).clone(), b.diff(kind, index)),
                );
                ScalarExpr::div(num, ScalarExpr::mul((**b).clone(), (**b).clone()))
            }
            ScalarExpr::Exp(a) => {
                ScalarExpr::mul(ScalarExpr::exp((**a).clone()), a.diff(kind, index))
            }
            ScalarExpr::Cos(a) => ScalarExpr::mul(
                ScalarExpr::neg(ScalarExpr::sin((**a).clone())),
                a.diff(kind, index),
            ),
            ScalarExpr::Sin(a) => {
                ScalarExpr::mul(ScalarExpr::cos((**a).clone()), a.diff(kind, index))
            }
        }
    }

    /// Collects every variable referenced by the expression.
    pub fn collect_vars(&self, out: &mut Vec<(VarKind, usize)>) {
        match self {
            ScalarExpr::Const(_) => {}
            ScalarExpr::Var(kind, index) => {
                if !out.contains(&(*kind, *index)) {
                    out.push((*kind, *index));
                }
            }
            ScalarExpr::Add(a, b)
            | ScalarExpr::Sub(a, b)
            | ScalarExpr::Mul(a, b)
            | ScalarExpr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ScalarExpr::Exp(a) | ScalarExpr::Cos(a) | ScalarExpr::Sin(a) => a.collect_vars(out),
        }
    }

    pub fn references_var(&self, kind: VarKind, index: usize) -> bool {
        let mut vars = Vec::new();
        self.collect_vars(&mut vars);
        vars.contains(&(kind, index))
    }

    /// Renders the expression with a caller-supplied variable namer.
    pub fn display_with<'a, F>(&'a self, namer: F) -> impl fmt::Display + 'a
    where
        F: Fn(VarKind, usize) -> String + 'a,
    {
        DisplayExpr { expr: self, namer }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let namer = |kind: VarKind, index: usize| match kind {
            VarKind::Global => format!("g{index}"),
            VarKind::Local => format!("v{index}"),
        };
        write!(f, "{}", self.display_with(namer))
    }
}

struct DisplayExpr<'a, F> {
    expr: &'a ScalarExpr,
    namer: F,
}

impl<'a, F: Fn(VarKind, usize) -> String> DisplayExpr<'a, F> {
    fn write(&self, e: &ScalarExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            ScalarExpr::Const(v) => write!(f, "{v:?}"),
            ScalarExpr::Var(kind, index) => write!(f, "{}", (self.namer)(*kind, *index)),
            ScalarExpr::Add(a, b) => {
                self.write_child(a, f)?;
                write!(f, " + ")?;
                self.write_child(b, f)
            }
            ScalarExpr::Sub(a, b) => {
                self.write_child(a, f)?;
                write!(f, " - ")?;
                self.write_child(b, f)
            }
            ScalarExpr::Mul(a, b) => {
                self.write_child(a, f)?;
                write!(f, "*")?;
                self.write_child(b, f)
            }
            ScalarExpr::Div(a, b) => {
                self.write_child(a, f)?;
                write!(f, "/")?;
                self.write_child(b, f)
            }
            ScalarExpr::Exp(a) => {
                write!(f, "exp(")?;
                self.write(a, f)?;
                write!(f, ")")
            }
            ScalarExpr::Cos(a) => {
                write!(f, "cos(")?;
                self.write(a, f)?;
                write!(f, ")")
            }
            ScalarExpr::Sin(a) => {
                write!(f, "sin(")?;
                self.write(a, f)?;
                write!(f, ")")
            }
        }
    }

    fn write_child(&self, e: &ScalarExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atomic = matches!(
            e,
            ScalarExpr::Const(_)
                | ScalarExpr::Var(..)
                | ScalarExpr::Exp(_)
                | ScalarExpr::Cos(_)
                | ScalarExpr::Sin(_)
        );
        if atomic {
            self.write(e, f)
        } else {
            write!(f, "(")?;
            self.write(e, f)?;
            write!(f, ")")
        }
    }
}

impl<'a, F: Fn(VarKind, usize) -> String> fmt::Display for DisplayExpr<'a, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl std::ops::Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(self, rhs)
    }
}

impl std::ops::Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::sub(self, rhs)
    }
}

impl std::ops::Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(self, rhs)
    }
}

impl std::ops::Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::div(self, rhs)
    }
}

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}
