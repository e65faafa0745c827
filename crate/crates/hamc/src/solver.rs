//! Mixed-binary nonlinear solver for the coefficient equations.
//!
//! The binary selectors are relaxed to `[0, 1]` through a sigmoid and the
//! per-segment times kept positive through a softplus, turning the system
//! into an unconstrained nonlinear least-squares problem. A damped
//! Gauss-Newton (Levenberg-Marquardt) iteration with the analytic Jacobian
//! from symbolic differentiation drives the sum of squared residuals down;
//! selectors are then rounded by their absolute contribution to the
//! equations, the continuous variables are re-solved with the selectors
//! fixed, and the candidate is accepted when the absolute-residual sum `e`
//! beats the tolerance. Fresh random starts retry the whole scheme.
//!
//! Systems without global variables decompose per segment and are solved
//! segment by segment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{ScalarExpr, VarEnv, VarKind};
use crate::synth::{Equation, EquationSystem};

/// Division guard used during iteration; final residuals are unguarded.
/// Equals the sixth power of the minimum pairwise distance tolerated in
/// inverse-distance interactions.
const DIV_GUARD: f64 = 1e-18;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Acceptance tolerance on `e`; `None` selects the scale-aware default
    /// `0.05 * sum_j |rhs_j|`.
    pub epsilon: Option<f64>,
    /// Rounding tolerance on a selector's absolute contribution.
    pub delta: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { epsilon: None, delta: 1e-2, max_iterations: 500, restarts: 8, seed: 0 }
    }
}

/// Scale-aware default tolerance: five percent of the summed absolute
/// right-hand sides (the total coefficient weight of the target), floored
/// for degenerate all-zero targets.
pub fn default_epsilon(eqsys: &EquationSystem) -> f64 {
    let weight: f64 = eqsys.equations.iter().map(|e| e.rhs.abs()).sum();
    (0.05 * weight).max(1e-9)
}

/// A full variable assignment for an equation system.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub globals: Vec<f64>,
    /// `locals[j][k]` holds instruction `k`'s local values in segment `j`
    /// (zeros when the instruction is not selected).
    pub locals: Vec<Vec<Vec<f64>>>,
    /// `selected[j][k]` is the rounded binary selector.
    pub selected: Vec<Vec<bool>>,
    /// Solved per-segment times, all positive.
    pub times: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub assignment: Assignment,
    /// Sum of absolute equation residuals under the assignment.
    pub residual: f64,
}

#[derive(Debug, Error)]
#[error("no assignment within tolerance (best residual {best_residual:.6e})")]
pub struct Infeasible {
    pub best_residual: f64,
}

/// Deterministic absolute-residual sum `e = sum |lhs - rhs|`.
pub fn residual(eqsys: &EquationSystem, assignment: &Assignment) -> Result<f64, crate::expr::ExprError> {
    let mut total = 0.0;
    for eq in &eqsys.equations {
        total += equation_residual(eqsys, eq, assignment)?.abs();
    }
    Ok(total)
}

/// Residual of a single equation under a full assignment.
pub fn equation_residual(
    eqsys: &EquationSystem,
    eq: &Equation,
    assignment: &Assignment,
) -> Result<f64, crate::expr::ExprError> {
    let t = assignment.times[eq.seg];
    let mut lhs = 0.0;
    if let Some(sys) = &eq.sys_coeff {
        lhs += t * sys.eval(&VarEnv::new(&assignment.globals, &[]))?;
    }
    for term in &eq.terms {
        let k = term.instr;
        if !assignment.selected[eq.seg][k] {
            continue;
        }
        let locals = &assignment.locals[eq.seg][k];
        lhs += t * term.coeff.eval(&VarEnv::new(&assignment.globals, locals))?;
    }
    let _ = eqsys;
    Ok(lhs - eq.rhs)
}

/// The compiled form of an accepted solution: per-segment simultaneous
/// executions with their solved durations, plus the global valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct InstructionSchedule {
    pub globals: Vec<f64>,
    /// `(executions, duration)` per segment, in program order.
    pub segments: Vec<(Vec<Execution>, f64)>,
}

/// One instruction execution: the AAIS instruction index and its local
/// variable values.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub instr: usize,
    pub locals: Vec<f64>,
}

/// Extracts the instruction schedule induced by an accepted solution.
pub fn to_instruction_schedule(solution: &Solution, eqsys: &EquationSystem) -> InstructionSchedule {
    let a = &solution.assignment;
    let mut segments = Vec::with_capacity(eqsys.segments.len());
    for j in 0..eqsys.segments.len() {
        let mut executions = Vec::new();
        for (k, instr) in eqsys.instructions.iter().enumerate() {
            if a.selected[j][k] {
                executions.push(Execution {
                    instr: instr.aais_index,
                    locals: a.locals[j][k].clone(),
                });
            }
        }
        segments.push((executions, a.times[j]));
    }
    InstructionSchedule { globals: a.globals.clone(), segments }
}

// ---------------------------------------------------------------------------
// Internal optimization machinery.

fn softplus(u: f64) -> f64 {
    if u > 30.0 {
        u
    } else if u < -30.0 {
        u.exp()
    } else {
        u.exp().ln_1p()
    }
}

fn softplus_deriv(u: f64) -> f64 {
    sigmoid(u)
}

fn softplus_inv(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else {
        (t.exp() - 1.0).max(1e-300).ln()
    }
}

fn sigmoid(w: f64) -> f64 {
    if w >= 0.0 {
        1.0 / (1.0 + (-w).exp())
    } else {
        let e = w.exp();
        e / (1.0 + e)
    }
}

fn sigmoid_deriv(w: f64) -> f64 {
    let s = sigmoid(w);
    s * (1.0 - s)
}

/// Precomputed gradients of one equation's coefficient expressions.
struct RowPre {
    eq_index: usize,
    /// `(global index, d sys / d g)` pairs.
    sys_grads: Vec<(usize, ScalarExpr)>,
    /// Per term: `(local index, d coeff / d a)` pairs.
    term_grads: Vec<Vec<(usize, ScalarExpr)>>,
}

fn precompute_rows(eqsys: &EquationSystem, seg_ids: &[usize]) -> Vec<RowPre> {
    let mut rows = Vec::new();
    for (eq_index, eq) in eqsys.equations.iter().enumerate() {
        if !seg_ids.contains(&eq.seg) {
            continue;
        }
        let sys_grads = match &eq.sys_coeff {
            None => Vec::new(),
            Some(sys) => {
                let mut vars = Vec::new();
                sys.collect_vars(&mut vars);
                vars.into_iter()
                    .filter(|(kind, _)| *kind == VarKind::Global)
                    .map(|(_, index)| (index, sys.diff(VarKind::Global, index)))
                    .collect()
            }
        };
        let term_grads = eq
            .terms
            .iter()
            .map(|term| {
                let mut vars = Vec::new();
                term.coeff.collect_vars(&mut vars);
                vars.into_iter()
                    .filter(|(kind, _)| *kind == VarKind::Local)
                    .map(|(_, index)| (index, term.coeff.diff(VarKind::Local, index)))
                    .collect()
            })
            .collect();
        rows.push(RowPre { eq_index, sys_grads, term_grads });
    }
    rows
}

/// Variable packing of one subproblem into a flat parameter vector.
struct Packing {
    seg_ids: Vec<usize>,
    include_globals: bool,
    n_globals: usize,
    /// Instructions contributing to any equation (indices into
    /// `eqsys.instructions`), shared across segments.
    contrib: Vec<usize>,
    /// `local_off[sub][c]`: offset of the local block of contributing
    /// instruction `contrib[c]` in subproblem segment `sub`.
    local_off: Vec<Vec<usize>>,
    time_off: Vec<usize>,
    /// `w_off[sub][c]`: offset of the relaxed selector, when relaxed.
    w_off: Vec<Vec<Option<usize>>>,
    len: usize,
}

impl Packing {
    fn new(
        eqsys: &EquationSystem,
        seg_ids: Vec<usize>,
        include_globals: bool,
        selected: Option<&Vec<Vec<bool>>>,
    ) -> Packing {
        let mut contrib: Vec<usize> = Vec::new();
        for eq in &eqsys.equations {
            if !seg_ids.contains(&eq.seg) {
                continue;
            }
            for term in &eq.terms {
                if !contrib.contains(&term.instr) {
                    contrib.push(term.instr);
                }
            }
        }
        contrib.sort_unstable();

        let mut len = 0;
        let n_globals = if include_globals { eqsys.num_globals } else { 0 };
        len += n_globals;
        let mut local_off = Vec::with_capacity(seg_ids.len());
        let mut time_off = Vec::with_capacity(seg_ids.len());
        let mut w_off = Vec::with_capacity(seg_ids.len());
        for &j in &seg_ids {
            let mut seg_local = Vec::with_capacity(contrib.len());
            let mut seg_w = Vec::with_capacity(contrib.len());
            for &k in &contrib {
                let active = match selected {
                    None => true,
                    Some(sel) => sel[j][k],
                };
                if active {
                    seg_local.push(len);
                    len += eqsys.instructions[k].num_locals;
                } else {
                    seg_local.push(usize::MAX);
                }
                if selected.is_none() {
                    seg_w.push(Some(len));
                    len += 1;
                } else {
                    seg_w.push(None);
                }
            }
            local_off.push(seg_local);
            time_off.push(len);
            len += 1;
            w_off.push(seg_w);
        }
        Packing { seg_ids, include_globals, n_globals, contrib, local_off, time_off, w_off, len }
    }

    fn contrib_pos(&self, k: usize) -> Option<usize> {
        self.contrib.iter().position(|&c| c == k)
    }

    fn sub_of_seg(&self, seg: usize) -> usize {
        self.seg_ids.iter().position(|&j| j == seg).expect("segment in packing")
    }
}

/// One subproblem: a view of the equations with either relaxed or fixed
/// selectors.
struct Problem<'a> {
    eqsys: &'a EquationSystem,
    rows: Vec<RowPre>,
    packing: Packing,
    /// Fixed selectors in the refit phase.
    selected: Option<Vec<Vec<bool>>>,
}

impl<'a> Problem<'a> {
    fn num_residuals(&self) -> usize {
        self.rows.len()
    }

    fn globals<'t>(&self, theta: &'t [f64]) -> &'t [f64] {
        &theta[0..self.packing.n_globals]
    }

    fn locals<'t>(&self, theta: &'t [f64], sub: usize, c: usize, k: usize) -> &'t [f64] {
        let off = self.packing.local_off[sub][c];
        &theta[off..off + self.eqsys.instructions[k].num_locals]
    }

    fn selector(&self, theta: &[f64], sub: usize, c: usize, seg: usize, k: usize) -> (f64, Option<usize>) {
        match &self.selected {
            None => {
                let off = self.packing.w_off[sub][c].expect("relaxed phase");
                (sigmoid(theta[off]), Some(off))
            }
            Some(sel) => (if sel[seg][k] { 1.0 } else { 0.0 }, None),
        }
    }

    /// Fills residuals and optionally the row-major Jacobian. Returns false
    /// when evaluation hits a non-finite value.
    fn eval(&self, theta: &[f64], residuals: &mut [f64], mut jacobian: Option<&mut [f64]>) -> bool {
        let n = self.packing.len;
        if let Some(j) = jacobian.as_deref_mut() {
            j.iter_mut().for_each(|v| *v = 0.0);
        }
        let globals = self.globals(theta);
        for (row_pos, row) in self.rows.iter().enumerate() {
            let eq = &self.eqsys.equations[row.eq_index];
            let sub = self.packing.sub_of_seg(eq.seg);
            let u = theta[self.packing.time_off[sub]];
            let t = softplus(u);
            let mut lhs_over_t = 0.0;

            if let Some(sys) = &eq.sys_coeff {
                let env = VarEnv::new(globals, &[]);
                let v = match sys.eval_guarded(&env, DIV_GUARD) {
                    Ok(v) => v,
                    Err(_) => return false,
                };
                lhs_over_t += v;
                if let Some(jac) = jacobian.as_deref_mut() {
                    for (g_index, grad) in &row.sys_grads {
                        let dv = match grad.eval_guarded(&env, DIV_GUARD) {
                            Ok(dv) => dv,
                            Err(_) => return false,
                        };
                        jac[row_pos * n + g_index] += t * dv;
                    }
                }
            }

            for (term_pos, term) in eq.terms.iter().enumerate() {
                let k = term.instr;
                let c = self.packing.contrib_pos(k).expect("term instruction is contributing");
                let (s_val, w_slot) = self.selector(theta, sub, c, eq.seg, k);
                if s_val == 0.0 && w_slot.is_none() {
                    continue;
                }
                let locals = self.locals(theta, sub, c, k);
                let env = VarEnv::new(globals, locals);
                let coeff = match term.coeff.eval_guarded(&env, DIV_GUARD) {
                    Ok(v) => v,
                    Err(_) => return false,
                };
                lhs_over_t += coeff * s_val;
                if let Some(jac) = jacobian.as_deref_mut() {
                    let local_base = self.packing.local_off[sub][c];
                    for (l_index, grad) in &row.term_grads[term_pos] {
                        let dv = match grad.eval_guarded(&env, DIV_GUARD) {
                            Ok(dv) => dv,
                            Err(_) => return false,
                        };
                        jac[row_pos * n + local_base + l_index] += t * s_val * dv;
                    }
                    if let Some(w) = w_slot {
                        let w_val = theta[w];
                        jac[row_pos * n + w] += t * coeff * sigmoid_deriv(w_val);
                    }
                }
            }

            let r = t * lhs_over_t - eq.rhs;
            if !r.is_finite() {
                return false;
            }
            residuals[row_pos] = r;
            if let Some(jac) = jacobian.as_deref_mut() {
                jac[row_pos * n + self.packing.time_off[sub]] = softplus_deriv(u) * lhs_over_t;
            }
        }
        true
    }
}

fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    // In-place LL^T factorization; returns false on a non-positive pivot.
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return false;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * n + k] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= a[k * n + i] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    true
}

/// Damped Gauss-Newton minimization of `0.5 ||r(theta)||^2` with Nielsen's
/// damping updates. Returns the final point and cost.
fn levenberg_marquardt(problem: &Problem, theta0: Vec<f64>, max_iterations: usize) -> (Vec<f64>, f64) {
    let n = problem.packing.len;
    let m = problem.num_residuals();
    let mut theta = theta0;
    if n == 0 || m == 0 {
        let mut r = vec![0.0; m];
        let ok = problem.eval(&theta, &mut r, None);
        let cost = if ok { 0.5 * r.iter().map(|v| v * v).sum::<f64>() } else { f64::INFINITY };
        return (theta, cost);
    }

    let mut residuals = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    if !problem.eval(&theta, &mut residuals, Some(&mut jac)) {
        return (theta, f64::INFINITY);
    }
    let mut cost = 0.5 * residuals.iter().map(|v| v * v).sum::<f64>();

    let mut a = vec![0.0; n * n];
    let mut grad = vec![0.0; n];
    let assemble = |jac: &[f64], residuals: &[f64], a: &mut [f64], grad: &mut [f64]| {
        a.iter_mut().for_each(|v| *v = 0.0);
        grad.iter_mut().for_each(|v| *v = 0.0);
        for row in 0..m {
            let jrow = &jac[row * n..(row + 1) * n];
            for i in 0..n {
                let ji = jrow[i];
                if ji == 0.0 {
                    continue;
                }
                grad[i] += ji * residuals[row];
                for j in 0..=i {
                    a[i * n + j] += ji * jrow[j];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                a[i * n + j] = a[j * n + i];
            }
        }
    };
    assemble(&jac, &residuals, &mut a, &mut grad);

    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max);
    let mut mu = 1e-3 * max_diag.max(1e-12);
    let mut nu = 2.0;

    for _ in 0..max_iterations {
        let gnorm = grad.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        if gnorm < 1e-12 || cost < 1e-24 {
            break;
        }
        // (A + mu * diag(A)) delta = -grad, with a floor on the damping.
        let mut lhs = a.clone();
        for i in 0..n {
            let d = a[i * n + i].max(1e-12);
            lhs[i * n + i] += mu * d;
        }
        let mut delta: Vec<f64> = grad.iter().map(|g| -g).collect();
        if !cholesky_solve(&mut lhs, &mut delta, n) {
            mu *= 10.0;
            nu = 2.0;
            if mu > 1e32 {
                break;
            }
            continue;
        }
        let step_norm = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if step_norm <= 1e-14 * (theta_norm + 1e-14) {
            break;
        }
        let candidate: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
        let mut cand_res = vec![0.0; m];
        let finite = problem.eval(&candidate, &mut cand_res, None);
        let cand_cost = if finite {
            0.5 * cand_res.iter().map(|v| v * v).sum::<f64>()
        } else {
            f64::INFINITY
        };
        // Predicted reduction of the damped quadratic model.
        let predicted: f64 = 0.5
            * delta
                .iter()
                .enumerate()
                .map(|(i, d)| d * (mu * a[i * n + i].max(1e-12) * d - grad[i]))
                .sum::<f64>();
        let rho = if predicted > 0.0 { (cost - cand_cost) / predicted } else { -1.0 };
        if cand_cost.is_finite() && rho > 0.0 {
            theta = candidate;
            cost = cand_cost;
            if !problem.eval(&theta, &mut residuals, Some(&mut jac)) {
                break;
            }
            assemble(&jac, &residuals, &mut a, &mut grad);
            let shrink = (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            mu *= shrink;
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if mu > 1e32 {
                break;
            }
        }
    }
    (theta, cost)
}

/// Absolute contribution of each relaxed selector to its segment's
/// equations: `sum_P |t_j * coeff_P(a_kj) * s_kj|`.
fn selector_scores(problem: &Problem, theta: &[f64]) -> Vec<Vec<f64>> {
    let eqsys = problem.eqsys;
    let mut scores = vec![vec![0.0; eqsys.instructions.len()]; eqsys.segments.len()];
    for row in &problem.rows {
        let eq = &eqsys.equations[row.eq_index];
        let sub = problem.packing.sub_of_seg(eq.seg);
        let t = softplus(theta[problem.packing.time_off[sub]]);
        for term in &eq.terms {
            let k = term.instr;
            let c = problem.packing.contrib_pos(k).expect("contributing");
            let (s_val, _) = problem.selector(theta, sub, c, eq.seg, k);
            let locals = problem.locals(theta, sub, c, k);
            let env = VarEnv::new(problem.globals(theta), locals);
            if let Ok(coeff) = term.coeff.eval_guarded(&env, DIV_GUARD) {
                scores[eq.seg][k] += (t * coeff * s_val).abs();
            }
        }
    }
    scores
}

fn initial_theta(
    eqsys: &EquationSystem,
    packing: &Packing,
    restart: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut theta = vec![0.0; packing.len];
    let mut normal = || {
        // Box-Muller from two uniforms.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    if packing.include_globals {
        match eqsys.global_init_spacing {
            Some(spacing) => {
                // Arithmetic progression at the pairwise resonance scale;
                // deterministic on the first start, jittered afterwards.
                for (g, slot) in theta.iter_mut().take(packing.n_globals).enumerate() {
                    let jitter =
                        if restart == 0 { 0.0 } else { normal() * 0.2 * spacing };
                    *slot = g as f64 * spacing + jitter;
                }
            }
            None => {
                for slot in theta.iter_mut().take(packing.n_globals) {
                    *slot = normal() * 0.5;
                }
            }
        }
    }
    for (sub, &j) in packing.seg_ids.iter().enumerate() {
        for (c, &k) in packing.contrib.iter().enumerate() {
            let off = packing.local_off[sub][c];
            if off != usize::MAX {
                for l in 0..eqsys.instructions[k].num_locals {
                    theta[off + l] = normal() * 0.5;
                }
            }
            if let Some(w) = packing.w_off[sub][c] {
                theta[w] = 0.0; // sigmoid(0) = 0.5
            }
        }
        theta[packing.time_off[sub]] = softplus_inv(eqsys.segments[j].tau);
    }
    theta
}

/// Extracts the assignment pieces covered by a subproblem's parameters.
fn unpack(
    eqsys: &EquationSystem,
    packing: &Packing,
    theta: &[f64],
    selected: &[Vec<bool>],
    assignment: &mut Assignment,
) {
    if packing.include_globals {
        assignment.globals = theta[0..packing.n_globals].to_vec();
    }
    for (sub, &j) in packing.seg_ids.iter().enumerate() {
        assignment.times[j] = softplus(theta[packing.time_off[sub]]);
        for (c, &k) in packing.contrib.iter().enumerate() {
            let off = packing.local_off[sub][c];
            if off == usize::MAX {
                continue;
            }
            let n_locals = eqsys.instructions[k].num_locals;
            assignment.locals[j][k] = theta[off..off + n_locals].to_vec();
        }
        assignment.selected[j].copy_from_slice(&selected[j]);
    }
}

fn empty_assignment(eqsys: &EquationSystem) -> Assignment {
    Assignment {
        globals: vec![0.0; eqsys.num_globals],
        locals: eqsys
            .segments
            .iter()
            .map(|_| eqsys.instructions.iter().map(|i| vec![0.0; i.num_locals]).collect())
            .collect(),
        selected: vec![vec![false; eqsys.instructions.len()]; eqsys.segments.len()],
        times: eqsys.segments.iter().map(|s| s.tau).collect(),
    }
}

/// One relax-round-refit attempt from a fresh start. Returns the assignment
/// restricted to the given segments.
#[allow(clippy::too_many_arguments)]
fn attempt(
    eqsys: &EquationSystem,
    seg_ids: &[usize],
    include_globals: bool,
    restart: usize,
    rng: &mut ChaCha8Rng,
    opts: &SolverOptions,
    delta: f64,
    assignment: &mut Assignment,
) {
    // Phase 1: relaxed selectors.
    let packing = Packing::new(eqsys, seg_ids.to_vec(), include_globals, None);
    let rows = precompute_rows(eqsys, seg_ids);
    let problem = Problem { eqsys, rows, packing, selected: None };
    let theta0 = initial_theta(eqsys, &problem.packing, restart, rng);
    let (theta, _) = levenberg_marquardt(&problem, theta0, opts.max_iterations);

    // Rounding by absolute contribution.
    let scores = selector_scores(&problem, &theta);
    let mut selected = vec![vec![false; eqsys.instructions.len()]; eqsys.segments.len()];
    for &j in seg_ids {
        for k in 0..eqsys.instructions.len() {
            selected[j][k] = scores[j][k] > delta;
        }
    }

    // Phase 2: refit continuous variables with selectors fixed, warm-started
    // from the relaxed optimum.
    let packing2 = Packing::new(eqsys, seg_ids.to_vec(), include_globals, Some(&selected));
    let rows2 = precompute_rows(eqsys, seg_ids);
    let mut theta2 = vec![0.0; packing2.len];
    if include_globals {
        theta2[..packing2.n_globals].copy_from_slice(&theta[..problem.packing.n_globals]);
    }
    for (sub, _) in seg_ids.iter().enumerate() {
        for (c, &k) in packing2.contrib.iter().enumerate() {
            let dst = packing2.local_off[sub][c];
            let src = problem.packing.local_off[sub][c];
            if dst != usize::MAX && src != usize::MAX {
                let n_locals = eqsys.instructions[k].num_locals;
                theta2[dst..dst + n_locals].copy_from_slice(&theta[src..src + n_locals]);
            }
        }
        theta2[packing2.time_off[sub]] = theta[problem.packing.time_off[sub]];
    }
    let problem2 = Problem { eqsys, rows: rows2, packing: packing2, selected: Some(selected.clone()) };
    let (theta2, _) = levenberg_marquardt(&problem2, theta2, opts.max_iterations);

    unpack(eqsys, &problem2.packing, &theta2, &selected, assignment);
}

/// Residual restricted to a segment subset, unguarded. `None` when the
/// assignment cannot be evaluated (singular configuration).
fn subset_residual(eqsys: &EquationSystem, seg_ids: &[usize], assignment: &Assignment) -> Option<f64> {
    let mut total = 0.0;
    for eq in &eqsys.equations {
        if !seg_ids.contains(&eq.seg) {
            continue;
        }
        total += equation_residual(eqsys, eq, assignment).ok()?.abs();
    }
    Some(total)
}

/// Solves one subproblem with restarts; picks the lowest-residual attempt.
fn solve_subset(
    eqsys: &EquationSystem,
    seg_ids: &[usize],
    include_globals: bool,
    opts: &SolverOptions,
    seed: u64,
) -> (Assignment, f64) {
    let delta = opts.delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Assignment, f64)> = None;
    let attempts = opts.restarts.max(1);
    for restart in 0..attempts {
        let mut assignment = empty_assignment(eqsys);
        attempt(eqsys, seg_ids, include_globals, restart, &mut rng, opts, delta, &mut assignment);
        let Some(e) = subset_residual(eqsys, seg_ids, &assignment) else { continue };
        if !e.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, best_e)) => e < *best_e,
        };
        if better {
            best = Some((assignment, e));
        }
    }
    best.unwrap_or_else(|| {
        let assignment = empty_assignment(eqsys);
        let e = subset_residual(eqsys, seg_ids, &assignment).unwrap_or(f64::INFINITY);
        (assignment, e)
    })
}

/// Solves the equation system by relaxation, rounding and refitting.
///
/// Deterministic for a fixed seed. Accepts when the total absolute residual
/// beats the tolerance; otherwise reports the best residual found.
pub fn solve(eqsys: &EquationSystem, opts: &SolverOptions) -> Result<Solution, Infeasible> {
    let epsilon = opts.epsilon.unwrap_or_else(|| default_epsilon(eqsys));
    let n_segments = eqsys.segments.len();
    if n_segments == 0 {
        return Ok(Solution { assignment: empty_assignment(eqsys), residual: 0.0 });
    }

    // Without globals the segments share no variables and decompose.
    let separable = eqsys.num_globals == 0 && n_segments > 1;
    let mut assignment = empty_assignment(eqsys);
    if separable {
        for j in 0..n_segments {
            let (sub_assignment, _) =
                solve_subset(eqsys, &[j], false, opts, opts.seed.wrapping_add(j as u64));
            assignment.times[j] = sub_assignment.times[j];
            assignment.locals[j] = sub_assignment.locals[j].clone();
            assignment.selected[j] = sub_assignment.selected[j].clone();
        }
    } else {
        let seg_ids: Vec<usize> = (0..n_segments).collect();
        let (full, _) = solve_subset(eqsys, &seg_ids, true, opts, opts.seed);
        assignment = full;
    }

    // Re-validate with the independent unguarded residual.
    let e = residual(eqsys, &assignment).unwrap_or(f64::INFINITY);
    if e < epsilon {
        Ok(Solution { assignment, residual: e })
    } else {
        Err(Infeasible { best_residual: e })
    }
}
