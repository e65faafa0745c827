//! Dense-matrix numerical oracle.
//!
//! Realizes sparse Hamiltonians and compiled schedules as explicit matrices
//! so that compilation output can be checked against the program semantics:
//! unitary evolution via Hermitian eigendecomposition, phase-aligned spectral
//! distance, total variation distance, and the compiler's error-bound
//! evaluators. Everything here is guarded to 12 sites (4096-dimensional
//! matrices); larger systems are compile-only.

use num_complex::Complex64;
use thiserror::Error;

use crate::ham::ConcreteHam;
use crate::pauli::{PauliOp, PauliString};

/// Hard cap on the site count for dense realization.
pub const MAX_DENSE_SITES: usize = 12;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("system of {n} sites exceeds the dense-verification cap of {MAX_DENSE_SITES}")]
    TooLarge { n: usize },
    #[error("Hamiltonian acts on site {site} outside the {n}-site space")]
    SiteOutOfRange { site: u32, n: usize },
    #[error("segment Hamiltonian is not Hermitian: {detail}")]
    NonHermitian { detail: String },
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("eigendecomposition did not converge")]
    NoConvergence,
    #[error("coefficient evaluation failed: {0}")]
    Eval(#[from] crate::expr::ExprError),
}

/// Dense complex matrix over an `n`-site register, row-major `2^n x 2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n_sites: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(n_sites: usize) -> Result<DenseOperator, DenseError> {
        if n_sites > MAX_DENSE_SITES {
            return Err(DenseError::TooLarge { n: n_sites });
        }
        let dim = 1usize << n_sites;
        Ok(DenseOperator { n_sites, dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    pub fn identity(n_sites: usize) -> Result<DenseOperator, DenseError> {
        let mut m = Self::zeros(n_sites)?;
        for i in 0..m.dim {
            m.data[i * m.dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator, DenseError> {
        if self.dim != other.dim {
            return Err(DenseError::DimensionMismatch { a: self.dim, b: other.dim });
        }
        let n = self.dim;
        let mut out = DenseOperator::zeros(self.n_sites)?;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row.iter()) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> DenseOperator {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator, DenseError> {
        if self.dim != other.dim {
            return Err(DenseError::DimensionMismatch { a: self.dim, b: other.dim });
        }
        let mut out = self.clone();
        for (d, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *d -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> DenseOperator {
        let mut out = self.clone();
        for d in out.data.iter_mut() {
            *d *= factor;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &DenseOperator, factor: Complex64) {
        for (d, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *d += factor * b;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |(U^dag U - I)[i][j]|`; near zero for unitaries.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().mul(self).expect("same dims");
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect =
                    if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((gram.data[i * n + j] - expect).norm());
            }
        }
        worst
    }

    /// Adds `coeff * P` to the matrix, where `P` is realized as the Kronecker
    /// product with site 0 as the leftmost factor.
    pub fn add_pauli_term(
        &mut self,
        string: &PauliString,
        coeff: Complex64,
    ) -> Result<(), DenseError> {
        if let Some(site) = string.max_site() {
            if site as usize >= self.n_sites {
                return Err(DenseError::SiteOutOfRange { site, n: self.n_sites });
            }
        }
        let n = self.dim;
        let factors: Vec<(usize, PauliOp)> = string
            .factors()
            .map(|(site, op)| (self.n_sites - 1 - site as usize, op))
            .collect();
        for col in 0..n {
            let mut row = col;
            let mut amp = coeff;
            for &(bitpos, op) in &factors {
                let bit = (col >> bitpos) & 1;
                match op {
                    PauliOp::I => {}
                    PauliOp::X => row ^= 1 << bitpos,
                    PauliOp::Y => {
                        row ^= 1 << bitpos;
                        amp *= if bit == 0 {
                            Complex64::new(0.0, 1.0)
                        } else {
                            Complex64::new(0.0, -1.0)
                        };
                    }
                    PauliOp::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                }
            }
            self.data[row * n + col] += amp;
        }
        Ok(())
    }
}

/// Realizes a sparse Hamiltonian as a dense matrix on `n` sites.
pub fn to_dense(ham: &ConcreteHam, n_sites: usize) -> Result<DenseOperator, DenseError> {
    let mut m = DenseOperator::zeros(n_sites)?;
    for (string, coeff) in ham.terms() {
        m.add_pauli_term(string, *coeff)?;
    }
    Ok(m)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order and the unitary of
/// eigenvector columns.
pub fn eigen_hermitian(m: &DenseOperator) -> Result<(Vec<f64>, DenseOperator), DenseError> {
    let n = m.dim;
    let mut a = m.clone();
    let mut v = DenseOperator::identity(m.n_sites)?;
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let tol = 1e-14 * fro;
    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.data[p * n + q].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            let mut pairs: Vec<(f64, usize)> =
                (0..n).map(|i| (a.data[i * n + i].re, i)).collect();
            pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let eigenvalues: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
            let mut vectors = DenseOperator::zeros(m.n_sites)?;
            for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
                for row in 0..n {
                    vectors.data[row * n + new_col] = v.data[row * n + old_col];
                }
            }
            return Ok((eigenvalues, vectors));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.data[p * n + q];
                let abs = apq.norm();
                if abs <= tol / (n as f64) {
                    continue;
                }
                // Unitary 2x2 block U = diag(e^{i beta}, 1) * Givens(theta)
                // chosen to zero the (p, q) entry.
                let beta_phase = apq / abs;
                let app = a.data[p * n + p].re;
                let aqq = a.data[q * n + q].re;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u00 = beta_phase * c;
                let u01 = beta_phase * s;
                let u10 = Complex64::new(-s, 0.0);
                let u11 = Complex64::new(c, 0.0);
                // Columns: A <- A U, V <- V U.
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = akp * u00 + akq * u10;
                    a.data[k * n + q] = akp * u01 + akq * u11;
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = vkp * u00 + vkq * u10;
                    v.data[k * n + q] = vkp * u01 + vkq * u11;
                }
                // Rows: A <- U^dag A.
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = u00.conj() * apk + u10.conj() * aqk;
                    a.data[q * n + k] = u01.conj() * apk + u11.conj() * aqk;
                }
            }
        }
    }
    Err(DenseError::NoConvergence)
}

/// `exp(z * H)` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &DenseOperator, z: Complex64) -> Result<DenseOperator, DenseError> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * (1.0 + h.max_abs()) {
        return Err(DenseError::NonHermitian {
            detail: format!("matrix defect {defect:.3e}"),
        });
    }
    let (eigenvalues, vectors) = eigen_hermitian(h)?;
    let n = h.dim;
    // V * diag(exp(z lambda)) * V^dag
    let mut scaled = vectors.clone();
    for (col, &lambda) in eigenvalues.iter().enumerate() {
        let factor = (z * lambda).exp();
        for row in 0..n {
            let idx = row * n + col;
            scaled.data[idx] *= factor;
        }
    }
    scaled.mul(&vectors.adjoint())
}

/// Unitary of a piecewise-constant evolution: the product of segment
/// exponentials `exp(-i tau H)` with the first segment applied first.
pub fn evolve(segments: &[(ConcreteHam, f64)], n_sites: usize) -> Result<DenseOperator, DenseError> {
    let mut total = DenseOperator::identity(n_sites)?;
    for (ham, tau) in segments {
        if !ham.is_hermitian() {
            return Err(DenseError::NonHermitian {
                detail: format!(
                    "coefficients with imaginary parts: {}",
                    ham.non_hermitian_terms()
                        .iter()
                        .map(|(p, c)| format!("{c:?} on {p}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
        let dense = to_dense(&ham.hermitize(), n_sites)?;
        let step = expm_hermitian(&dense, Complex64::new(0.0, -tau))?;
        total = step.mul(&total)?;
    }
    Ok(total)
}

/// Spectral norm (largest singular value) via the Hermitian form `A^dag A`.
pub fn spectral_norm(m: &DenseOperator) -> Result<f64, DenseError> {
    let gram = m.adjoint().mul(m)?;
    let (eigenvalues, _) = eigen_hermitian(&gram)?;
    Ok(eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `min_phi || U - e^{i phi} V ||_2` with the phase taken from `arg Tr(V^dag U)`.
pub fn phase_aligned_distance(u: &DenseOperator, v: &DenseOperator) -> Result<f64, DenseError> {
    if u.dim != v.dim {
        return Err(DenseError::DimensionMismatch { a: u.dim, b: v.dim });
    }
    let tr = v.adjoint().mul(u)?.trace();
    let phase = if tr.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, tr.arg())
    };
    spectral_norm(&u.sub(&v.scale(phase))?)
}

/// Total variation distance between the measurement distributions of
/// `U|0...0>` and `V|0...0>` in the computational basis.
pub fn tv_distance(u: &DenseOperator, v: &DenseOperator) -> Result<f64, DenseError> {
    if u.dim != v.dim {
        return Err(DenseError::DimensionMismatch { a: u.dim, b: v.dim });
    }
    let n = u.dim;
    let mut acc = 0.0;
    for s in 0..n {
        let pu = u.data[s * n].norm_sqr();
        let pv = v.data[s * n].norm_sqr();
        acc += (pu - pv).abs();
    }
    Ok(0.5 * acc)
}

/// Inputs for the end-to-end semantics-preservation bound.
#[derive(Clone, Debug)]
pub struct ErrorBoundParams {
    /// Discretization constant (defaults to 1; reporting only).
    pub c1: f64,
    /// Synthesis constant.
    pub c2: f64,
    /// Implementation constant.
    pub c3: f64,
    /// Discretization number.
    pub d: u32,
    /// Lipschitz constant of the time-dependent coefficients.
    pub m_lipschitz: f64,
    /// Number of terms in the target Hamiltonian.
    pub k_terms: f64,
    /// Total evolution time.
    pub t_total: f64,
    /// Accepted synthesis residual tolerance.
    pub epsilon: f64,
    /// Group-norm factor from the conflict resolver.
    pub lambda: f64,
    /// Trotterization number.
    pub r: u32,
    /// Instruction implementation error threshold.
    pub delta_impl: f64,
    /// Number of signal lines plus system Hamiltonians.
    pub s_lines: f64,
    /// Maximal group count over segments.
    pub gamma: f64,
}

impl Default for ErrorBoundParams {
    fn default() -> Self {
        ErrorBoundParams {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            d: 1,
            m_lipschitz: 0.0,
            k_terms: 0.0,
            t_total: 0.0,
            epsilon: 0.0,
            lambda: 0.0,
            r: 1,
            delta_impl: 0.0,
            s_lines: 0.0,
            gamma: 0.0,
        }
    }
}

/// Evaluated Hamiltonian of one instruction schedule segment:
/// `H_sys(g) + sum_k H_eta(a_k)`.
fn segment_hamiltonian(
    aais: &crate::aais::Aais,
    executions: &[crate::solver::Execution],
    globals: &[f64],
) -> Result<ConcreteHam, DenseError> {
    let mut h = aais.sys_ham.eval(&crate::expr::VarEnv::new(globals, &[]))?;
    for execution in executions {
        let env = crate::expr::VarEnv::new(globals, &execution.locals);
        h = h.add(&aais.instruction(execution.instr).ham.eval(&env)?);
    }
    Ok(h)
}

/// Unitary realized by an instruction schedule: the product of per-segment
/// exponentials of the system Hamiltonian plus the active instruction
/// Hamiltonians.
pub fn instruction_schedule_unitary(
    schedule: &crate::solver::InstructionSchedule,
    aais: &crate::aais::Aais,
) -> Result<DenseOperator, DenseError> {
    let mut segments = Vec::with_capacity(schedule.segments.len());
    for (executions, duration) in &schedule.segments {
        segments.push((segment_hamiltonian(aais, executions, &schedule.globals)?, *duration));
    }
    evolve(&segments, aais.num_sites)
}

/// Unitary realized by a block schedule, executed in the deterministic
/// topological order. Any topological order is a valid execution order of
/// the DAG, so this fixes one for reproducibility.
pub fn block_schedule_unitary(
    blocks: &crate::trotter::BlockSchedule,
    aais: &crate::aais::Aais,
) -> Result<DenseOperator, DenseError> {
    let order = crate::sched::topological_order(blocks);
    let mut segments = Vec::with_capacity(order.len());
    for &b in &order {
        let block = &blocks.blocks[b];
        segments.push((
            segment_hamiltonian(aais, &block.executions, &blocks.globals)?,
            block.duration,
        ));
    }
    evolve(&segments, aais.num_sites)
}

/// Rebuilds the unitary of a parsed pulse-schedule artifact. Executions are
/// grouped by their recorded block index (a valid execution order), with
/// blocks that carry no executions evolving under the system Hamiltonian
/// alone.
pub fn line_schedule_unitary(
    schedule: &crate::sched::SignalLineSchedule,
    aais: &crate::aais::Aais,
) -> Result<DenseOperator, DenseError> {
    // Globals arrive as name/value pairs; realign them to the device order.
    let mut globals = vec![0.0; aais.num_globals];
    for (g, name) in aais.global_names.iter().enumerate() {
        let position = schedule
            .global_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DenseError::NonHermitian {
                detail: format!("schedule is missing global variable `{name}`"),
            })?;
        globals[g] = schedule.globals[position];
    }
    let sys = aais.sys_ham.eval(&crate::expr::VarEnv::new(&globals, &[]))?;
    let mut block_hams: Vec<ConcreteHam> =
        schedule.blocks.iter().map(|_| sys.clone()).collect();
    for executions in schedule.lines.values() {
        for execution in executions {
            let (_, instruction) = aais
                .instruction_by_name(&execution.instruction)
                .ok_or_else(|| DenseError::NonHermitian {
                    detail: format!("unknown instruction `{}`", execution.instruction),
                })?;
            let mut locals = vec![0.0; instruction.num_locals];
            for (l, name) in instruction.local_names.iter().enumerate() {
                let value = execution
                    .params
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| DenseError::NonHermitian {
                        detail: format!(
                            "execution of `{}` is missing parameter `{name}`",
                            execution.instruction
                        ),
                    })?;
                locals[l] = value;
            }
            let env = crate::expr::VarEnv::new(&globals, &locals);
            let h = instruction.ham.eval(&env)?;
            block_hams[execution.block] = block_hams[execution.block].add(&h);
        }
    }
    let segments: Vec<(ConcreteHam, f64)> = block_hams
        .into_iter()
        .zip(schedule.blocks.iter())
        .map(|(h, timing)| (h, timing.duration))
        .collect();
    evolve(&segments, aais.num_sites)
}

/// Trotter factor from grouping data: `max_d L_d * max_group ||H_group||`,
/// using dense spectral norms up to the dense cap and the coefficient
/// one-norm bound beyond it.
pub fn lambda_for_reporting(
    info: &crate::trotter::TrotterInfo,
    n_sites: usize,
    include_sys: bool,
) -> Result<f64, DenseError> {
    if n_sites > MAX_DENSE_SITES {
        return Ok(crate::trotter::lambda_coeff_bound(info, include_sys));
    }
    let mut lambda: f64 = 0.0;
    for groups in &info.segment_groups {
        let l = groups.len().max(1) as f64;
        for group in groups {
            let h =
                if include_sys { group.add(&info.sys_concrete) } else { group.clone() };
            let norm = spectral_norm(&to_dense(&h.hermitize(), n_sites)?)?;
            lambda = lambda.max(l * norm);
        }
        if groups.is_empty() && include_sys && !info.sys_concrete.is_zero() {
            let norm = spectral_norm(&to_dense(&info.sys_concrete.hermitize(), n_sites)?)?;
            lambda = lambda.max(norm);
        }
    }
    Ok(lambda)
}

/// Total error bound: discretization + synthesis + Trotterization +
/// implementation terms.
pub fn total_error_bound(p: &ErrorBoundParams) -> f64 {
    let d = p.d as f64;
    let r = p.r as f64;
    let discretization = p.c1 * p.m_lipschitz * p.k_terms * p.t_total * p.t_total / d;
    let synthesis = p.c2 * p.epsilon;
    let lt = p.lambda * p.t_total;
    let trotter = lt * lt / (d * r) * (lt / (d * r)).exp();
    let implementation = p.c3 * p.s_lines * p.delta_impl * p.gamma * p.t_total;
    discretization + synthesis + trotter + implementation
}
