//! C ABI over `compgate`.
//!
//! Handles are opaque heap objects owned by the caller and released with the
//! matching `*_free`. Every fallible call returns a `CgStatus`; on failure
//! the message is kept per thread and read with `cg_last_error_message`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use compgate::feasibility::{branch_bound, check_feasible, EfficiencyPair};
use compgate::gram::{build_grams, Branch, GateSpec, GramSet};
use compgate::optimize::{maximize_branch_with, OptimizerOptions};
use compgate::simulate::{exact_run, monte_carlo};
use compgate::state::{make_state_set, QubitState, StateSet};
use compgate::synthesis::{build_branch, synthesize, SynthesisResult, JOINT_DIM};
use compgate::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotNormalized = 3,
    LinearlyDependentPair = 4,
    InfeasibleEfficiency = 5,
    ZeroSuccessProbability = 6,
    NumericalFailure = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgBranch {
    Plus = 0,
    Minus = 1,
}

impl From<CgBranch> for Branch {
    fn from(b: CgBranch) -> Self {
        match b {
            CgBranch::Plus => Branch::Plus,
            CgBranch::Minus => Branch::Minus,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgComplex {
    pub re: f64,
    pub im: f64,
}

impl From<CgComplex> for Complex64 {
    fn from(c: CgComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for CgComplex {
    fn from(c: Complex64) -> Self {
        CgComplex { re: c.re, im: c.im }
    }
}

/// `alpha|0⟩ + beta|1⟩`
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgQubit {
    pub alpha: CgComplex,
    pub beta: CgComplex,
}

impl From<QubitState> for CgQubit {
    fn from(s: QubitState) -> Self {
        CgQubit {
            alpha: s.alpha().into(),
            beta: s.beta().into(),
        }
    }
}

/// Gate coefficients `a`, `b` with `|a|² + |b|² = 1`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgGate {
    pub a: CgComplex,
    pub b: CgComplex,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgOptimization {
    pub eff1: f64,
    pub eff2: f64,
    pub average: f64,
    pub boundary_certificate: f64,
    pub iterations: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgExactRun {
    pub success_prob: f64,
    pub post_state: CgQubit,
    pub fidelity: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgSimulation {
    pub exact_success_prob: f64,
    pub observed_success_freq: f64,
    pub trials: u64,
    pub seed: u64,
    /// Negative when the success probability vanishes.
    pub post_fidelity: f64,
}

/// A state pair with its derived complements, a gate and their Gram matrices.
pub struct CgProblem {
    set: StateSet,
    gate: GateSpec,
    grams: GramSet,
}

/// A synthesized single-branch machine.
pub struct CgMachine {
    result: SynthesisResult,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> CgStatus {
    match err {
        Error::NotNormalized { .. } => CgStatus::NotNormalized,
        Error::LinearlyDependentPair { .. } => CgStatus::LinearlyDependentPair,
        Error::InfeasibleEfficiency { .. } => CgStatus::InfeasibleEfficiency,
        Error::ZeroSuccessProbability { .. } => CgStatus::ZeroSuccessProbability,
        Error::GramMismatch { .. }
        | Error::DependentInputs
        | Error::NotPsd { .. }
        | Error::NonHermitianInput { .. }
        | Error::AmbientTooSmall { .. } => CgStatus::NumericalFailure,
        _ => CgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CgStatus, String)>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CgStatus::Panic
        }
    }
}

fn lift(err: Error) -> (CgStatus, String) {
    (status_of(&err), format!("{}: {err}", err.kind()))
}

fn null() -> (CgStatus, String) {
    (CgStatus::NullPointer, "null pointer argument".to_owned())
}

fn qubit(q: CgQubit) -> Result<QubitState, (CgStatus, String)> {
    QubitState::new(q.alpha.into(), q.beta.into()).map_err(lift)
}

/// Hadamard-like gate `a = b = 1/√2`.
#[no_mangle]
pub extern "C" fn cg_gate_hadamard() -> CgGate {
    let g = GateSpec::hadamard();
    CgGate {
        a: g.a().into(),
        b: g.b().into(),
    }
}

/// `(cos(θ/2), e^{iφ} sin(θ/2))`.
#[no_mangle]
pub extern "C" fn cg_qubit_from_bloch(theta: f64, phi: f64) -> CgQubit {
    QubitState::from_bloch(theta, phi).into()
}

/// Complement `β*|0⟩ − α*|1⟩`. The input is used as given, without a norm check.
#[no_mangle]
pub extern "C" fn cg_qubit_complement(q: CgQubit) -> CgQubit {
    CgQubit {
        alpha: CgComplex { re: q.beta.re, im: -q.beta.im },
        beta: CgComplex { re: -q.alpha.re, im: q.alpha.im },
    }
}

/// Builds a problem handle. `*out` receives ownership; release with `cg_problem_free`.
#[no_mangle]
pub unsafe extern "C" fn cg_problem_new(
    state1: CgQubit,
    state2: CgQubit,
    gate: CgGate,
    out: *mut *mut CgProblem,
) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let set = make_state_set(qubit(state1)?, qubit(state2)?).map_err(lift)?;
        let gate = GateSpec::new(gate.a.into(), gate.b.into()).map_err(lift)?;
        let grams = build_grams(&set, &gate, None).map_err(lift)?;
        *out = Box::into_raw(Box::new(CgProblem { set, gate, grams }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_problem_free(problem: *mut CgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Derived complements `Ψ̄₁`, `Ψ̄₂`.
#[no_mangle]
pub unsafe extern "C" fn cg_problem_complements(
    problem: *const CgProblem,
    out_bar1: *mut CgQubit,
    out_bar2: *mut CgQubit,
) -> CgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(null)?;
        if out_bar1.is_null() || out_bar2.is_null() {
            return Err(null());
        }
        *out_bar1 = p.set.psibar1.into();
        *out_bar2 = p.set.psibar2.into();
        Ok(())
    })
}

/// Capped average-efficiency bounds of both branches.
#[no_mangle]
pub unsafe extern "C" fn cg_problem_bounds(
    problem: *const CgProblem,
    out_plus: *mut f64,
    out_minus: *mut f64,
) -> CgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(null)?;
        if out_plus.is_null() || out_minus.is_null() {
            return Err(null());
        }
        *out_plus = branch_bound(&p.grams, Branch::Plus).value;
        *out_minus = branch_bound(&p.grams, Branch::Minus).value;
        Ok(())
    })
}

/// Writes whether both residuals are PSD at `Γ = diag(gamma)`, `Λ = diag(delta)`.
#[no_mangle]
pub unsafe extern "C" fn cg_problem_check_feasible(
    problem: *const CgProblem,
    gamma1: f64,
    gamma2: f64,
    delta1: f64,
    delta2: f64,
    tol: f64,
    out_feasible: *mut bool,
) -> CgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(null)?;
        if out_feasible.is_null() {
            return Err(null());
        }
        let eff = EfficiencyPair::new([gamma1, gamma2], [delta1, delta2]).map_err(lift)?;
        *out_feasible = check_feasible(&p.grams, &eff, tol).map_err(lift)?.feasible;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_problem_optimize(
    problem: *const CgProblem,
    branch: CgBranch,
    equal_eff: bool,
    out: *mut CgOptimization,
) -> CgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let (x_in, x_out) = p.grams.branch(branch.into());
        let opts = OptimizerOptions {
            equal_eff,
            ..OptimizerOptions::default()
        };
        let r = maximize_branch_with(x_in, x_out, opts);
        *out = CgOptimization {
            eff1: r.best_eff[0],
            eff2: r.best_eff[1],
            average: r.best_average,
            boundary_certificate: r.boundary_certificate,
            iterations: r.iterations,
        };
        Ok(())
    })
}

/// Synthesizes the machine for one branch. Release with `cg_machine_free`.
#[no_mangle]
pub unsafe extern "C" fn cg_machine_synthesize(
    problem: *const CgProblem,
    branch: CgBranch,
    eff1: f64,
    eff2: f64,
    tol: f64,
    out: *mut *mut CgMachine,
) -> CgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let syn = build_branch(&p.set, &p.gate, [eff1, eff2], branch.into(), tol).map_err(lift)?;
        let result = synthesize(&syn).map_err(lift)?;
        *out = Box::into_raw(Box::new(CgMachine { result }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_machine_free(machine: *mut CgMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Number of rows (and columns) of the machine unitary.
#[no_mangle]
pub extern "C" fn cg_machine_dimension() -> usize {
    JOINT_DIM
}

/// Copies the unitary in row-major order; `len` must be at least `dim²`.
///
/// Joint basis index is `3·s + p` for system state `s` and probe state `p`.
#[no_mangle]
pub unsafe extern "C" fn cg_machine_unitary(machine: *const CgMachine, out: *mut CgComplex, len: usize) -> CgStatus {
    guard(|| {
        let m = machine.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let entries = m.result.unitary.entries();
        if len < entries.len() {
            return Err((
                CgStatus::BufferTooSmall,
                format!("need {} entries, got {len}", entries.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, entries.len());
        for (d, s) in dst.iter_mut().zip(entries) {
            *d = (*s).into();
        }
        Ok(())
    })
}

/// `‖U†U − I‖_F` of the synthesized unitary.
#[no_mangle]
pub unsafe extern "C" fn cg_machine_unitarity_defect(machine: *const CgMachine, out: *mut f64) -> CgStatus {
    guard(|| {
        let m = machine.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = m.result.diagnostics.unitarity_defect;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_machine_exact_run(
    machine: *const CgMachine,
    input: CgQubit,
    target: CgQubit,
    out: *mut CgExactRun,
) -> CgStatus {
    guard(|| {
        let m = machine.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let r = exact_run(&m.result, &qubit(input)?, &qubit(target)?).map_err(lift)?;
        *out = CgExactRun {
            success_prob: r.success_prob,
            post_state: r.post_state.into(),
            fidelity: r.fidelity,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_machine_monte_carlo(
    machine: *const CgMachine,
    input: CgQubit,
    trials: u64,
    seed: u64,
    out: *mut CgSimulation,
) -> CgStatus {
    guard(|| {
        let m = machine.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        if trials == 0 {
            return Err((CgStatus::InvalidArgument, "trials must be at least 1".to_owned()));
        }
        let r = monte_carlo(&m.result, &qubit(input)?, trials, seed);
        *out = CgSimulation {
            exact_success_prob: r.exact_success_prob,
            observed_success_freq: r.observed_success_freq,
            trials: r.trials,
            seed: r.seed,
            post_fidelity: r.post_fidelity.unwrap_or(-1.0),
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len − 1` bytes. Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn cg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
