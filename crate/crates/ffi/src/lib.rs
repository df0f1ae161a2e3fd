//! C interface to the `brokenguide` solver.
//!
//! Problems and solutions are opaque heap handles released with their `*_free`
//! function. Every call returns a [`BgStatus`]; the message of the most recent
//! failure on the calling thread is available from [`bg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use brokenguide::asymptotics::{airy_zero, two_term_eigenvalue};
use brokenguide::config::RunConfig;
use brokenguide::drivers::{run_solve, Solved};
use brokenguide::eigensolve::SolverParams;
use brokenguide::fem::FemParams;
use brokenguide::geometry::{DomainSpec, Formulation};
use brokenguide::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidAngle = 3,
    Config = 4,
    NotPositiveDefinite = 5,
    NoConvergence = 6,
    Unresolved = 7,
    OutOfRange = 8,
    OutsideDomain = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BgFormulation {
    ModelGuide = 0,
    ReferenceStrip = 1,
    FullGuide = 2,
}

impl From<BgFormulation> for Formulation {
    fn from(f: BgFormulation) -> Self {
        match f {
            BgFormulation::ModelGuide => Formulation::ModelGuide,
            BgFormulation::ReferenceStrip => Formulation::ReferenceStrip,
            BgFormulation::FullGuide => Formulation::FullGuide,
        }
    }
}

/// A configured eigenvalue problem.
pub struct BgProblem {
    spec: DomainSpec,
    fem: FemParams,
    solver: SolverParams,
}

/// Certified eigenpairs of a problem.
pub struct BgSolution {
    solved: Solved,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BgStatus {
    match e.root() {
        Error::InvalidAngle(_) => BgStatus::InvalidAngle,
        Error::Config(_) | Error::Parse(_) => BgStatus::Config,
        Error::NotPositiveDefinite => BgStatus::NotPositiveDefinite,
        Error::NoConvergence { .. } => BgStatus::NoConvergence,
        Error::Unresolved(_) => BgStatus::Unresolved,
        Error::OutsideDomain(..) => BgStatus::OutsideDomain,
        _ => BgStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BgStatus, String)>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (BgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BgStatus, String) {
    (BgStatus::NullPointer, format!("{what} is null"))
}

/// Creates a problem with default solver settings (10 eigenpairs, subspace 25, tolerance 1e-8).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn bg_problem_new(
    formulation: BgFormulation,
    theta: f64,
    length: usize,
    level: usize,
    degree: usize,
    out: *mut *mut BgProblem,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = DomainSpec::new(formulation.into(), theta, length).map_err(lib)?;
        let cfg = RunConfig::default();
        let problem = BgProblem { spec, fem: FemParams::new(level, degree), solver: cfg.solver() };
        *out = Box::into_raw(Box::new(problem));
        Ok(())
    })
}

/// Creates a problem from flat `key = value` configuration text.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_problem_from_config(text: *const c_char, out: *mut *mut BgProblem) -> BgStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|_| (BgStatus::Config, "configuration is not UTF-8".into()))?;
        let cfg = RunConfig::from_text(text).map_err(lib)?;
        let spec = cfg.domain().map_err(lib)?;
        *out = Box::into_raw(Box::new(BgProblem { spec, fem: cfg.fem(), solver: cfg.solver() }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn bg_problem_set_solver(
    problem: *mut BgProblem,
    n_val: usize,
    n_sub: usize,
    tolerance: f64,
    seed: u64,
) -> BgStatus {
    guard(|| {
        let p = problem.as_mut().ok_or_else(|| null("problem"))?;
        let solver = SolverParams { n_val, n_sub, tolerance, seed, ..p.solver };
        solver.validate().map_err(lib)?;
        p.solver = solver;
        Ok(())
    })
}

/// # Safety
/// `problem` must be a handle from this library or null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bg_problem_free(problem: *mut BgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Meshes, assembles, solves and certifies.
///
/// # Safety
/// `problem` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_solve(problem: *const BgProblem, out: *mut *mut BgSolution) -> BgStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let solved = run_solve(&p.spec, &p.fem, &p.solver).map_err(lib)?;
        *out = Box::into_raw(Box::new(BgSolution { solved }));
        Ok(())
    })
}

/// # Safety
/// `solution` must be a handle from this library or null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_free(solution: *mut BgSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of computed eigenpairs; 0 for a null handle.
///
/// # Safety
/// `solution` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_len(solution: *const BgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solved.result.eigenvalues.len())
}

/// Number of eigenvalues below the threshold 1; 0 for a null handle.
///
/// # Safety
/// `solution` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_bound_states(solution: *const BgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solved.result.bound_state_count())
}

/// Degrees of freedom after Dirichlet elimination; 0 for a null handle.
///
/// # Safety
/// `solution` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_n_dofs(solution: *const BgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solved.n_dofs())
}

/// Eigensolver iterations; 0 for a null handle.
///
/// # Safety
/// `solution` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_iterations(solution: *const BgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solved.result.iterations)
}

/// Eigenvalue and residual of the pair with 0-based `index`; either output may be null.
///
/// # Safety
/// `solution` must be a valid handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_pair(
    solution: *const BgSolution,
    index: usize,
    eigenvalue: *mut f64,
    residual: *mut f64,
) -> BgStatus {
    guard(|| {
        let r = &solution.as_ref().ok_or_else(|| null("solution"))?.solved.result;
        if index >= r.eigenvalues.len() {
            return Err((BgStatus::OutOfRange, format!("index {index} outside 0..{}", r.eigenvalues.len())));
        }
        if !eigenvalue.is_null() {
            *eigenvalue = r.eigenvalues[index];
        }
        if !residual.is_null() {
            *residual = r.residuals[index];
        }
        Ok(())
    })
}

/// Copies up to `capacity` eigenvalues into `values` and stores the number written in `written`.
///
/// # Safety
/// `values` must hold `capacity` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_eigenvalues(
    solution: *const BgSolution,
    values: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> BgStatus {
    guard(|| {
        let r = &solution.as_ref().ok_or_else(|| null("solution"))?.solved.result;
        if values.is_null() && capacity > 0 {
            return Err(null("values"));
        }
        let n = capacity.min(r.eigenvalues.len());
        if n > 0 {
            ptr::copy_nonoverlapping(r.eigenvalues.as_ptr(), values, n);
        }
        if !written.is_null() {
            *written = n;
        }
        Ok(())
    })
}

/// Value of the eigenfunction with 0-based `index` at `(u, v)` in the problem's coordinates.
///
/// # Safety
/// `solution` must be a valid handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn bg_solution_evaluate(
    solution: *const BgSolution,
    index: usize,
    u: f64,
    v: f64,
    value: *mut f64,
) -> BgStatus {
    guard(|| {
        let s = &solution.as_ref().ok_or_else(|| null("solution"))?.solved;
        if value.is_null() {
            return Err(null("value"));
        }
        let (_, w) = s.mode(index + 1).map_err(|e| (BgStatus::OutOfRange, e.to_string()))?;
        *value = s.disc.function(w).value([u, v]).map_err(lib)?;
        Ok(())
    })
}

/// `j`-th zero of the reverse Airy function `Ai(-x)`, `j >= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_airy_zero(j: usize, out: *mut f64) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = airy_zero(j).map_err(lib)?;
        Ok(())
    })
}

/// Two-term small-angle approximation of the `j`-th eigenvalue.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_two_term_eigenvalue(theta: f64, j: usize, out: *mut f64) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = two_term_eigenvalue(theta, j).map_err(lib)?;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn bg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bg_status_str(status: BgStatus) -> *const c_char {
    let s: &'static CStr = match status {
        BgStatus::Ok => c"ok",
        BgStatus::NullPointer => c"null pointer",
        BgStatus::InvalidArgument => c"invalid argument",
        BgStatus::InvalidAngle => c"angle outside (0, pi/2)",
        BgStatus::Config => c"configuration error",
        BgStatus::NotPositiveDefinite => c"matrix not positive definite",
        BgStatus::NoConvergence => c"eigensolver did not converge",
        BgStatus::Unresolved => c"result failed verification",
        BgStatus::OutOfRange => c"index out of range",
        BgStatus::OutsideDomain => c"point outside the domain",
        BgStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
