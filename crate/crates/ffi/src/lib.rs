//! C ABI over `plap-core`.
//!
//! Every fallible call returns a [`PlapStatus`]; on failure the message is kept in a
//! thread-local slot readable through [`plap_last_error_message`]. Objects cross the
//! boundary as opaque handles that must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plap_core::exact::{dvs_norm_exact, heat_reference, Counterexample, ExactSolution};
use plap_core::grid::{Cylinder, ScalarField, SpaceTimeGrid};
use plap_core::jet::{self, Jet, Params};
use plap_core::solver::{self, FnBoundary, Scheme, SolverConfig};
use plap_core::verify::{self, Classification, SharpnessTable};
use plap_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Singular = 3,
    Geometry = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapScheme {
    Explicit = 0,
    ImplicitPicard = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapProblem {
    Heat = 0,
    Counterexample = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapClassification {
    Convergent = 0,
    Divergent = 1,
    Inconclusive = 2,
}

/// Exponent `p`, integrability shift `s` and regularization `eps`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PlapParams {
    pub p: f64,
    pub s: f64,
    pub eps: f64,
}

/// Parabolic cylinder `B_r(x0) x (t0 - r^2, t0 + r^2)` in two space dimensions.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PlapCylinder {
    pub x0: [f64; 2],
    pub t0: f64,
    pub r: f64,
}

/// A square domain `[lower, upper]^2` evolved over `[t_start, t_end]` on `nt` time levels.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PlapSolveSpec {
    pub params: PlapParams,
    pub problem: PlapProblem,
    pub scheme: PlapScheme,
    pub lower: f64,
    pub upper: f64,
    pub nx: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub nt: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PlapReport {
    pub lhs: f64,
    pub rhs_total: f64,
    pub empirical_constant: f64,
    pub singular_nodes_skipped: usize,
    pub picard_warnings: usize,
    /// Nonzero when the cylinder does not meet the grid.
    pub empty_intersection: u8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PlapSweepRow {
    pub s: f64,
    pub nx: usize,
    pub h: f64,
    pub lhs: f64,
}

/// Second-order jet `(Du, D^2u)` at a point.
pub struct PlapJet(Jet);

/// Result of a sharpness sweep.
pub struct PlapSweep(SharpnessTable);

/// Space-time field produced by the solver and the number of steps with Picard warnings.
pub struct PlapField {
    field: ScalarField,
    picard_warnings: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn status_of(err: &Error) -> PlapStatus {
    match err {
        Error::Singular(_) => PlapStatus::Singular,
        Error::Geometry(_) => PlapStatus::Geometry,
        Error::Numerical(_) => PlapStatus::Numerical,
        _ => PlapStatus::InvalidArgument,
    }
}

struct Failure(PlapStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PlapStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PlapStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PlapStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside plap".into());
            PlapStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(handle: *const T, what: &str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or_else(|| null(what))
}

fn params(p: &PlapParams) -> Result<Params, Failure> {
    Ok(Params::new(p.p, p.s, p.eps)?)
}

fn cylinder(c: &PlapCylinder) -> Result<Cylinder, Failure> {
    Ok(Cylinder::new(&c.x0, c.t0, c.r)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plap_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!(),
    };
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
/// `len`) and returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn plap_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        if !buf.is_null() && len > 0 {
            let n = message.len().min(len - 1);
            ptr::copy_nonoverlapping(message.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        message.len()
    })
}

/// Builds a jet from a gradient of length `n` and a row-major `n x n` Hessian.
///
/// # Safety
/// `g` must hold `n` values, `h` must hold `n * n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plap_jet_new(g: *const f64, h: *const f64, n: usize, out: *mut *mut PlapJet) -> PlapStatus {
    guard(|| {
        let g = slice(g, n, "g")?;
        let h = slice(h, n * n, "h")?;
        let jet = Jet::from_slices(g, h)?;
        write(out, Box::into_raw(Box::new(PlapJet(jet))), "out")
    })
}

/// # Safety
/// `jet` must be null or a handle from [`plap_jet_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plap_jet_free(jet: *mut PlapJet) {
    if !jet.is_null() {
        drop(Box::from_raw(jet));
    }
}

/// Signed margin of `|D|Du||^2 <= |D^2u|^2`; never negative up to rounding.
///
/// # Safety
/// `jet` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_fundamental_margin(jet: *const PlapJet, out: *mut f64) -> PlapStatus {
    guard(|| write(out, jet::fundamental_margin(&borrow(jet, "jet")?.0), "out"))
}

/// # Safety
/// `jet` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_full_fundamental_margin(jet: *const PlapJet, out: *mut f64) -> PlapStatus {
    guard(|| write(out, jet::full_fundamental_margin(&borrow(jet, "jet")?.0)?, "out"))
}

/// # Safety
/// `jet` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_trivial_inequality_margin(jet: *const PlapJet, out: *mut f64) -> PlapStatus {
    guard(|| write(out, jet::trivial_inequality_margin(&borrow(jet, "jet")?.0), "out"))
}

/// # Safety
/// `jet` and `params` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_sigma_lower_bound_margin(
    jet: *const PlapJet,
    params: *const PlapParams,
    out: *mut f64,
) -> PlapStatus {
    guard(|| {
        let params = self::params(borrow(params, "params")?)?;
        write(out, jet::sigma_lower_bound_margin(&borrow(jet, "jet")?.0, &params)?, "out")
    })
}

/// # Safety
/// `jet` and `params` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_smo_esti_margin(
    jet: *const PlapJet,
    params: *const PlapParams,
    out: *mut f64,
) -> PlapStatus {
    guard(|| {
        let params = self::params(borrow(params, "params")?)?;
        write(out, jet::smo_esti_margin(&borrow(jet, "jet")?.0, &params)?, "out")
    })
}

/// Writes `D V_s` as a row-major `n x n` matrix into `out`, which holds `out_len` values.
///
/// # Safety
/// `jet` and `params` must be valid and `out` writable for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn plap_d_vs_matrix(
    jet: *const PlapJet,
    params: *const PlapParams,
    out: *mut f64,
    out_len: usize,
) -> PlapStatus {
    guard(|| {
        let jet = &borrow(jet, "jet")?.0;
        let params = self::params(borrow(params, "params")?)?;
        let n = jet.dim();
        if out_len < n * n {
            return Err(Failure(PlapStatus::BufferTooSmall, format!("need {} values, got {out_len}", n * n)));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let m = jet::d_vs_matrix(jet, &params)?;
        for i in 0..n {
            for j in 0..n {
                *out.add(i * n + j) = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `params` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_lambda(params: *const PlapParams, out: *mut f64) -> PlapStatus {
    guard(|| write(out, jet::lambda_of(&self::params(borrow(params, "params")?)?)?, "out"))
}

/// # Safety
/// `params` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_eta(params: *const PlapParams, out: *mut f64) -> PlapStatus {
    guard(|| write(out, jet::eta_of(&self::params(borrow(params, "params")?)?)?, "out"))
}

/// Closed-form `|D V_s|` of the separable counterexample at abscissa `x1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plap_dvs_norm_exact(p: f64, s: f64, x1: f64, out: *mut f64) -> PlapStatus {
    guard(|| write(out, dvs_norm_exact(p, s, x1)?, "out"))
}

/// Runs the sharpness sweep for every `s` in `s_list` over the increasing resolutions `levels`.
///
/// # Safety
/// `s_list` and `levels` must hold `n_s` and `n_levels` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plap_sharpness_sweep(
    p: f64,
    s_list: *const f64,
    n_s: usize,
    levels: *const usize,
    n_levels: usize,
    out: *mut *mut PlapSweep,
) -> PlapStatus {
    guard(|| {
        let s_list = slice(s_list, n_s, "s_list")?;
        if n_levels > 0 && levels.is_null() {
            return Err(null("levels"));
        }
        let levels: &[usize] = if n_levels == 0 { &[] } else { std::slice::from_raw_parts(levels, n_levels) };
        let table = verify::sharpness_sweep(p, s_list, levels)?;
        write(out, Box::into_raw(Box::new(PlapSweep(table))), "out")
    })
}

/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_sweep_row_count(sweep: *const PlapSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.rows.len())
}

/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_sweep_row(sweep: *const PlapSweep, index: usize, out: *mut PlapSweepRow) -> PlapStatus {
    guard(|| {
        let table = &borrow(sweep, "sweep")?.0;
        let row = table.rows.get(index).ok_or_else(|| {
            Failure(PlapStatus::InvalidArgument, format!("row {index} out of {}", table.rows.len()))
        })?;
        write(out, PlapSweepRow { s: row.s, nx: row.nx, h: row.h, lhs: row.lhs }, "out")
    })
}

/// Classification of the sweep at shift `s`, which must be one of the swept values.
///
/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_sweep_classification(
    sweep: *const PlapSweep,
    s: f64,
    out: *mut PlapClassification,
) -> PlapStatus {
    guard(|| {
        let verdict = borrow(sweep, "sweep")?
            .0
            .verdict(s)
            .ok_or_else(|| Failure(PlapStatus::InvalidArgument, format!("s = {s} was not swept")))?;
        let class = match verdict.classification {
            Classification::Convergent => PlapClassification::Convergent,
            Classification::Divergent => PlapClassification::Divergent,
            Classification::Inconclusive => PlapClassification::Inconclusive,
        };
        write(out, class, "out")
    })
}

/// # Safety
/// `sweep` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plap_sweep_free(sweep: *mut PlapSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Solves the regularized equation with boundary and initial data from the chosen problem.
///
/// # Safety
/// `spec` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_solve(spec: *const PlapSolveSpec, out: *mut *mut PlapField) -> PlapStatus {
    guard(|| {
        let spec = borrow(spec, "spec")?;
        let params = params(&spec.params)?;
        let grid = SpaceTimeGrid::square(spec.lower, spec.upper, spec.nx, spec.t_start, spec.t_end, spec.nt)?;
        let scheme = match spec.scheme {
            PlapScheme::Explicit => Scheme::Explicit,
            PlapScheme::ImplicitPicard => Scheme::ImplicitPicard,
        };
        let exact: Box<dyn ExactSolution> = match spec.problem {
            PlapProblem::Heat => Box::new(heat_reference(params.p)?),
            PlapProblem::Counterexample => Box::new(Counterexample::new(params.p)?),
        };
        let config = SolverConfig::new(params, grid, scheme);
        let solution = solver::solve(&config, &FnBoundary(|x: &[f64], t: f64| exact.value(x, t)))?;
        let picard_warnings = solution.picard_warnings();
        let field = PlapField { field: solution.field, picard_warnings };
        write(out, Box::into_raw(Box::new(field)), "out")
    })
}

/// Number of values in the field, `nt * nx * nx`, ordered by time level then node.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_field_len(field: *const PlapField) -> usize {
    field.as_ref().map_or(0, |f| f.field.values().len())
}

/// # Safety
/// `field` must be a live handle and `out` writable for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn plap_field_values(field: *const PlapField, out: *mut f64, out_len: usize) -> PlapStatus {
    guard(|| {
        let values = borrow(field, "field")?.field.values();
        if out_len < values.len() {
            return Err(Failure(PlapStatus::BufferTooSmall, format!("need {} values, got {out_len}", values.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

/// Caccioppoli report of `field` on `cyl`; the outer cylinder is the one of radius `2r`.
///
/// # Safety
/// All pointers must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_caccioppoli_report(
    field: *const PlapField,
    params: *const PlapParams,
    cyl: *const PlapCylinder,
    out: *mut PlapReport,
) -> PlapStatus {
    guard(|| {
        let field = borrow(field, "field")?;
        let params = self::params(borrow(params, "params")?)?;
        let cyl = cylinder(borrow(cyl, "cyl")?)?;
        let report = verify::caccioppoli_report(&field.field, &params, &cyl)?;
        let flat = PlapReport {
            lhs: report.lhs,
            rhs_total: report.rhs_total(),
            empirical_constant: report.empirical_constant,
            singular_nodes_skipped: report.flags.singular_nodes_skipped,
            picard_warnings: field.picard_warnings,
            empty_intersection: report.flags.empty_intersection as u8,
        };
        write(out, flat, "out")
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn plap_field_free(field: *mut PlapField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
