use std::ffi::CStr;
use std::ptr;

use plap_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        plap_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn jet(g: &[f64], h: &[f64]) -> *mut PlapJet {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { plap_jet_new(g.as_ptr(), h.as_ptr(), g.len(), &mut out) }, PlapStatus::Ok);
    out
}

#[test]
fn jet_margins_and_matrix() {
    let j = jet(&[1.0, 0.0], &[2.0, 0.0, 0.0, 5.0]);
    let params = PlapParams { p: 3.0, s: 0.0, eps: 0.0 };
    let mut value = f64::NAN;
    unsafe {
        assert_eq!(plap_fundamental_margin(j, &mut value), PlapStatus::Ok);
        assert!(value >= -1e-12);
        assert_eq!(plap_trivial_inequality_margin(j, &mut value), PlapStatus::Ok);
        assert_eq!(plap_sigma_lower_bound_margin(j, &params, &mut value), PlapStatus::Ok);
        assert!(value >= -1e-12);
        let mut m = [0.0; 4];
        assert_eq!(plap_d_vs_matrix(j, &params, m.as_mut_ptr(), 4), PlapStatus::Ok);
        // |g| = 1, alpha = 1/2: D V = H + g (Hg)^T / 2
        assert!((m[0] - 3.0).abs() < 1e-14 && (m[3] - 5.0).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14 && m[2].abs() < 1e-14);
        plap_jet_free(j);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut out = ptr::null_mut();
    let h = [1.0; 4];
    unsafe {
        assert_eq!(plap_jet_new(ptr::null(), h.as_ptr(), 2, &mut out), PlapStatus::NullPointer);
        assert!(last_error().contains("g"));
        let g = [f64::NAN, 0.0];
        assert_eq!(plap_jet_new(g.as_ptr(), h.as_ptr(), 2, &mut out), PlapStatus::InvalidArgument);
        assert!(out.is_null());

        let mut value = 0.0;
        let bad = PlapParams { p: 1.0, s: 0.0, eps: 0.0 };
        assert_ne!(plap_eta(&bad, &mut value), PlapStatus::Ok);
        assert!(!last_error().is_empty());
        let good = PlapParams { p: 2.0, s: 0.0, eps: 0.0 };
        assert_eq!(plap_lambda(&good, &mut value), PlapStatus::Ok);
        assert!(last_error().is_empty());

        // truncation reports the full length
        assert_eq!(plap_jet_new(ptr::null(), h.as_ptr(), 2, &mut out), PlapStatus::NullPointer);
        let mut tiny = [0 as std::ffi::c_char; 3];
        let len = plap_last_error_message(tiny.as_mut_ptr(), tiny.len());
        assert!(len > 2 && tiny[2] == 0);
        plap_jet_free(ptr::null_mut());
    }
}

#[test]
fn sweep_through_handles() {
    let s_list = [-1.0, 0.0];
    let levels = [32usize, 64, 128, 256, 512];
    let mut sweep = ptr::null_mut();
    unsafe {
        let status = plap_sharpness_sweep(3.0, s_list.as_ptr(), 2, levels.as_ptr(), levels.len(), &mut sweep);
        assert_eq!(status, PlapStatus::Ok);
        assert_eq!(plap_sweep_row_count(sweep), 10);
        let mut row = PlapSweepRow::default();
        assert_eq!(plap_sweep_row(sweep, 9, &mut row), PlapStatus::Ok);
        assert_eq!((row.s, row.nx), (0.0, 512));
        assert_eq!(plap_sweep_row(sweep, 10, &mut row), PlapStatus::InvalidArgument);
        let mut class = PlapClassification::Inconclusive;
        assert_eq!(plap_sweep_classification(sweep, -1.0, &mut class), PlapStatus::Ok);
        assert_eq!(class, PlapClassification::Divergent);
        assert_eq!(plap_sweep_classification(sweep, 0.0, &mut class), PlapStatus::Ok);
        assert_eq!(class, PlapClassification::Convergent);
        assert_eq!(plap_sweep_classification(sweep, 0.5, &mut class), PlapStatus::InvalidArgument);
        plap_sweep_free(sweep);
    }
}

#[test]
fn solve_and_report() {
    let spec = PlapSolveSpec {
        params: PlapParams { p: 2.0, s: 0.0, eps: 0.0 },
        problem: PlapProblem::Heat,
        scheme: PlapScheme::ImplicitPicard,
        lower: 0.0,
        upper: 1.0,
        nx: 16,
        t_start: 0.0,
        t_end: 0.1,
        nt: 21,
    };
    let mut field = ptr::null_mut();
    unsafe {
        assert_eq!(plap_solve(&spec, &mut field), PlapStatus::Ok);
        let len = plap_field_len(field);
        assert_eq!(len, 21 * 16 * 16);
        let mut values = vec![0.0; len];
        assert_eq!(plap_field_values(field, values.as_mut_ptr(), len), PlapStatus::Ok);
        assert!(values.iter().all(|v| v.is_finite()));
        assert_eq!(plap_field_values(field, values.as_mut_ptr(), len - 1), PlapStatus::BufferTooSmall);

        let cyl = PlapCylinder { x0: [0.5, 0.5], t0: 0.05, r: 0.1 };
        let mut report = PlapReport::default();
        assert_eq!(plap_caccioppoli_report(field, &spec.params, &cyl, &mut report), PlapStatus::Ok);
        assert!(report.lhs > 0.0 && report.rhs_total > 0.0 && report.empirical_constant.is_finite());
        assert_eq!(report.picard_warnings, 0);

        let outside = PlapCylinder { x0: [0.5, 0.5], t0: 0.05, r: 0.4 };
        assert_eq!(plap_caccioppoli_report(field, &spec.params, &outside, &mut report), PlapStatus::Geometry);
        plap_field_free(field);

        let mut bad = spec;
        bad.params.p = 3.0;
        let mut other = ptr::null_mut();
        assert_ne!(plap_solve(&bad, &mut other), PlapStatus::Ok);
        assert!(other.is_null());
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(plap_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
