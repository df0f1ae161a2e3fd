use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use brokenguide_ffi::*;

fn last_error() -> String {
    let p = bg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_problem(theta: f64) -> *mut BgProblem {
    let mut p = ptr::null_mut();
    let status = unsafe { bg_problem_new(BgFormulation::ModelGuide, theta, 2, 2, 2, &mut p) };
    assert_eq!(status, BgStatus::Ok);
    assert_eq!(unsafe { bg_problem_set_solver(p, 3, 8, 1e-10, 0) }, BgStatus::Ok);
    p
}

#[test]
fn solve_round_trip() {
    let p = small_problem(std::f64::consts::FRAC_PI_4);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bg_solve(p, &mut s), BgStatus::Ok);
        assert_eq!(bg_solution_len(s), 3);
        assert_eq!(bg_solution_bound_states(s), 1);
        assert!(bg_solution_n_dofs(s) > 0 && bg_solution_iterations(s) > 0);
        let (mut l, mut r) = (0.0, 0.0);
        assert_eq!(bg_solution_pair(s, 0, &mut l, &mut r), BgStatus::Ok);
        assert!(l > 0.9 && l < 1.0 && r >= 0.0);
        let mut all = [0.0; 8];
        let mut written = 0;
        assert_eq!(bg_solution_eigenvalues(s, all.as_mut_ptr(), all.len(), &mut written), BgStatus::Ok);
        assert_eq!(written, 3);
        assert_eq!(all[0], l);
        assert!(all[..3].windows(2).all(|w| w[0] <= w[1]));
        let mut v = 0.0;
        assert_eq!(bg_solution_evaluate(s, 0, -1.0, 0.5, &mut v), BgStatus::Ok);
        assert!(v.is_finite());
        assert_eq!(bg_solution_evaluate(s, 0, -100.0, 0.0, &mut v), BgStatus::OutsideDomain);
        assert_eq!(bg_solution_pair(s, 3, &mut l, ptr::null_mut()), BgStatus::OutOfRange);
        assert!(last_error().contains("outside"));
        bg_solution_free(s);
        bg_problem_free(p);
    }
}

#[test]
fn errors_map_to_codes() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(bg_problem_new(BgFormulation::ModelGuide, 2.0, 2, 2, 2, &mut p), BgStatus::InvalidAngle);
        assert!(p.is_null());
        assert!(last_error().contains("(0, pi/2)"));
        assert_eq!(bg_problem_new(BgFormulation::ModelGuide, 0.5, 2, 2, 2, ptr::null_mut()), BgStatus::NullPointer);
        let mut s = ptr::null_mut();
        assert_eq!(bg_solve(ptr::null(), &mut s), BgStatus::NullPointer);
        let p = small_problem(0.5);
        assert_eq!(bg_problem_set_solver(p, 5, 3, 1e-8, 0), BgStatus::InvalidArgument);
        bg_problem_free(p);
        bg_problem_free(ptr::null_mut());
        bg_solution_free(ptr::null_mut());
        assert_eq!(bg_solution_len(ptr::null()), 0);
    }
}

#[test]
fn problems_from_configuration_text() {
    let text = CString::new("theta = 0.3*pi/2\nlevel = 2\ndegree = 2\nlength = 2\nnval = 2\nnsub = 6\n").unwrap();
    let mut p = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bg_problem_from_config(text.as_ptr(), &mut p), BgStatus::Ok);
        assert_eq!(bg_solve(p, &mut s), BgStatus::Ok);
        assert_eq!(bg_solution_len(s), 2);
        bg_solution_free(s);
        bg_problem_free(p);
        let bad = CString::new("colour = red").unwrap();
        let mut q = ptr::null_mut();
        assert_eq!(bg_problem_from_config(bad.as_ptr(), &mut q), BgStatus::Config);
        assert!(last_error().contains("unknown key"));
    }
}

#[test]
fn scalar_helpers() {
    let mut z = 0.0;
    unsafe {
        assert_eq!(bg_airy_zero(1, &mut z), BgStatus::Ok);
        assert!((z - 2.338_107_410_459_767).abs() < 1e-12);
        assert_eq!(bg_airy_zero(0, &mut z), BgStatus::InvalidArgument);
        let mut l = 0.0;
        assert_eq!(bg_two_term_eigenvalue(0.01, 1, &mut l), BgStatus::Ok);
        assert!(l > 0.25 && l < 0.3);
    }
    for status in [BgStatus::Ok, BgStatus::Panic, BgStatus::NoConvergence] {
        assert!(!unsafe { CStr::from_ptr(bg_status_str(status)) }.to_bytes().is_empty());
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/brokenguide.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["bg_problem_new", "bg_solve", "bg_solution_free", "bg_last_error", "BG_STATUS_OK", "typedef struct BgProblem BgProblem"] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!("#include \"{header}\"\nint main(void) {{ BgProblem *p = 0; return bg_problem_new(BG_FORMULATION_MODEL_GUIDE, 0.5, 2, 2, 2, &p) == BG_STATUS_OK ? 0 : 1; }}\n"),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(status) => assert!(status.success(), "the generated header does not compile"),
        Err(_) => eprintln!("no C compiler found; skipping the compile check"),
    }
}
