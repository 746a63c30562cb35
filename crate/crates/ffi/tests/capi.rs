use std::ffi::{CStr, CString};
use std::ptr;

use ydde_ffi::*;

fn last_error() -> String {
    let p = ydde_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn builtin_solve_round_trip() {
    let name = CString::new("linear").unwrap();
    let mut sc = ptr::null_mut();
    unsafe {
        assert_eq!(ydde_scenario_builtin(name.as_ptr(), &mut sc), YddeStatus::Ok);
        assert_eq!(ydde_scenario_set_seed(sc, 3), YddeStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(ydde_solve(sc, &mut sol), YddeStatus::Ok);

        let (mut nodes, mut dim, mut t0, mut mesh) = (0usize, 0usize, 0.0, 0.0);
        assert_eq!(ydde_solution_grid(sol, &mut nodes, &mut dim, &mut t0, &mut mesh), YddeStatus::Ok);
        assert_eq!(dim, 1);
        assert_eq!(t0, -0.25);
        assert_eq!(nodes, ((1.25 / mesh).round() as usize) + 1);

        let mut need = 0usize;
        assert_eq!(ydde_solution_copy_values(sol, ptr::null_mut(), 0, &mut need), YddeStatus::Domain);
        assert_eq!(need, nodes * dim);
        let mut buf = vec![0.0; need];
        let mut written = 0usize;
        assert_eq!(ydde_solution_copy_values(sol, buf.as_mut_ptr(), buf.len(), &mut written), YddeStatus::Ok);
        assert_eq!(written, need);
        assert!(buf.iter().all(|v| v.is_finite()));

        let (mut windows, mut stops) = (0usize, 0usize);
        assert_eq!(ydde_solution_partition(sol, &mut windows, &mut stops), YddeStatus::Ok);
        assert!(windows >= 1 && stops < windows);

        let (mut holds, mut margin) = (false, 0.0);
        if ydde_solution_growth(sol, &mut holds, &mut margin) == YddeStatus::Ok {
            assert!(holds && margin >= 0.0);
        }

        ydde_solution_free(sol);
        ydde_scenario_free(sc);
    }
}

#[test]
fn json_scenario_matches_cli_file() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/sin_fbm.json")).unwrap();
    let json = CString::new(text).unwrap();
    let mut sc = ptr::null_mut();
    unsafe {
        assert_eq!(ydde_scenario_from_json(json.as_ptr(), &mut sc), YddeStatus::Ok);
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(ydde_solve(sc, &mut a), YddeStatus::Ok);
        assert_eq!(ydde_solve(sc, &mut b), YddeStatus::Ok);
        let mut n = 0usize;
        ydde_solution_copy_values(a, ptr::null_mut(), 0, &mut n);
        let (mut va, mut vb) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(ydde_solution_copy_values(a, va.as_mut_ptr(), n, &mut n), YddeStatus::Ok);
        assert_eq!(ydde_solution_copy_values(b, vb.as_mut_ptr(), n, &mut n), YddeStatus::Ok);
        assert_eq!(va, vb);
        ydde_solution_free(a);
        ydde_solution_free(b);
        ydde_scenario_free(sc);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut sc = ptr::null_mut();
    unsafe {
        let bad = CString::new("{ not json").unwrap();
        // Scenario text is configuration, so malformed JSON reports Config.
        assert_eq!(ydde_scenario_from_json(bad.as_ptr(), &mut sc), YddeStatus::Config);
        assert!(sc.is_null());

        let unknown = CString::new("nope").unwrap();
        assert_eq!(ydde_scenario_builtin(unknown.as_ptr(), &mut sc), YddeStatus::Config);
        assert!(last_error().contains("nope"));

        assert_eq!(ydde_scenario_builtin(ptr::null(), &mut sc), YddeStatus::NullPointer);
        assert_eq!(ydde_solve(ptr::null(), &mut ptr::null_mut()), YddeStatus::NullPointer);
        assert!(last_error().contains("scenario"));

        let mut k = 0.0;
        assert_eq!(ydde_young_constant(0.2, 0.2, &mut k), YddeStatus::Domain);

        ydde_scenario_free(ptr::null_mut());
        ydde_solution_free(ptr::null_mut());
    }
}

#[test]
fn numeric_helpers() {
    let mut k = 0.0;
    let mut s = 0.0;
    unsafe {
        assert_eq!(ydde_young_constant(0.4, 0.7, &mut k), YddeStatus::Ok);
        assert!((k - 1.0 / (1.0 - 2f64.powf(-0.1))).abs() < 1e-12);

        // Linear path t on [0, 1]: the 1/2-Hölder seminorm is sup |t-s|^{1/2} = 1.
        let v: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        assert_eq!(ydde_holder_seminorm(v.as_ptr(), v.len(), 1, 1.0 / 64.0, 0.5, &mut s), YddeStatus::Ok);
        assert!((s - 1.0).abs() < 1e-12, "{s}");

        assert_eq!(ydde_counterexample_growth(0.4, 2.0, 1000, &mut s), YddeStatus::Ok);
        assert!((s - 1000f64.powf(0.1)).abs() <= 1e-9 * s);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ydde.h")).unwrap();
    for f in [
        "ydde_scenario_from_json",
        "ydde_scenario_builtin",
        "ydde_solve",
        "ydde_solution_copy_values",
        "ydde_solution_free",
        "ydde_last_error_message",
        "typedef struct YddeScenario YddeScenario",
        "YDDE_STATUS_PANIC = 7",
    ] {
        assert!(h.contains(f), "missing {f}");
    }
    let v = unsafe { CStr::from_ptr(ydde_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
