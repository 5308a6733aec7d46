use std::ffi::{CStr, CString};
use std::ptr;

use sbp_mhd_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sbp_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn operator_round_trip() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(
            sbp_operator_new(SbpOperatorKind::Lgl, 3, &mut op),
            SbpStatus::Ok
        );
        assert_eq!(sbp_operator_num_nodes(op), 4);
        let mut w = [0.0; 4];
        assert_eq!(sbp_operator_weights(op, w.as_mut_ptr(), 4), SbpStatus::Ok);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
        let mut x = [0.0; 4];
        assert_eq!(sbp_operator_nodes(op, x.as_mut_ptr(), 4), SbpStatus::Ok);
        assert_eq!((x[0], x[3]), (-1.0, 1.0));
        let mut ok = false;
        assert_eq!(sbp_operator_check(op, 1e-13, &mut ok), SbpStatus::Ok);
        assert!(ok);
        assert_eq!(
            sbp_operator_nodes(op, x.as_mut_ptr(), 3),
            SbpStatus::BufferTooSmall
        );
        assert!(last_error().contains("3"));
        sbp_operator_free(op);
    }
}

#[test]
fn fd_operator_and_equivalence() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(
            sbp_operator_new(SbpOperatorKind::FdSbp, 13, &mut op),
            SbpStatus::Ok
        );
        let mut w = [0.0; 13];
        sbp_operator_weights(op, w.as_mut_ptr(), 13);
        // boundary norm entry 17/48 on a spacing of 2/12
        assert!((w[0] - 17.0 / 48.0 / 6.0).abs() < 1e-15);
        let mut d = f64::NAN;
        assert_eq!(
            sbp_equivalence_deviation(op, 2, 2, 5, &mut d),
            SbpStatus::Ok
        );
        assert!(d <= 1e-12);
        assert_eq!(
            sbp_equivalence_deviation(op, 0, 2, 5, &mut d),
            SbpStatus::InvalidArgument
        );
        sbp_operator_free(op);
    }
}

#[test]
fn invalid_requests_report_errors() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(
            sbp_operator_new(SbpOperatorKind::FdSbp, 5, &mut op),
            SbpStatus::Config
        );
        assert!(op.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            sbp_operator_new(SbpOperatorKind::Lgl, 3, ptr::null_mut()),
            SbpStatus::NullPointer
        );
        assert_eq!(sbp_operator_num_nodes(ptr::null()), 0);
        sbp_operator_free(ptr::null_mut());
        sbp_simulation_free(ptr::null_mut());
        assert!(sbp_simulation_time(ptr::null()).is_nan());

        let mut sim = ptr::null_mut();
        let cfg = CString::new("dof=64\n").unwrap();
        assert_eq!(
            sbp_simulation_new(cfg.as_ptr(), &mut sim),
            SbpStatus::Config
        );
        assert!(last_error().contains("orszag_tang"));
        let cfg = CString::new("problem=rotor\nscheme=fdsbp:13\ndof=64").unwrap();
        assert_eq!(
            sbp_simulation_new(cfg.as_ptr(), &mut sim),
            SbpStatus::Config
        );
        assert!(sim.is_null());
    }
}

#[test]
fn simulation_steps_conserve_mass() {
    unsafe {
        let cfg = CString::new("problem=orszag_tang\nscheme=lgl:3\ndof=16\nlimiter=idp\n").unwrap();
        let mut sim = ptr::null_mut();
        assert_eq!(
            sbp_simulation_new(cfg.as_ptr(), &mut sim),
            SbpStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(sbp_simulation_num_nodes(sim), 256);
        let mut m0 = 0.0;
        sbp_simulation_mass(sim, &mut m0);
        assert_eq!(sbp_simulation_step(sim, 3), SbpStatus::Ok);
        let dt = sbp_simulation_dt(sim);
        assert!((sbp_simulation_time(sim) - 3.0 * dt).abs() < 1e-15);
        assert_eq!(sbp_simulation_advance_to(sim, 0.03), SbpStatus::Ok);
        assert!((sbp_simulation_time(sim) - 0.03).abs() < 1e-14);
        let mut m1 = 0.0;
        sbp_simulation_mass(sim, &mut m1);
        assert!(((m1 - m0) / m0).abs() < 1e-12);
        let mut d = SbpDiagnostics::default();
        assert_eq!(sbp_simulation_diagnostics(sim, &mut d), SbpStatus::Ok);
        assert!((d.t - 0.03).abs() < 1e-14);
        assert!(d.min_rho > 0.0 && d.min_p > 0.0);
        assert!((0.0..=1.0).contains(&d.mean_alpha));
        let mut state = vec![0.0; 9 * 256];
        assert_eq!(
            sbp_simulation_state(sim, state.as_mut_ptr(), state.len()),
            SbpStatus::Ok
        );
        assert!(state.iter().all(|v| v.is_finite()));
        assert_eq!(
            sbp_simulation_state(sim, state.as_mut_ptr(), 10),
            SbpStatus::BufferTooSmall
        );
        sbp_simulation_free(sim);
    }
}

#[test]
fn header_declares_the_interface() {
    let h =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sbp_mhd.h")).unwrap();
    for name in [
        "sbp_operator_new",
        "sbp_operator_free",
        "sbp_simulation_new",
        "sbp_simulation_advance_to",
        "sbp_last_error_message",
        "typedef struct SbpSimulation SbpSimulation",
        "SBP_STATUS_OK",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(sbp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::env::temp_dir().join(format!("sbp_mhd_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"sbp_mhd.h\"\nint main(void) { SbpOperator *op = 0; return sbp_operator_new(SBP_OPERATOR_KIND_LGL, 3, &op); }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("no C compiler ({e}); skipped"),
    }
}
