use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use igdyn_ffi::*;

fn last_error() -> String {
    let p = igdyn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn model_lifecycle_and_curvature() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(igdyn_model_gaussian_product(1, &mut model), IgdynStatus::Ok);
        let mut dim = 0;
        assert_eq!(igdyn_model_dimension(model, &mut dim), IgdynStatus::Ok);
        assert_eq!(dim, 6);
        let x = [0.1, 1.2, -0.3, 0.8, 0.0, 2.0];
        let mut r = 0.0;
        assert_eq!(igdyn_ricci_scalar(model, x.as_ptr(), 6, true, &mut r), IgdynStatus::Ok);
        assert!((r + 3.0).abs() < 1e-6);
        let mut g = [0.0; 36];
        assert_eq!(igdyn_metric(model, x.as_ptr(), 6, g.as_mut_ptr(), 36), IgdynStatus::Ok);
        assert!((g[7] - 2.0 / 1.44).abs() < 1e-12);
        assert_eq!(igdyn_metric(model, x.as_ptr(), 6, g.as_mut_ptr(), 35), IgdynStatus::BufferTooSmall);
        igdyn_model_free(model);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(igdyn_model_correlated_gaussian(1.0, &mut model), IgdynStatus::Domain);
        assert!(model.is_null());
        assert!(last_error().contains("domain"), "{}", last_error());
        assert_eq!(igdyn_model_gaussian_product(1, ptr::null_mut()), IgdynStatus::NullPointer);
        assert_eq!(igdyn_model_iho(ptr::null(), 2, &mut model), IgdynStatus::NullPointer);
        let mut dim = 0;
        assert_eq!(igdyn_model_dimension(ptr::null(), &mut dim), IgdynStatus::NullPointer);
        igdyn_model_free(ptr::null_mut());
    }
}

#[test]
fn geodesic_handle() {
    unsafe {
        let f = [1.0, 1.0];
        let mut model = ptr::null_mut();
        assert_eq!(igdyn_model_iho(f.as_ptr(), 2, &mut model), IgdynStatus::Ok);
        let theta = [0.0, 0.0];
        let vel = [1.0, 0.0];
        let mut traj = ptr::null_mut();
        assert_eq!(
            igdyn_geodesic(model, theta.as_ptr(), vel.as_ptr(), 2, 1.0, 0.25, &mut traj),
            IgdynStatus::Ok
        );
        let mut len = 0;
        assert_eq!(igdyn_trajectory_len(traj, &mut len), IgdynStatus::Ok);
        assert_eq!(len, 5);
        let (mut tau, mut th, mut v) = (0.0, [0.0; 2], [0.0; 2]);
        assert_eq!(
            igdyn_trajectory_sample(traj, 4, &mut tau, th.as_mut_ptr(), v.as_mut_ptr(), 2),
            IgdynStatus::Ok
        );
        assert_eq!(tau, 1.0);
        assert!(th[0] > 0.0 && th[1] == 0.0);
        assert_eq!(
            igdyn_trajectory_sample(traj, 5, &mut tau, th.as_mut_ptr(), v.as_mut_ptr(), 2),
            IgdynStatus::InvalidArgument
        );
        igdyn_trajectory_free(traj);
        igdyn_model_free(model);
    }
}

#[test]
fn scenario_report_round_trip() {
    let cfg = CString::new(
        "name = \"c\"\nkind = \"CURVATURE\"\nmodel = \"gaussian_product\"\nn_particles = 1\nsamples = 2\n",
    )
    .unwrap();
    unsafe {
        let mut json = ptr::null_mut();
        let mut pass = false;
        assert_eq!(igdyn_run_scenario(cfg.as_ptr(), &mut json, &mut pass), IgdynStatus::Ok);
        assert!(pass);
        let text = CStr::from_ptr(json).to_string_lossy().into_owned();
        assert!(text.contains("\"schema_version\": 1"));
        igdyn_string_free(json);
        let bad = CString::new("kind = ").unwrap();
        assert_eq!(igdyn_run_scenario(bad.as_ptr(), &mut json, &mut pass), IgdynStatus::ConfigParse);
        assert!(last_error().contains("line 1"));
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/igdyn.h")).unwrap();
    for name in [
        "IGDYN_H",
        "typedef struct IgdynModel IgdynModel;",
        "IGDYN_STATUS_OK = 0",
        "igdyn_last_error_message(void)",
        "igdyn_model_gaussian_product(",
        "igdyn_geodesic(",
        "igdyn_run_scenario(",
        "igdyn_string_free(",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libigdyn_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join(format!("igdyn_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{:?}", run);
    assert!(String::from_utf8_lossy(&run.stdout).contains("dim=12"));
}
