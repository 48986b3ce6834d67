use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use covplan_ffi::*;

const MAP: &str = r#"{"type":"FeatureCollection","frame":"local","features":[
 {"type":"Feature","properties":{"role":"farmland"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[160,0],[160,90],[0,90],[0,0]]]}},
 {"type":"Feature","properties":{"role":"road"},"geometry":{"type":"LineString","coordinates":[[-20,-10],[180,-10]]}}
]}"#;

const FAST: &str = "[fleet]\nuav_count = 2\n[partition_ga]\npopulation = 20\ngenerations = 3\n[rkga]\npopulation = 16\ngenerations = 4\n[validation]\nsamples_per_subarea = 2000\n";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = covplan_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    covplan_string_free(s);
    out
}

#[test]
fn plan_round_trip_through_handles() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(covplan_map_parse(cstr(MAP).as_ptr(), &mut map), CovplanStatus::Ok);
        assert!(covplan_last_error().is_null());
        assert!((covplan_map_area(map) - 14400.0).abs() < 1e-6);
        let mut cfg = ptr::null_mut();
        assert_eq!(covplan_config_from_toml(cstr(FAST).as_ptr(), &mut cfg), CovplanStatus::Ok);

        let mut plan = ptr::null_mut();
        assert_eq!(covplan_plan_mission(map, cfg, 7, &mut plan), CovplanStatus::Ok);
        assert_eq!(covplan_plan_subarea_count(plan), 1);
        assert!(covplan_plan_makespan(plan) > 0.0);

        let mut passed = false;
        let mut report = ptr::null_mut();
        assert_eq!(covplan_plan_validate(plan, map, cfg, &mut passed, &mut report), CovplanStatus::Ok);
        let report = take(report);
        assert!(passed, "{report}");
        assert!(report.contains("PASS coverage"));

        let mut json = ptr::null_mut();
        assert_eq!(covplan_plan_to_json(plan, false, &mut json), CovplanStatus::Ok);
        let json = take(json);
        let mut back = ptr::null_mut();
        assert_eq!(covplan_plan_from_json(cstr(&json).as_ptr(), &mut back), CovplanStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(covplan_plan_to_json(back, false, &mut again), CovplanStatus::Ok);
        assert_eq!(take(again), json);

        let mut svg = ptr::null_mut();
        assert_eq!(covplan_plan_render_svg(plan, map, CovplanLayer::Car, &mut svg), CovplanStatus::Ok);
        let svg = take(svg);
        assert!(svg.starts_with("<svg") && svg.contains(r#"<g id="car">"#));

        covplan_plan_free(back);
        covplan_plan_free(plan);
        covplan_config_free(cfg);
        covplan_map_free(map);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(covplan_map_parse(ptr::null(), &mut map), CovplanStatus::NullArgument);
        assert!(last_error().contains("null"));
        assert_eq!(covplan_map_parse(cstr("{not json").as_ptr(), &mut map), CovplanStatus::LoadFailed);
        assert!(map.is_null());
        assert_eq!(
            covplan_map_load(cstr("/nonexistent/field.geojson").as_ptr(), &mut map),
            CovplanStatus::InputError,
            "{}",
            last_error()
        );

        let mut cfg = ptr::null_mut();
        assert_eq!(covplan_config_from_toml(cstr("[fleet]\nuav_count = 0\n").as_ptr(), &mut cfg), CovplanStatus::InvalidArgument);
        assert!(cfg.is_null());
        let bad = [0xffu8, 0];
        assert_eq!(covplan_config_from_toml(bad.as_ptr().cast(), &mut cfg), CovplanStatus::InvalidUtf8);

        let mut plan = ptr::null_mut();
        let def = covplan_config_default();
        assert_eq!(covplan_plan_mission(ptr::null(), def, 0, &mut plan), CovplanStatus::NullArgument);
        covplan_config_free(def);
        assert_eq!(covplan_plan_subarea_count(ptr::null()), 0);
        covplan_map_free(ptr::null_mut());
        covplan_plan_free(ptr::null_mut());
        covplan_string_free(ptr::null_mut());
    }
}

#[test]
fn atsp_over_raw_matrix() {
    let cost = [0.0, 1.0, 9.0, 9.0, 0.0, 1.0, 5.0, 9.0, 0.0];
    let mut order = [usize::MAX; 3];
    let mut total = 0.0;
    unsafe {
        assert_eq!(covplan_atsp_order(cost.as_ptr(), 3, usize::MAX, order.as_mut_ptr(), &mut total), CovplanStatus::Ok);
        assert_eq!(order, [0, 1, 2]);
        assert_eq!(total, 2.0);
        assert_eq!(covplan_atsp_order(cost.as_ptr(), 3, 2, order.as_mut_ptr(), &mut total), CovplanStatus::Ok);
        assert_eq!(order, [2, 0, 1]);
        assert_eq!(total, 6.0);
        assert_eq!(covplan_atsp_order(cost.as_ptr(), 0, 0, order.as_mut_ptr(), &mut total), CovplanStatus::InvalidArgument);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(covplan_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/covplan.h")
}

fn cc() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for e in exports {
        assert!(h.contains(&format!(" {e}(")) || h.contains(&format!("*{e}(")), "{e} missing from header");
    }
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    for std in ["-std=c99", "-std=c11"] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Wextra", "-Werror", std, "-x", "c"])
            .arg(header())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

/// Link a C program against the static library and run it.
#[test]
fn c_program_links_and_plans() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libcovplan_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("ffi_smoke.c");
    let bin = tmp.join("ffi_smoke");
    let map = tmp.join("ffi_smoke.geojson");
    std::fs::write(&map, MAP).unwrap();
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "covplan.h"
int main(int argc, char **argv) {
    CovplanMap *map = NULL;
    CovplanConfig *cfg = NULL;
    CovplanPlan *plan = NULL;
    char *json = NULL;
    bool ok = false;
    if (argc < 3) return 10;
    if (covplan_map_load(argv[1], &map) != COVPLAN_STATUS_OK) { fprintf(stderr, "%s\n", covplan_last_error()); return 11; }
    if (covplan_config_from_toml(argv[2], &cfg) != COVPLAN_STATUS_OK) return 12;
    if (covplan_plan_mission(map, cfg, 3, &plan) != COVPLAN_STATUS_OK) { fprintf(stderr, "%s\n", covplan_last_error()); return 13; }
    if (covplan_plan_validate(plan, map, cfg, &ok, NULL) != COVPLAN_STATUS_OK || !ok) return 14;
    if (covplan_plan_to_json(plan, false, &json) != COVPLAN_STATUS_OK) return 15;
    printf("%zu %d\n", covplan_plan_subarea_count(plan), strstr(json, "covplan-plan") != NULL);
    covplan_string_free(json);
    covplan_plan_free(plan);
    covplan_config_free(cfg);
    covplan_map_free(map);
    return 0;
}
"#,
    )
    .unwrap();
    let out = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).arg(&map).arg(FAST).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "1 1");
}
