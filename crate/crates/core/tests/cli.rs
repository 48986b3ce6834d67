use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const MAP: &str = r#"{"type":"FeatureCollection","frame":"local","features":[
 {"type":"Feature","properties":{"role":"farmland"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[200,0],[200,120],[0,120],[0,0]]]}},
 {"type":"Feature","properties":{"role":"obstacle"},"geometry":{"type":"Polygon","coordinates":[[[90,50],[110,50],[110,70],[90,70],[90,50]]]}},
 {"type":"Feature","properties":{"role":"road"},"geometry":{"type":"LineString","coordinates":[[-20,-10],[220,-10]]}}
]}"#;

const CONFIG: &str = "[fleet]\nuav_count = 2\n[partition_ga]\npopulation = 20\ngenerations = 3\n[rkga]\npopulation = 16\ngenerations = 4\n[validation]\nsamples_per_subarea = 2000\n";

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Work {
        let w = Work { dir: TempDir::new().unwrap() };
        std::fs::write(w.path("map.geojson"), MAP).unwrap();
        std::fs::write(w.path("config.toml"), CONFIG).unwrap();
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_covplan"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

const BASE: [&str; 4] = ["--map", "map.geojson", "--config", "config.toml"];

fn args<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(BASE);
    v.extend(extra);
    v
}

#[test]
fn plan_validate_render() {
    let w = Work::new();
    w.ok(&args("plan", &["--seed", "4", "--out", "plan.json"]));
    let plan = read(&w.path("plan.json"));
    assert!(plan.contains("\"covplan-plan\""));
    assert!(!plan.contains("timings"));

    let out = w.ok(&args("validate", &["--plan", "plan.json"]));
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.lines().all(|l| l.starts_with("PASS")), "{report}");

    w.ok(&args("render", &["--plan", "plan.json", "--layer", "trails", "--out", "plan.svg"]));
    let svg = read(&w.path("plan.svg"));
    assert!(svg.starts_with("<svg") && svg.contains(r#"<g id="trails">"#) && !svg.contains(r#"<g id="routes">"#));

    let out = w.ok(&args("plan", &["--seed", "4", "--timings"]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("timings"));
}

#[test]
fn stages_match_the_one_shot_plan() {
    let w = Work::new();
    w.ok(&args("plan", &["--seed", "8", "--out", "plan.json"]));
    w.ok(&args("partition", &["--seed", "8", "--out", "p.json"]));
    w.ok(&args("trails", &["--input", "p.json", "--out", "t.json"]));
    w.ok(&args("assign", &["--input", "t.json", "--out", "a.json"]));
    w.ok(&args("route", &["--input", "a.json", "--out", "staged.json"]));
    assert_eq!(read(&w.path("staged.json")), read(&w.path("plan.json")));
    // stages refuse input from the wrong step
    assert_eq!(w.run(&args("route", &["--input", "t.json"])).status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let w = Work::new();
    assert_eq!(w.run(&["plan", "--map", "missing.geojson"]).status.code(), Some(3));
    assert_eq!(w.run(&["plan", "--bogus"]).status.code(), Some(3));
    assert_eq!(w.run(&["--version"]).status.code(), Some(0));

    std::fs::write(w.path("bad.toml"), "[fleet]\nspeed = 3\n").unwrap();
    assert_eq!(w.run(&["plan", "--map", "map.geojson", "--config", "bad.toml"]).status.code(), Some(3));

    std::fs::write(w.path("far.toml"), format!("{CONFIG}\n").replace("uav_count = 2", "uav_count = 2\ncomm_radius = 30.0")).unwrap();
    let out = w.run(&["plan", "--map", "map.geojson", "--config", "far.toml"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));

    // a plan checked against a shorter battery fails validation
    w.ok(&args("plan", &["--out", "plan.json"]));
    std::fs::write(w.path("short.toml"), CONFIG.replace("uav_count = 2", "uav_count = 2\nendurance = 20.0")).unwrap();
    let out = w.run(&["validate", "--map", "map.geojson", "--config", "short.toml", "--plan", "plan.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL battery"));
}
