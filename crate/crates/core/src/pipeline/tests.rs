use super::*;

fn fast_config(k: usize) -> Config {
    let mut c = Config::default();
    c.fleet.uav_count = k;
    c.partition_ga.population = 20;
    c.partition_ga.generations = 3;
    c.rkga.population = 16;
    c.rkga.generations = 4;
    c.validation.samples_per_subarea = 2000;
    c
}

fn rectangle_map(w: f64, h: f64, road: bool) -> FieldMap {
    let roads = if road {
        vec![vec![Point::new(-20.0, -10.0), Point::new(w + 20.0, -10.0)]]
    } else {
        Vec::new()
    };
    FieldMap::from_parts(vec![PolygonWithHoles::rectangle(0.0, 0.0, w, h)], Vec::new(), roads).unwrap()
}

#[test]
fn config_defaults_and_overrides() {
    let c = Config::from_toml("").unwrap();
    assert_eq!(c, Config::default());
    assert_eq!(c.fleet.uav_count, 4);
    let c = Config::from_toml("[fleet]\nuav_count = 2\n[rkga]\npopulation = 10\n").unwrap();
    assert_eq!(c.fleet.uav_count, 2);
    assert_eq!(c.rkga.population, 10);
    assert_eq!(c.rkga.generations, GaParams::rkga().generations);
    assert!(Config::from_toml("[fleet]\nspeed = 3\n").is_err());
    assert!(Config::from_toml("[fleet]\nuav_count = 0\n").is_err());
    assert_ne!(c.sha256(), Config::default().sha256());
}

#[test]
fn rectangle_plan_validates() {
    let map = rectangle_map(200.0, 120.0, true);
    let cfg = fast_config(2);
    let plan = plan_mission(&map, &cfg, 3).unwrap();
    assert_eq!(plan.subareas.len(), 1);
    let report = validate_mission_with(&plan, &map, &cfg.fleet, 2000);
    assert!(report.passed, "{}", report.summary());
    let s = &plan.subareas[0];
    assert!(s.access.squared_after <= s.access.squared_before);
    assert!(plan.car.is_some());
    for u in &plan.metrics.uavs {
        assert!((u.flight_time - u.total_distance / cfg.fleet.cruise_speed).abs() < 1e-9);
    }
}

#[test]
fn plans_are_byte_identical() {
    let map = rectangle_map(150.0, 90.0, true);
    let cfg = fast_config(2);
    let a = plan_mission(&map, &cfg, 9).unwrap().to_json(false);
    let b = plan_mission(&map, &cfg, 9).unwrap().to_json(false);
    assert_eq!(a, b);
    assert!(!a.contains("timings"));
    let back = MissionPlan::from_json(&a).unwrap();
    assert_eq!(back.to_json(false), a);
}

#[test]
fn faults_are_reported() {
    let map = rectangle_map(200.0, 120.0, false);
    let cfg = fast_config(2);
    let plan = plan_mission(&map, &cfg, 1).unwrap();
    assert!(validate_mission_with(&plan, &map, &cfg.fleet, 2000).passed);

    let mut missing = plan.clone();
    let s = &mut missing.subareas[0];
    s.trails.remove(0);
    let report = validate_mission_with(&missing, &map, &cfg.fleet, 2000);
    let cov = report.check("coverage").unwrap();
    assert!(!cov.passed);
    assert!(cov.location.is_some());

    let mut fleet = cfg.fleet.clone();
    let longest = plan
        .subareas
        .iter()
        .flat_map(|s| s.assignment.routes.iter().map(move |r| r.iter().map(|&t| s.trails[t].perimeter).sum::<f64>()))
        .fold(0.0, f64::max);
    fleet.endurance = 0.5 * longest / fleet.cruise_speed;
    let report = validate_mission_with(&plan, &map, &fleet, 2000);
    assert!(!report.check("battery").unwrap().passed);
}

#[test]
fn render_layers() {
    let map = rectangle_map(200.0, 120.0, false);
    let cfg = fast_config(2);
    let plan = plan_mission(&map, &cfg, 1).unwrap();
    let svg = render_svg(&plan, &map, Layer::All);
    assert!(!svg.contains(r#"<g id="car">"#));
    assert_eq!(svg, render_svg(&plan, &map, Layer::All));
    assert!(svg.contains(r#"<g id="routes">"#));
    let only = render_svg(&plan, &map, Layer::Partition);
    assert!(!only.contains(r#"<g id="trails">"#));
}

#[test]
fn stages_chain_into_a_plan() {
    let map = rectangle_map(200.0, 120.0, true);
    let cfg = fast_config(2);
    let p = stage_partition(&map, &cfg, 5).unwrap();
    let p = StageFile::from_json(&p.to_json()).unwrap();
    assert!(stage_assign(&p, &cfg).is_err());
    let t = StageFile::from_json(&stage_trails(&p, &cfg).unwrap().to_json()).unwrap();
    let a = StageFile::from_json(&stage_assign(&t, &cfg).unwrap().to_json()).unwrap();
    let plan = stage_route(&a, &map, &cfg).unwrap();
    assert!(validate_mission_with(&plan, &map, &cfg.fleet, 2000).passed);
    let full = plan_mission(&map, &cfg, 5).unwrap();
    assert_eq!(full.subareas, plan.subareas);
}
