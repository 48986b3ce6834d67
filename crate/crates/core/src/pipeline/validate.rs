//! Independent checks of a finished mission plan.

use serde::{Deserialize, Serialize};

use crate::fleet::FleetSpec;
use crate::geometry::{closest_point_on_segment, union, Point, PolygonWithHoles, SegmentIndex};
use crate::routing::shortest_path;

use super::{compute_metrics, FieldMap, MissionPlan};

/// Tolerance added to the w/2 coverage radius, meters.
pub const COVERAGE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Slack of the tightest instance; negative when violated.
    pub worst_margin: f64,
    pub detail: String,
    /// Where the tightest instance sits, when it has a place.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {:<20} margin {:>14.6}  {}", c.name, c.worst_margin, c.detail));
            if let Some(p) = c.location {
                s.push_str(&format!(" at ({:.3}, {:.3})", p.x, p.y));
            }
            s.push('\n');
        }
        s
    }
}

fn check(name: &str, worst_margin: f64, detail: String, location: Option<Point>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: worst_margin >= 0.0,
        worst_margin,
        detail,
        location,
    }
}

/// Grid points inside `polys`, about `count` of them.
fn sample_points(polys: &[PolygonWithHoles], count: usize) -> Vec<Point> {
    let area: f64 = polys.iter().map(PolygonWithHoles::area).sum();
    if area <= 0.0 || count == 0 {
        return Vec::new();
    }
    let step = (area / count as f64).sqrt();
    let mut out = Vec::new();
    for p in polys {
        let bb = p.bbox();
        let nx = (bb.width() / step).ceil() as usize;
        let ny = (bb.height() / step).ceil() as usize;
        for i in 0..nx {
            for j in 0..ny {
                let q = Point::new(bb.min.x + (i as f64 + 0.5) * step, bb.min.y + (j as f64 + 0.5) * step);
                if p.contains(q) {
                    out.push(q);
                }
            }
        }
        // boundary vertices are the hardest spots to reach
        out.extend(p.rings().flatten().copied());
    }
    out
}

fn coverage(plan: &MissionPlan, region: &[PolygonWithHoles], fleet: &FleetSpec, samples: usize) -> CheckResult {
    let half = fleet.coverage_width / 2.0;
    let segs: Vec<(Point, Point)> = plan
        .subareas
        .iter()
        .flat_map(|s| s.trails.iter())
        .flat_map(|t| {
            if t.ring.len() == 1 {
                vec![(t.ring[0], t.ring[0])]
            } else {
                t.segments().collect()
            }
        })
        .collect();
    if segs.is_empty() {
        return check("coverage", -half, "plan has no trails".into(), None);
    }
    let index = SegmentIndex::new(segs, fleet.coverage_width.max(1.0));
    let pts = sample_points(region, samples * plan.subareas.len().max(1));
    let mut worst = (f64::NEG_INFINITY, None);
    let mut misses = 0;
    for q in &pts {
        let d = index.distance(*q);
        if d > half + COVERAGE_TOL {
            misses += 1;
        }
        if d > worst.0 {
            worst = (d, Some(*q));
        }
    }
    let margin = half + COVERAGE_TOL - worst.0;
    let detail = if misses == 0 {
        format!("{} samples within w/2 of a trail", pts.len())
    } else {
        format!("{misses} of {} samples farther than w/2 from every trail; gap {:.3} m", pts.len(), worst.0)
    };
    check("coverage", margin, detail, worst.1)
}

fn partition(plan: &MissionPlan, region: &[PolygonWithHoles]) -> CheckResult {
    let target: f64 = region.iter().map(PolygonWithHoles::area).sum();
    let cells: Vec<PolygonWithHoles> = plan.subareas.iter().map(|s| s.cell.clone()).collect();
    let sum: f64 = cells.iter().map(PolygonWithHoles::area).sum();
    let merged: f64 = union(&cells).iter().map(PolygonWithHoles::area).sum();
    let tol = 1e-6 * target.max(1.0);
    let overlap = sum - merged;
    let gap = target - merged;
    let margin = tol - overlap.abs().max(gap.abs());
    check(
        "partition",
        margin,
        format!("cells sum {sum:.3} m^2, union {merged:.3} m^2, field {target:.3} m^2"),
        None,
    )
}

fn uniqueness(plan: &MissionPlan, fleet: &FleetSpec) -> CheckResult {
    let mut bad = Vec::new();
    for s in &plan.subareas {
        let mut count = vec![0usize; s.trails.len()];
        for &t in s.assignment.routes.iter().flatten() {
            if t < count.len() {
                count[t] += 1;
            } else {
                bad.push(format!("sub-area {} routes unknown trail {t}", s.id));
            }
        }
        for (t, &c) in count.iter().enumerate() {
            if c != 1 {
                bad.push(format!("sub-area {} trail {t} flown {c} times", s.id));
            }
        }
        if s.assignment.routes.len() > fleet.uav_count {
            bad.push(format!("sub-area {} uses {} UAVs", s.id, s.assignment.routes.len()));
        }
    }
    let margin = if bad.is_empty() { 0.0 } else { -(bad.len() as f64) };
    let detail = if bad.is_empty() {
        "every trail flown exactly once".to_string()
    } else {
        bad.join("; ")
    };
    check("trail_assignment", margin, detail, None)
}

fn battery(plan: &MissionPlan, fleet: &FleetSpec) -> CheckResult {
    let d = fleet.battery_distance();
    let mut worst = (f64::INFINITY, String::new(), None);
    for s in &plan.subareas {
        for (k, r) in s.assignment.routes.iter().enumerate() {
            let load: f64 = r.iter().filter_map(|&t| s.trails.get(t)).map(|t| t.perimeter).sum();
            let slack = d * (1.0 + 1e-12) - load;
            if slack < worst.0 {
                let at = r.first().map(|&t| s.assignment.access_points[t]);
                worst = (slack, format!("sub-area {} UAV {k} flies {load:.3} m of trail, battery {d:.3} m", s.id), at);
            }
        }
    }
    if worst.0.is_infinite() {
        return check("battery", d, "no routes".into(), None);
    }
    check("battery", worst.0, worst.1, worst.2)
}

fn comm_radius(plan: &MissionPlan, map: &FieldMap, fleet: &FleetSpec) -> CheckResult {
    if map.roads.is_empty() {
        return check("comm_radius", fleet.comm_radius, "no road network, no car spots".into(), None);
    }
    let mut worst = (f64::INFINITY, String::new(), None);
    for s in &plan.subareas {
        let Some(sp) = s.spots else {
            return check("comm_radius", -fleet.comm_radius, format!("sub-area {} has no car spots", s.id), None);
        };
        for spot in [sp.start, sp.end] {
            let Some(&c) = map.roads.nodes.get(spot) else {
                return check("comm_radius", -fleet.comm_radius, format!("sub-area {} spot {spot} is not a road node", s.id), None);
            };
            for &t in s.assignment.routes.iter().flatten() {
                let p = s.assignment.access_points[t];
                let slack = fleet.comm_radius - c.dist(p);
                if slack < worst.0 {
                    worst = (slack, format!("sub-area {} spot {spot} to trail {t}: {:.3} m", s.id, c.dist(p)), Some(p));
                }
            }
        }
    }
    check("comm_radius", worst.0, worst.1, worst.2)
}

fn obstacles(plan: &MissionPlan, map: &FieldMap, region: &[PolygonWithHoles], fleet: &FleetSpec) -> CheckResult {
    let step = fleet.coverage_width / 8.0;
    let tol = 1e-6;
    let mut worst = (f64::INFINITY, None);
    for t in plan.subareas.iter().flat_map(|s| s.trails.iter()) {
        let segs: Vec<(Point, Point)> = if t.ring.len() == 1 {
            vec![(t.ring[0], t.ring[0])]
        } else {
            t.segments().collect()
        };
        for (a, b) in segs {
            let n = ((a.dist(b) / step).ceil() as usize).max(1);
            for k in 0..=n {
                let q = a.lerp(b, k as f64 / n as f64);
                // inside an obstacle counts negative, as does leaving the farmland
                let mut margin = f64::INFINITY;
                for o in &map.obstacles {
                    let d = o.distance_to_boundary(q);
                    margin = margin.min(if o.contains(q) { -d } else { d });
                }
                if !region.iter().any(|r| r.contains(q)) {
                    let d = region.iter().map(|r| r.distance_to_boundary(q)).fold(f64::INFINITY, f64::min);
                    margin = margin.min(-d);
                }
                if margin < worst.0 {
                    worst = (margin, Some(q));
                }
            }
        }
    }
    if worst.0.is_infinite() {
        return check("obstacle_avoidance", 0.0, "no obstacles".into(), None);
    }
    let detail = if worst.0 + tol >= 0.0 {
        "trails stay in farmland and out of obstacles".to_string()
    } else {
        format!("trail point {:.3} m inside an obstacle or outside the farmland", -worst.0)
    };
    check("obstacle_avoidance", worst.0 + tol, detail, worst.1)
}

fn access_points(plan: &MissionPlan) -> CheckResult {
    let mut worst = (0.0f64, String::new(), None);
    for s in &plan.subareas {
        for (t, tr) in s.trails.iter().enumerate() {
            let Some(&p) = s.assignment.access_points.get(t) else {
                return check("access_points", -1.0, format!("sub-area {} trail {t} has no access point", s.id), None);
            };
            let d = if tr.ring.len() == 1 {
                tr.ring[0].dist(p)
            } else {
                tr.segments().map(|(a, b)| closest_point_on_segment(p, a, b).0.dist(p)).fold(f64::INFINITY, f64::min)
            };
            if d > worst.0 {
                worst = (d, format!("sub-area {} trail {t} access point {d:.2e} m off the trail", s.id), Some(p));
            }
        }
    }
    check("access_points", 1e-7 - worst.0, if worst.1.is_empty() { "all on their trails".into() } else { worst.1 }, worst.2)
}

fn metrics(plan: &MissionPlan, map: &FieldMap, fleet: &FleetSpec) -> CheckResult {
    let fresh = compute_metrics(&plan.subareas, plan.car.as_ref(), &map.roads, fleet);
    if fresh.uavs.len() != plan.metrics.uavs.len() {
        return check("metrics", -1.0, "UAV metric count differs from the routes".into(), None);
    }
    let mut worst = 0.0f64;
    for (a, b) in fresh.uavs.iter().zip(&plan.metrics.uavs) {
        worst = worst.max((a.total_distance - b.total_distance).abs());
    }
    worst = worst.max((fresh.car_distance - plan.metrics.car_distance).abs());
    check("metrics", 1e-6 - worst, format!("largest distance mismatch {worst:.3e} m"), None)
}

fn car(plan: &MissionPlan, map: &FieldMap) -> CheckResult {
    let Some(c) = &plan.car else {
        let ok = map.roads.is_empty();
        return check("car_route", if ok { 0.0 } else { -1.0 }, if ok { "no roads".into() } else { "roads present but no car plan".into() }, None);
    };
    let mut order = c.order.clone();
    order.sort_unstable();
    if order != (0..plan.subareas.len()).collect::<Vec<_>>() {
        return check("car_route", -1.0, "car does not visit every sub-area once".into(), None);
    }
    let mut total = 0.0;
    for (leg, w) in c.legs.iter().zip(c.order.windows(2)) {
        let (from, to) = (c.spots[w[0]].end, c.spots[w[1]].start);
        let ok_ends = leg.path.nodes.first() == Some(&from) && leg.path.nodes.last() == Some(&to);
        let best = shortest_path(&map.roads, from, to).map(|p| p.distance).unwrap_or(f64::INFINITY);
        if !ok_ends || (leg.path.distance - best).abs() > 1e-6 {
            return check("car_route", -1.0, format!("leg {} -> {} is not a shortest road path", w[0], w[1]), None);
        }
        total += leg.path.distance;
    }
    let err = (total - c.total_distance).abs();
    check("car_route", 1e-6 - err, format!("{} legs, {total:.3} m", c.legs.len()), None)
}

/// Check coverage, partition, assignment, battery, comm radius, obstacles and metrics.
pub fn validate_mission(plan: &MissionPlan, map: &FieldMap, fleet: &FleetSpec) -> ValidationReport {
    validate_mission_with(plan, map, fleet, 10_000)
}

/// As `validate_mission`, sampling about `samples_per_subarea` coverage points per sub-area.
pub fn validate_mission_with(plan: &MissionPlan, map: &FieldMap, fleet: &FleetSpec, samples_per_subarea: usize) -> ValidationReport {
    let region = map.region();
    let checks = vec![
        coverage(plan, &region, fleet, samples_per_subarea),
        partition(plan, &region),
        uniqueness(plan, fleet),
        battery(plan, fleet),
        comm_radius(plan, map, fleet),
        obstacles(plan, map, &region, fleet),
        access_points(plan),
        metrics(plan, map, fleet),
        car(plan, map),
    ];
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
