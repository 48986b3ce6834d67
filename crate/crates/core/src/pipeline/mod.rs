//! End-to-end mission planning: partition, trails, assignment, access points, car route.

mod map;
mod render;
mod validate;

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::access_opt::{build_reduced_miqp, solve_miqp, Budget, SolveStatus};
use crate::assignment::{assemble_assignment, rkga_run, TrailAssignment};
use crate::error::{Error, Result, Stage};
use crate::fleet::FleetSpec;
use crate::ga::{stream, GaParams};
use crate::geometry::{Point, PolygonWithHoles};
use crate::partition::{partition_with_feasibility_from, PartitionWeights};
use crate::routing::{plan_car, select_car_spots, CarPlan, CarSpots, RoadGraph};
use crate::trails::{generate_trails_with, path_metrics, Trail, TrailOptions};

pub use map::{load_map, parse_map, FieldMap};
pub use render::{render_svg, Layer};
pub use validate::{validate_mission, validate_mission_with, CheckResult, ValidationReport};

pub const PLAN_FORMAT: &str = "covplan-plan";
pub const PLAN_VERSION: u32 = 1;
pub const STAGE_FORMAT: &str = "covplan-stage";

const TAG_REGION: u64 = 0x5245_4749;
const TAG_SUBAREA: u64 = 0x5355_4241;

/// Everything that tunes a run. Each TOML table is optional.
///
/// ```toml
/// [fleet]              # uav_count, endurance (s), cruise_speed (m/s), coverage_width (m), comm_radius (m)
/// [partition_ga]       # population, generations, elite_fraction, crossover_rate, mutation_rate
/// [partition_weights]  # area, roundness, perimeter, epsilon, normalize
/// [rkga]               # same keys as partition_ga
/// [trails]             # corner_reach, repair
/// [access_opt]         # max_nodes, time_limit (s)
/// [validation]         # samples_per_subarea
/// [planner]            # retries
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub fleet: FleetSpec,
    pub partition_ga: GaParams,
    pub partition_weights: PartitionWeights,
    pub rkga: GaParams,
    pub trails: TrailOptions,
    pub access_opt: Budget,
    pub validation: ValidationConfig,
    pub planner: PlannerConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fleet: FleetSpec::default(),
            partition_ga: GaParams::partition(),
            partition_weights: PartitionWeights::default(),
            rkga: GaParams::rkga(),
            trails: TrailOptions::default(),
            access_opt: Budget::default(),
            validation: ValidationConfig::default(),
            planner: PlannerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub samples_per_subarea: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            samples_per_subarea: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Re-partitions with more sub-areas after a downstream stage fails.
    pub retries: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { retries: 3 }
    }
}

impl Config {
    /// Parse TOML; keys left out keep their defaults table by table.
    pub fn from_toml(text: &str) -> Result<Config> {
        let bad = |e: &dyn std::fmt::Display| Error::Input(format!("config: {e}"));
        let user: toml::Table = toml::from_str(text).map_err(|e| bad(&e))?;
        let mut merged = toml::Table::try_from(Config::default()).map_err(|e| bad(&e))?;
        for (section, value) in user {
            match (merged.get_mut(&section), value) {
                (Some(toml::Value::Table(base)), toml::Value::Table(over)) => base.extend(over),
                (_, value) => {
                    merged.insert(section, value);
                }
            }
        }
        let c: Config = merged.try_into().map_err(|e| bad(&e))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.fleet.validate()?;
        self.partition_ga.validate()?;
        self.rkga.validate()?;
        if self.access_opt.max_nodes == 0 {
            return Err(Error::argument("access_opt.max_nodes must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the resolved settings.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

/// Reproducibility record embedded in every plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_sha256: Option<String>,
    pub rng_seed: u64,
}

/// Result of access-point refinement in one sub-area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessSummary {
    pub status: SolveStatus,
    pub nodes: usize,
    /// Σ squared transition lengths at the assignment's access points.
    pub squared_before: f64,
    pub squared_after: f64,
    /// Σ transition lengths.
    pub linear_before: f64,
    pub linear_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubareaPlan {
    pub id: usize,
    /// Index of the connected farmland piece this sub-area belongs to.
    pub region: usize,
    pub cell: PolygonWithHoles,
    pub trails: Vec<Trail>,
    /// Assignment found by the genetic search.
    pub initial: TrailAssignment,
    /// Same routes with refined access points.
    pub assignment: TrailAssignment,
    pub access: AccessSummary,
    pub spots: Option<CarSpots>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavMetrics {
    pub subarea: usize,
    pub uav: usize,
    pub trail_count: usize,
    pub trail_distance: f64,
    pub transition_distance: f64,
    /// Car spot to first access point plus last access point to car spot.
    pub car_leg_distance: f64,
    pub total_distance: f64,
    pub flight_time: f64,
    pub turn_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubareaMetrics {
    pub subarea: usize,
    pub area: f64,
    pub trail_count: usize,
    pub max_flight_time: f64,
    pub mean_flight_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub uavs: Vec<UavMetrics>,
    pub subareas: Vec<SubareaMetrics>,
    pub car_distance: f64,
    pub total_uav_distance: f64,
}

/// Wall-clock seconds per stage, summed over sub-areas.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub partition: f64,
    pub trails: f64,
    pub assignment: f64,
    pub access_opt: f64,
    pub routing: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub format: String,
    pub version: u32,
    pub provenance: Provenance,
    pub fleet: FleetSpec,
    pub subareas: Vec<SubareaPlan>,
    pub car: Option<CarPlan>,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn rebuild_trails(trails: &mut [Trail]) -> Result<()> {
    trails.iter_mut().try_for_each(Trail::rebuild)
}

impl MissionPlan {
    /// Pretty JSON; timings only when asked, so that plans stay byte-identical across runs.
    pub fn to_json(&self, with_timings: bool) -> String {
        let mut p = self.clone();
        if !with_timings {
            p.timings = None;
        }
        let mut s = serde_json::to_string_pretty(&p).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<MissionPlan> {
        let mut p: MissionPlan = serde_json::from_str(text).map_err(|e| Error::Input(format!("plan: {e}")))?;
        if p.format != PLAN_FORMAT || p.version != PLAN_VERSION {
            return Err(Error::Input(format!(
                "expected {PLAN_FORMAT} version {PLAN_VERSION}, got {} version {}",
                p.format, p.version
            )));
        }
        for s in &mut p.subareas {
            rebuild_trails(&mut s.trails)?;
        }
        Ok(p)
    }
}

fn derive_seed(seed: u64, tag: u64, a: u64, b: u64) -> u64 {
    stream(seed, tag, a, b).next_u64()
}

fn squared_objective(a: &TrailAssignment) -> f64 {
    a.routes
        .iter()
        .flat_map(|r| r.windows(2))
        .map(|w| a.access_points[w[0]].dist_sq(a.access_points[w[1]]))
        .sum()
}

fn linear_objective(a: &TrailAssignment) -> f64 {
    a.transition_lengths.iter().sum()
}

/// Trails for one sub-area, numbered within it.
pub fn plan_trails(cell: &PolygonWithHoles, subarea: usize, cfg: &Config) -> Result<Vec<Trail>> {
    let mut trails = generate_trails_with(cell, cfg.fleet.coverage_width, &cfg.trails)?;
    for t in &mut trails {
        t.subarea_id = subarea;
    }
    Ok(trails)
}

/// Route set from the genetic search.
pub fn initial_assignment(trails: &[Trail], cfg: &Config, seed: u64) -> Result<TrailAssignment> {
    Ok(rkga_run(trails, cfg.fleet.uav_count, cfg.fleet.battery_distance(), &cfg.rkga, seed)?.assignment)
}

/// Refine the access points of `initial` on its fixed routes.
pub fn refine_access(trails: &[Trail], initial: &TrailAssignment, cfg: &Config) -> Result<(TrailAssignment, AccessSummary)> {
    let prob = build_reduced_miqp(initial, trails)?;
    let sol = solve_miqp(&prob, Some(&initial.access_points), &cfg.access_opt);
    let squared_before = squared_objective(initial);
    if sol.objective > squared_before {
        return Err(Error::infeasible(
            Stage::AccessOpt,
            format!("refined objective {} exceeds incumbent {squared_before}", sol.objective),
        ));
    }
    let costs: Vec<f64> = trails.iter().map(|t| t.perimeter).collect();
    let assignment = assemble_assignment(initial.routes.clone(), &sol.access_points, &costs, None);
    assignment.validate(&costs, cfg.fleet.battery_distance())?;
    let access = AccessSummary {
        status: sol.status,
        nodes: sol.nodes,
        squared_before,
        squared_after: squared_objective(&assignment),
        linear_before: linear_objective(initial),
        linear_after: linear_objective(&assignment),
    };
    Ok((assignment, access))
}

/// Genetic assignment followed by access-point refinement.
pub fn plan_assignment(trails: &[Trail], cfg: &Config, seed: u64) -> Result<(TrailAssignment, TrailAssignment, AccessSummary)> {
    let initial = initial_assignment(trails, cfg, seed)?;
    let (assignment, access) = refine_access(trails, &initial, cfg)?;
    Ok((initial, assignment, access))
}

/// Per-UAV and per-sub-area figures for a finished plan.
pub fn compute_metrics(subareas: &[SubareaPlan], car: Option<&CarPlan>, roads: &RoadGraph, fleet: &FleetSpec) -> Metrics {
    let mut uavs = Vec::new();
    let mut subs = Vec::new();
    for s in subareas {
        let a = &s.assignment;
        let mut times = Vec::new();
        for (k, r) in a.routes.iter().enumerate() {
            if r.is_empty() {
                continue;
            }
            let trail_distance: f64 = r.iter().filter_map(|&t| s.trails.get(t)).map(|t| t.perimeter).sum();
            let transition_distance = a.transition_lengths[k];
            let car_leg_distance = s.spots.map_or(0.0, |sp| {
                roads.nodes[sp.start].dist(a.access_points[r[0]])
                    + a.access_points[*r.last().expect("non-empty")].dist(roads.nodes[sp.end])
            });
            let total_distance = trail_distance + transition_distance + car_leg_distance;
            let turn_count = r
                .iter()
                .filter_map(|&t| s.trails.get(t))
                .map(|t| {
                    let ring = &t.ring;
                    if ring.len() > 2 {
                        path_metrics(ring, true).turn_count
                    } else {
                        0
                    }
                })
                .sum();
            let flight_time = total_distance / fleet.cruise_speed;
            times.push(flight_time);
            uavs.push(UavMetrics {
                subarea: s.id,
                uav: k,
                trail_count: r.len(),
                trail_distance,
                transition_distance,
                car_leg_distance,
                total_distance,
                flight_time,
                turn_count,
            });
        }
        subs.push(SubareaMetrics {
            subarea: s.id,
            area: s.cell.area(),
            trail_count: s.trails.len(),
            max_flight_time: times.iter().copied().fold(0.0, f64::max),
            mean_flight_time: if times.is_empty() { 0.0 } else { times.iter().sum::<f64>() / times.len() as f64 },
        });
    }
    let total_uav_distance = uavs.iter().map(|u| u.total_distance).sum();
    Metrics {
        uavs,
        subareas: subs,
        car_distance: car.map_or(0.0, |c| c.total_distance),
        total_uav_distance,
    }
}

struct RegionOutcome {
    subareas: Vec<SubareaPlan>,
    timings: Timings,
}

fn plan_cells(
    cells: &[PolygonWithHoles],
    region: usize,
    first_id: usize,
    roads: &RoadGraph,
    cfg: &Config,
    seed: u64,
) -> Result<(Vec<SubareaPlan>, Timings)> {
    let results: Vec<Result<(SubareaPlan, Timings)>> = cells
        .par_iter()
        .enumerate()
        .map(|(k, cell)| {
            let id = first_id + k;
            let mut t = Timings::default();
            let t0 = Instant::now();
            let trails = plan_trails(cell, id, cfg)?;
            t.trails = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let sub_seed = derive_seed(seed, TAG_SUBAREA, region as u64, k as u64);
            let initial = initial_assignment(&trails, cfg, sub_seed)?;
            t.assignment = t1.elapsed().as_secs_f64();
            let t2 = Instant::now();
            let (assignment, access) = refine_access(&trails, &initial, cfg)?;
            t.access_opt = t2.elapsed().as_secs_f64();
            let t3 = Instant::now();
            let spots = if roads.is_empty() {
                None
            } else {
                Some(select_car_spots(&assignment, roads, cfg.fleet.comm_radius)?)
            };
            t.routing = t3.elapsed().as_secs_f64();
            Ok((
                SubareaPlan {
                    id,
                    region,
                    cell: cell.clone(),
                    trails,
                    initial,
                    assignment,
                    access,
                    spots,
                },
                t,
            ))
        })
        .collect();
    let mut subs = Vec::with_capacity(results.len());
    let mut total = Timings::default();
    for r in results {
        let (s, t) = r?;
        total.trails += t.trails;
        total.assignment += t.assignment;
        total.access_opt += t.access_opt;
        total.routing += t.routing;
        subs.push(s);
    }
    Ok((subs, total))
}

fn plan_region(rho: &PolygonWithHoles, region: usize, first_id: usize, roads: &RoadGraph, cfg: &Config, seed: u64) -> Result<RegionOutcome> {
    let region_seed = derive_seed(seed, TAG_REGION, region as u64, 0);
    let mut n_start = 1;
    let mut last_err = None;
    let mut timings = Timings::default();
    for attempt in 0..=cfg.planner.retries {
        let t0 = Instant::now();
        let part = partition_with_feasibility_from(rho, &cfg.fleet, &cfg.partition_weights, &cfg.partition_ga, region_seed, n_start)?;
        timings.partition += t0.elapsed().as_secs_f64();
        match plan_cells(&part.cells, region, first_id, roads, cfg, region_seed) {
            Ok((subareas, t)) => {
                timings.trails += t.trails;
                timings.assignment += t.assignment;
                timings.access_opt += t.access_opt;
                timings.routing += t.routing;
                return Ok(RegionOutcome { subareas, timings });
            }
            Err(e @ Error::Infeasible { .. }) => {
                log::warn!("region {region}: attempt {attempt} with {} sub-areas failed: {e}", part.cells.len());
                n_start = n_start.max(part.seeds.len()) + 1;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Full mission for `map`, deterministic in `seed`.
pub fn plan_mission(map: &FieldMap, cfg: &Config, seed: u64) -> Result<MissionPlan> {
    cfg.validate()?;
    let start = Instant::now();
    let regions = map.region();
    if regions.is_empty() {
        return Err(Error::infeasible(Stage::Pipeline, "obstacles cover all farmland"));
    }
    let mut subareas = Vec::new();
    let mut timings = Timings::default();
    for (r, rho) in regions.iter().enumerate() {
        let out = plan_region(rho, r, subareas.len(), &map.roads, cfg, seed)?;
        timings.partition += out.timings.partition;
        timings.trails += out.timings.trails;
        timings.assignment += out.timings.assignment;
        timings.access_opt += out.timings.access_opt;
        timings.routing += out.timings.routing;
        subareas.extend(out.subareas);
    }
    let t = Instant::now();
    let car = if map.roads.is_empty() {
        None
    } else {
        let spots: Vec<CarSpots> = subareas.iter().map(|s| s.spots.expect("spots chosen with roads")).collect();
        Some(plan_car(&spots, &map.roads, None)?)
    };
    timings.routing += t.elapsed().as_secs_f64();
    timings.total = start.elapsed().as_secs_f64();
    let metrics = compute_metrics(&subareas, car.as_ref(), &map.roads, &cfg.fleet);
    Ok(MissionPlan {
        format: PLAN_FORMAT.to_string(),
        version: PLAN_VERSION,
        provenance: Provenance {
            generator: format!("covplan {}", env!("CARGO_PKG_VERSION")),
            config_sha256: cfg.sha256(),
            map_sha256: Some(hex::encode(Sha256::digest(map.to_geojson().as_bytes()))),
            rng_seed: seed,
        },
        fleet: cfg.fleet.clone(),
        subareas,
        car,
        metrics,
        timings: Some(timings),
    })
}

/// Output of one CLI stage, consumed by the next.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFile {
    pub format: String,
    pub version: u32,
    pub stage: String,
    pub rng_seed: u64,
    pub config_sha256: String,
    pub cells: Vec<StageCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCell {
    pub region: usize,
    pub cell: PolygonWithHoles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trails: Option<Vec<Trail>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<TrailAssignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<TrailAssignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access: Option<AccessSummary>,
}

impl StageFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stage serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<StageFile> {
        let mut f: StageFile = serde_json::from_str(text).map_err(|e| Error::Input(format!("stage file: {e}")))?;
        if f.format != STAGE_FORMAT || f.version != PLAN_VERSION {
            return Err(Error::Input(format!("expected {STAGE_FORMAT} version {PLAN_VERSION}")));
        }
        for c in &mut f.cells {
            if let Some(t) = &mut c.trails {
                rebuild_trails(t)?;
            }
        }
        Ok(f)
    }

    fn require(&self, stage: &str) -> Result<()> {
        if self.stage != stage {
            return Err(Error::Input(format!("expected a {stage} stage file, got {}", self.stage)));
        }
        Ok(())
    }
}

/// Partition only, without downstream retries.
pub fn stage_partition(map: &FieldMap, cfg: &Config, seed: u64) -> Result<StageFile> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for (r, rho) in map.region().iter().enumerate() {
        let region_seed = derive_seed(seed, TAG_REGION, r as u64, 0);
        let part = partition_with_feasibility_from(rho, &cfg.fleet, &cfg.partition_weights, &cfg.partition_ga, region_seed, 1)?;
        cells.extend(part.cells.into_iter().map(|cell| StageCell {
            region: r,
            cell,
            trails: None,
            initial: None,
            assignment: None,
            access: None,
        }));
    }
    Ok(StageFile {
        format: STAGE_FORMAT.to_string(),
        version: PLAN_VERSION,
        stage: "partition".to_string(),
        rng_seed: seed,
        config_sha256: cfg.sha256(),
        cells,
    })
}

pub fn stage_trails(input: &StageFile, cfg: &Config) -> Result<StageFile> {
    input.require("partition")?;
    let mut out = input.clone();
    for (i, c) in out.cells.iter_mut().enumerate() {
        c.trails = Some(plan_trails(&c.cell, i, cfg)?);
    }
    out.stage = "trails".to_string();
    Ok(out)
}

pub fn stage_assign(input: &StageFile, cfg: &Config) -> Result<StageFile> {
    input.require("trails")?;
    let mut out = input.clone();
    let mut next_in_region = vec![0u64; out.cells.iter().map(|c| c.region + 1).max().unwrap_or(0)];
    let jobs: Vec<(usize, u64)> = out
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = next_in_region[c.region];
            next_in_region[c.region] += 1;
            let region_seed = derive_seed(input.rng_seed, TAG_REGION, c.region as u64, 0);
            (i, derive_seed(region_seed, TAG_SUBAREA, c.region as u64, k))
        })
        .collect();
    let results: Vec<Result<(TrailAssignment, TrailAssignment, AccessSummary)>> = jobs
        .par_iter()
        .map(|&(i, s)| plan_assignment(out.cells[i].trails.as_deref().unwrap_or_default(), cfg, s))
        .collect();
    for (c, r) in out.cells.iter_mut().zip(results) {
        let (initial, assignment, access) = r?;
        c.initial = Some(initial);
        c.assignment = Some(assignment);
        c.access = Some(access);
    }
    out.stage = "assign".to_string();
    Ok(out)
}

/// Car spots and tour from an assignment stage file, giving the full plan.
pub fn stage_route(input: &StageFile, map: &FieldMap, cfg: &Config) -> Result<MissionPlan> {
    input.require("assign")?;
    let mut subareas = Vec::with_capacity(input.cells.len());
    for (i, c) in input.cells.iter().enumerate() {
        let missing = || Error::Input(format!("cell {i} lacks assignment data"));
        let assignment = c.assignment.clone().ok_or_else(missing)?;
        let spots = if map.roads.is_empty() {
            None
        } else {
            Some(select_car_spots(&assignment, &map.roads, cfg.fleet.comm_radius)?)
        };
        subareas.push(SubareaPlan {
            id: i,
            region: c.region,
            cell: c.cell.clone(),
            trails: c.trails.clone().ok_or_else(missing)?,
            initial: c.initial.clone().ok_or_else(missing)?,
            assignment,
            access: c.access.clone().ok_or_else(missing)?,
            spots,
        });
    }
    let car = if map.roads.is_empty() || subareas.is_empty() {
        None
    } else {
        let spots: Vec<CarSpots> = subareas.iter().map(|s| s.spots.expect("spots chosen with roads")).collect();
        Some(plan_car(&spots, &map.roads, None)?)
    };
    let metrics = compute_metrics(&subareas, car.as_ref(), &map.roads, &cfg.fleet);
    Ok(MissionPlan {
        format: PLAN_FORMAT.to_string(),
        version: PLAN_VERSION,
        provenance: Provenance {
            generator: format!("covplan {}", env!("CARGO_PKG_VERSION")),
            config_sha256: cfg.sha256(),
            map_sha256: Some(hex::encode(Sha256::digest(map.to_geojson().as_bytes()))),
            rng_seed: input.rng_seed,
        },
        fleet: cfg.fleet.clone(),
        subareas,
        car,
        metrics,
        timings: None,
    })
}

/// Squared transition objective of an assignment, as minimised by access-point refinement.
pub fn transition_objective(a: &TrailAssignment) -> f64 {
    squared_objective(a)
}

/// Access points of trails flown by a route, in order.
pub fn route_points(a: &TrailAssignment, uav: usize) -> Vec<Point> {
    a.routes[uav].iter().map(|&t| a.access_points[t]).collect()
}

#[cfg(test)]
mod tests;
