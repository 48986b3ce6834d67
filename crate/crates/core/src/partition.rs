//! Field partitioning by evolving Voronoi seed points.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::fleet::FleetSpec;
use crate::ga::{stream, GaParams};
use crate::geometry::{
    min_enclosing_circle, union, voronoi_cells_unchecked, BoundingBox, Point, PolygonWithHoles,
    EXACT_TOL,
};

const TAG_INIT: u64 = 1;
const TAG_BREED: u64 = 2;
/// Distance a coincident seed is pushed away from its twin, meters.
const JITTER: f64 = 1e-3;

/// Weights of the balance, roundness and perimeter terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionWeights {
    pub area: f64,
    pub roundness: f64,
    pub perimeter: f64,
    /// Added to both variance denominators.
    pub epsilon: f64,
    /// Rescale each term by its value in the best initial chromosome.
    pub normalize: bool,
}

impl Default for PartitionWeights {
    fn default() -> Self {
        PartitionWeights {
            area: 1.0,
            roundness: 1.0,
            perimeter: 1.0,
            epsilon: 1e-9,
            normalize: true,
        }
    }
}

impl PartitionWeights {
    pub fn new(area: f64, roundness: f64, perimeter: f64, epsilon: f64) -> Self {
        PartitionWeights {
            area,
            roundness,
            perimeter,
            epsilon,
            normalize: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let ws = [self.area, self.roundness, self.perimeter];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || ws.iter().all(|w| *w == 0.0) {
            return Err(Error::argument("partition weights must be non-negative and not all zero"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::argument("epsilon must be non-negative"));
        }
        Ok(())
    }
}

/// A partition of the field into sub-areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub cells: Vec<PolygonWithHoles>,
    /// Owning seed for every cell; split Voronoi regions share a seed.
    pub seed_of_cell: Vec<usize>,
    pub seeds: Vec<Point>,
    pub fitness: f64,
    /// Best fitness after initialization and after each generation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

/// Number of sub-areas needed so that each fits one fleet sortie.
pub fn required_subarea_count(area_rho: f64, uav_count: usize, a_max: f64) -> Result<usize> {
    if !(area_rho > 0.0 && a_max > 0.0 && area_rho.is_finite() && a_max.is_finite()) || uav_count == 0 {
        return Err(Error::argument("area, UAV count and A_max must be positive"));
    }
    let ratio = area_rho / (uav_count as f64 * a_max);
    // forgive rounding noise when the field is an exact multiple
    let n = (ratio * (1.0 - 1e-12)).ceil();
    Ok((n as usize).max(1))
}

fn variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// The three fitness terms before weighting.
fn terms(areas: &[f64], perims: &[f64], eps: f64) -> [f64; 3] {
    let (_, var_a) = variance(areas);
    let (mean_c, var_c) = variance(perims);
    let c_max = perims.iter().copied().fold(0.0, f64::max);
    [1.0 / (var_a + eps), mean_c * mean_c / (var_c + eps), 1.0 / c_max]
}

/// Weighted fitness of a set of cells; higher is better.
///
/// Weights are used as given; `normalize` only affects the GA.
pub fn partition_fitness(cells: &[PolygonWithHoles], w: &PartitionWeights) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::argument("fitness needs at least one cell"));
    }
    let areas: Vec<f64> = cells.iter().map(PolygonWithHoles::area).collect();
    let perims: Vec<f64> = cells.iter().map(PolygonWithHoles::perimeter).collect();
    let t = terms(&areas, &perims, w.epsilon);
    Ok(w.area * t[0] + w.roundness * t[1] + w.perimeter * t[2])
}

#[derive(Clone, Debug)]
struct Member {
    seeds: Vec<Point>,
    terms: [f64; 3],
    fitness: f64,
}

struct Evolver<'a> {
    rho: &'a PolygonWithHoles,
    bbox: BoundingBox,
    n: usize,
    ga: &'a GaParams,
    seed: u64,
    coef: [f64; 3],
    eps: f64,
    sigma: f64,
}

impl Evolver<'_> {
    fn sample_inside(&self, rng: &mut ChaCha8Rng) -> Option<Point> {
        for _ in 0..10_000 {
            let p = Point::new(
                rng.random_range(self.bbox.min.x..=self.bbox.max.x),
                rng.random_range(self.bbox.min.y..=self.bbox.max.y),
            );
            if self.rho.contains(p) {
                return Some(p);
            }
        }
        None
    }

    fn repair(&self, seeds: &mut [Point], rng: &mut ChaCha8Rng) {
        for i in 1..seeds.len() {
            for _ in 0..16 {
                if !seeds[..i].iter().any(|s| s.dist(seeds[i]) <= EXACT_TOL) {
                    break;
                }
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                let cand = seeds[i] + Point::new(a.cos(), a.sin()) * JITTER;
                if self.rho.contains(cand) {
                    seeds[i] = cand;
                }
            }
        }
    }

    fn measure(&self, seeds: &[Point]) -> [f64; 3] {
        let cells = voronoi_cells_unchecked(seeds, self.rho);
        let areas: Vec<f64> = cells.iter().map(|c| c.polygon.area()).collect();
        let perims: Vec<f64> = cells.iter().map(|c| c.polygon.perimeter()).collect();
        if areas.is_empty() {
            return [0.0; 3];
        }
        terms(&areas, &perims, self.eps)
    }

    fn score(&self, t: &[f64; 3]) -> f64 {
        self.coef[0] * t[0] + self.coef[1] * t[1] + self.coef[2] * t[2]
    }

    fn evaluate(&self, batch: Vec<Vec<Point>>) -> Vec<Member> {
        batch
            .into_par_iter()
            .map(|seeds| {
                let terms = self.measure(&seeds);
                Member {
                    seeds,
                    terms,
                    fitness: 0.0,
                }
            })
            .collect()
    }

    fn tournament<'m>(&self, pop: &'m [Member], rng: &mut ChaCha8Rng) -> &'m Member {
        // population is sorted best first, so the lower index wins
        let a = rng.random_range(0..pop.len());
        let b = rng.random_range(0..pop.len());
        &pop[a.min(b)]
    }

    fn breed(&self, pop: &[Member], generation: usize, idx: usize) -> Vec<Point> {
        let mut rng = stream(self.seed, TAG_BREED, generation as u64, idx as u64);
        let pa = self.tournament(pop, &mut rng);
        let pb = self.tournament(pop, &mut rng);
        let mut child = pa.seeds.clone();
        if rng.random_bool(self.ga.crossover_rate) {
            for (c, (&a, &b)) in child.iter_mut().zip(pa.seeds.iter().zip(&pb.seeds)) {
                let alpha: f64 = rng.random();
                let blend = a.lerp(b, alpha);
                *c = if self.rho.contains(blend) { blend } else { a };
            }
        }
        let normal = Normal::new(0.0, self.sigma).expect("positive sigma");
        for c in child.iter_mut() {
            if !rng.random_bool(self.ga.mutation_rate) {
                continue;
            }
            for _ in 0..20 {
                let cand = *c + Point::new(normal.sample(&mut rng), normal.sample(&mut rng));
                if self.rho.contains(cand) {
                    *c = cand;
                    break;
                }
            }
        }
        self.repair(&mut child, &mut rng);
        child
    }
}

fn sort_desc(pop: &mut [Member]) {
    pop.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
}

fn build_partition(rho: &PolygonWithHoles, seeds: Vec<Point>, fitness: f64, history: Vec<f64>) -> Partition {
    let cells = voronoi_cells_unchecked(&seeds, rho);
    Partition {
        seed_of_cell: cells.iter().map(|c| c.seed).collect(),
        cells: cells.into_iter().map(|c| c.polygon).collect(),
        seeds,
        fitness,
        history,
    }
}

/// Final population of a GA run, best first.
struct Evolution {
    population: Vec<Member>,
    history: Vec<f64>,
}

fn evolve(rho: &PolygonWithHoles, n: usize, w: &PartitionWeights, ga: &GaParams, seed: u64) -> Result<Evolution> {
    if n == 0 {
        return Err(Error::argument("sub-area count must be at least 1"));
    }
    w.validate()?;
    ga.validate()?;
    let bbox = rho.bbox();
    let mut ev = Evolver {
        rho,
        bbox,
        n,
        ga,
        seed,
        coef: [w.area, w.roundness, w.perimeter],
        eps: w.epsilon,
        sigma: (0.02 * bbox.diagonal()).max(1e-9),
    };
    let mut init = Vec::with_capacity(ga.population);
    for idx in 0..ga.population {
        let mut rng = stream(seed, TAG_INIT, n as u64, idx as u64);
        let mut seeds = Vec::with_capacity(n);
        for _ in 0..ev.n {
            let p = ev.sample_inside(&mut rng).ok_or_else(|| {
                Error::infeasible(Stage::Partition, "cannot sample seed points inside the field")
            })?;
            seeds.push(p);
        }
        ev.repair(&mut seeds, &mut rng);
        init.push(seeds);
    }
    let mut pop = ev.evaluate(init);
    if w.normalize {
        // anchor each term at the best raw chromosome so all three start near 1
        let raw_best = pop
            .iter()
            .max_by(|a, b| ev.score(&a.terms).total_cmp(&ev.score(&b.terms)))
            .expect("population is non-empty");
        for k in 0..3 {
            if raw_best.terms[k] > 0.0 && raw_best.terms[k].is_finite() {
                ev.coef[k] /= raw_best.terms[k];
            }
        }
    }
    for m in pop.iter_mut() {
        m.fitness = ev.score(&m.terms);
    }
    sort_desc(&mut pop);
    let mut history = vec![pop[0].fitness];
    if n == 1 {
        // every chromosome yields the whole field
        return Ok(Evolution {
            population: pop,
            history,
        });
    }
    let elite = ga.elite_count();
    for g in 1..=ga.generations {
        let children: Vec<Vec<Point>> = (0..ga.population - elite).map(|i| ev.breed(&pop, g, i)).collect();
        let mut next: Vec<Member> = pop[..elite].to_vec();
        let mut kids = ev.evaluate(children);
        for m in kids.iter_mut() {
            m.fitness = ev.score(&m.terms);
        }
        next.extend(kids);
        sort_desc(&mut next);
        pop = next;
        history.push(pop[0].fitness);
    }
    Ok(Evolution {
        population: pop,
        history,
    })
}

/// Best partition into `n` seeds after the configured generations.
pub fn evolve_partition(
    rho: &PolygonWithHoles,
    n: usize,
    w: &PartitionWeights,
    ga: &GaParams,
    rng_seed: u64,
) -> Result<Partition> {
    let ev = evolve(rho, n, w, ga, rng_seed)?;
    let best = ev.population.into_iter().next().expect("non-empty population");
    Ok(build_partition(rho, best.seeds, best.fitness, ev.history))
}

/// First violated sub-area constraint, if any.
pub fn cell_violation(cell: &PolygonWithHoles, fleet: &FleetSpec) -> Option<String> {
    let cap = fleet.uav_count as f64 * fleet.max_area();
    let area = cell.area();
    if area > cap * (1.0 + 1e-9) {
        return Some(format!("sub-area area {area:.1} m^2 exceeds K*A_max = {cap:.1} m^2"));
    }
    let r = min_enclosing_circle(&cell.outer).map_or(0.0, |c| c.radius);
    if r > fleet.comm_radius * (1.0 + 1e-9) {
        return Some(format!(
            "sub-area enclosing radius {r:.1} m exceeds comm radius {:.1} m",
            fleet.comm_radius
        ));
    }
    None
}

fn shared_boundary(a: &PolygonWithHoles, b: &PolygonWithHoles) -> f64 {
    let tol = 1e-6;
    let mut total = 0.0;
    for (p, q) in a.edges() {
        let len = p.dist(q);
        if len <= tol {
            continue;
        }
        let u = (q - p) * (1.0 / len);
        for (r, s) in b.edges() {
            if (r - p).cross(u).abs() > tol || (s - p).cross(u).abs() > tol {
                continue;
            }
            let (t0, t1) = ((r - p).dot(u), (s - p).dot(u));
            let lo = t0.min(t1).max(0.0);
            let hi = t0.max(t1).min(len);
            if hi > lo {
                total += hi - lo;
            }
        }
    }
    total
}

/// Fold small detached pieces of split Voronoi regions into a neighbor.
fn merge_fragments(part: &mut Partition, min_area: f64) {
    loop {
        let mut target = None;
        for (i, cell) in part.cells.iter().enumerate() {
            let seed = part.seed_of_cell[i];
            let largest = (0..part.cells.len())
                .filter(|&j| part.seed_of_cell[j] == seed)
                .max_by(|&x, &y| part.cells[x].area().total_cmp(&part.cells[y].area()).then(y.cmp(&x)))
                .expect("cell belongs to its own seed");
            if largest == i || cell.area() >= min_area {
                continue;
            }
            let best = (0..part.cells.len())
                .filter(|&j| j != i)
                .map(|j| (j, shared_boundary(cell, &part.cells[j])))
                .filter(|&(_, l)| l > 1e-6)
                .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
            if let Some((j, _)) = best {
                let merged = union(&[part.cells[j].clone(), cell.clone()]);
                if merged.len() == 1 {
                    target = Some((i, j, merged.into_iter().next().expect("one polygon")));
                    break;
                }
            }
        }
        match target {
            Some((i, j, merged)) => {
                part.cells[j] = merged;
                part.cells.remove(i);
                part.seed_of_cell.remove(i);
            }
            None => break,
        }
    }
}

/// Partition with at least `n_start` seeds, growing the count until every cell is feasible.
pub fn partition_with_feasibility_from(
    rho: &PolygonWithHoles,
    fleet: &FleetSpec,
    w: &PartitionWeights,
    ga: &GaParams,
    rng_seed: u64,
    n_start: usize,
) -> Result<Partition> {
    fleet.validate()?;
    let n0 = required_subarea_count(rho.area(), fleet.uav_count, fleet.max_area())?;
    let cap = 4 * n0;
    let n_start = n_start.max(n0);
    let mut last = String::new();
    for n in n_start..=cap.max(n_start) {
        let ev = evolve(rho, n, w, ga, rng_seed)?;
        let min_area = 0.1 * rho.area() / n as f64;
        for m in ev.population.iter() {
            let mut part = build_partition(rho, m.seeds.clone(), m.fitness, ev.history.clone());
            merge_fragments(&mut part, min_area);
            match part.cells.iter().find_map(|c| cell_violation(c, fleet)) {
                None => {
                    log::info!("partition: {} cells from {n} seeds", part.cells.len());
                    return Ok(part);
                }
                Some(v) => {
                    if std::ptr::eq(m, &ev.population[0]) {
                        last = v;
                    }
                }
            }
        }
        log::debug!("partition: n = {n} infeasible ({last})");
    }
    Err(Error::infeasible(
        Stage::Partition,
        format!("no feasible partition with up to {cap} sub-areas: {last}"),
    ))
}

/// Partition sized for the fleet; every returned cell respects area and comm-radius limits.
pub fn partition_with_feasibility(
    rho: &PolygonWithHoles,
    fleet: &FleetSpec,
    w: &PartitionWeights,
    ga: &GaParams,
    rng_seed: u64,
) -> Result<Partition> {
    partition_with_feasibility_from(rho, fleet, w, ga, rng_seed, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_ga() -> GaParams {
        GaParams {
            population: 40,
            generations: 10,
            ..GaParams::partition()
        }
    }

    #[test]
    fn paper_subarea_count() {
        assert_eq!(required_subarea_count(617_210.0, 4, 600.0 * 6.0 * 6.5).unwrap(), 7);
    }

    #[test]
    fn subarea_count_boundaries() {
        let a = 23_400.0;
        assert_eq!(required_subarea_count(4.0 * a, 4, a).unwrap(), 1);
        assert_eq!(required_subarea_count(4.0 * a + 1.0, 4, a).unwrap(), 2);
        assert!(required_subarea_count(0.0, 4, a).is_err());
        assert!(required_subarea_count(1.0, 0, a).is_err());
        assert!(required_subarea_count(1.0, 4, -1.0).is_err());
    }

    #[test]
    fn congruent_cells_hit_epsilon_ceiling() {
        let cells = [
            PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0),
            PolygonWithHoles::rectangle(1.0, 0.0, 2.0, 1.0),
        ];
        let f = partition_fitness(&cells, &PartitionWeights::new(1.0, 0.0, 0.0, 1e-9)).unwrap();
        assert!((f - 1e9).abs() < 1e-3);
        let f = partition_fitness(&cells, &PartitionWeights::new(0.0, 1.0, 0.0, 1e-9)).unwrap();
        assert!((f - 16.0 / 1e-9).abs() / f < 1e-12);
    }

    #[test]
    fn single_cell_perimeter_term() {
        let cells = [PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0)];
        let f = partition_fitness(&cells, &PartitionWeights::new(0.0, 0.0, 1.0, 1e-9)).unwrap();
        assert!((f - 0.025).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_fitness() {
        // areas 1 and 3, perimeters 4 and 8
        let cells = [
            PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0),
            PolygonWithHoles::rectangle(0.0, 0.0, 3.0, 1.0),
        ];
        let f = partition_fitness(&cells, &PartitionWeights::new(1.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((f - 10.125).abs() < 1e-12);
        assert!(partition_fitness(&[], &PartitionWeights::default()).is_err());
    }

    #[test]
    fn perimeter_term_scales_inversely() {
        let w = PartitionWeights::new(0.0, 0.0, 1.0, 1e-9);
        let a = [PolygonWithHoles::rectangle(0.0, 0.0, 3.0, 2.0), PolygonWithHoles::rectangle(3.0, 0.0, 4.0, 2.0)];
        let b: Vec<PolygonWithHoles> = a.iter().map(|p| p.map_points(|q| q * 2.0)).collect();
        let fa = partition_fitness(&a, &w).unwrap();
        let fb = partition_fitness(&b, &w).unwrap();
        assert_eq!(fb, fa / 2.0);
    }

    #[test]
    fn one_seed_returns_whole_field() {
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, 50.0, 20.0);
        let p = evolve_partition(&rho, 1, &PartitionWeights::default(), &small_ga(), 1).unwrap();
        assert_eq!(p.cells.len(), 1);
        assert!((p.cells[0].area() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn two_seeds_balance_rectangle() {
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, 2.0, 1.0);
        let w = PartitionWeights {
            roundness: 0.0,
            perimeter: 0.0,
            ..PartitionWeights::default()
        };
        let p = evolve_partition(&rho, 2, &w, &GaParams::partition(), 7).unwrap();
        assert_eq!(p.cells.len(), 2);
        let d = (p.cells[0].area() - p.cells[1].area()).abs() / 2.0;
        assert!(d <= 0.05, "imbalance {d}");
        for h in p.history.windows(2) {
            assert!(h[1] >= h[0]);
        }
    }

    #[test]
    fn evolution_is_deterministic() {
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, 100.0, 40.0);
        let a = evolve_partition(&rho, 3, &PartitionWeights::default(), &small_ga(), 42).unwrap();
        let b = evolve_partition(&rho, 3, &PartitionWeights::default(), &small_ga(), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_field_is_one_cell() {
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, 100.0, 100.0);
        let p = partition_with_feasibility(&rho, &FleetSpec::default(), &PartitionWeights::default(), &small_ga(), 1)
            .unwrap();
        assert_eq!(p.cells.len(), 1);
    }

    #[test]
    fn thin_strip_respects_comm_radius() {
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, 2000.0, 50.0);
        let fleet = FleetSpec::default();
        let p = partition_with_feasibility(&rho, &fleet, &PartitionWeights::default(), &small_ga(), 3).unwrap();
        for c in &p.cells {
            let r = min_enclosing_circle(&c.outer).unwrap().radius;
            assert!(2.0 * r <= 1000.0 + 1e-6);
        }
        let total: f64 = p.cells.iter().map(PolygonWithHoles::area).sum();
        assert!((total - rho.area()).abs() / rho.area() < 1e-6);
    }

    #[test]
    fn large_field_splits_by_area() {
        let fleet = FleetSpec::default();
        let cap = fleet.uav_count as f64 * fleet.max_area();
        let side = (3.5 * cap).sqrt();
        let rho = PolygonWithHoles::rectangle(0.0, 0.0, side, side);
        let p = partition_with_feasibility(&rho, &fleet, &PartitionWeights::default(), &small_ga(), 5).unwrap();
        assert!(p.cells.len() >= 4);
        for c in &p.cells {
            assert!(cell_violation(c, &fleet).is_none());
        }
    }
}
