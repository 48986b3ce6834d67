//! Trail-to-UAV assignment: random-key access points decoded onto trails, a
//! min-max vehicle routing solver, and the genetic loop around them.

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::ga::{stream, GaParams};
use crate::geometry::{closest_point_on_segment, Point};
use crate::trails::Trail;

/// Largest instance solved exactly.
pub const EXACT_LIMIT: usize = 8;
/// How far a point may sit off its trail and still be encoded.
pub const ENCODE_TOL: f64 = 1e-6;

const RKGA_TAG: u64 = 0x524b_4741;
/// Local search passes before giving up on convergence.
const MAX_PASSES: usize = 50;
/// Nearest trails considered as relocate and swap partners.
const NEIGHBOURS: usize = 10;

/// One random key per trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessChromosome {
    pub keys: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailAssignment {
    /// Trail indices flown by each UAV, in visiting order. Idle UAVs have empty routes.
    pub routes: Vec<Vec<usize>>,
    /// Entry and exit point of every trail.
    pub access_points: Vec<Point>,
    /// Per UAV: transitions plus trail perimeters (plus depot legs when a depot was given).
    pub route_lengths: Vec<f64>,
    /// Per UAV: the transition part of `route_lengths` alone.
    pub transition_lengths: Vec<f64>,
    pub longest_tour: f64,
}

impl TrailAssignment {
    /// Check that routes partition the trails and respect the battery budget.
    pub fn validate(&self, trail_costs: &[f64], battery: f64) -> Result<()> {
        let mut seen = vec![false; trail_costs.len()];
        for r in &self.routes {
            let mut load = 0.0;
            for &t in r {
                if t >= seen.len() || seen[t] {
                    return Err(Error::infeasible(Stage::Assignment, format!("trail {t} assigned twice or unknown")));
                }
                seen[t] = true;
                load += trail_costs[t];
            }
            if load > battery * (1.0 + 1e-12) {
                return Err(Error::infeasible(
                    Stage::Assignment,
                    format!("route load {load:.3} m exceeds battery distance {battery:.3} m"),
                ));
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::infeasible(Stage::Assignment, format!("trail {t} unassigned")));
        }
        Ok(())
    }
}

/// Assignment for fixed routes and access points, with lengths recomputed.
pub fn assemble_assignment(
    routes: Vec<Vec<usize>>,
    access_points: &[Point],
    trail_costs: &[f64],
    depot: Option<Point>,
) -> TrailAssignment {
    let inst = Instance {
        pts: access_points,
        costs: trail_costs,
        battery: f64::INFINITY,
        depot,
    };
    inst.assignment(routes)
}

/// Arc length from the trail's first vertex to `x`, as a fraction of the perimeter.
pub fn encode(x: Point, trail: &Trail) -> Result<f64> {
    if trail.perimeter == 0.0 || trail.ring.len() == 1 {
        let d = trail.ring[0].dist(x);
        if d > ENCODE_TOL {
            return Err(Error::argument(format!("point is {d:.3e} m from the trail")));
        }
        return Ok(0.0);
    }
    let mut best = (f64::INFINITY, 0.0);
    let mut arc = 0.0;
    for (a, b) in trail.segments() {
        let len = a.dist(b);
        let (q, t) = closest_point_on_segment(x, a, b);
        let d = q.dist(x);
        if d < best.0 {
            best = (d, arc + t * len);
        }
        arc += len;
    }
    if best.0 > ENCODE_TOL {
        return Err(Error::argument(format!("point is {:.3e} m from the trail", best.0)));
    }
    let key = best.1 / trail.perimeter;
    Ok(if key >= 1.0 { 0.0 } else { key })
}

/// The point at arc length `p` times the perimeter from the first vertex.
pub fn decode(p: f64, trail: &Trail) -> Result<Point> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::argument(format!("key {p} outside [0, 1)")));
    }
    let m = trail.ring.len();
    if m == 1 || trail.perimeter == 0.0 {
        return Ok(trail.ring[0]);
    }
    // vertex_keys is sorted; find the edge whose key range holds p
    let j = trail.vertex_keys.partition_point(|&k| k <= p).saturating_sub(1);
    let a = trail.ring[j];
    let b = trail.ring[(j + 1) % m];
    let len = a.dist(b);
    let start = trail.vertex_keys[j] * trail.perimeter;
    let t = if len > 0.0 {
        ((p * trail.perimeter - start) / len).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(a.lerp(b, t))
}

/// Access points for every trail from a chromosome.
pub fn decode_all(keys: &[f64], trails: &[Trail]) -> Result<Vec<Point>> {
    if keys.len() != trails.len() {
        return Err(Error::argument("chromosome length differs from trail count"));
    }
    keys.iter().zip(trails).map(|(&k, t)| decode(k, t)).collect()
}

struct Instance<'a> {
    pts: &'a [Point],
    costs: &'a [f64],
    battery: f64,
    depot: Option<Point>,
}

impl Instance<'_> {
    /// Leg between two route stops; `None` is the depot, or a free end without one.
    fn leg(&self, a: Option<usize>, b: Option<usize>) -> f64 {
        match (a, b, self.depot) {
            (Some(i), Some(j), _) => self.pts[i].dist(self.pts[j]),
            (Some(i), None, Some(d)) | (None, Some(i), Some(d)) => self.pts[i].dist(d),
            _ => 0.0,
        }
    }

    fn transitions(&self, route: &[usize]) -> f64 {
        if route.is_empty() {
            return 0.0;
        }
        let mut s = self.leg(None, Some(route[0])) + self.leg(Some(route[route.len() - 1]), None);
        for w in route.windows(2) {
            s += self.leg(Some(w[0]), Some(w[1]));
        }
        s
    }

    fn load(&self, route: &[usize]) -> f64 {
        route.iter().map(|&i| self.costs[i]).sum()
    }

    fn assignment(&self, routes: Vec<Vec<usize>>) -> TrailAssignment {
        let transition_lengths: Vec<f64> = routes.iter().map(|r| self.transitions(r)).collect();
        let route_lengths: Vec<f64> = routes
            .iter()
            .zip(&transition_lengths)
            .map(|(r, t)| if r.is_empty() { 0.0 } else { t + self.load(r) })
            .collect();
        let longest_tour = route_lengths.iter().copied().fold(0.0, f64::max);
        TrailAssignment {
            routes,
            access_points: self.pts.to_vec(),
            route_lengths,
            transition_lengths,
            longest_tour,
        }
    }
}

/// Lexicographic (max, sum) comparison with a relative tolerance.
fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    if b.0.is_infinite() || b.1.is_infinite() {
        return a < b;
    }
    let tol = 1e-12 * (1.0 + b.0.abs());
    a.0 < b.0 - tol || (a.0 <= b.0 + tol && a.1 < b.1 - 1e-12 * (1.0 + b.1.abs()))
}

/// Exact min-max solution by subset dynamic programming.
fn solve_exact(inst: &Instance, k: usize) -> Option<Vec<Vec<usize>>> {
    let n = inst.pts.len();
    let full = (1usize << n) - 1;
    let inf = f64::INFINITY;
    // open-path DP: best[mask][last] = cheapest order of `mask` ending at `last`
    let mut dp = vec![inf; (1 << n) * n];
    let mut parent = vec![usize::MAX; (1 << n) * n];
    for i in 0..n {
        dp[(1 << i) * n + i] = inst.leg(None, Some(i));
    }
    for mask in 1..=full {
        for last in 0..n {
            let cur = dp[mask * n + last];
            if cur == inf || mask & (1 << last) == 0 {
                continue;
            }
            for nx in 0..n {
                if mask & (1 << nx) != 0 {
                    continue;
                }
                let m2 = mask | (1 << nx);
                let c = cur + inst.leg(Some(last), Some(nx));
                if c < dp[m2 * n + nx] {
                    dp[m2 * n + nx] = c;
                    parent[m2 * n + nx] = last;
                }
            }
        }
    }
    let mut route_cost = vec![inf; 1 << n];
    let mut route_end = vec![usize::MAX; 1 << n];
    for mask in 1..=full {
        let load: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| inst.costs[i]).sum();
        if load > inst.battery * (1.0 + 1e-12) {
            continue;
        }
        for last in 0..n {
            let c = dp[mask * n + last] + inst.leg(Some(last), None) + load;
            if c < route_cost[mask] {
                route_cost[mask] = c;
                route_end[mask] = last;
            }
        }
    }
    // partition DP over up to k routes, minimising (max, sum)
    let mut part: Vec<(f64, f64)> = vec![(inf, inf); 1 << n];
    part[0] = (0.0, 0.0);
    // choice[j][mask] = route taken at level j, 0 when level j adds no route
    let mut choice = vec![vec![0usize; 1 << n]; k + 1];
    let mut levels = vec![part];
    for j in 1..=k {
        let prev = &levels[j - 1];
        let mut cur = prev.clone();
        for (mask, slot) in choice[j].iter_mut().enumerate().skip(1) {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // enumerate route subsets containing the lowest trail
            let mut sub = rest;
            loop {
                let s = sub | low;
                if route_cost[s] < inf && prev[mask ^ s].0 < inf {
                    let cand = (prev[mask ^ s].0.max(route_cost[s]), prev[mask ^ s].1 + route_cost[s]);
                    if better(cand, cur[mask]) {
                        cur[mask] = cand;
                        *slot = s;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        levels.push(cur);
    }
    if levels[k][full].0 == inf {
        return None;
    }
    let mut routes = Vec::new();
    let mut mask = full;
    let mut j = k;
    while mask != 0 && j > 0 {
        if choice[j][mask] == 0 {
            j -= 1;
            continue;
        }
        let s = choice[j][mask];
        let mut order = Vec::new();
        let mut m = s;
        let mut last = route_end[s];
        while last != usize::MAX {
            order.push(last);
            let p = parent[m * n + last];
            m ^= 1 << last;
            last = if m == 0 { usize::MAX } else { p };
        }
        order.reverse();
        routes.push(order);
        mask ^= s;
        j -= 1;
    }
    routes.resize(k, Vec::new());
    Some(routes)
}

/// Balanced nearest-neighbour construction: the shortest route grabs the closest free trail.
fn construct(inst: &Instance, k: usize) -> Option<Vec<Vec<usize>>> {
    let n = inst.pts.len();
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut len = vec![0.0f64; k];
    let mut load = vec![0.0; k];
    let mut free: Vec<bool> = vec![true; n];
    let centroid = inst.pts.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n as f64);
    for _ in 0..n {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| len[a].total_cmp(&len[b]).then(a.cmp(&b)));
        let mut placed = false;
        for r in order {
            let last = routes[r].last().copied();
            let mut best: Option<(f64, usize)> = None;
            for i in (0..n).filter(|&i| free[i]) {
                if load[r] + inst.costs[i] > inst.battery * (1.0 + 1e-12) {
                    continue;
                }
                // an empty route without a depot starts far out so the others can sweep inward
                let key = match (last, inst.depot) {
                    (Some(l), _) => inst.pts[l].dist(inst.pts[i]),
                    (None, Some(d)) => d.dist(inst.pts[i]),
                    (None, None) => -centroid.dist(inst.pts[i]),
                };
                if best.is_none_or(|b| key < b.0) {
                    best = Some((key, i));
                }
            }
            if let Some((_, i)) = best {
                len[r] += inst.leg(last, Some(i)) + inst.costs[i];
                load[r] += inst.costs[i];
                routes[r].push(i);
                free[i] = false;
                placed = true;
                break;
            }
        }
        if !placed {
            return first_fit(inst, k);
        }
    }
    Some(routes)
}

/// First-fit decreasing by trail cost, then each bin ordered by nearest neighbour.
fn first_fit(inst: &Instance, k: usize) -> Option<Vec<Vec<usize>>> {
    let n = inst.pts.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| inst.costs[b].total_cmp(&inst.costs[a]).then(a.cmp(&b)));
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut load = vec![0.0; k];
    for i in idx {
        let r = (0..k).find(|&r| load[r] + inst.costs[i] <= inst.battery * (1.0 + 1e-12))?;
        load[r] += inst.costs[i];
        bins[r].push(i);
    }
    for bin in bins.iter_mut() {
        let mut rest = std::mem::take(bin);
        let mut cur: Option<usize> = None;
        while !rest.is_empty() {
            let j = (0..rest.len())
                .min_by(|&a, &b| inst.leg(cur, Some(rest[a])).total_cmp(&inst.leg(cur, Some(rest[b]))))
                .expect("non-empty");
            let i = rest.remove(j);
            bin.push(i);
            cur = Some(i);
        }
    }
    Some(bins)
}

struct Search<'a> {
    inst: &'a Instance<'a>,
    routes: Vec<Vec<usize>>,
    len: Vec<f64>,
    load: Vec<f64>,
    /// (route, position) of every trail.
    pos: Vec<(usize, usize)>,
    near: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn at(&self, r: usize, i: isize) -> Option<usize> {
        if i < 0 {
            None
        } else {
            self.routes[r].get(i as usize).copied()
        }
    }

    fn score_with(&self, changes: &[(usize, f64)]) -> (f64, f64) {
        let mut mx: f64 = 0.0;
        let mut sum = 0.0;
        for r in 0..self.routes.len() {
            let l = changes.iter().find(|c| c.0 == r).map_or(self.len[r], |c| c.1);
            mx = mx.max(l);
            sum += l;
        }
        (mx, sum)
    }

    fn recompute(&mut self, r: usize) {
        let route = &self.routes[r];
        self.load[r] = self.inst.load(route);
        self.len[r] = if route.is_empty() {
            0.0
        } else {
            self.inst.transitions(route) + self.load[r]
        };
        for (i, &t) in route.iter().enumerate() {
            self.pos[t] = (r, i);
        }
    }

    fn two_opt(&mut self) -> bool {
        let mut improved = false;
        for r in 0..self.routes.len() {
            let m = self.routes[r].len() as isize;
            for i in 0..m {
                for j in i + 1..m {
                    let (p, a, b, q) = (self.at(r, i - 1), self.at(r, i), self.at(r, j), self.at(r, j + 1));
                    let delta = self.inst.leg(p, b) + self.inst.leg(a, q) - self.inst.leg(p, a) - self.inst.leg(b, q);
                    if delta < -1e-12 * (1.0 + self.len[r]) {
                        let cand = self.score_with(&[(r, self.len[r] + delta)]);
                        if better(cand, self.score_with(&[])) {
                            self.routes[r][i as usize..=j as usize].reverse();
                            self.recompute(r);
                            improved = true;
                        }
                    }
                }
            }
        }
        improved
    }

    /// Move each trail to its best position on another route, when that helps.
    fn relocate(&mut self) -> bool {
        let k = self.routes.len();
        let cap = self.inst.battery * (1.0 + 1e-12);
        let mut improved = false;
        for xi in 0..self.pos.len() {
            let (a, i) = self.pos[xi];
            let i = i as isize;
            let x = Some(xi);
            let (pa, na) = (self.at(a, i - 1), self.at(a, i + 1));
            let removed = if self.routes[a].len() == 1 {
                0.0
            } else {
                self.len[a] - self.inst.leg(pa, x) - self.inst.leg(x, na) + self.inst.leg(pa, na) - self.inst.costs[xi]
            };
            let mut best: Option<((f64, f64), usize, usize)> = None;
            let cur = self.score_with(&[]);
            let mut slots: Vec<(usize, usize)> = (0..k).filter(|&b| self.routes[b].is_empty()).map(|b| (b, 0)).collect();
            for &y in &self.near[xi] {
                let (b, j) = self.pos[y];
                slots.push((b, j));
                slots.push((b, j + 1));
            }
            for (b, p) in slots {
                if b == a || self.load[b] + self.inst.costs[xi] > cap {
                    continue;
                }
                let mb = self.routes[b].len() as isize;
                let p = p as isize;
                let (u, v) = (self.at(b, p - 1), self.at(b, p));
                let added = if mb == 0 {
                    self.inst.leg(None, x) + self.inst.leg(x, None) + self.inst.costs[xi]
                } else {
                    self.len[b] + self.inst.leg(u, x) + self.inst.leg(x, v) - self.inst.leg(u, v) + self.inst.costs[xi]
                };
                let cand = self.score_with(&[(a, removed), (b, added)]);
                if better(cand, best.map_or(cur, |b| b.0)) {
                    best = Some((cand, b, p as usize));
                }
            }
            if let Some((_, b, p)) = best {
                self.routes[a].remove(i as usize);
                self.routes[b].insert(p, xi);
                self.recompute(a);
                self.recompute(b);
                improved = true;
            }
        }
        improved
    }

    /// Exchange pairs of trails between routes.
    fn swap(&mut self) -> bool {
        let cap = self.inst.battery * (1.0 + 1e-12);
        let n = self.pos.len();
        let mut improved = false;
        for xi in 0..n {
            for yk in 0..self.near[xi].len() {
                let yi = self.near[xi][yk];
                let ((a, i), (b, j)) = (self.pos[xi], self.pos[yi]);
                if a == b {
                    continue;
                }
                let dc = self.inst.costs[yi] - self.inst.costs[xi];
                if self.load[a] + dc > cap || self.load[b] - dc > cap {
                    continue;
                }
                let (i, j) = (i as isize, j as isize);
                let (x, y) = (Some(xi), Some(yi));
                let (pa, na) = (self.at(a, i - 1), self.at(a, i + 1));
                let (pb, nb) = (self.at(b, j - 1), self.at(b, j + 1));
                let la = self.len[a] + dc + self.inst.leg(pa, y) + self.inst.leg(y, na)
                    - self.inst.leg(pa, x)
                    - self.inst.leg(x, na);
                let lb = self.len[b] - dc + self.inst.leg(pb, x) + self.inst.leg(x, nb)
                    - self.inst.leg(pb, y)
                    - self.inst.leg(y, nb);
                let cand = self.score_with(&[(a, la), (b, lb)]);
                if better(cand, self.score_with(&[])) {
                    self.routes[a][i as usize] = yi;
                    self.routes[b][j as usize] = xi;
                    self.recompute(a);
                    self.recompute(b);
                    improved = true;
                }
            }
        }
        improved
    }
}

/// The `g` nearest other points of every point, closest first.
fn neighbour_lists(pts: &[Point], g: usize) -> Vec<Vec<usize>> {
    (0..pts.len())
        .map(|i| {
            let mut others: Vec<usize> = (0..pts.len()).filter(|&j| j != i).collect();
            let key = |j: &usize| (pts[i].dist_sq(pts[*j]), *j);
            if others.len() > g {
                others.select_nth_unstable_by(g, |a, b| key(a).partial_cmp(&key(b)).expect("finite"));
                others.truncate(g);
            }
            others.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite"));
            others
        })
        .collect()
}

/// Local search from the construction; only improving moves are taken.
fn solve_heuristic(inst: &Instance, k: usize) -> Option<Vec<Vec<usize>>> {
    let routes = construct(inst, k)?;
    let mut s = Search {
        inst,
        len: vec![0.0; k],
        load: vec![0.0; k],
        pos: vec![(0, 0); inst.pts.len()],
        near: neighbour_lists(inst.pts, NEIGHBOURS),
        routes,
    };
    for r in 0..k {
        s.recompute(r);
    }
    for _pass in 0..MAX_PASSES {
        let a = s.two_opt();
        let b = s.relocate();
        let c = s.swap();
        if !(a || b || c) {
            break;
        }
    }
    Some(s.routes)
}

/// Assign trails to `k` UAVs minimising the longest tour.
///
/// Each UAV's summed trail cost must stay within `battery`. Without a depot
/// routes start and end anywhere.
pub fn mvrp_solve(
    access_points: &[Point],
    k: usize,
    trail_costs: &[f64],
    battery: f64,
    depot: Option<Point>,
) -> Result<TrailAssignment> {
    let n = access_points.len();
    if n == 0 {
        return Err(Error::argument("no trails to assign"));
    }
    if k == 0 {
        return Err(Error::argument("need at least one UAV"));
    }
    if trail_costs.len() != n {
        return Err(Error::argument("trail cost count differs from access point count"));
    }
    let total: f64 = trail_costs.iter().sum();
    let cap = k as f64 * battery;
    if total > cap * (1.0 + 1e-12) {
        return Err(Error::infeasible(
            Stage::Assignment,
            format!("total trail length {total:.3} m exceeds K·D = {cap:.3} m"),
        ));
    }
    if let Some(big) = trail_costs.iter().copied().find(|&c| c > battery * (1.0 + 1e-12)) {
        return Err(Error::infeasible(
            Stage::Assignment,
            format!("trail length {big:.3} m exceeds battery distance {battery:.3} m"),
        ));
    }
    let inst = Instance {
        pts: access_points,
        costs: trail_costs,
        battery,
        depot,
    };
    let routes = if n <= EXACT_LIMIT {
        solve_exact(&inst, k)
    } else {
        solve_heuristic(&inst, k)
    };
    let routes = routes.ok_or_else(|| {
        Error::infeasible(
            Stage::Assignment,
            format!("no packing of trails (total {total:.3} m) into {k} batteries of {battery:.3} m"),
        )
    })?;
    Ok(inst.assignment(routes))
}

/// A chromosome with its decoded assignment; `fitness` is infinite when infeasible.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub chromosome: AccessChromosome,
    pub fitness: f64,
    pub assignment: Option<TrailAssignment>,
}

fn evaluate_one(c: &AccessChromosome, k: usize, trails: &[Trail], costs: &[f64], battery: f64) -> Evaluated {
    let assignment = decode_all(&c.keys, trails)
        .and_then(|pts| mvrp_solve(&pts, k, costs, battery, None))
        .ok();
    Evaluated {
        chromosome: c.clone(),
        fitness: assignment.as_ref().map_or(f64::INFINITY, |a| a.longest_tour),
        assignment,
    }
}

/// Decode and route every chromosome, sorted by fitness ascending (stable).
pub fn evaluate_fitness(population: &[AccessChromosome], k: usize, trails: &[Trail], battery: f64) -> Result<Vec<Evaluated>> {
    if population.is_empty() {
        return Err(Error::argument("empty population"));
    }
    let costs: Vec<f64> = trails.iter().map(|t| t.perimeter).collect();
    let mut out: Vec<Evaluated> = population
        .par_iter()
        .map(|c| evaluate_one(c, k, trails, &costs, battery))
        .collect();
    out.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RkgaResult {
    pub assignment: TrailAssignment,
    pub keys: Vec<f64>,
    /// Best fitness after each generation, starting with the initial population.
    pub history: Vec<f64>,
}

fn random_keys(rng: &mut impl RngExt, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Random-key genetic search over access points, fitness = longest tour.
pub fn rkga_run(trails: &[Trail], k: usize, battery: f64, ga: &GaParams, seed: u64) -> Result<RkgaResult> {
    ga.validate()?;
    if trails.is_empty() {
        return Err(Error::argument("no trails to assign"));
    }
    let n = trails.len();
    let pop_size = ga.population;
    let elites = ga.elite_count();
    let init: Vec<AccessChromosome> = (0..pop_size)
        .map(|i| AccessChromosome {
            keys: random_keys(&mut stream(seed, RKGA_TAG, 0, i as u64), n),
        })
        .collect();
    let mut pop = evaluate_fitness(&init, k, trails, battery)?;
    let mut history = vec![pop[0].fitness];
    let costs: Vec<f64> = trails.iter().map(|t| t.perimeter).collect();
    for g in 1..=ga.generations {
        let offspring: Vec<Evaluated> = (elites..pop_size)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, RKGA_TAG, g as u64, i as u64);
                let a = &pop[rng.random_range(0..elites)].chromosome.keys;
                let b = if pop_size > elites {
                    &pop[rng.random_range(elites..pop_size)].chromosome.keys
                } else {
                    &pop[rng.random_range(0..pop_size)].chromosome.keys
                };
                let keys = (0..n)
                    .map(|j| {
                        let v = if rng.random_bool(ga.crossover_rate) { a[j] } else { b[j] };
                        if rng.random_bool(ga.mutation_rate) {
                            rng.random::<f64>()
                        } else {
                            v
                        }
                    })
                    .collect();
                evaluate_one(&AccessChromosome { keys }, k, trails, &costs, battery)
            })
            .collect();
        pop.truncate(elites);
        pop.extend(offspring);
        pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        history.push(pop[0].fitness);
    }
    let best = pop.swap_remove(0);
    match best.assignment {
        Some(assignment) => Ok(RkgaResult {
            assignment,
            keys: best.chromosome.keys,
            history,
        }),
        None => Err(Error::infeasible(
            Stage::Assignment,
            "no chromosome yields a route set within the battery budget",
        )),
    }
}
