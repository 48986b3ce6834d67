//! Ground-vehicle planning: road graph, take-off and landing spots, and the sub-area tour.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::TrailAssignment;
use crate::error::{Error, Result, Stage};
use crate::geometry::{polyline_length, Point};

/// Road endpoints closer than this are the same node, meters.
pub const SNAP_TOL: f64 = 0.5;
/// Default spacing of parking spots inserted along roads, meters.
pub const SPOT_SPACING: f64 = 25.0;
/// Largest instance solved exactly by `atsp_order`.
pub const ATSP_EXACT_LIMIT: usize = 15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub a: usize,
    pub b: usize,
    /// Geometry from node `a` to node `b`.
    pub polyline: Vec<Point>,
    pub weight: f64,
}

/// Undirected road network. Nodes are junctions, line ends and parking spots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "RoadGraphData", into = "RoadGraphData")]
pub struct RoadGraph {
    pub nodes: Vec<Point>,
    pub edges: Vec<RoadEdge>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RoadGraphData {
    nodes: Vec<Point>,
    edges: Vec<RoadEdge>,
}

impl From<RoadGraphData> for RoadGraph {
    fn from(d: RoadGraphData) -> Self {
        RoadGraph::assemble(d.nodes, d.edges)
    }
}

impl From<RoadGraph> for RoadGraphData {
    fn from(g: RoadGraph) -> Self {
        RoadGraphData {
            nodes: g.nodes,
            edges: g.edges,
        }
    }
}

/// Shortest path between two nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadPath {
    pub distance: f64,
    pub nodes: Vec<usize>,
    pub polyline: Vec<Point>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then(o.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Cluster points within `tol` of a cluster's first point.
struct Snapper {
    tol: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point>,
}

impl Snapper {
    fn new(tol: f64) -> Self {
        Snapper {
            tol,
            grid: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn cell(&self, p: Point) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    fn id(&mut self, p: Point) -> usize {
        let (cx, cy) = self.cell(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &k in self.grid.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                    let d = self.points[k].dist(p);
                    if d <= self.tol && best.is_none_or(|b| (d, k) < b) {
                        best = Some((d, k));
                    }
                }
            }
        }
        if let Some((_, k)) = best {
            return k;
        }
        self.points.push(p);
        self.grid.entry((cx, cy)).or_default().push(self.points.len() - 1);
        self.points.len() - 1
    }
}

impl RoadGraph {
    fn assemble(nodes: Vec<Point>, edges: Vec<RoadEdge>) -> Self {
        let mut adj = vec![Vec::new(); nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            adj[e.a].push(k);
            if e.b != e.a {
                adj[e.b].push(k);
            }
        }
        RoadGraph { nodes, edges, adj }
    }

    /// Graph from road polylines. Line ends, and vertices shared by two or more
    /// lines, become nodes after snapping within `snap` meters.
    pub fn from_polylines(lines: &[Vec<Point>], snap: f64) -> Result<RoadGraph> {
        let mut snapper = Snapper::new(snap);
        let mut ids: Vec<Vec<usize>> = Vec::with_capacity(lines.len());
        for (i, l) in lines.iter().enumerate() {
            if l.len() < 2 || l.iter().any(|p| !p.is_finite()) {
                return Err(Error::geometry(format!("road {i} needs two or more finite vertices")));
            }
            ids.push(l.iter().map(|&p| snapper.id(p)).collect());
        }
        let mut uses = vec![0usize; snapper.points.len()];
        let mut is_node = vec![false; snapper.points.len()];
        for l in &ids {
            let mut seen: Vec<usize> = l.clone();
            seen.sort_unstable();
            seen.dedup();
            for v in seen {
                uses[v] += 1;
            }
            is_node[l[0]] = true;
            is_node[*l.last().expect("two vertices")] = true;
        }
        let mut node_of = vec![usize::MAX; snapper.points.len()];
        let mut nodes = Vec::new();
        for v in 0..snapper.points.len() {
            if is_node[v] || uses[v] >= 2 {
                node_of[v] = nodes.len();
                nodes.push(snapper.points[v]);
            }
        }
        let mut edges = Vec::new();
        for (l, line) in ids.iter().zip(lines) {
            let mut start = 0;
            for k in 1..l.len() {
                if node_of[l[k]] == usize::MAX {
                    continue;
                }
                let mut poly: Vec<Point> = vec![nodes[node_of[l[start]]]];
                poly.extend(line[start + 1..k].iter().copied());
                poly.push(nodes[node_of[l[k]]]);
                poly.dedup();
                let weight = polyline_length(&poly);
                let (a, b) = (node_of[l[start]], node_of[l[k]]);
                if weight > 0.0 && a != b {
                    edges.push(RoadEdge { a, b, polyline: poly, weight });
                }
                start = k;
            }
        }
        let g = RoadGraph::assemble(nodes, edges);
        g.check_connected()?;
        Ok(g)
    }

    /// Split every edge into pieces at most `spacing` long, adding a node at each cut.
    ///
    /// The new nodes are candidate parking spots; distances are unchanged.
    pub fn with_parking_spots(self, spacing: f64) -> RoadGraph {
        let mut nodes = self.nodes;
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let pieces = (e.weight / spacing).ceil().max(1.0) as usize;
            if pieces == 1 {
                edges.push(e);
                continue;
            }
            let mut prev = e.a;
            let mut poly = vec![e.polyline[0]];
            let mut acc = 0.0;
            let mut cut = 1;
            let target = |k: usize| e.weight * k as f64 / pieces as f64;
            for w in e.polyline.windows(2) {
                let (mut p, q) = (w[0], w[1]);
                let mut left = p.dist(q);
                while cut < pieces && acc + left >= target(cut) {
                    let step = target(cut) - acc;
                    let m = p.lerp(q, step / left);
                    poly.push(m);
                    nodes.push(m);
                    let id = nodes.len() - 1;
                    let weight = polyline_length(&poly);
                    edges.push(RoadEdge { a: prev, b: id, polyline: std::mem::replace(&mut poly, vec![m]), weight });
                    prev = id;
                    acc += step;
                    left -= step;
                    p = m;
                    cut += 1;
                }
                acc += left;
                poly.push(q);
            }
            poly.dedup();
            let weight = polyline_length(&poly);
            edges.push(RoadEdge { a: prev, b: e.b, polyline: poly, weight });
        }
        RoadGraph::assemble(nodes, edges)
    }

    /// Graph with straight edges `(a, b, weight)`.
    pub fn from_edges(nodes: Vec<Point>, edges: &[(usize, usize, f64)]) -> Result<RoadGraph> {
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::argument(format!("edge ({a}, {b}) names a missing node")));
            }
            if !(w > 0.0 && w.is_finite()) || w < nodes[a].dist(nodes[b]) - 1e-9 {
                return Err(Error::argument(format!("edge ({a}, {b}) weight {w} is below its straight-line length")));
            }
            out.push(RoadEdge {
                a,
                b,
                polyline: vec![nodes[a], nodes[b]],
                weight: w,
            });
        }
        let g = RoadGraph::assemble(nodes, out);
        g.check_connected()?;
        Ok(g)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check_connected(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Ok(());
        }
        let d = self.distances_from(0);
        match d.iter().position(|x| x.is_infinite()) {
            Some(v) => Err(Error::geometry(format!(
                "road network is disconnected: node {v} at ({:.2}, {:.2}) is unreachable",
                self.nodes[v].x, self.nodes[v].y
            ))),
            None => Ok(()),
        }
    }

    fn dijkstra(&self, a: usize) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[a] = 0.0;
        heap.push(Entry { dist: 0.0, node: a });
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &k in &self.adj[u] {
                let e = &self.edges[k];
                let v = if e.a == u { e.b } else { e.a };
                let nd = d + e.weight;
                if nd < dist[v] {
                    dist[v] = nd;
                    via[v] = Some(k);
                    heap.push(Entry { dist: nd, node: v });
                }
            }
        }
        (dist, via)
    }

    /// Shortest distances from `a` to every node.
    pub fn distances_from(&self, a: usize) -> Vec<f64> {
        self.dijkstra(a).0
    }

    pub fn nearest_node(&self, p: Point) -> Option<usize> {
        (0..self.nodes.len()).min_by(|&i, &j| self.nodes[i].dist(p).total_cmp(&self.nodes[j].dist(p)).then(i.cmp(&j)))
    }
}

/// Dijkstra path from `a` to `b`.
pub fn shortest_path(g: &RoadGraph, a: usize, b: usize) -> Result<RoadPath> {
    let n = g.nodes.len();
    if a >= n || b >= n {
        return Err(Error::argument(format!("node {} is not in the road graph", a.max(b))));
    }
    let (dist, via) = g.dijkstra(a);
    if dist[b].is_infinite() {
        return Err(Error::infeasible(Stage::Routing, format!("no road path from node {a} to node {b}")));
    }
    let mut nodes = vec![b];
    let mut edges = Vec::new();
    let mut u = b;
    while let Some(k) = via[u] {
        let e = &g.edges[k];
        u = if e.a == u { e.b } else { e.a };
        nodes.push(u);
        edges.push(k);
    }
    nodes.reverse();
    edges.reverse();
    let mut polyline = vec![g.nodes[a]];
    for (k, w) in edges.iter().zip(nodes.windows(2)) {
        let e = &g.edges[*k];
        if e.a == w[0] {
            polyline.extend(e.polyline.iter().skip(1));
        } else {
            polyline.extend(e.polyline.iter().rev().skip(1));
        }
    }
    Ok(RoadPath {
        distance: dist[b],
        nodes,
        polyline,
    })
}

/// Launch and recovery nodes for one sub-area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarSpots {
    pub start: usize,
    pub end: usize,
    /// Σ squared distances from the start node to each UAV's first access point.
    pub start_cost: f64,
    /// Σ squared distances from the end node to each UAV's last access point.
    pub end_cost: f64,
}

/// Best launch and recovery spots among road nodes within `comm_radius` of every access point.
pub fn select_car_spots(sub: &TrailAssignment, g: &RoadGraph, comm_radius: f64) -> Result<CarSpots> {
    let routes: Vec<&Vec<usize>> = sub.routes.iter().filter(|r| !r.is_empty()).collect();
    if routes.is_empty() {
        return Err(Error::argument("sub-area has no assigned trails"));
    }
    let used: Vec<Point> = routes.iter().flat_map(|r| r.iter().map(|&t| sub.access_points[t])).collect();
    let firsts: Vec<Point> = routes.iter().map(|r| sub.access_points[r[0]]).collect();
    let lasts: Vec<Point> = routes.iter().map(|r| sub.access_points[*r.last().expect("non-empty")]).collect();
    let candidates: Vec<usize> = (0..g.nodes.len())
        .filter(|&v| used.iter().all(|p| p.dist(g.nodes[v]) <= comm_radius))
        .collect();
    if candidates.is_empty() {
        let far = used
            .iter()
            .map(|p| g.nodes.iter().map(|n| n.dist(*p)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        return Err(Error::infeasible(
            Stage::Routing,
            format!("no road node within comm radius {comm_radius:.1} m of all access points (worst nearest node {far:.1} m)"),
        ));
    }
    let best = |pts: &[Point]| {
        let mut out = (usize::MAX, f64::INFINITY);
        for &v in &candidates {
            let c: f64 = pts.iter().map(|p| p.dist_sq(g.nodes[v])).sum();
            if c < out.1 {
                out = (v, c);
            }
        }
        out
    };
    let (start, start_cost) = best(&firsts);
    let (end, end_cost) = best(&lasts);
    Ok(CarSpots {
        start,
        end,
        start_cost,
        end_cost,
    })
}

fn path_cost(cost: &[Vec<f64>], order: &[usize]) -> f64 {
    order.windows(2).map(|w| cost[w[0]][w[1]]).sum()
}

fn held_karp(cost: &[Vec<f64>], start: Option<usize>) -> Vec<usize> {
    let n = cost.len();
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![u8::MAX; (1 << n) * n];
    for j in 0..n {
        if start.is_none_or(|s| s == j) {
            dp[(1 << j) * n + j] = 0.0;
        }
    }
    for mask in 1..=full {
        for j in 0..n {
            let cur = dp[mask * n + j];
            if mask & (1 << j) == 0 || cur.is_infinite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let v = cur + cost[j][k];
                if v < dp[next * n + k] {
                    dp[next * n + k] = v;
                    parent[next * n + k] = j as u8;
                }
            }
        }
    }
    // open path: a zero-cost terminal follows whichever node ends the tour
    let mut last = 0;
    for j in 1..n {
        if dp[full * n + j] < dp[full * n + last] {
            last = j;
        }
    }
    let mut order = vec![last];
    let mut mask = full;
    let mut j = last;
    while parent[mask * n + j] != u8::MAX {
        let p = parent[mask * n + j] as usize;
        mask &= !(1 << j);
        j = p;
        order.push(j);
    }
    order.reverse();
    order
}

fn greedy_or_opt(cost: &[Vec<f64>], start: Option<usize>) -> Vec<usize> {
    let n = cost.len();
    let starts: Vec<usize> = match start {
        Some(s) => vec![s],
        None => (0..n).collect(),
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for s in starts {
        let mut order = vec![s];
        let mut used = vec![false; n];
        used[s] = true;
        for _ in 1..n {
            let u = *order.last().expect("non-empty");
            let v = (0..n)
                .filter(|&v| !used[v])
                .min_by(|&a, &b| cost[u][a].total_cmp(&cost[u][b]).then(a.cmp(&b)))
                .expect("unvisited node");
            used[v] = true;
            order.push(v);
        }
        or_opt(cost, &mut order, start.is_some());
        let c = path_cost(cost, &order);
        if best.as_ref().is_none_or(|b| c < b.0) {
            best = Some((c, order));
        }
    }
    best.expect("n > 0").1
}

/// Move chains of 1 to 3 nodes to better positions until nothing improves.
fn or_opt(cost: &[Vec<f64>], order: &mut Vec<usize>, pin_first: bool) {
    let n = order.len();
    let lo = usize::from(pin_first);
    let mut cur = path_cost(cost, order);
    loop {
        let mut improved = false;
        for len in 1..=3.min(n.saturating_sub(lo)) {
            for i in lo..=n - len {
                let mut rest: Vec<usize> = order[..i].iter().chain(&order[i + len..]).copied().collect();
                let chain: Vec<usize> = order[i..i + len].to_vec();
                for pos in lo..=rest.len() {
                    if pos == i {
                        continue;
                    }
                    let mut cand = rest.clone();
                    cand.splice(pos..pos, chain.iter().copied());
                    let c = path_cost(cost, &cand);
                    if c < cur - 1e-12 * (1.0 + cur) {
                        *order = cand;
                        cur = c;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    break;
                }
                rest.clear();
            }
            if improved {
                break;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Open Hamiltonian path of least total cost; starts at `start` when given.
///
/// Exact over subsets up to `ATSP_EXACT_LIMIT` nodes, greedy plus or-opt above.
pub fn atsp_order(cost: &[Vec<f64>], start: Option<usize>) -> Result<(Vec<usize>, f64)> {
    let n = cost.len();
    if n == 0 {
        return Err(Error::argument("ATSP needs at least one node"));
    }
    if cost.iter().any(|r| r.len() != n) {
        return Err(Error::argument("ATSP cost matrix must be square"));
    }
    for (i, r) in cost.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if i != j && !(c >= 0.0 && c.is_finite()) {
                return Err(Error::argument(format!("ATSP cost ({i}, {j}) = {c} must be finite and non-negative")));
            }
        }
    }
    if start.is_some_and(|s| s >= n) {
        return Err(Error::argument("ATSP start index out of range"));
    }
    let order = if n <= ATSP_EXACT_LIMIT {
        held_karp(cost, start)
    } else {
        greedy_or_opt(cost, start)
    };
    let c = path_cost(cost, &order);
    Ok((order, c))
}

/// `cost[i][j]` = road distance from sub-area i's end spot to sub-area j's start spot.
pub fn build_intersubarea_costs(spots: &[CarSpots], g: &RoadGraph) -> Result<Vec<Vec<f64>>> {
    let n = g.nodes.len();
    if let Some(s) = spots.iter().find(|s| s.start >= n || s.end >= n) {
        return Err(Error::argument(format!("car spot {} is not a road node", s.start.max(s.end))));
    }
    let rows: Vec<Vec<f64>> = spots.par_iter().map(|s| g.distances_from(s.end)).collect();
    let mut cost = vec![vec![0.0; spots.len()]; spots.len()];
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in spots.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = row[s.start];
            if d.is_infinite() {
                return Err(Error::infeasible(
                    Stage::Routing,
                    format!("no road path from sub-area {i} to sub-area {j}"),
                ));
            }
            cost[i][j] = d;
        }
    }
    Ok(cost)
}

/// Car path between consecutive sub-areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarLeg {
    pub from_subarea: usize,
    pub to_subarea: usize,
    pub path: RoadPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarPlan {
    pub spots: Vec<CarSpots>,
    pub order: Vec<usize>,
    pub legs: Vec<CarLeg>,
    /// Drive from a sub-area's start spot to its end spot while the UAVs fly.
    pub local_moves: Vec<RoadPath>,
    /// Σ leg distances.
    pub total_distance: f64,
}

impl CarPlan {
    pub fn local_distance(&self) -> f64 {
        self.local_moves.iter().map(|p| p.distance).sum()
    }
}

/// Order the sub-areas and connect their spots by shortest road paths.
pub fn plan_car(spots: &[CarSpots], g: &RoadGraph, first: Option<usize>) -> Result<CarPlan> {
    if spots.is_empty() {
        return Err(Error::argument("no sub-areas to visit"));
    }
    let cost = build_intersubarea_costs(spots, g)?;
    let (order, _) = atsp_order(&cost, first)?;
    let mut legs = Vec::with_capacity(order.len().saturating_sub(1));
    for w in order.windows(2) {
        legs.push(CarLeg {
            from_subarea: w[0],
            to_subarea: w[1],
            path: shortest_path(g, spots[w[0]].end, spots[w[1]].start)?,
        });
    }
    let local_moves = spots
        .iter()
        .map(|s| shortest_path(g, s.start, s.end))
        .collect::<Result<Vec<_>>>()?;
    let total_distance = legs.iter().map(|l| l.path.distance).sum();
    Ok(CarPlan {
        spots: spots.to_vec(),
        order,
        legs,
        local_moves,
        total_distance,
    })
}
