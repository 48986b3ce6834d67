//! Access-point refinement as a mixed-integer QP over trail segments.
//!
//! Each trail's access point must lie on one of its segments. The lifted
//! convex-hull system ties the point to per-segment copies gated by binaries;
//! relaxing the binaries confines the point to the convex hull of the allowed
//! segments, which is the form the branch-and-bound solves.

mod qp;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::assignment::TrailAssignment;
use crate::error::{Error, Result, Stage};
use crate::geometry::{closest_point_on_segment, BoundingBox, Point, SegmentHalfspaces};
use crate::trails::Trail;
pub use qp::{Qp, QpSolution, Row};

/// "Access point of `var` lies on one of `segments`", one binary per segment.
///
/// Single-point trails have no segments and carry `fixed` instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjunctionConstraint {
    pub var: usize,
    pub segments: Vec<SegmentHalfspaces>,
    pub binaries: Vec<usize>,
    pub fixed: Option<Point>,
}

/// Reduced problem: access points of a fixed assignment, chained per UAV route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiqpProblem {
    pub num_vars: usize,
    pub num_binaries: usize,
    pub routes: Vec<Vec<usize>>,
    pub disjunctions: Vec<DisjunctionConstraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Incumbent,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiqpSolution {
    pub access_points: Vec<Point>,
    pub binaries: Vec<bool>,
    /// Sum of squared transition lengths.
    pub objective: f64,
    pub nodes: usize,
    pub status: SolveStatus,
}

/// Search limits for one solve call. `max_nodes` applies to each UAV route separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_nodes: usize,
    /// Wall-clock limit in seconds; breaks run-to-run determinism when it triggers.
    pub time_limit: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 5000,
            time_limit: None,
        }
    }
}

/// Kind of a lifted constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
}

/// Sparse row of the lifted system: Σ coeff·var (= or ≤) rhs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: RowKind,
}

impl MiqpProblem {
    /// Consecutive trail pairs on every route.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.routes.iter().flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
    }

    pub fn objective(&self, pts: &[Point]) -> f64 {
        self.terms().map(|(a, b)| pts[a].dist_sq(pts[b])).sum()
    }

    /// Index of trail `var`'s point x in the lifted variable vector (x, y follow).
    pub fn point_var(&self, var: usize) -> usize {
        2 * var
    }

    /// Index of the lifted copy of point for binary `l`.
    pub fn copy_var(&self, l: usize) -> usize {
        2 * self.num_vars + 2 * l
    }

    /// Index of binary `l`.
    pub fn binary_var(&self, l: usize) -> usize {
        2 * self.num_vars + 2 * self.num_binaries + l
    }

    pub fn lifted_len(&self) -> usize {
        2 * self.num_vars + 3 * self.num_binaries
    }

    /// Convex-hull rows of one disjunction.
    pub fn lifted_rows(&self, d: &DisjunctionConstraint) -> Vec<LinearRow> {
        let mut rows = Vec::new();
        let xi = self.point_var(d.var);
        if let Some(p) = d.fixed {
            for (k, v) in [p.x, p.y].into_iter().enumerate() {
                rows.push(LinearRow {
                    coeffs: vec![(xi + k, 1.0)],
                    rhs: v,
                    kind: RowKind::Eq,
                });
            }
            return rows;
        }
        // x = Σ x_l
        for k in 0..2 {
            let mut coeffs = vec![(xi + k, 1.0)];
            coeffs.extend(d.binaries.iter().map(|&l| (self.copy_var(l) + k, -1.0)));
            rows.push(LinearRow {
                coeffs,
                rhs: 0.0,
                kind: RowKind::Eq,
            });
        }
        for (s, &l) in d.segments.iter().zip(&d.binaries) {
            let xl = self.copy_var(l);
            let h = self.binary_var(l);
            // A_l x_l ≤ H_l b_l
            for r in 0..3 {
                rows.push(LinearRow {
                    coeffs: vec![(xl, s.a[r][0]), (xl + 1, s.a[r][1]), (h, -s.b[r])],
                    rhs: 0.0,
                    kind: if r == s.eq_row { RowKind::Eq } else { RowKind::Le },
                });
            }
            // H_l lb ≤ x_l ≤ H_l ub
            for (k, (lo, hi)) in [(s.lb.x, s.ub.x), (s.lb.y, s.ub.y)].into_iter().enumerate() {
                rows.push(LinearRow {
                    coeffs: vec![(xl + k, 1.0), (h, -hi)],
                    rhs: 0.0,
                    kind: RowKind::Le,
                });
                rows.push(LinearRow {
                    coeffs: vec![(xl + k, -1.0), (h, lo)],
                    rhs: 0.0,
                    kind: RowKind::Le,
                });
            }
        }
        rows.push(LinearRow {
            coeffs: d.binaries.iter().map(|&l| (self.binary_var(l), 1.0)).collect(),
            rhs: 1.0,
            kind: RowKind::Eq,
        });
        rows
    }

    /// Whether the lifted rows of trail `var` admit point `x` under the integral choice `h`.
    ///
    /// With `H_l = 0` the bounds force `x_l = 0`, so the only candidate copy
    /// vector puts `x` on the selected segment.
    pub fn lifted_admits(&self, var: usize, h: &[bool], x: Point, tol: f64) -> bool {
        let d = &self.disjunctions[var];
        let mut v = vec![0.0; self.lifted_len()];
        let xi = self.point_var(var);
        v[xi] = x.x;
        v[xi + 1] = x.y;
        if d.fixed.is_none() {
            if h.len() != d.binaries.len() {
                return false;
            }
            for (&l, &on) in d.binaries.iter().zip(h) {
                if on {
                    let xl = self.copy_var(l);
                    v[xl] = x.x;
                    v[xl + 1] = x.y;
                    v[self.binary_var(l)] = 1.0;
                }
            }
        }
        self.lifted_rows(d).iter().all(|r| {
            let lhs: f64 = r.coeffs.iter().map(|&(i, c)| c * v[i]).sum();
            match r.kind {
                RowKind::Eq => (lhs - r.rhs).abs() <= tol,
                RowKind::Le => lhs <= r.rhs + tol,
            }
        })
    }

    /// Plain-text instance dump.
    ///
    /// ```text
    /// covplan-miqp 1
    /// vars <N> binaries <L> lifted <2N+3L>
    /// route <k> <trail ids...>
    /// term <i> <j>                      objective += |x_j - x_i|^2
    /// trail <i> fixed <x> <y>           or: trail <i> segments <m>
    /// seg <l> <x0> <y0> <x1> <y1>       one line per segment of the trail above
    /// row eq|le <rhs> <var>:<coeff>...  lifted rows; vars numbered x_i, x_l, H_l
    /// ```
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "covplan-miqp 1");
        let _ = writeln!(s, "vars {} binaries {} lifted {}", self.num_vars, self.num_binaries, self.lifted_len());
        for (k, r) in self.routes.iter().enumerate() {
            let ids: Vec<String> = r.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "route {k} {}", ids.join(" "));
        }
        for (a, b) in self.terms() {
            let _ = writeln!(s, "term {a} {b}");
        }
        for d in &self.disjunctions {
            match d.fixed {
                Some(p) => {
                    let _ = writeln!(s, "trail {} fixed {:.17e} {:.17e}", d.var, p.x, p.y);
                }
                None => {
                    let _ = writeln!(s, "trail {} segments {}", d.var, d.segments.len());
                    for (seg, l) in d.segments.iter().zip(&d.binaries) {
                        let _ = writeln!(
                            s,
                            "seg {l} {:.17e} {:.17e} {:.17e} {:.17e}",
                            seg.p0.x, seg.p0.y, seg.p1.x, seg.p1.y
                        );
                    }
                }
            }
        }
        for d in &self.disjunctions {
            for r in self.lifted_rows(d) {
                let kind = if r.kind == RowKind::Eq { "eq" } else { "le" };
                let terms: Vec<String> = r.coeffs.iter().map(|(i, c)| format!("{i}:{c:.17e}")).collect();
                let _ = writeln!(s, "row {kind} {:.17e} {}", r.rhs, terms.join(" "));
            }
        }
        s
    }
}

/// Reduced problem for a fixed assignment: one point variable per trail.
pub fn build_reduced_miqp(assignment: &TrailAssignment, trails: &[Trail]) -> Result<MiqpProblem> {
    if assignment.routes.iter().all(|r| r.is_empty()) {
        return Err(Error::argument("assignment has no routes"));
    }
    let mut seen = vec![false; trails.len()];
    for &t in assignment.routes.iter().flatten() {
        if t >= trails.len() || std::mem::replace(&mut seen[t], true) {
            return Err(Error::argument(format!("trail {t} unknown or assigned twice")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::argument("assignment leaves trails unassigned"));
    }
    let mut disjunctions = Vec::with_capacity(trails.len());
    let mut l = 0;
    for (i, t) in trails.iter().enumerate() {
        if t.ring.len() == 1 {
            disjunctions.push(DisjunctionConstraint {
                var: i,
                segments: Vec::new(),
                binaries: Vec::new(),
                fixed: Some(t.ring[0]),
            });
            continue;
        }
        let mut t = t.clone();
        if t.edges.len() != t.ring.len() {
            t.rebuild()?;
        }
        let segments = t.edges.clone();
        let binaries = (l..l + segments.len()).collect();
        l += segments.len();
        disjunctions.push(DisjunctionConstraint {
            var: i,
            segments,
            binaries,
            fixed: None,
        });
    }
    Ok(MiqpProblem {
        num_vars: trails.len(),
        num_binaries: l,
        routes: assignment.routes.iter().filter(|r| !r.is_empty()).cloned().collect(),
        disjunctions,
    })
}

/// Affine map to a unit-sized frame for solving.
#[derive(Clone, Copy)]
struct Frame {
    origin: Point,
    scale: f64,
}

impl Frame {
    fn of(prob: &MiqpProblem) -> Frame {
        let pts: Vec<Point> = prob
            .disjunctions
            .iter()
            .flat_map(|d| d.segments.iter().flat_map(|s| [s.p0, s.p1]).chain(d.fixed))
            .collect();
        match BoundingBox::of_points(&pts) {
            Some(bb) => Frame {
                origin: bb.min,
                scale: 1.0 / bb.width().max(bb.height()).max(1e-12),
            },
            None => Frame {
                origin: Point::default(),
                scale: 1.0,
            },
        }
    }

    fn to(&self, p: Point) -> Point {
        (p - self.origin) * self.scale
    }

    fn from(&self, p: Point) -> Point {
        p * (1.0 / self.scale) + self.origin
    }
}

/// Counter-clockwise convex hull, collinear points dropped.
fn convex_hull(pts: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = pts.to_vec();
    p.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite"));
    p.dedup_by(|a, b| a.dist(*b) <= 1e-15);
    if p.len() <= 2 {
        return p;
    }
    let scale = p.iter().map(|q| q.x.abs().max(q.y.abs())).fold(1.0, f64::max);
    let tol = 1e-14 * scale * scale;
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && (hull[hull.len() - 1] - hull[hull.len() - 2]).cross(q - hull[hull.len() - 2]) <= tol {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    if hull.len() < 2 {
        return vec![p[0], p[p.len() - 1]];
    }
    hull
}

/// Rows keeping a 2-D point (variables `2i`, `2i+1` of `n`) inside the hull of `pts`.
fn hull_rows(qp: &mut Qp, i: usize, pts: &[Point]) -> Point {
    let n = qp.n;
    let row = |a: Point, b: f64| {
        let mut v = vec![0.0; n];
        v[2 * i] = a.x;
        v[2 * i + 1] = a.y;
        Row { a: v, b }
    };
    let h = convex_hull(pts);
    match h.len() {
        1 => {
            qp.eq.push(row(Point::new(1.0, 0.0), h[0].x));
            qp.eq.push(row(Point::new(0.0, 1.0), h[0].y));
        }
        2 => {
            let u = (h[1] - h[0]).normalized();
            let nrm = u.perp();
            qp.eq.push(row(nrm, nrm.dot(h[0])));
            qp.le.push(row(u, u.dot(h[1])));
            qp.le.push(row(-u, -u.dot(h[0])));
        }
        m => {
            for k in 0..m {
                let (a, b) = (h[k], h[(k + 1) % m]);
                let d = (b - a).normalized();
                let out = Point::new(d.y, -d.x);
                qp.le.push(row(out, out.dot(a)));
            }
        }
    }
    h[0]
}

/// One UAV route in the solving frame.
struct Chain {
    trails: Vec<usize>,
    segs: Vec<Vec<(Point, Point)>>,
    fixed: Vec<Option<Point>>,
}

struct Relaxed {
    value: f64,
    pts: Vec<Point>,
    exact: bool,
}

impl Chain {
    fn value(&self, pts: &[Point]) -> f64 {
        pts.windows(2).map(|w| w[0].dist_sq(w[1])).sum()
    }

    /// Relaxation with the access point of each trail in the hull of its allowed segments.
    fn relax(&self, allowed: &[Vec<usize>], warm: Option<&[Point]>) -> Option<Relaxed> {
        let m = self.trails.len();
        let mut qp = Qp::new(2 * m);
        for w in 0..m.saturating_sub(1) {
            for k in 0..2 {
                let (a, b) = (2 * w + k, 2 * (w + 1) + k);
                let n = qp.n;
                qp.q[a * n + a] += 2.0;
                qp.q[b * n + b] += 2.0;
                qp.q[a * n + b] -= 2.0;
                qp.q[b * n + a] -= 2.0;
            }
        }
        let mut x0 = vec![0.0; 2 * m];
        for i in 0..m {
            let pts: Vec<Point> = match self.fixed[i] {
                Some(p) => vec![p],
                None => {
                    if allowed[i].is_empty() {
                        return None;
                    }
                    allowed[i].iter().flat_map(|&l| [self.segs[i][l].0, self.segs[i][l].1]).collect()
                }
            };
            let start = hull_rows(&mut qp, i, &pts);
            x0[2 * i] = start.x;
            x0[2 * i + 1] = start.y;
        }
        if let Some(w) = warm {
            let guess: Vec<f64> = w.iter().flat_map(|p| [p.x, p.y]).collect();
            if qp.violation(&guess) <= 1e-12 {
                x0 = guess;
            }
        }
        let s = qp.solve(&x0);
        let pts: Vec<Point> = (0..m).map(|i| Point::new(s.x[2 * i], s.x[2 * i + 1])).collect();
        Some(Relaxed {
            value: self.value(&pts),
            pts,
            exact: s.converged,
        })
    }

    /// Allowed segment nearest to `p` among `allowed`, with its distance.
    fn nearest(&self, i: usize, allowed: &[usize], p: Point) -> (usize, f64) {
        allowed
            .iter()
            .map(|&l| {
                let (a, b) = self.segs[i][l];
                (l, closest_point_on_segment(p, a, b).0.dist(p))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
            .expect("non-empty allowed set")
    }

    fn full_sets(&self) -> Vec<Vec<usize>> {
        self.segs.iter().map(|s| (0..s.len()).collect()).collect()
    }

    /// Depth-first branch-and-bound. Returns (value, points, nodes, exhausted).
    fn solve(&self, incumbent: Option<Vec<Point>>, budget: &Budget, deadline: Option<Instant>) -> (f64, Vec<Point>, usize, bool) {
        let m = self.trails.len();
        let on_tol = 1e-9;
        let mut best: Option<(f64, Vec<Point>)> = incumbent.map(|p| (self.value(&p), p));
        let mut nodes = 0;
        let root = self.full_sets();
        let mut stack: Vec<(Vec<Vec<usize>>, Option<Vec<Point>>)> = vec![(root, None)];
        let mut heuristic_done = false;
        while let Some((allowed, warm)) = stack.pop() {
            if nodes >= budget.max_nodes || deadline.is_some_and(|d| Instant::now() >= d) {
                return match best {
                    Some((v, p)) => (v, p, nodes, false),
                    None => (f64::INFINITY, Vec::new(), nodes, false),
                };
            }
            nodes += 1;
            let Some(r) = self.relax(&allowed, warm.as_deref()) else { continue };
            let inc = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if r.exact && r.value >= inc - 1e-12 * (1.0 + inc) {
                continue;
            }
            // trail whose relaxed point is farthest from its allowed segments
            let mut pick: Option<(usize, usize, f64)> = None;
            for i in 0..m {
                if self.fixed[i].is_some() {
                    continue;
                }
                let (l, d) = self.nearest(i, &allowed[i], r.pts[i]);
                if d > on_tol && pick.is_none_or(|p| d > p.2) {
                    pick = Some((i, l, d));
                }
            }
            if !heuristic_done {
                heuristic_done = true;
                // round to the nearest segments and polish with a fixed-segment solve
                let rounded: Vec<Vec<usize>> = (0..m)
                    .map(|i| {
                        if self.fixed[i].is_some() {
                            Vec::new()
                        } else {
                            vec![self.nearest(i, &allowed[i], r.pts[i]).0]
                        }
                    })
                    .collect();
                if let Some(h) = self.relax(&rounded, None) {
                    nodes += 1;
                    if h.value < best.as_ref().map_or(f64::INFINITY, |b| b.0) {
                        best = Some((h.value, self.snap(&rounded, &h.pts)));
                    }
                }
            }
            let Some((i, l, _)) = pick else {
                // every point already sits on an allowed segment
                if r.value < best.as_ref().map_or(f64::INFINITY, |b| b.0) {
                    let choice: Vec<Vec<usize>> = (0..m)
                        .map(|k| {
                            if self.fixed[k].is_some() {
                                Vec::new()
                            } else {
                                vec![self.nearest(k, &allowed[k], r.pts[k]).0]
                            }
                        })
                        .collect();
                    best = Some((r.value, self.snap(&choice, &r.pts)));
                }
                continue;
            };
            let mut zero = allowed.clone();
            zero[i].retain(|&x| x != l);
            let mut one = allowed;
            one[i] = vec![l];
            // children start from the parent point moved onto an allowed segment
            if !zero[i].is_empty() {
                let mut w = r.pts.clone();
                let (k, _) = self.nearest(i, &zero[i], w[i]);
                w[i] = closest_point_on_segment(w[i], self.segs[i][k].0, self.segs[i][k].1).0;
                stack.push((zero, Some(w)));
            }
            let mut w = r.pts;
            w[i] = closest_point_on_segment(w[i], self.segs[i][l].0, self.segs[i][l].1).0;
            stack.push((one, Some(w)));
        }
        match best {
            Some((v, p)) => (v, p, nodes, true),
            None => (f64::INFINITY, Vec::new(), nodes, true),
        }
    }

    /// Project points onto their chosen segments.
    fn snap(&self, choice: &[Vec<usize>], pts: &[Point]) -> Vec<Point> {
        (0..pts.len())
            .map(|i| match self.fixed[i] {
                Some(p) => p,
                None => {
                    let (a, b) = self.segs[i][choice[i][0]];
                    closest_point_on_segment(pts[i], a, b).0
                }
            })
            .collect()
    }
}

fn chains(prob: &MiqpProblem, frame: &Frame) -> Vec<Chain> {
    prob.routes
        .iter()
        .map(|r| Chain {
            trails: r.clone(),
            segs: r
                .iter()
                .map(|&t| {
                    prob.disjunctions[t]
                        .segments
                        .iter()
                        .map(|s| (frame.to(s.p0), frame.to(s.p1)))
                        .collect()
                })
                .collect(),
            fixed: r.iter().map(|&t| prob.disjunctions[t].fixed.map(|p| frame.to(p))).collect(),
        })
        .collect()
}

fn infeasible_disjunction(prob: &MiqpProblem) -> bool {
    prob.disjunctions.iter().any(|d| d.fixed.is_none() && d.segments.is_empty())
}

/// Lower bound and relaxed points for the given binary fixings (`None` = relaxed).
///
/// Returns an infinite bound when the fixings leave some trail with no segment.
pub fn qp_relax(prob: &MiqpProblem, fixings: &[Option<bool>]) -> Result<(f64, Vec<Point>)> {
    if fixings.len() != prob.num_binaries {
        return Err(Error::argument("fixing count differs from binary count"));
    }
    if infeasible_disjunction(prob) {
        return Ok((f64::INFINITY, Vec::new()));
    }
    let frame = Frame::of(prob);
    let mut pts: Vec<Point> = prob
        .disjunctions
        .iter()
        .map(|d| d.fixed.unwrap_or_else(|| d.segments[0].p0))
        .collect();
    let mut total = 0.0;
    for chain in chains(prob, &frame) {
        let mut allowed = Vec::with_capacity(chain.trails.len());
        for &t in &chain.trails {
            let d = &prob.disjunctions[t];
            let ones: Vec<usize> = (0..d.binaries.len()).filter(|&k| fixings[d.binaries[k]] == Some(true)).collect();
            let set: Vec<usize> = match ones.len() {
                0 => (0..d.binaries.len()).filter(|&k| fixings[d.binaries[k]] != Some(false)).collect(),
                1 => ones,
                _ => Vec::new(),
            };
            if d.fixed.is_none() && set.is_empty() {
                return Ok((f64::INFINITY, Vec::new()));
            }
            allowed.push(set);
        }
        let Some(r) = chain.relax(&allowed, None) else {
            return Ok((f64::INFINITY, Vec::new()));
        };
        total += r.value;
        for (k, &t) in chain.trails.iter().enumerate() {
            pts[t] = frame.from(r.pts[k]);
        }
    }
    Ok((total / (frame.scale * frame.scale), pts))
}

/// Branch-and-bound over segment choices, seeded with `incumbent` access points when given.
///
/// The result never has a larger objective than the incumbent.
pub fn solve_miqp(prob: &MiqpProblem, incumbent: Option<&[Point]>, budget: &Budget) -> MiqpSolution {
    if infeasible_disjunction(prob) {
        return MiqpSolution {
            access_points: Vec::new(),
            binaries: vec![false; prob.num_binaries],
            objective: f64::INFINITY,
            nodes: 0,
            status: SolveStatus::Infeasible,
        };
    }
    let frame = Frame::of(prob);
    let deadline = budget.time_limit.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
    let mut pts: Vec<Point> = prob
        .disjunctions
        .iter()
        .enumerate()
        .map(|(i, d)| match (d.fixed, incumbent) {
            (Some(p), _) => p,
            (None, Some(inc)) => inc[i],
            (None, None) => d.segments[0].p0,
        })
        .collect();
    let mut nodes = 0;
    let mut exhausted = true;
    for chain in chains(prob, &frame) {
        if chain.trails.len() < 2 {
            continue;
        }
        let inc = incumbent.map(|inc| chain.trails.iter().map(|&t| frame.to(inc[t])).collect());
        let (_, chain_pts, n, done) = chain.solve(inc, budget, deadline);
        nodes += n;
        exhausted &= done;
        for (k, &t) in chain.trails.iter().enumerate() {
            if !chain_pts.is_empty() {
                pts[t] = frame.from(chain_pts[k]);
            }
        }
    }
    // land every point exactly on its nearest segment and pick that binary
    let mut binaries = vec![false; prob.num_binaries];
    for d in &prob.disjunctions {
        if d.fixed.is_some() {
            continue;
        }
        let p = pts[d.var];
        let (k, q) = d
            .segments
            .iter()
            .enumerate()
            .map(|(k, s)| (k, closest_point_on_segment(p, s.p0, s.p1).0))
            .min_by(|a, b| a.1.dist(p).total_cmp(&b.1.dist(p)))
            .expect("non-empty segments");
        pts[d.var] = q;
        binaries[d.binaries[k]] = true;
    }
    let mut objective = prob.objective(&pts);
    if let Some(inc) = incumbent {
        let inc_obj = prob.objective(inc);
        if inc_obj < objective {
            // rounding noise only; keep the incumbent so the result never gets worse
            pts = inc.to_vec();
            objective = inc_obj;
            binaries = vec![false; prob.num_binaries];
            for d in &prob.disjunctions {
                if let Some(k) = d.segments.iter().position(|s| s.contains(pts[d.var], 1e-7)) {
                    binaries[d.binaries[k]] = true;
                }
            }
        }
    }
    MiqpSolution {
        access_points: pts,
        binaries,
        objective,
        nodes,
        status: if exhausted { SolveStatus::Optimal } else { SolveStatus::Incumbent },
    }
}

/// Plan from the full assignment-and-access MIQP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullPlan {
    pub routes: Vec<Vec<usize>>,
    pub access_points: Vec<Point>,
    pub objective: f64,
    pub status: SolveStatus,
    /// K·T·(L + K) binaries of the padded formulation.
    pub binary_count: usize,
}

/// Joint assignment and access points for tiny instances.
///
/// Steps beyond a UAV's trail count are idle at its first access point, so
/// any horizon with K·T ≥ N_t is feasible. The search walks every occupancy
/// pattern of the step array that meets the battery rows and solves each
/// pattern's access points to optimality.
pub fn solve_full_miqp(trails: &[Trail], k: usize, horizon: usize, battery: f64, budget: &Budget) -> Result<FullPlan> {
    let n = trails.len();
    if n == 0 || k == 0 || horizon == 0 {
        return Err(Error::argument("need trails, UAVs and a positive horizon"));
    }
    if k * horizon < n {
        return Err(Error::argument(format!("K·T = {} is below the trail count {n}", k * horizon)));
    }
    let costs: Vec<f64> = trails.iter().map(|t| t.perimeter).collect();
    let segs: usize = trails.iter().map(|t| if t.ring.len() > 1 { t.ring.len() } else { 1 }).sum();
    let deadline = budget.time_limit.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
    let mut cache: HashMap<Vec<usize>, (f64, Vec<Point>, bool)> = HashMap::new();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut exhausted = true;
    let mut owner = vec![0usize; n];
    let chain_budget = Budget {
        max_nodes: budget.max_nodes,
        time_limit: None,
    };
    loop {
        let groups: Vec<Vec<usize>> = (0..k).map(|u| (0..n).filter(|&i| owner[i] == u).collect()).collect();
        let ok = groups
            .iter()
            .all(|g| g.len() <= horizon && g.iter().map(|&i| costs[i]).sum::<f64>() <= battery * (1.0 + 1e-12));
        if ok {
            let mut total = 0.0;
            let mut routes = Vec::with_capacity(k);
            for g in &groups {
                let (v, order) = best_order(g, trails, &chain_budget, &mut cache, &mut exhausted);
                total += v;
                routes.push(order);
            }
            if best.as_ref().is_none_or(|b| total < b.0 - 1e-12 * (1.0 + b.0)) {
                best = Some((total, routes));
            }
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            exhausted = false;
            break;
        }
        let mut j = 0;
        while j < n {
            owner[j] += 1;
            if owner[j] < k {
                break;
            }
            owner[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    let Some((objective, routes)) = best else {
        return Err(Error::infeasible(
            Stage::AccessOpt,
            format!("no split of {n} trails over {k} UAVs × {horizon} steps fits battery {battery:.3} m"),
        ));
    };
    let mut access_points = vec![Point::default(); n];
    for r in &routes {
        if let Some((_, pts, _)) = cache.get(r) {
            for (&t, &p) in r.iter().zip(pts) {
                access_points[t] = p;
            }
        }
    }
    Ok(FullPlan {
        routes,
        access_points,
        objective,
        status: if exhausted { SolveStatus::Optimal } else { SolveStatus::Incumbent },
        binary_count: k * horizon * (segs + k),
    })
}

/// Cheapest visiting order of `group` with its optimal access points.
fn best_order(
    group: &[usize],
    trails: &[Trail],
    budget: &Budget,
    cache: &mut HashMap<Vec<usize>, (f64, Vec<Point>, bool)>,
    exhausted: &mut bool,
) -> (f64, Vec<usize>) {
    if group.is_empty() {
        return (0.0, Vec::new());
    }
    let mut perm = group.to_vec();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let entry = cache.entry(perm.clone()).or_insert_with(|| {
            let sub: Vec<Trail> = perm.iter().map(|&t| trails[t].clone()).collect();
            let assignment = TrailAssignment {
                routes: vec![(0..sub.len()).collect()],
                access_points: Vec::new(),
                route_lengths: Vec::new(),
                transition_lengths: Vec::new(),
                longest_tour: 0.0,
            };
            let prob = build_reduced_miqp(&assignment, &sub).expect("well-formed sub-problem");
            let sol = solve_miqp(&prob, None, budget);
            (sol.objective, sol.access_points, sol.status == SolveStatus::Optimal)
        });
        *exhausted &= entry.2;
        if best.as_ref().is_none_or(|b| entry.0 < b.0 - 1e-12 * (1.0 + b.0)) {
            best = Some((entry.0, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.expect("at least one order")
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests;
