//! Closed coverage trails from repeated inward offsetting, plus a zig-zag baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::geometry::{
    beveled_offset_all, difference, mitered_offset, segment_to_halfspaces, segments_properly_intersect,
    BoundingBox, Point, PolygonWithHoles, SegmentHalfspaces, SegmentIndex,
};

/// A closed loop flown by one UAV.
///
/// Degenerate loops are allowed: two vertices (out and back along a segment)
/// or a single point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trail {
    pub ring: Vec<Point>,
    #[serde(skip)]
    pub edges: Vec<SegmentHalfspaces>,
    pub perimeter: f64,
    pub vertex_keys: Vec<f64>,
    pub subarea_id: usize,
    pub trail_id: usize,
}

impl Trail {
    /// Build a trail from an oriented loop, starting it at the lexicographically smallest vertex.
    pub fn from_ring(ring: Vec<Point>, subarea_id: usize, trail_id: usize) -> Result<Trail> {
        if ring.is_empty() {
            return Err(Error::geometry("trail needs at least one vertex"));
        }
        let m = ring.len();
        for i in 0..m {
            if m > 1 && ring[i].dist(ring[(i + 1) % m]) == 0.0 {
                return Err(Error::geometry("trail has a zero-length edge"));
            }
        }
        let start = (0..m)
            .min_by(|&a, &b| {
                (ring[a].x, ring[a].y)
                    .partial_cmp(&(ring[b].x, ring[b].y))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
            .expect("non-empty ring");
        let mut ring = ring;
        ring.rotate_left(start);
        let mut t = Trail {
            ring,
            edges: Vec::new(),
            perimeter: 0.0,
            vertex_keys: Vec::new(),
            subarea_id,
            trail_id,
        };
        t.rebuild()?;
        Ok(t)
    }

    /// Recompute edges, perimeter and keys from `ring`.
    pub fn rebuild(&mut self) -> Result<()> {
        let m = self.ring.len();
        let bb = BoundingBox::of_points(&self.ring).expect("non-empty ring");
        self.edges.clear();
        let mut cum = Vec::with_capacity(m);
        let mut total = 0.0;
        if m > 1 {
            for i in 0..m {
                let (a, b) = (self.ring[i], self.ring[(i + 1) % m]);
                self.edges.push(segment_to_halfspaces(a, b, &bb)?);
                cum.push(total);
                total += a.dist(b);
            }
        } else {
            cum.push(0.0);
        }
        self.perimeter = total;
        self.vertex_keys = if total > 0.0 {
            cum.iter().map(|c| c / total).collect()
        } else {
            vec![0.0]
        };
        Ok(())
    }

    pub fn is_point(&self) -> bool {
        self.ring.len() == 1
    }

    /// Edge endpoints in ring order.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let m = self.ring.len();
        (0..if m > 1 { m } else { 0 }).map(move |i| (self.ring[i], self.ring[(i + 1) % m]))
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::of_points(&self.ring).expect("non-empty ring")
    }

    /// Distance from `p` to the trail polyline.
    pub fn distance(&self, p: Point) -> f64 {
        if self.ring.len() == 1 {
            return self.ring[0].dist(p);
        }
        self.segments()
            .map(|(a, b)| crate::geometry::point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Knobs for trail generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrailOptions {
    /// Extend trails towards convex corners the offset rings leave uncovered.
    pub corner_reach: bool,
    /// Find spots the spray footprint misses and add spurs to reach them.
    pub repair: bool,
}

impl Default for TrailOptions {
    fn default() -> Self {
        TrailOptions {
            corner_reach: true,
            repair: true,
        }
    }
}

impl TrailOptions {
    /// Offset rings only, with no spurs.
    pub fn rings_only() -> Self {
        TrailOptions {
            corner_reach: false,
            repair: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub length: f64,
    pub turn_count: usize,
    pub total_turning_angle: f64,
}

/// Turning angle below which a vertex does not count as a turn, radians.
const TURN_EPS: f64 = 1e-6;
/// Sides of the polygon standing in for a spray disk.
const FOOTPRINT_SIDES: usize = 32;
/// Scanlines per axis when locating the worst point of a gap.
const GAP_GRID: usize = 32;
/// Scanline spacing inside long gap slivers, as a fraction of w.
const GAP_STEP: f64 = 0.125;
const GAP_GRID_MAX: usize = 4096;
const REPAIR_PASSES: usize = 12;
/// Spurs added to one gap component in a single pass, at most.
const FIXES_PER_GAP: usize = 64;

/// Length and turning statistics of a polyline, or of a closed ring when `closed`.
pub fn path_metrics(pts: &[Point], closed: bool) -> PathMetrics {
    let mut v: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts {
        if v.last().is_none_or(|q| q.dist(p) > 0.0) {
            v.push(p);
        }
    }
    if closed {
        while v.len() > 1 && v[0].dist(v[v.len() - 1]) == 0.0 {
            v.pop();
        }
    }
    let n = v.len();
    let mut m = PathMetrics {
        length: 0.0,
        turn_count: 0,
        total_turning_angle: 0.0,
    };
    if n < 2 {
        return m;
    }
    let seg_count = if closed { n } else { n - 1 };
    for i in 0..seg_count {
        m.length += v[i].dist(v[(i + 1) % n]);
    }
    let verts: Box<dyn Iterator<Item = usize>> = if closed { Box::new(0..n) } else { Box::new(1..n - 1) };
    for i in verts {
        let a = v[(i + n - 1) % n];
        let b = v[i];
        let c = v[(i + 1) % n];
        let d1 = (b - a).normalized();
        let d2 = (c - b).normalized();
        let ang = d1.cross(d2).atan2(d1.dot(d2)).abs();
        if ang > TURN_EPS {
            m.turn_count += 1;
            m.total_turning_angle += ang;
        }
    }
    m
}

/// Combined metrics of several closed trails.
pub fn trails_metrics(trails: &[Trail]) -> PathMetrics {
    trails.iter().fold(
        PathMetrics {
            length: 0.0,
            turn_count: 0,
            total_turning_angle: 0.0,
        },
        |acc, t| {
            let m = path_metrics(&t.ring, true);
            PathMetrics {
                length: acc.length + m.length,
                turn_count: acc.turn_count + m.turn_count,
                total_turning_angle: acc.total_turning_angle + m.total_turning_angle,
            }
        },
    )
}

/// Convex corners of a region: (vertex, reach of the corner kite).
fn convex_corners(q: &PolygonWithHoles, w: f64) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    for ring in q.rings() {
        let n = ring.len();
        for i in 0..n {
            let u1 = (ring[i] - ring[(i + n - 1) % n]).normalized();
            let u2 = (ring[(i + 1) % n] - ring[i]).normalized();
            let turn = u1.cross(u2).atan2(u1.dot(u2));
            if turn > 1e-9 {
                out.push((ring[i], 0.5 * w * (0.5 * turn).tan()));
            }
        }
    }
    out
}

/// Merge runs of consecutive vertices closer than `tol` into their average.
fn merge_close(ring: &[Point], tol: f64) -> Vec<Point> {
    let n = ring.len();
    if n == 0 {
        return Vec::new();
    }
    // start the walk right after a long edge so clusters never wrap
    let start = (0..n).find(|&i| ring[i].dist(ring[(i + n - 1) % n]) > tol);
    let Some(start) = start else {
        let c = ring.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n as f64);
        return vec![c];
    };
    let mut out = Vec::new();
    let mut acc = ring[start];
    let mut cnt = 1.0;
    let mut last = ring[start];
    for k in 1..n {
        let p = ring[(start + k) % n];
        if p.dist(last) <= tol {
            acc = acc + p;
            cnt += 1.0;
        } else {
            out.push(acc * (1.0 / cnt));
            acc = p;
            cnt = 1.0;
        }
        last = p;
    }
    out.push(acc * (1.0 / cnt));
    out
}

/// Loops at the deepest offset level of `c`, with the depth reached.
fn medial_loops(c: &PolygonWithHoles, w: f64) -> (Vec<Vec<Point>>, f64) {
    let bb = c.bbox();
    let mut lo = 0.0;
    let mut hi = 0.5 * bb.width().min(bb.height()) + 1e-9 * w;
    let mut best = vec![c.clone()];
    let tol = 1e-8 * w;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let r = mitered_offset(c, mid);
        if r.is_empty() {
            hi = mid;
        } else {
            lo = mid;
            best = r;
        }
    }
    let loops = best
        .iter()
        .map(|p| {
            let mut l = merge_close(&p.outer, 2e-3 * w);
            if l.len() >= 3 && crate::geometry::signed_area(&l) < 0.0 {
                l.reverse();
            }
            l
        })
        .filter(|l| !l.is_empty())
        .collect();
    (loops, lo)
}

struct Generator<'a> {
    area: &'a PolygonWithHoles,
    w: f64,
    loops: Vec<Vec<Point>>,
    /// Convex corners with the range of loops generated for their level.
    corners: Vec<(Point, f64, usize, usize)>,
}

impl Generator<'_> {
    fn level(&mut self, q: &PolygonWithHoles, top: bool) -> Result<()> {
        let w = self.w;
        let start = self.loops.len();
        let r = mitered_offset(q, 0.5 * w);
        for poly in &r {
            for ring in poly.rings() {
                self.loops.push(ring.to_vec());
            }
        }
        let corners = convex_corners(q, w);
        let residue = if r.is_empty() {
            vec![q.clone()]
        } else {
            difference(std::slice::from_ref(q), &beveled_offset_all(&r, -0.5 * w))
        };
        for c in residue {
            if c.area() < 1e-6 * w * w {
                continue;
            }
            if !r.is_empty() {
                let is_kite = corners.iter().any(|&(v, reach, ..)| {
                    let lim = reach * (1.0 + 1e-6) + 1e-6 * w;
                    c.rings().flatten().all(|p| p.dist(v) <= lim)
                });
                if is_kite {
                    continue;
                }
            }
            let (loops, depth) = medial_loops(&c, w);
            if top && r.is_empty() && depth < 0.05 * w {
                return Err(Error::infeasible(Stage::Trails, "sub-area narrower than coverage width"));
            }
            self.loops.extend(loops);
        }
        let end = self.loops.len();
        for (v, reach) in corners {
            self.corners.push((v, reach, start, end));
        }
        for inner in mitered_offset(q, w) {
            self.level(&inner, false)?;
        }
        Ok(())
    }

    fn segments(&self) -> Vec<(Point, Point)> {
        let mut segs = Vec::new();
        for l in &self.loops {
            let m = l.len();
            if m == 1 {
                segs.push((l[0], l[0]));
            } else {
                for i in 0..m {
                    segs.push((l[i], l[(i + 1) % m]));
                }
            }
        }
        segs
    }

    /// Nearest point on loops `lo..hi` (all loops when the range is empty).
    fn nearest_on(&self, p: Point, lo: usize, hi: usize) -> Option<(usize, usize, Point, f64)> {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (0, self.loops.len()) };
        let mut best: Option<(usize, usize, Point, f64)> = None;
        for li in lo..hi {
            let l = &self.loops[li];
            let m = l.len();
            let cands: Vec<(usize, Point)> = if m == 1 {
                vec![(0, l[0])]
            } else {
                (0..m)
                    .map(|i| (i, crate::geometry::closest_point_on_segment(p, l[i], l[(i + 1) % m]).0))
                    .collect()
            };
            for (i, q) in cands {
                let d = q.dist(p);
                if best.is_none_or(|b| d < b.3) {
                    best = Some((li, i, q, d));
                }
            }
        }
        best
    }

    fn spur_ok(&self, q: Point, s: Point, extra: &[(Point, Point)]) -> bool {
        if !self.area.contains(q.lerp(s, 0.5)) || !self.area.contains(s) {
            return false;
        }
        if self.area.edges().any(|(a, b)| segments_properly_intersect(q, s, a, b)) {
            return false;
        }
        !self
            .segments()
            .iter()
            .chain(extra)
            .any(|&(a, b)| segments_properly_intersect(q, s, a, b))
    }

    /// Insert an out-and-back excursion to `s` at point `q` of edge `edge` of loop `li`.
    fn insert_spur(&mut self, li: usize, edge: usize, q: Point, s: Point) {
        let l = &mut self.loops[li];
        let m = l.len();
        let tol = 1e-9 * self.w;
        if m == 1 {
            l.push(s);
            return;
        }
        let a = l[edge];
        let b = l[(edge + 1) % m];
        if q.dist(a) <= tol {
            l.splice(edge + 1..edge + 1, [s, a]);
        } else if q.dist(b) <= tol {
            let j = (edge + 1) % m;
            l.splice(j + 1..j + 1, [s, b]);
        } else {
            l.splice(edge + 1..edge + 1, [q, s, q]);
        }
    }

    fn reach_corners(&mut self) {
        let half = 0.5 * self.w;
        let corners = std::mem::take(&mut self.corners);
        for &(v, _, lo, hi) in &corners {
            let Some((_, _, _, dall)) = self.nearest_on(v, 0, 0) else { return };
            if dall - half <= 1e-9 * self.w {
                continue;
            }
            let Some((li, edge, q, d)) = self.nearest_on(v, lo, hi) else { continue };
            let s = v + (q - v) * (half / d);
            if self.spur_ok(q, s, &[]) {
                self.insert_spur(li, edge, q, s);
            }
        }
        self.corners = corners;
    }

    /// Spray footprint of the current loops, as rectangles and vertex disks.
    fn footprint(&self, segs: &[(Point, Point)]) -> Vec<PolygonWithHoles> {
        let half = 0.5 * self.w;
        let mut out = Vec::with_capacity(2 * segs.len());
        let disk = |c: Point| PolygonWithHoles {
            outer: (0..FOOTPRINT_SIDES)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / FOOTPRINT_SIDES as f64;
                    c + Point::new(a.cos(), a.sin()) * half
                })
                .collect(),
            holes: Vec::new(),
        };
        for &(a, b) in segs {
            out.push(disk(a));
            let len = a.dist(b);
            if len > 1e-9 * self.w {
                let n = (b - a).perp() * (half / len);
                out.push(PolygonWithHoles {
                    outer: vec![a - n, b - n, b + n, a + n],
                    holes: Vec::new(),
                });
            }
        }
        out
    }

    /// Farthest-from-trail sample inside a gap component.
    ///
    /// Footprint edges sit within w/2 of a trail, so samples are taken at the
    /// middle of scanline crossings rather than on the boundary.
    fn gap_witness(&self, g: &PolygonWithHoles, dist: &dyn Fn(Point) -> f64) -> (Point, f64) {
        let bb = g.bbox();
        let swap = |p: Point| Point::new(p.y, p.x);
        let gt = g.map_points(swap);
        let mut best = (g.outer[0], dist(g.outer[0]));
        for (poly, lo, span, flip) in [(g, bb.min.y, bb.height(), false), (&gt, bb.min.x, bb.width(), true)] {
            let k = ((span / (GAP_STEP * self.w)).ceil() as usize).clamp(GAP_GRID, GAP_GRID_MAX);
            for i in 0..k {
                let y = lo + (i as f64 + 0.5) * span / k as f64;
                for (x0, x1) in scanline(poly, y) {
                    for f in [0.25, 0.5, 0.75] {
                        let q = Point::new(x0 + f * (x1 - x0), y);
                        let q = if flip { swap(q) } else { q };
                        let d = dist(q);
                        if d > best.1 {
                            best = (q, d);
                        }
                    }
                }
            }
        }
        best
    }

    /// Close any spot the loops leave uncovered, with a spur or, failing that, a point trail.
    fn repair(&mut self) {
        for _ in 0..REPAIR_PASSES {
            if !self.repair_once() {
                return;
            }
        }
    }

    /// One repair sweep; false when nothing was left to fix.
    fn repair_once(&mut self) -> bool {
        let half = 0.5 * self.w;
        let segs = self.segments();
        let gaps = difference(std::slice::from_ref(self.area), &self.footprint(&segs));
        if gaps.is_empty() {
            return false;
        }
        let index = SegmentIndex::new(segs, self.w);
        let mut extra: Vec<(Point, Point)> = Vec::new();
        let mut changed = false;
        for g in &gaps {
            // a long gap along a mitered spike needs many spurs, so keep going
            // until its worst sample is covered
            for _ in 0..FIXES_PER_GAP {
                let dist = |p: Point| {
                    extra
                        .iter()
                        .map(|&(a, b)| crate::geometry::point_segment_distance(p, a, b))
                        .fold(index.distance(p), f64::min)
                };
                let (p, d) = self.gap_witness(g, &dist);
                if d <= half + 1e-9 * self.w {
                    break;
                }
                changed = true;
                let Some((li, edge, q, dq)) = self.nearest_on(p, 0, 0) else { return false };
                let s = p + (q - p) * (0.5 * half / dq);
                if self.spur_ok(q, s, &extra) {
                    self.insert_spur(li, edge, q, s);
                    extra.push((q, s));
                } else {
                    self.loops.push(vec![p]);
                    extra.push((p, p));
                }
            }
        }
        changed
    }
}

/// Coverage trails for one sub-area with the default options.
pub fn generate_trails(subarea: &PolygonWithHoles, w: f64) -> Result<Vec<Trail>> {
    generate_trails_with(subarea, w, &TrailOptions::default())
}

/// Coverage trails: boundaries of the offsets at w/2, 3w/2, ... until collapse,
/// a medial loop for any thin core left uncovered, and optional spurs.
pub fn generate_trails_with(subarea: &PolygonWithHoles, w: f64, opts: &TrailOptions) -> Result<Vec<Trail>> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::argument("coverage width must be positive"));
    }
    let mut g = Generator {
        area: subarea,
        w,
        loops: Vec::new(),
        corners: Vec::new(),
    };
    g.level(subarea, true)?;
    if g.loops.is_empty() {
        return Err(Error::infeasible(Stage::Trails, "sub-area narrower than coverage width"));
    }
    if opts.corner_reach {
        g.reach_corners();
    }
    if opts.repair {
        g.repair();
    }
    g.loops
        .into_iter()
        .enumerate()
        .map(|(i, l)| Trail::from_ring(l, 0, i))
        .collect()
}

/// Intervals where the horizontal line `y` crosses the region, left to right.
fn scanline(poly: &PolygonWithHoles, y: f64) -> Vec<(f64, f64)> {
    let mut xs = Vec::new();
    for (a, b) in poly.edges() {
        if (a.y > y) != (b.y > y) {
            xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| (c[0], c[1])).filter(|c| c.1 > c.0).collect()
}

/// Boustrophedon baseline: passes spaced `w` apart along `sweep_direction`.
pub fn generate_zigzag(subarea: &PolygonWithHoles, w: f64, sweep_direction: f64) -> Result<Vec<Point>> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::argument("coverage width must be positive"));
    }
    let (s, c) = sweep_direction.sin_cos();
    let to_local = |p: Point| Point::new(c * p.x + s * p.y, -s * p.x + c * p.y);
    let to_world = |p: Point| Point::new(c * p.x - s * p.y, s * p.x + c * p.y);
    let local = subarea.map_points(to_local);
    let bb = local.bbox();
    let h = bb.height();
    let passes = ((h / w) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let y0 = bb.min.y + 0.5 * (h - (passes - 1) as f64 * w);
    let mut path: Vec<Point> = Vec::new();
    for k in 0..passes {
        let y = y0 + k as f64 * w;
        let mut runs = scanline(&local, y);
        if k % 2 == 1 {
            runs.reverse();
            for r in runs.iter_mut() {
                *r = (r.1, r.0);
            }
        }
        for (x0, x1) in runs {
            path.push(to_world(Point::new(x0, y)));
            path.push(to_world(Point::new(x1, y)));
        }
    }
    if path.is_empty() {
        return Err(Error::infeasible(Stage::Trails, "sub-area narrower than coverage width"));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::segments_properly_intersect;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn coverage_gap(area: &PolygonWithHoles, trails: &[Trail], w: f64, samples: usize, seed: u64) -> Option<Point> {
        let segs: Vec<(Point, Point)> = trails
            .iter()
            .flat_map(|t| {
                if t.is_point() {
                    vec![(t.ring[0], t.ring[0])]
                } else {
                    t.segments().collect()
                }
            })
            .collect();
        let idx = SegmentIndex::new(segs, w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bb = area.bbox();
        let mut n = 0;
        while n < samples {
            let p = Point::new(rng.random_range(bb.min.x..=bb.max.x), rng.random_range(bb.min.y..=bb.max.y));
            if !area.contains(p) {
                continue;
            }
            n += 1;
            if idx.distance(p) > 0.5 * w + 1e-6 {
                return Some(p);
            }
        }
        None
    }

    fn assert_non_crossing(trails: &[Trail]) {
        let segs: Vec<(usize, Point, Point)> = trails
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.segments().map(move |(a, b)| (i, a, b)))
            .collect();
        for x in 0..segs.len() {
            for y in x + 1..segs.len() {
                let (i, a, b) = segs[x];
                let (j, c, d) = segs[y];
                if i != j {
                    assert!(!segments_properly_intersect(a, b, c, d), "trails {i} and {j} cross");
                }
            }
        }
    }

    #[test]
    fn square_gets_two_rings_and_center_point() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0);
        let t = generate_trails_with(&sq, 2.0, &TrailOptions::rings_only()).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t[0].perimeter - 32.0).abs() < 1e-9);
        assert!((t[1].perimeter - 16.0).abs() < 1e-9);
        assert!(t[2].is_point());
        assert!(t[2].ring[0].dist(Point::new(5.0, 5.0)) < 1e-6);
        // the centre is two meters from the inner ring, so the point trail is required
        assert!(t[1].distance(Point::new(5.0, 5.0)) > 1.0);
        let full = generate_trails(&sq, 2.0).unwrap();
        assert!(coverage_gap(&sq, &full, 2.0, 10_000, 1).is_none());
    }

    #[test]
    fn collapsed_rectangle_gives_medial_segment() {
        let r = PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 4.0);
        let t = generate_trails_with(&r, 4.0, &TrailOptions::rings_only()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].ring.len(), 2);
        assert!((t[0].perimeter - 12.0).abs() < 1e-6);
        let full = generate_trails(&r, 4.0).unwrap();
        assert!(coverage_gap(&r, &full, 4.0, 10_000, 2).is_none());
        assert_non_crossing(&full);
    }

    #[test]
    fn ring_surrounds_hole_and_avoids_it() {
        let poly = PolygonWithHoles::new(
            PolygonWithHoles::rectangle(0.0, 0.0, 60.0, 40.0).outer,
            vec![PolygonWithHoles::rectangle(25.0, 15.0, 35.0, 25.0).outer],
        )
        .unwrap();
        let w = 3.0;
        let t = generate_trails(&poly, w).unwrap();
        let hole = PolygonWithHoles::rectangle(25.0, 15.0, 35.0, 25.0);
        assert!(t.iter().any(|tr| {
            tr.ring.len() > 2 && crate::geometry::signed_area(&tr.ring) < 0.0 && crate::geometry::point_in_ring(Point::new(30.0, 20.0), &tr.ring)
        }));
        for tr in &t {
            for &p in &tr.ring {
                assert!(!hole.contains(p) || hole.distance_to_boundary(p) < 1e-9);
            }
            for (a, b) in tr.segments() {
                assert!(!hole.contains(a.lerp(b, 0.5)));
            }
        }
        assert!(coverage_gap(&poly, &t, w, 10_000, 3).is_none());
        assert_non_crossing(&t);
    }

    #[test]
    fn irregular_polygon_is_covered() {
        let poly = PolygonWithHoles::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(70.0, 5.0),
                Point::new(80.0, 45.0),
                Point::new(40.0, 30.0),
                Point::new(20.0, 60.0),
                Point::new(-5.0, 35.0),
            ],
            vec![],
        )
        .unwrap();
        let w = 6.5;
        let t = generate_trails(&poly, w).unwrap();
        assert!(coverage_gap(&poly, &t, w, 10_000, 4).is_none());
        assert_non_crossing(&t);
        for tr in &t {
            for (a, b) in tr.segments() {
                assert!(poly.contains(a.lerp(b, 0.5)));
            }
        }
    }

    #[test]
    fn trail_invariants_hold() {
        let poly = PolygonWithHoles::rectangle(0.0, 0.0, 37.0, 23.0);
        for t in generate_trails(&poly, 4.0).unwrap() {
            let sum: f64 = t.segments().map(|(a, b)| a.dist(b)).sum();
            assert!((sum - t.perimeter).abs() < 1e-9);
            assert_eq!(t.vertex_keys[0], 0.0);
            assert!(t.vertex_keys.windows(2).all(|k| k[1] > k[0]));
            assert!(t.vertex_keys.iter().all(|&k| (0.0..1.0).contains(&k)));
            for (j, e) in t.edges.iter().enumerate() {
                assert_eq!(e.p0, t.ring[j]);
                assert_eq!(e.p1, t.ring[(j + 1) % t.ring.len()]);
            }
            let v0 = t.ring[0];
            assert!(t.ring.iter().all(|p| (v0.x, v0.y) <= (p.x, p.y)));
        }
    }

    #[test]
    fn convex_rings_turn_once_around() {
        let poly = PolygonWithHoles::new(
            vec![Point::new(0.0, 0.0), Point::new(50.0, 0.0), Point::new(60.0, 30.0), Point::new(10.0, 40.0)],
            vec![],
        )
        .unwrap();
        for t in generate_trails_with(&poly, 5.0, &TrailOptions::rings_only()).unwrap() {
            if t.is_point() {
                continue;
            }
            let m = path_metrics(&t.ring, true);
            assert!((m.total_turning_angle - TAU).abs() < 1e-9, "{m:?}");
        }
    }

    #[test]
    fn metrics_examples() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0).outer;
        let m = path_metrics(&sq, true);
        assert_eq!(m.turn_count, 4);
        assert!((m.total_turning_angle - TAU).abs() < 1e-12);
        let inner = PolygonWithHoles::rectangle(0.25, 0.25, 0.75, 0.75).outer;
        let both = [Trail::from_ring(sq, 0, 0).unwrap(), Trail::from_ring(inner, 0, 1).unwrap()];
        let m = trails_metrics(&both);
        assert_eq!(m.turn_count, 8);
        assert!((m.total_turning_angle - 4.0 * PI).abs() < 1e-12);
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(path_metrics(&line, false).turn_count, 0);
        let back = [Point::new(0.0, 0.0), Point::new(3.0, 0.0)];
        let m = path_metrics(&back, true);
        assert_eq!(m.turn_count, 2);
        assert!((m.length - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zigzag_rectangle_counts() {
        let r = PolygonWithHoles::rectangle(0.0, 0.0, 100.0, 60.0);
        let z = generate_zigzag(&r, 6.5, 0.0).unwrap();
        assert_eq!(z.len(), 20);
        assert_eq!(path_metrics(&z, false).turn_count, 18);
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 6.5, 6.5);
        assert_eq!(generate_zigzag(&sq, 6.5, 0.0).unwrap().len(), 2);
    }

    #[test]
    fn zigzag_convex_passes_are_single_segments() {
        let poly = PolygonWithHoles::new(
            vec![Point::new(0.0, 0.0), Point::new(50.0, 0.0), Point::new(60.0, 30.0), Point::new(10.0, 40.0)],
            vec![],
        )
        .unwrap();
        let z = generate_zigzag(&poly, 5.0, 0.3).unwrap();
        let passes = (poly.map_points(|p| Point::new(0.3f64.cos() * p.x + 0.3f64.sin() * p.y, -0.3f64.sin() * p.x + 0.3f64.cos() * p.y)).bbox().height() / 5.0).ceil() as usize;
        assert_eq!(z.len(), 2 * passes);
    }

    #[test]
    fn bad_width_rejected() {
        let r = PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0);
        assert!(generate_trails(&r, 0.0).is_err());
        assert!(generate_zigzag(&r, -1.0, 0.0).is_err());
        let sliver = PolygonWithHoles::rectangle(0.0, 0.0, 50.0, 0.1);
        assert!(generate_trails(&sliver, 6.5).is_err());
    }

    #[test]
    fn pocket_inside_long_sliver_is_repaired() {
        let cell = PolygonWithHoles {
            outer: vec![
                Point::new(949.6438257725339, 173.7533902038684),
                Point::new(640.6948150245901, 366.45218457348744),
                Point::new(574.8516119411736, 337.05009975627434),
                Point::new(653.0019917156374, 0.0),
                Point::new(900.0, 0.0),
            ],
            holes: Vec::new(),
        };
        let t = generate_trails(&cell, 6.5).unwrap();
        let q = Point::new(903.401, 156.161);
        let d = t.iter().map(|t| t.distance(q)).fold(f64::INFINITY, f64::min);
        assert!(d <= 3.25 + 1e-6, "{d}");
        assert!(coverage_gap(&cell, &t, 6.5, 20_000, 4).is_none());
    }

    #[test]
    fn spikes_around_a_hole_are_covered() {
        let cell: PolygonWithHoles = serde_json::from_str(
            r#"{"outer":[[-168.35414571405826,95.55544144947407],[-198.7216435792662,-78.11597252023414],
            [0.6703227070724047,-160.62197092384554],[82.908944413616,-134.78752453947774],[136.19095752492336,-62.33642195691631]],
            "holes":[[[-77.01775006038051,2.5712595820378112],[-53.600610014212975,12.559550231201797],
            [-43.20419932436079,2.8448725515876276],[-60.95584600483339,-21.670369355943507],[-75.65843064152796,-14.707481550492446]]]}"#,
        )
        .unwrap();
        let t = generate_trails(&cell, 6.5).unwrap();
        let q = Point::new(-81.916, -69.991);
        let d = t.iter().map(|t| t.distance(q)).fold(f64::INFINITY, f64::min);
        assert!(d <= 3.25 + 1e-6, "{d}");
        assert!(coverage_gap(&cell, &t, 6.5, 20_000, 6).is_none());
    }
}
