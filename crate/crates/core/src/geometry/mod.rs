//! Planar geometry kernel.
//!
//! Everything here works in a local metric frame (meters). Rings are stored
//! without a closing duplicate vertex; outer rings run counter-clockwise and
//! hole rings clockwise, so the region always lies to the left of its boundary.

mod boolean;
mod circle;
mod halfspace;
mod index;
mod offset;
mod projection;
mod voronoi;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boolean::{difference, intersection, simplify_positive, union};
pub use circle::{min_enclosing_circle, Circle};
pub use halfspace::{segment_to_halfspaces, SegmentHalfspaces};
pub use index::{Nearest, SegmentIndex};
pub use offset::{beveled_offset, mitered_offset, MITER_LIMIT};
pub(crate) use offset::beveled_offset_all;
pub use projection::Equirectangular;
pub use voronoi::{voronoi_cells, VoronoiCell};
pub(crate) use voronoi::voronoi_cells_unchecked;

/// Tolerance for exact predicates, meters.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for area comparisons, square meters.
pub const AREA_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dist_sq(self, o: Point) -> f64 {
        (self - o).norm_sq()
    }

    /// Left-hand perpendicular.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<BoundingBox> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expanded(&self, margin: f64) -> BoundingBox {
        BoundingBox {
            min: Point::new(self.min.x - margin, self.min.y - margin),
            max: Point::new(self.max.x + margin, self.max.y + margin),
        }
    }

    pub fn intersects(&self, o: &BoundingBox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }
}

/// Twice-free shoelace area; positive for counter-clockwise rings.
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let origin = ring[0];
    let mut acc = 0.0;
    for i in 1..n - 1 {
        acc += (ring[i] - origin).cross(ring[i + 1] - origin);
    }
    acc * 0.5
}

/// Length of the closed ring.
pub fn ring_perimeter(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|i| ring[i].dist(ring[(i + 1) % n])).sum()
}

pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Crossing-number point-in-ring test.
pub fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Closest point on segment `a`-`b` to `p`, with the segment parameter in [0, 1].
pub fn closest_point_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (a + d * t, t)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    closest_point_on_segment(p, a, b).0.dist(p)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// True when the open segments cross at a single interior point of both.
pub fn segments_properly_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let scale = (b - a).norm().max((d - c).norm()).max(1.0);
    let eps = EXACT_TOL * scale;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// Intersection point of the lines through `a`-`b` and `c`-`d`, if not parallel.
pub fn line_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom.abs() < 1e-15 * r.norm() * s.norm() {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    Some(a + r * t)
}

/// Whether a ring is free of self-intersections (non-adjacent edges never touch).
pub fn ring_is_simple(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if a.dist(b) <= EXACT_TOL {
            return false;
        }
        for j in i + 1..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let c = ring[j];
            let d = ring[(j + 1) % n];
            if segments_properly_intersect(a, b, c, d) {
                return false;
            }
            // touching at a vertex also breaks simplicity
            if point_segment_distance(c, a, b) <= EXACT_TOL || point_segment_distance(a, c, d) <= EXACT_TOL {
                return false;
            }
        }
    }
    true
}

/// Drop closing duplicates and consecutive repeated vertices.
pub fn clean_ring(ring: &[Point], tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().is_none_or(|q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    out
}

/// A polygon region with obstacle holes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonWithHoles {
    pub outer: Vec<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<Vec<Point>>,
}

impl PolygonWithHoles {
    /// Validates ring sizes and areas, and normalizes ring orientation.
    pub fn new(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        let outer = clean_ring(&outer, 0.0);
        if outer.len() < 3 {
            return Err(Error::geometry("outer ring needs at least 3 distinct vertices"));
        }
        if outer.iter().any(|p| !p.is_finite()) {
            return Err(Error::geometry("non-finite coordinate"));
        }
        let mut poly = PolygonWithHoles {
            outer,
            holes: Vec::with_capacity(holes.len()),
        };
        for h in holes {
            let h = clean_ring(&h, 0.0);
            if h.len() < 3 {
                return Err(Error::geometry("hole ring needs at least 3 distinct vertices"));
            }
            if h.iter().any(|p| !p.is_finite()) {
                return Err(Error::geometry("non-finite coordinate"));
            }
            poly.holes.push(h);
        }
        poly.normalize_orientation();
        if signed_area(&poly.outer) <= 0.0 || poly.holes.iter().any(|h| signed_area(h) >= 0.0) {
            return Err(Error::geometry("degenerate ring with zero area"));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle, handy for tests and synthetic maps.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        PolygonWithHoles {
            outer: vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            holes: Vec::new(),
        }
    }

    pub fn normalize_orientation(&mut self) {
        if signed_area(&self.outer) < 0.0 {
            self.outer.reverse();
        }
        for h in &mut self.holes {
            if signed_area(h) > 0.0 {
                h.reverse();
            }
        }
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    /// Every boundary edge as a pair of endpoints.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.rings().flat_map(|r| {
            let n = r.len();
            (0..n).map(move |i| (r[i], r[(i + 1) % n]))
        })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.outer).abs() - self.holes.iter().map(|h| signed_area(h).abs()).sum::<f64>()
    }

    /// Total boundary length, holes included.
    pub fn perimeter(&self) -> f64 {
        self.rings().map(ring_perimeter).sum()
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_ring(p, &self.outer) && !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::of_points(&self.outer).expect("outer ring is non-empty")
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn vertex_count(&self) -> usize {
        self.rings().map(<[Point]>::len).sum()
    }

    /// Convex outer ring and no holes.
    pub fn is_convex(&self) -> bool {
        if !self.holes.is_empty() {
            return false;
        }
        let n = self.outer.len();
        (0..n).all(|i| {
            let a = self.outer[i];
            let b = self.outer[(i + 1) % n];
            let c = self.outer[(i + 2) % n];
            orient(a, b, c) >= -EXACT_TOL * (b - a).norm().max(1.0)
        })
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> PolygonWithHoles {
        let mut out = PolygonWithHoles {
            outer: self.outer.iter().map(|&p| f(p)).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(|&p| f(p)).collect()).collect(),
        };
        out.normalize_orientation();
        out
    }

    /// Checks that rings are simple and holes are pairwise disjoint and strictly inside.
    pub fn validate_topology(&self) -> Result<()> {
        for (i, ring) in self.rings().enumerate() {
            if !ring_is_simple(ring) {
                return Err(Error::geometry(format!("ring {i} is not simple")));
            }
        }
        let rings: Vec<&[Point]> = self.rings().collect();
        for i in 0..rings.len() {
            for j in i + 1..rings.len() {
                if rings_touch(rings[i], rings[j]) {
                    return Err(Error::geometry(format!("rings {i} and {j} intersect")));
                }
            }
        }
        for (i, h) in self.holes.iter().enumerate() {
            if !point_in_ring(h[0], &self.outer) {
                return Err(Error::geometry(format!("hole {i} lies outside the outer ring")));
            }
            for (j, g) in self.holes.iter().enumerate() {
                if i != j && point_in_ring(h[0], g) {
                    return Err(Error::geometry(format!("hole {i} is nested in hole {j}")));
                }
            }
        }
        Ok(())
    }
}

fn rings_touch(a: &[Point], b: &[Point]) -> bool {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        let (p, q) = (a[i], a[(i + 1) % na]);
        for j in 0..nb {
            let (r, s) = (b[j], b[(j + 1) % nb]);
            if segments_properly_intersect(p, q, r, s)
                || point_segment_distance(r, p, q) <= EXACT_TOL
                || point_segment_distance(p, r, s) <= EXACT_TOL
            {
                return true;
            }
        }
    }
    false
}

/// Shoelace area of the outer ring minus holes.
pub fn polygon_area(poly: &PolygonWithHoles) -> Result<f64> {
    for ring in poly.rings() {
        if ring.len() < 3 || signed_area(ring).abs() <= 0.0 {
            return Err(Error::geometry("degenerate ring with zero area"));
        }
    }
    let a = poly.area();
    if a <= 0.0 {
        return Err(Error::geometry("polygon has non-positive area"));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_square_area() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0);
        assert_eq!(polygon_area(&sq).unwrap(), 1.0);
    }

    #[test]
    fn square_with_hole_area() {
        let outer = PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0).outer;
        let hole = PolygonWithHoles::rectangle(4.0, 4.0, 6.0, 6.0).outer;
        let poly = PolygonWithHoles::new(outer, vec![hole]).unwrap();
        assert!(signed_area(&poly.holes[0]) < 0.0);
        assert_eq!(polygon_area(&poly).unwrap(), 96.0);
    }

    #[test]
    fn degenerate_ring_rejected() {
        let line = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(PolygonWithHoles::new(line.clone(), vec![]).is_err());
        let bad = PolygonWithHoles {
            outer: line,
            holes: vec![],
        };
        assert!(matches!(polygon_area(&bad), Err(Error::InvalidGeometry(_))));
    }

    /// Star-shaped polygon around the origin with random radii.
    fn random_star(rng: &mut ChaCha8Rng, n: usize) -> PolygonWithHoles {
        let pts = (0..n)
            .map(|i| {
                let a = i as f64 / n as f64 * std::f64::consts::TAU;
                let r = rng.random_range(0.3..1.0);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        PolygonWithHoles::new(pts, vec![]).unwrap()
    }

    #[test]
    fn area_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let poly = random_star(&mut rng, 12);
        let bb = poly.bbox();
        let samples = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let p = Point::new(
                rng.random_range(bb.min.x..bb.max.x),
                rng.random_range(bb.min.y..bb.max.y),
            );
            if poly.contains(p) {
                hits += 1;
            }
        }
        let est = hits as f64 / samples as f64 * bb.width() * bb.height();
        let exact = polygon_area(&poly).unwrap();
        assert!((est - exact).abs() / exact < 0.01, "mc {est} vs {exact}");
    }

    #[test]
    fn simplicity_check() {
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!ring_is_simple(&bowtie));
        assert!(ring_is_simple(&PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0).outer));
    }

    #[test]
    fn hole_outside_fails_topology() {
        let poly = PolygonWithHoles::new(
            PolygonWithHoles::rectangle(0.0, 0.0, 1.0, 1.0).outer,
            vec![PolygonWithHoles::rectangle(2.0, 2.0, 3.0, 3.0).outer],
        )
        .unwrap();
        assert!(poly.validate_topology().is_err());
    }
}
