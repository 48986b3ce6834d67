//! Polygon offsetting with miter and bevel joins.
//!
//! Each ring is shifted edge by edge, joins are inserted at the vertices, and
//! the resulting self-overlapping loops are resolved with a positive-winding
//! union. Rings are oriented so the region lies on their left, which lets the
//! same code handle outer rings and holes.

use super::{boolean::simplify_positive, Point, PolygonWithHoles};

/// Reflex miters longer than this multiple of the offset distance are beveled.
pub const MITER_LIMIT: f64 = 4.0;

fn raw_ring(ring: &[Point], d: f64, limit: f64, out: &mut Vec<Point>) {
    let n = ring.len();
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let v = ring[i];
        let next = ring[(i + 1) % n];
        let u1 = (v - prev).normalized();
        let u2 = (next - v).normalized();
        let n1 = u1.perp();
        let n2 = u2.perp();
        let p1 = v + n1 * d;
        let p2 = v + n2 * d;
        let cr = u1.cross(u2);
        let dot = u1.dot(u2);
        if cr.abs() < 1e-12 && dot > 0.0 {
            out.push(p1);
            continue;
        }
        if cr * d > 0.0 {
            // shifted edges overlap; the pivot keeps winding consistent
            out.push(p1);
            out.push(v);
            out.push(p2);
            continue;
        }
        let denom = 1.0 + n1.dot(n2);
        if denom > 1e-12 {
            let m = v + (n1 + n2) * (d / denom);
            if m.dist(v) <= limit * d.abs() {
                out.push(m);
                continue;
            }
        }
        out.push(p1);
        out.push(p2);
    }
}

fn offset_with_limit(poly: &PolygonWithHoles, d: f64, limit: f64) -> Vec<PolygonWithHoles> {
    if d == 0.0 {
        return vec![poly.clone()];
    }
    let mut oriented = poly.clone();
    oriented.normalize_orientation();
    let rings: Vec<Vec<Point>> = oriented
        .rings()
        .map(|r| {
            let mut out = Vec::with_capacity(r.len() * 2);
            raw_ring(r, d, limit, &mut out);
            out
        })
        .collect();
    let mut result = simplify_positive(&rings);
    // scale-aware cutoff for slivers left behind by integer snapping
    let scale = poly.bbox().diagonal().max(1.0);
    result.retain(|p| p.area() > 1e-12 * scale * scale);
    result
}

/// Inward offset by `d` with miter joins; negative `d` grows the region.
///
/// Returns an empty list once the region collapses.
pub fn mitered_offset(poly: &PolygonWithHoles, d: f64) -> Vec<PolygonWithHoles> {
    offset_with_limit(poly, d, MITER_LIMIT)
}

/// Offset with bevels at every diverging join.
///
/// For negative `d` the result lies inside the exact Minkowski buffer, so a
/// point inside it is guaranteed to be within `|d|` of the input.
pub fn beveled_offset(poly: &PolygonWithHoles, d: f64) -> Vec<PolygonWithHoles> {
    offset_with_limit(poly, d, 1.0)
}

pub(crate) fn beveled_offset_all(polys: &[PolygonWithHoles], d: f64) -> Vec<PolygonWithHoles> {
    let mut rings = Vec::new();
    for p in polys {
        let mut o = p.clone();
        o.normalize_orientation();
        for r in o.rings() {
            let mut out = Vec::with_capacity(r.len() * 2);
            raw_ring(r, d, 1.0, &mut out);
            rings.push(out);
        }
    }
    simplify_positive(&rings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_in_ring, BoundingBox};

    fn total_area(ps: &[PolygonWithHoles]) -> f64 {
        ps.iter().map(PolygonWithHoles::area).sum()
    }

    fn l_shape() -> PolygonWithHoles {
        PolygonWithHoles::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(10.0, 0.0),
                Point::new(10.0, 4.0),
                Point::new(4.0, 4.0),
                Point::new(4.0, 10.0),
                Point::new(0.0, 10.0),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn square_shrinks_uniformly() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0);
        let r = mitered_offset(&sq, 1.0);
        assert_eq!(r.len(), 1);
        let bb = r[0].bbox();
        assert!((bb.min.x - 1.0).abs() < 1e-9 && (bb.max.x - 9.0).abs() < 1e-9);
        assert!((bb.min.y - 1.0).abs() < 1e-9 && (bb.max.y - 9.0).abs() < 1e-9);
        assert!((r[0].area() - 64.0).abs() < 1e-9);
        assert_eq!(r[0].outer.len(), 4);
    }

    #[test]
    fn square_collapses_at_inradius() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0);
        assert!(mitered_offset(&sq, 5.0).is_empty());
        assert!(mitered_offset(&sq, 6.0).is_empty());
    }

    #[test]
    fn rectangle_shrinks_per_axis() {
        let r = mitered_offset(&PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 4.0), 1.5);
        assert_eq!(r.len(), 1);
        let bb = r[0].bbox();
        assert!((bb.width() - 7.0).abs() < 1e-9);
        assert!((bb.height() - 1.0).abs() < 1e-9);
        assert!((r[0].area() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn l_shape_vertices_sit_at_offset_distance() {
        let poly = l_shape();
        let d = 0.5;
        let r = mitered_offset(&poly, d);
        assert_eq!(r.len(), 1);
        let edges: Vec<(Point, Point)> = poly.edges().collect();
        for &v in &r[0].outer {
            // distance to each supporting line of the input edges
            let near = edges
                .iter()
                .filter(|(a, b)| {
                    let u = (*b - *a).normalized();
                    ((((v - *a).cross(u)).abs()) - d).abs() < 1e-9
                })
                .count();
            assert!(near >= 2, "vertex {v:?} touches {near} offset lines");
            assert!(poly.distance_to_boundary(v) >= d - 1e-9);
        }
    }

    #[test]
    fn hole_grows_while_outer_shrinks() {
        let poly = PolygonWithHoles::new(
            PolygonWithHoles::rectangle(0.0, 0.0, 10.0, 10.0).outer,
            vec![PolygonWithHoles::rectangle(4.0, 4.0, 6.0, 6.0).outer],
        )
        .unwrap();
        let r = mitered_offset(&poly, 1.0);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].holes.len(), 1);
        assert!((r[0].area() - (64.0 - 16.0)).abs() < 1e-9);
        // hole and outer meet at d = 2
        let r = mitered_offset(&poly, 2.5);
        assert!(r.is_empty());
    }

    #[test]
    fn dumbbell_splits() {
        let poly = PolygonWithHoles::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(10.0, 0.0),
                Point::new(10.0, 4.5),
                Point::new(20.0, 4.5),
                Point::new(20.0, 0.0),
                Point::new(30.0, 0.0),
                Point::new(30.0, 10.0),
                Point::new(20.0, 10.0),
                Point::new(20.0, 5.5),
                Point::new(10.0, 5.5),
                Point::new(10.0, 10.0),
                Point::new(0.0, 10.0),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(mitered_offset(&poly, 1.0).len(), 2);
    }

    #[test]
    fn area_is_monotone_and_contained() {
        let poly = l_shape();
        let mut last = poly.area();
        for k in 1..20 {
            let d = k as f64 * 0.15;
            let r = mitered_offset(&poly, d);
            let a = total_area(&r);
            assert!(a <= last + 1e-9);
            last = a;
            for p in &r {
                for &v in &p.outer {
                    assert!(poly.contains(v) || poly.distance_to_boundary(v) < 1e-9);
                }
                let bb: BoundingBox = p.bbox();
                assert!(point_in_ring(bb.center(), &poly.outer) || !p.contains(bb.center()));
            }
        }
    }

    #[test]
    fn outward_bevel_stays_in_buffer() {
        let sq = PolygonWithHoles::rectangle(0.0, 0.0, 2.0, 2.0);
        let r = beveled_offset(&sq, -1.0);
        assert_eq!(r.len(), 1);
        for &v in &r[0].outer {
            assert!(sq.distance_to_boundary(v) <= 1.0 + 1e-9);
        }
        assert!(r[0].area() > 4.0 + 8.0);
    }
}
