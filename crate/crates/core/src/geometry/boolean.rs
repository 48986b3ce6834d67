//! Boolean set operations on polygons with holes, backed by `i_overlay`.

use i_overlay::core::fill_rule::FillRule;
use i_overlay::core::overlay_rule::OverlayRule;
use i_overlay::core::solver::Solver;
use i_overlay::float::overlay::{FloatOverlay, OverlayOptions};

use super::{clean_ring, signed_area, Point, PolygonWithHoles, AREA_TOL};

type Shapes = Vec<Vec<Vec<[f64; 2]>>>;

fn to_shape(p: &PolygonWithHoles) -> Vec<Vec<[f64; 2]>> {
    p.rings().map(|r| r.iter().map(|&q| q.into()).collect()).collect()
}

fn to_shapes(ps: &[PolygonWithHoles]) -> Shapes {
    ps.iter().map(to_shape).collect()
}

fn from_shapes(shapes: Shapes) -> Vec<PolygonWithHoles> {
    let mut out = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let mut rings = shape.into_iter().map(|c| {
            let pts: Vec<Point> = c.into_iter().map(Point::from).collect();
            clean_ring(&pts, 0.0)
        });
        let Some(outer) = rings.next() else { continue };
        if outer.len() < 3 || signed_area(&outer).abs() <= AREA_TOL {
            continue;
        }
        let holes = rings
            .filter(|h| h.len() >= 3 && signed_area(h).abs() > AREA_TOL)
            .collect();
        let mut poly = PolygonWithHoles { outer, holes };
        poly.normalize_orientation();
        out.push(poly);
    }
    out
}

fn run(subj: &Shapes, clip: Option<&Shapes>, rule: OverlayRule, fill: FillRule) -> Vec<PolygonWithHoles> {
    let opts = OverlayOptions::default();
    let shapes = match clip {
        Some(c) => FloatOverlay::<[f64; 2], i64>::from_subj_and_clip_custom(subj, c, opts, Solver::default())
            .overlay(rule, fill),
        None => FloatOverlay::<[f64; 2], i64>::from_subj_custom(subj, opts, Solver::default()).overlay(rule, fill),
    };
    from_shapes(shapes)
}

pub fn union(polys: &[PolygonWithHoles]) -> Vec<PolygonWithHoles> {
    if polys.is_empty() {
        return Vec::new();
    }
    run(&to_shapes(polys), None, OverlayRule::Subject, FillRule::NonZero)
}

pub fn intersection(a: &[PolygonWithHoles], b: &[PolygonWithHoles]) -> Vec<PolygonWithHoles> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    run(&to_shapes(a), Some(&to_shapes(b)), OverlayRule::Intersect, FillRule::NonZero)
}

pub fn difference(a: &[PolygonWithHoles], b: &[PolygonWithHoles]) -> Vec<PolygonWithHoles> {
    if a.is_empty() {
        return Vec::new();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    run(&to_shapes(a), Some(&to_shapes(b)), OverlayRule::Difference, FillRule::NonZero)
}

/// Resolve a soup of oriented rings, keeping regions with positive winding.
pub fn simplify_positive(rings: &[Vec<Point>]) -> Vec<PolygonWithHoles> {
    let contours: Vec<Vec<[f64; 2]>> = rings
        .iter()
        .filter(|r| r.len() >= 3)
        .map(|r| r.iter().map(|&q| q.into()).collect())
        .collect();
    if contours.is_empty() {
        return Vec::new();
    }
    let opts = OverlayOptions::default();
    let shapes = FloatOverlay::<[f64; 2], i64>::from_subj_custom(&contours, opts, Solver::default())
        .overlay(OverlayRule::Subject, FillRule::Positive);
    from_shapes(shapes)
}
