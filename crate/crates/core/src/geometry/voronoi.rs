//! Voronoi cells of seed points clipped to a polygon with holes.

use serde::{Deserialize, Serialize};

use super::{boolean::intersection, signed_area, BoundingBox, Point, PolygonWithHoles, EXACT_TOL};
use crate::error::{Error, Result};

/// One connected piece of a seed's Voronoi region inside the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCell {
    pub seed: usize,
    pub polygon: PolygonWithHoles,
}

/// Keep the part of a convex ring with `(p - origin) . normal <= 0`.
fn clip_halfplane(ring: &[Point], origin: Point, normal: Point) -> Vec<Point> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    let scale = normal.norm();
    let side = |p: Point| (p - origin).dot(normal) / scale;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let sa = side(a);
        let sb = side(b);
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push(a.lerp(b, t));
        }
    }
    out
}

/// Bounded Voronoi region of `seeds[i]` within `frame`, as a convex ring.
pub(crate) fn convex_cell(seeds: &[Point], i: usize, frame: &BoundingBox) -> Vec<Point> {
    let mut ring = vec![
        frame.min,
        Point::new(frame.max.x, frame.min.y),
        frame.max,
        Point::new(frame.min.x, frame.max.y),
    ];
    let s = seeds[i];
    for (j, &t) in seeds.iter().enumerate() {
        if j == i {
            continue;
        }
        ring = clip_halfplane(&ring, s.lerp(t, 0.5), t - s);
        if ring.len() < 3 {
            break;
        }
    }
    ring
}

/// Clip a convex ring by a convex counter-clockwise ring.
fn clip_convex(ring: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = ring.to_vec();
    let n = clip.len();
    for k in 0..n {
        if out.len() < 3 {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % n];
        // region on the left of a->b; outward normal points right
        let normal = Point::new(b.y - a.y, a.x - b.x);
        out = clip_halfplane(&out, a, normal);
    }
    out
}

pub(crate) fn check_seeds(seeds: &[Point], boundary: &PolygonWithHoles) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::argument("at least one seed is required"));
    }
    for (i, s) in seeds.iter().enumerate() {
        if !s.is_finite() || !boundary.contains(*s) {
            return Err(Error::argument(format!("seed {i} lies outside the boundary")));
        }
    }
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            if seeds[i].dist(seeds[j]) <= EXACT_TOL {
                return Err(Error::argument(format!("seeds {i} and {j} coincide")));
            }
        }
    }
    Ok(())
}

/// Clipped cells without argument checks; used on GA hot paths.
pub(crate) fn voronoi_cells_unchecked(seeds: &[Point], boundary: &PolygonWithHoles) -> Vec<VoronoiCell> {
    let bb = boundary.bbox();
    let frame = bb.expanded(bb.diagonal().max(1.0));
    let outer_convex = PolygonWithHoles {
        outer: boundary.outer.clone(),
        holes: Vec::new(),
    }
    .is_convex();
    let hole_boxes: Vec<BoundingBox> = boundary.holes.iter().filter_map(|h| BoundingBox::of_points(h)).collect();
    let mut cells = Vec::with_capacity(seeds.len());
    let min_area = 1e-12 * bb.diagonal().max(1.0).powi(2);
    let boundary_list = [boundary.clone()];
    for i in 0..seeds.len() {
        let ring = convex_cell(seeds, i, &frame);
        if ring.len() < 3 {
            continue;
        }
        let cell_bb = BoundingBox::of_points(&ring).expect("non-empty ring");
        if outer_convex && !hole_boxes.iter().any(|hb| hb.intersects(&cell_bb)) {
            let clipped = super::clean_ring(&clip_convex(&ring, &boundary.outer), 0.0);
            if clipped.len() >= 3 && signed_area(&clipped) > min_area {
                cells.push(VoronoiCell {
                    seed: i,
                    polygon: PolygonWithHoles {
                        outer: clipped,
                        holes: Vec::new(),
                    },
                });
            }
            continue;
        }
        let cell = PolygonWithHoles {
            outer: ring,
            holes: Vec::new(),
        };
        let mut pieces = intersection(&[cell], &boundary_list);
        pieces.retain(|p| p.area() > min_area);
        // deterministic piece order: by lowest vertex
        pieces.sort_by(|a, b| {
            let ka = lowest(&a.outer);
            let kb = lowest(&b.outer);
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        for p in pieces {
            cells.push(VoronoiCell { seed: i, polygon: p });
        }
    }
    cells
}

fn lowest(ring: &[Point]) -> (f64, f64) {
    ring.iter()
        .map(|p| (p.x, p.y))
        .fold((f64::INFINITY, f64::INFINITY), |a, b| if b < a { b } else { a })
}

/// Voronoi partition of `boundary` by `seeds`.
///
/// A seed whose region is split by the boundary yields one cell per piece,
/// all tagged with the same seed index.
pub fn voronoi_cells(seeds: &[Point], boundary: &PolygonWithHoles) -> Result<Vec<VoronoiCell>> {
    check_seeds(seeds, boundary)?;
    Ok(voronoi_cells_unchecked(seeds, boundary))
}
