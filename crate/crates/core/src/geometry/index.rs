use std::collections::HashMap;

use super::{closest_point_on_segment, BoundingBox, Point};

/// Uniform-grid index over line segments for nearest-distance queries.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    segs: Vec<(Point, Point)>,
    cell: f64,
    origin: Point,
    grid: HashMap<(i64, i64), Vec<u32>>,
    span: (i64, i64, i64, i64),
}

/// Result of a nearest-segment query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub segment: usize,
    pub point: Point,
    pub t: f64,
    pub distance: f64,
}

impl SegmentIndex {
    pub fn new(segs: Vec<(Point, Point)>, cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let bb = BoundingBox::of_points(segs.iter().flat_map(|(a, b)| [a, b]))
            .unwrap_or(BoundingBox {
                min: Point::default(),
                max: Point::default(),
            });
        let origin = bb.min;
        let mut index = SegmentIndex {
            segs,
            cell,
            origin,
            grid: HashMap::new(),
            span: (i64::MAX, i64::MIN, i64::MAX, i64::MIN),
        };
        for (k, &(a, b)) in index.segs.iter().enumerate() {
            let (i0, j0) = index.key(Point::new(a.x.min(b.x), a.y.min(b.y)));
            let (i1, j1) = index.key(Point::new(a.x.max(b.x), a.y.max(b.y)));
            // walk only cells the segment actually passes near
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let lo = Point::new(origin.x + i as f64 * cell, origin.y + j as f64 * cell);
                    let center = lo + Point::new(cell * 0.5, cell * 0.5);
                    let (q, _) = closest_point_on_segment(center, a, b);
                    if (q.x - center.x).abs() <= cell * 0.5 + 1e-12 && (q.y - center.y).abs() <= cell * 0.5 + 1e-12
                        || q.dist(center) <= cell * std::f64::consts::FRAC_1_SQRT_2 + 1e-12
                    {
                        index.grid.entry((i, j)).or_default().push(k as u32);
                    }
                }
            }
            index.span.0 = index.span.0.min(i0);
            index.span.1 = index.span.1.max(i1);
            index.span.2 = index.span.2.min(j0);
            index.span.3 = index.span.3.max(j1);
        }
        index
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn segment(&self, k: usize) -> (Point, Point) {
        self.segs[k]
    }

    /// Closest segment to `p`; `None` only for an empty index.
    pub fn nearest(&self, p: Point) -> Option<Nearest> {
        if self.segs.is_empty() {
            return None;
        }
        let (ci, cj) = self.key(p);
        let mut best: Option<Nearest> = None;
        let max_ring = {
            let (i0, i1, j0, j1) = self.span;
            [(ci - i0).abs(), (ci - i1).abs(), (cj - j0).abs(), (cj - j1).abs()]
                .into_iter()
                .max()
                .unwrap_or(0)
        };
        let visit = |i: i64, j: i64, best: &mut Option<Nearest>| {
            if let Some(list) = self.grid.get(&(i, j)) {
                for &k in list {
                    let (a, b) = self.segs[k as usize];
                    let (q, t) = closest_point_on_segment(p, a, b);
                    let d = q.dist(p);
                    let better = match best {
                        None => true,
                        Some(n) => d < n.distance || (d == n.distance && (k as usize) < n.segment),
                    };
                    if better {
                        *best = Some(Nearest {
                            segment: k as usize,
                            point: q,
                            t,
                            distance: d,
                        });
                    }
                }
            }
        };
        for r in 0..=max_ring {
            if r == 0 {
                visit(ci, cj, &mut best);
            } else {
                for i in ci - r..=ci + r {
                    visit(i, cj - r, &mut best);
                    visit(i, cj + r, &mut best);
                }
                for j in cj - r + 1..=cj + r - 1 {
                    visit(ci - r, j, &mut best);
                    visit(ci + r, j, &mut best);
                }
            }
            if let Some(n) = best {
                // every unvisited cell is at least r * cell away
                if n.distance <= r as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |n| n.distance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_segment_distance;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let segs: Vec<(Point, Point)> = (0..200)
            .map(|_| {
                let a = Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
                let b = a + Point::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
                (a, b)
            })
            .collect();
        let idx = SegmentIndex::new(segs.clone(), 3.0);
        for _ in 0..2000 {
            let p = Point::new(rng.random_range(-20.0..120.0), rng.random_range(-20.0..120.0));
            let brute = segs
                .iter()
                .map(|&(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min);
            assert!((idx.distance(p) - brute).abs() < 1e-12);
        }
    }
}
