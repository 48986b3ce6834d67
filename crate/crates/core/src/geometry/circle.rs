use serde::{Deserialize, Serialize};

use super::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius * (1.0 + 1e-12) + 1e-12
    }

    fn from2(a: Point, b: Point) -> Circle {
        let c = a.lerp(b, 0.5);
        Circle {
            center: c,
            radius: c.dist(a).max(c.dist(b)),
        }
    }

    fn from3(a: Point, b: Point, c: Point) -> Option<Circle> {
        let ab = b - a;
        let ac = c - a;
        let d = 2.0 * ab.cross(ac);
        if d.abs() < 1e-18 {
            return None;
        }
        let (b2, c2) = (ab.norm_sq(), ac.norm_sq());
        let off = Point::new(ac.y * b2 - ab.y * c2, ab.x * c2 - ac.x * b2) * (1.0 / d);
        let center = a + off;
        Some(Circle {
            center,
            radius: center.dist(a).max(center.dist(b)).max(center.dist(c)),
        })
    }
}

/// Smallest circle enclosing all points (Welzl, iterative form).
///
/// Points are visited in a fixed pseudo-random order so the result is
/// deterministic and expected linear time.
pub fn min_enclosing_circle(points: &[Point]) -> Option<Circle> {
    if points.is_empty() {
        return None;
    }
    let mut pts = points.to_vec();
    // deterministic shuffle with a small LCG; no need for a full RNG here
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for i in (1..pts.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = ((state >> 33) as usize) % (i + 1);
        pts.swap(i, j);
    }
    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = Circle::from2(pts[i], pts[j]);
            for k in 0..j {
                if c.contains(pts[k]) {
                    continue;
                }
                c = Circle::from3(pts[i], pts[j], pts[k]).unwrap_or_else(|| {
                    // collinear triple: the widest pair spans it
                    let cands = [
                        Circle::from2(pts[i], pts[j]),
                        Circle::from2(pts[i], pts[k]),
                        Circle::from2(pts[j], pts[k]),
                    ];
                    cands
                        .into_iter()
                        .max_by(|a, b| a.radius.total_cmp(&b.radius))
                        .expect("three candidates")
                });
            }
        }
    }
    Some(c)
}
