//! Line segments as an equality plus two halfspaces.

use serde::{Deserialize, Serialize};

use super::{BoundingBox, Point};
use crate::error::{Error, Result};

/// Segment `p0`-`p1` written as `A p <= b` with row `eq_row` held at equality.
///
/// Rows are the unit normal `n0` and the two end caps `-n1`, `-n2` with
/// `n1 = (p1 - p0)/|p1 - p0|` and `n2 = -n1`. `lb`/`ub` bound the parent trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentHalfspaces {
    pub a: [[f64; 2]; 3],
    pub b: [f64; 3],
    pub eq_row: usize,
    pub p0: Point,
    pub p1: Point,
    pub lb: Point,
    pub ub: Point,
}

impl SegmentHalfspaces {
    pub fn row(&self, k: usize) -> (Point, f64) {
        (Point::from(self.a[k]), self.b[k])
    }

    /// Row residuals `A p - b`; feasible when the equality residual is zero and the rest non-positive.
    pub fn residuals(&self, p: Point) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (k, slot) in r.iter_mut().enumerate() {
            let (n, b) = self.row(k);
            *slot = n.dot(p) - b;
        }
        r
    }

    /// Membership with absolute tolerance `tol` in meters.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let r = self.residuals(p);
        r.iter().enumerate().all(|(k, &v)| if k == self.eq_row { v.abs() <= tol } else { v <= tol })
            && p.x >= self.lb.x - tol
            && p.x <= self.ub.x + tol
            && p.y >= self.lb.y - tol
            && p.y <= self.ub.y + tol
    }

    pub fn length(&self) -> f64 {
        self.p0.dist(self.p1)
    }
}

pub fn segment_to_halfspaces(p0: Point, p1: Point, trail_bbox: &BoundingBox) -> Result<SegmentHalfspaces> {
    let d = p1 - p0;
    let len = d.norm();
    if !(len > 0.0) || !p0.is_finite() || !p1.is_finite() {
        return Err(Error::geometry("zero-length segment"));
    }
    let u = d * (1.0 / len);
    let n0 = u.perp();
    let n1 = u;
    let n2 = -u;
    Ok(SegmentHalfspaces {
        a: [[n0.x, n0.y], [-n1.x, -n1.y], [-n2.x, -n2.y]],
        b: [n0.dot(p0), -n1.dot(p0), -n2.dot(p1)],
        eq_row: 0,
        p0,
        p1,
        lb: trail_bbox.min,
        ub: trail_bbox.max,
    })
}
