use serde::{Deserialize, Serialize};

use super::Point;

/// Mean Earth radius, meters.
const EARTH_RADIUS: f64 = 6_371_008.8;

/// Equirectangular projection about a reference longitude/latitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equirectangular {
    pub lon0: f64,
    pub lat0: f64,
}

impl Equirectangular {
    pub fn new(lon0: f64, lat0: f64) -> Self {
        Equirectangular { lon0, lat0 }
    }

    /// Degrees (lon, lat) to local meters.
    pub fn forward(&self, lon: f64, lat: f64) -> Point {
        let k = self.lat0.to_radians().cos();
        Point::new(
            (lon - self.lon0).to_radians() * EARTH_RADIUS * k,
            (lat - self.lat0).to_radians() * EARTH_RADIUS,
        )
    }

    /// Local meters to degrees (lon, lat).
    pub fn inverse(&self, p: Point) -> (f64, f64) {
        let k = self.lat0.to_radians().cos();
        (
            self.lon0 + (p.x / (EARTH_RADIUS * k)).to_degrees(),
            self.lat0 + (p.y / EARTH_RADIUS).to_degrees(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let pr = Equirectangular::new(-84.39, 33.77);
        let p = pr.forward(-84.385, 33.775);
        let (lon, lat) = pr.inverse(p);
        assert!((lon + 84.385).abs() < 1e-12 && (lat - 33.775).abs() < 1e-12);
        // about 556 m north
        assert!((p.y - 555.97).abs() < 0.1);
    }
}
