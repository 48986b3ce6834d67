//! GeoJSON field maps: farmland, obstacles and roads.

use std::path::Path;
use std::str::FromStr;

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, JsonObject, Value};
use serde::{Deserialize, Serialize};

use crate::error::{Error, LoadIssue, Result};
use crate::geometry::{difference, union, BoundingBox, Equirectangular, Point, PolygonWithHoles};
use crate::routing::{RoadGraph, SNAP_TOL, SPOT_SPACING};

/// Farmland, obstacles and road network in a local metric frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub farmland: Vec<PolygonWithHoles>,
    pub obstacles: Vec<PolygonWithHoles>,
    pub road_lines: Vec<Vec<Point>>,
    pub roads: RoadGraph,
    /// Projection used when the source was in longitude/latitude.
    pub projection: Option<Equirectangular>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn issue(feature: Option<usize>, message: impl Into<String>) -> LoadIssue {
    LoadIssue {
        feature,
        message: message.into(),
    }
}

impl FieldMap {
    /// Validate the parts and build the road graph.
    pub fn from_parts(
        farmland: Vec<PolygonWithHoles>,
        obstacles: Vec<PolygonWithHoles>,
        road_lines: Vec<Vec<Point>>,
    ) -> Result<FieldMap> {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();
        check_parts(&farmland, &obstacles, &mut issues, |i| Some(i), |i| Some(farmland.len() + i));
        let roads = match RoadGraph::from_polylines(&road_lines, SNAP_TOL) {
            Ok(g) => g.with_parking_spots(SPOT_SPACING),
            Err(e) => {
                issues.push(issue(None, e.to_string()));
                RoadGraph::default()
            }
        };
        if !issues.is_empty() {
            return Err(Error::Load(issues));
        }
        if roads.is_empty() {
            warnings.push("map has no roads; car routing is skipped".to_string());
        }
        Ok(FieldMap {
            farmland,
            obstacles,
            road_lines,
            roads,
            projection: None,
            warnings,
        })
    }

    /// Farmland minus obstacles, one polygon per connected piece, largest first.
    pub fn region(&self) -> Vec<PolygonWithHoles> {
        let land = union(&self.farmland);
        let mut out = if self.obstacles.is_empty() {
            land
        } else {
            difference(&land, &self.obstacles)
        };
        out.sort_by(|a, b| {
            b.area()
                .total_cmp(&a.area())
                .then_with(|| (a.bbox().min.x, a.bbox().min.y).partial_cmp(&(b.bbox().min.x, b.bbox().min.y)).expect("finite"))
        });
        out
    }

    pub fn region_area(&self) -> f64 {
        self.region().iter().map(PolygonWithHoles::area).sum()
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        let pts: Vec<Point> = self
            .farmland
            .iter()
            .flat_map(|p| p.outer.iter().copied())
            .chain(self.road_lines.iter().flatten().copied())
            .collect();
        BoundingBox::of_points(&pts)
    }

    /// GeoJSON in the local frame; loading it back gives the same geometry.
    pub fn to_geojson(&self) -> String {
        let ring = |r: &[Point]| {
            let mut v: Vec<Vec<f64>> = r.iter().map(|p| vec![p.x, p.y]).collect();
            v.push(vec![r[0].x, r[0].y]);
            v
        };
        let poly = |p: &PolygonWithHoles| {
            Value::Polygon(std::iter::once(ring(&p.outer)).chain(p.holes.iter().map(|h| ring(h))).collect())
        };
        let feature = |value: Value, role: &str| {
            let mut props = JsonObject::new();
            props.insert("role".into(), role.into());
            Feature {
                bbox: None,
                geometry: Some(Geometry::new(value)),
                id: None,
                properties: Some(props),
                foreign_members: None,
            }
        };
        let mut features: Vec<Feature> = Vec::new();
        features.extend(self.farmland.iter().map(|p| feature(poly(p), "farmland")));
        features.extend(self.obstacles.iter().map(|p| feature(poly(p), "obstacle")));
        features.extend(
            self.road_lines
                .iter()
                .map(|l| feature(Value::LineString(l.iter().map(|p| vec![p.x, p.y]).collect()), "road")),
        );
        let mut fm = JsonObject::new();
        fm.insert("frame".into(), "local".into());
        let fc = FeatureCollection {
            bbox: None,
            features,
            foreign_members: Some(fm),
        };
        GeoJson::FeatureCollection(fc).to_string()
    }
}

fn check_parts(
    farmland: &[PolygonWithHoles],
    obstacles: &[PolygonWithHoles],
    issues: &mut Vec<LoadIssue>,
    farm_id: impl Fn(usize) -> Option<usize>,
    obstacle_id: impl Fn(usize) -> Option<usize>,
) {
    if farmland.is_empty() {
        issues.push(issue(None, "map has no farmland polygon"));
    }
    for (i, p) in farmland.iter().enumerate() {
        if let Err(e) = p.validate_topology() {
            issues.push(issue(farm_id(i), e.to_string()));
        }
    }
    for (i, p) in obstacles.iter().enumerate() {
        if let Err(e) = p.validate_topology() {
            issues.push(issue(obstacle_id(i), e.to_string()));
            continue;
        }
        let outside: f64 = difference(std::slice::from_ref(p), farmland).iter().map(PolygonWithHoles::area).sum();
        if outside > 1e-6 * p.area().max(1.0) {
            issues.push(issue(obstacle_id(i), format!("obstacle extends {outside:.3} m^2 outside the farmland")));
        }
    }
}

/// Read a GeoJSON FeatureCollection from disk.
pub fn load_map(path: impl AsRef<Path>) -> Result<FieldMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_map(&text)
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Farmland,
    Obstacle,
    Road,
}

/// Parse a map. Features carry `properties.role` of farmland, obstacle or road.
///
/// Coordinates are longitude/latitude projected about the map's bounding-box
/// center, unless the collection has `"frame": "local"`, in which case they are meters.
pub fn parse_map(text: &str) -> Result<FieldMap> {
    let gj = GeoJson::from_str(text).map_err(|e| Error::Load(vec![issue(None, format!("not GeoJSON: {e}"))]))?;
    let GeoJson::FeatureCollection(fc) = gj else {
        return Err(Error::Load(vec![issue(None, "top level must be a FeatureCollection")]));
    };
    let local = fc
        .foreign_members
        .as_ref()
        .and_then(|m| m.get("frame"))
        .and_then(|v| v.as_str())
        .is_some_and(|f| f == "local");
    let mut issues = Vec::new();
    let mut raw: Vec<(usize, Role, Vec<Vec<Vec<[f64; 2]>>>)> = Vec::new();
    for (i, f) in fc.features.iter().enumerate() {
        let role = f
            .properties
            .as_ref()
            .and_then(|p| p.get("role"))
            .and_then(|v| v.as_str())
            .map(str::to_owned);
        let role = match role.as_deref() {
            Some("farmland") => Role::Farmland,
            Some("obstacle") => Role::Obstacle,
            Some("road") => Role::Road,
            Some(other) => {
                issues.push(issue(Some(i), format!("unknown role {other:?}")));
                continue;
            }
            None => {
                issues.push(issue(Some(i), "missing properties.role"));
                continue;
            }
        };
        let Some(g) = &f.geometry else {
            issues.push(issue(Some(i), "feature has no geometry"));
            continue;
        };
        let xy = |c: &Vec<f64>| [c[0], c.get(1).copied().unwrap_or(f64::NAN)];
        let parts: Vec<Vec<Vec<[f64; 2]>>> = match (&g.value, role) {
            (Value::Polygon(rings), Role::Farmland | Role::Obstacle) => {
                vec![rings.iter().map(|r| r.iter().map(xy).collect()).collect()]
            }
            (Value::MultiPolygon(polys), Role::Farmland | Role::Obstacle) => polys
                .iter()
                .map(|rings| rings.iter().map(|r| r.iter().map(xy).collect()).collect())
                .collect(),
            (Value::LineString(l), Role::Road) => vec![vec![l.iter().map(xy).collect()]],
            (Value::MultiLineString(ls), Role::Road) => ls.iter().map(|l| vec![l.iter().map(xy).collect()]).collect(),
            _ => {
                issues.push(issue(Some(i), "geometry type does not fit the role"));
                continue;
            }
        };
        raw.push((i, role, parts));
    }
    let all: Vec<Point> = raw
        .iter()
        .flat_map(|(_, _, parts)| parts.iter().flatten().flatten())
        .map(|c| Point::new(c[0], c[1]))
        .collect();
    if all.iter().any(|p| !p.is_finite()) {
        issues.push(issue(None, "non-finite or missing coordinate"));
    }
    if !issues.is_empty() {
        return Err(Error::Load(issues));
    }
    let projection = if local {
        None
    } else {
        BoundingBox::of_points(&all).map(|bb| {
            let c = bb.center();
            Equirectangular::new(c.x, c.y)
        })
    };
    let to_local = |c: &[f64; 2]| match projection {
        Some(pr) => pr.forward(c[0], c[1]),
        None => Point::new(c[0], c[1]),
    };
    let mut farmland = Vec::new();
    let mut farm_ids = Vec::new();
    let mut obstacles = Vec::new();
    let mut obstacle_ids = Vec::new();
    let mut road_lines = Vec::new();
    for (i, role, parts) in &raw {
        for part in parts {
            let mut rings: Vec<Vec<Point>> = part.iter().map(|r| r.iter().map(to_local).collect()).collect();
            if *role == Role::Road {
                road_lines.push(rings.swap_remove(0));
                continue;
            }
            for r in &mut rings {
                if r.len() > 1 && r.first() == r.last() {
                    r.pop();
                }
            }
            if rings.is_empty() {
                issues.push(issue(Some(*i), "polygon has no rings"));
                continue;
            }
            let outer = rings.remove(0);
            match PolygonWithHoles::new(outer, rings) {
                Ok(p) if *role == Role::Farmland => {
                    farmland.push(p);
                    farm_ids.push(*i);
                }
                Ok(p) => {
                    obstacles.push(p);
                    obstacle_ids.push(*i);
                }
                Err(e) => issues.push(issue(Some(*i), e.to_string())),
            }
        }
    }
    check_parts(&farmland, &obstacles, &mut issues, |k| Some(farm_ids[k]), |k| Some(obstacle_ids[k]));
    if !issues.is_empty() {
        return Err(Error::Load(issues));
    }
    let mut map = FieldMap::from_parts(farmland, obstacles, road_lines)?;
    map.projection = projection;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(features: &str, local: bool) -> String {
        let frame = if local { r#","frame":"local""# } else { "" };
        format!(r#"{{"type":"FeatureCollection"{frame},"features":[{features}]}}"#)
    }

    fn square_feature(role: &str, x0: f64, y0: f64, s: f64) -> String {
        format!(
            r#"{{"type":"Feature","properties":{{"role":"{role}"}},"geometry":{{"type":"Polygon","coordinates":[[[{x0},{y0}],[{x1},{y0}],[{x1},{y1}],[{x0},{y1}],[{x0},{y0}]]]}}}}"#,
            x1 = x0 + s,
            y1 = y0 + s
        )
    }

    #[test]
    fn farmland_without_roads_warns() {
        let m = parse_map(&fc(&square_feature("farmland", 0.0, 0.0, 100.0), true)).unwrap();
        assert_eq!(m.farmland.len(), 1);
        assert!(m.roads.is_empty());
        assert_eq!(m.warnings.len(), 1);
        assert!((m.region_area() - 1e4).abs() < 1e-6);
    }

    #[test]
    fn obstacle_outside_is_rejected() {
        let text = fc(
            &format!("{},{}", square_feature("farmland", 0.0, 0.0, 100.0), square_feature("obstacle", 150.0, 0.0, 10.0)),
            true,
        );
        match parse_map(&text) {
            Err(Error::Load(issues)) => assert_eq!(issues[0].feature, Some(1)),
            other => panic!("expected load error, got {other:?}"),
        }
    }

    #[test]
    fn missing_role_reports_index() {
        let text = fc(
            &format!(
                r#"{},{{"type":"Feature","properties":{{}},"geometry":{{"type":"Point","coordinates":[0,0]}}}}"#,
                square_feature("farmland", 0.0, 0.0, 10.0)
            ),
            true,
        );
        let Err(Error::Load(issues)) = parse_map(&text) else { panic!() };
        assert_eq!(issues[0].feature, Some(1));
    }

    #[test]
    fn round_trip_is_exact() {
        let text = fc(
            &format!(
                r#"{},{},{{"type":"Feature","properties":{{"role":"road"}},"geometry":{{"type":"LineString","coordinates":[[-5,0],[-5,120]]}}}}"#,
                square_feature("farmland", 0.0, 0.0, 100.0),
                square_feature("obstacle", 20.0, 20.0, 10.0)
            ),
            true,
        );
        let a = parse_map(&text).unwrap();
        let b = parse_map(&a.to_geojson()).unwrap();
        for (p, q) in a.farmland.iter().chain(&a.obstacles).zip(b.farmland.iter().chain(&b.obstacles)) {
            for (u, v) in p.outer.iter().zip(&q.outer) {
                assert!(u.dist(*v) <= 1e-9);
            }
        }
        assert_eq!(a.road_lines, b.road_lines);
        assert_eq!(b.roads.nodes.len(), 2 + 4);
    }

    #[test]
    fn lon_lat_is_projected_to_meters() {
        let d = 0.001;
        let m = parse_map(&fc(&square_feature("farmland", 10.0, 45.0, d), false)).unwrap();
        let bb = m.farmland[0].bbox();
        let expect_h = d.to_radians() * 6_371_008.8;
        assert!((bb.height() - expect_h).abs() < 1e-6);
        assert!((bb.width() - expect_h * 45.0005f64.to_radians().cos()).abs() < 1e-3);
        assert!(bb.center().norm() < 1e-6);
    }
}
