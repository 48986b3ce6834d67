//! Layered SVG drawings of a plan.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{BoundingBox, Point};

use super::{FieldMap, MissionPlan};

/// Which layers to draw on top of the field outline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Field,
    Partition,
    Trails,
    Routes,
    Car,
    #[default]
    All,
}

impl std::str::FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "field" => Layer::Field,
            "partition" => Layer::Partition,
            "trails" => Layer::Trails,
            "routes" => Layer::Routes,
            "car" => Layer::Car,
            "all" => Layer::All,
            _ => return Err(format!("unknown layer {s:?}")),
        })
    }
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Canvas {
    out: String,
    bb: BoundingBox,
}

impl Canvas {
    fn xy(&self, p: Point) -> (f64, f64) {
        (p.x - self.bb.min.x, self.bb.max.y - p.y)
    }

    fn path(&mut self, rings: &[&[Point]], closed: bool, attrs: &str) {
        let mut d = String::new();
        for r in rings {
            for (k, p) in r.iter().enumerate() {
                let (x, y) = self.xy(*p);
                let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
            }
            if closed {
                d.push('Z');
            }
        }
        let _ = writeln!(self.out, r#"<path d="{}" {attrs}/>"#, d.trim_end());
    }

    fn circle(&mut self, p: Point, r: f64, attrs: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(self.out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" {attrs}/>"#);
    }

    fn group(&mut self, id: &str) {
        let _ = writeln!(self.out, r#"<g id="{id}">"#);
    }

    fn end(&mut self) {
        self.out.push_str("</g>\n");
    }
}

/// SVG of the plan over its map. Output depends only on the inputs.
pub fn render_svg(plan: &MissionPlan, map: &FieldMap, layer: Layer) -> String {
    let pts: Vec<Point> = map
        .farmland
        .iter()
        .flat_map(|p| p.outer.iter().copied())
        .chain(map.road_lines.iter().flatten().copied())
        .chain(plan.subareas.iter().flat_map(|s| s.cell.outer.iter().copied()))
        .collect();
    let bb = BoundingBox::of_points(&pts)
        .unwrap_or(BoundingBox {
            min: Point::default(),
            max: Point::new(1.0, 1.0),
        })
        .expanded(10.0);
    let stroke = (bb.width().max(bb.height()) / 800.0).max(0.05);
    let mut c = Canvas { out: String::new(), bb };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {:.3} {:.3}" width="{:.0}" height="{:.0}">"#,
        bb.width(),
        bb.height(),
        800.0,
        800.0 * bb.height() / bb.width().max(1e-9)
    );
    let show = |l: Layer| layer == Layer::All || layer == l;

    c.group("field");
    for f in &map.farmland {
        let rings: Vec<&[Point]> = f.rings().collect();
        c.path(&rings, true, &format!(r##"fill="#f4f1e1" fill-rule="evenodd" stroke="#6b8e23" stroke-width="{:.3}""##, 2.0 * stroke));
    }
    for o in &map.obstacles {
        let rings: Vec<&[Point]> = o.rings().collect();
        c.path(&rings, true, r##"fill="#9e9e9e" fill-rule="evenodd" stroke="none""##);
    }
    c.end();

    if show(Layer::Partition) {
        c.group("partition");
        for s in &plan.subareas {
            let rings: Vec<&[Point]> = s.cell.rings().collect();
            c.path(
                &rings,
                true,
                &format!(r#"fill="{}" fill-opacity="0.25" fill-rule="evenodd" stroke="{}" stroke-width="{stroke:.3}""#, color(s.id), color(s.id)),
            );
        }
        c.end();
    }
    if show(Layer::Trails) {
        c.group("trails");
        for s in &plan.subareas {
            for t in &s.trails {
                if t.ring.len() == 1 {
                    c.circle(t.ring[0], stroke, r##"fill="#333""##);
                } else {
                    c.path(&[&t.ring], true, &format!(r##"fill="none" stroke="#333" stroke-width="{stroke:.3}""##));
                }
            }
        }
        c.end();
    }
    if show(Layer::Routes) {
        c.group("routes");
        for s in &plan.subareas {
            for (k, r) in s.assignment.routes.iter().enumerate() {
                if r.is_empty() {
                    continue;
                }
                let col = color(k);
                for &t in r {
                    let ring = &s.trails[t].ring;
                    if ring.len() > 1 {
                        c.path(&[ring], true, &format!(r#"fill="none" stroke="{col}" stroke-width="{:.3}""#, 1.5 * stroke));
                    }
                }
                let hops: Vec<Point> = r.iter().map(|&t| s.assignment.access_points[t]).collect();
                if hops.len() > 1 {
                    c.path(
                        &[&hops],
                        false,
                        &format!(r#"fill="none" stroke="{col}" stroke-width="{:.3}" stroke-dasharray="{:.3}""#, 1.5 * stroke, 4.0 * stroke),
                    );
                }
                for p in hops {
                    c.circle(p, 2.0 * stroke, &format!(r#"fill="{col}""#));
                }
            }
        }
        c.end();
    }
    if show(Layer::Car) && !map.roads.is_empty() {
        c.group("car");
        for l in &map.road_lines {
            c.path(&[l], false, &format!(r##"fill="none" stroke="#777" stroke-width="{:.3}""##, 2.0 * stroke));
        }
        if let Some(car) = &plan.car {
            for leg in &car.legs {
                c.path(
                    &[&leg.path.polyline],
                    false,
                    &format!(r##"fill="none" stroke="#d62728" stroke-width="{:.3}""##, 3.0 * stroke),
                );
            }
            for sp in &car.spots {
                c.circle(map.roads.nodes[sp.start], 4.0 * stroke, r##"fill="#d62728""##);
                c.circle(map.roads.nodes[sp.end], 4.0 * stroke, r##"fill="#2ca02c""##);
            }
        }
        c.end();
    }
    c.out.push_str("</svg>\n");
    c.out
}
