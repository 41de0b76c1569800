//! File formats: geometry JSON, field CSV, contour and critical-point JSON.

use std::fmt::Write as _;
use std::path::Path;

use caplab_core::analysis::CriticalPoint;
use caplab_core::geometry::{BoundaryMap, CapacitorSpec, Curve, Mask, NodeKind, Point};
use caplab_core::levelset::{CheckReport, LevelSetComponent, PlanarGraph, Terminal, Check};
use caplab_core::{ComplexField, C64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry file: closed polylines as `[x, y]` lists, hole constants as
/// `[re, im]`, the outer map as `[t, re, im]` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub outer: Vec<[f64; 2]>,
    #[serde(default)]
    pub holes: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub hole_values: Vec<[f64; 2]>,
    pub outer_map: Vec<[f64; 3]>,
}

impl GeometryFile {
    pub fn from_spec(spec: &CapacitorSpec) -> Self {
        let pts = |c: &Curve| c.points().iter().map(|p| [p.x, p.y]).collect();
        GeometryFile {
            outer: pts(&spec.outer),
            holes: spec.holes.iter().map(pts).collect(),
            hole_values: spec.hole_values.iter().map(|v| [v.re, v.im]).collect(),
            outer_map: spec.outer_map.samples().iter().map(|(t, v)| [*t, v.re, v.im]).collect(),
        }
    }

    pub fn to_spec(&self) -> Result<CapacitorSpec> {
        let curve = |v: &[[f64; 2]]| Curve::closed(v.iter().map(|p| Point::new(p[0], p[1])).collect());
        let map = BoundaryMap::new(self.outer_map.iter().map(|s| (s[0], C64::new(s[1], s[2]))).collect())?;
        let holes = self.holes.iter().map(|h| curve(h)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CapacitorSpec::new(
            curve(&self.outer)?,
            holes,
            self.hole_values.iter().map(|v| C64::new(v[0], v[1])).collect(),
            map,
        )?)
    }
}

pub fn read_geometry(path: &Path) -> Result<CapacitorSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let g: GeometryFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    g.to_spec()
}

pub fn geometry_json(spec: &CapacitorSpec) -> String {
    to_json(&GeometryFile::from_spec(spec))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn kind_str(kind: NodeKind) -> String {
    match kind {
        NodeKind::Interior => "interior".into(),
        NodeKind::OuterBoundary => "outer".into(),
        NodeKind::HoleBoundary(k) => format!("hole{k}"),
        NodeKind::Exterior => "exterior".into(),
    }
}

/// `x,y,kind,re,im` for every domain node in index order.
pub fn field_csv(field: &ComplexField) -> String {
    let mask: &Mask = field.mask();
    let g = mask.grid();
    let mut out = String::from("x,y,kind,re,im\n");
    for k in field.domain() {
        let p = g.point(k);
        let v = field.values()[k];
        let _ = writeln!(out, "{},{},{},{},{}", p.x, p.y, kind_str(mask.kind(k)), v.re, v.im);
    }
    out
}

/// One row of `field.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub x: f64,
    pub y: f64,
    pub kind: String,
    pub value: C64,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("x,y,kind,re,im") {
        return Err(Error::Format("field csv: bad header".into()));
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("field csv line {}: bad number '{s}'", n + 2)));
            if f.len() != 5 {
                return Err(Error::Format(format!("field csv line {}: expected 5 fields", n + 2)));
            }
            Ok(CsvRow { x: num(f[0])?, y: num(f[1])?, kind: f[2].to_string(), value: C64::new(num(f[3])?, num(f[4])?) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcJson {
    pub points: Vec<[f64; 2]>,
    pub start: String,
    pub end: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub x: f64,
    pub y: f64,
    pub critical: bool,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GraphJson {
    pub V: usize,
    pub E: usize,
    pub F: usize,
    pub degrees: Vec<usize>,
    pub terminals: usize,
    pub bounded_faces: Vec<FaceJson>,
    pub domain_regions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceJson {
    pub x: f64,
    pub y: f64,
    pub holes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContoursJson {
    pub level: f64,
    pub seed: [f64; 2],
    pub arcs: Vec<ArcJson>,
    pub nodes: Vec<NodeJson>,
    pub graph: GraphJson,
    /// Check name to `pass`, `fail: ...` or `skipped: ...`.
    pub checks: std::collections::BTreeMap<String, String>,
}

pub fn terminal_str(t: Terminal) -> String {
    match t {
        Terminal::Node(k) => format!("node{k}"),
        Terminal::OuterBoundary => "outer".into(),
        Terminal::HoleBoundary(k) => format!("hole{k}"),
        Terminal::OpenEnd => "open".into(),
    }
}

pub fn check_str(c: &Check) -> String {
    match c {
        Check::Pass => "pass".into(),
        Check::Fail(m) => format!("fail: {m}"),
        Check::Skipped(m) => format!("skipped: {m}"),
    }
}

pub fn contours(component: &LevelSetComponent, graph: &PlanarGraph, checks: &CheckReport) -> ContoursJson {
    ContoursJson {
        level: component.level,
        seed: [component.seed.x, component.seed.y],
        arcs: component
            .arcs
            .iter()
            .map(|a| ArcJson {
                points: a.points.iter().map(|p| [p.x, p.y]).collect(),
                start: terminal_str(a.start),
                end: terminal_str(a.end),
            })
            .collect(),
        nodes: component
            .node_points
            .iter()
            .enumerate()
            .map(|(k, p)| NodeJson { x: p.x, y: p.y, critical: component.node_critical[k], degree: component.node_degree(k) })
            .collect(),
        graph: GraphJson {
            V: graph.v,
            E: graph.e,
            F: graph.f,
            degrees: graph.degrees.clone(),
            terminals: graph.terminal_count,
            bounded_faces: graph.bounded_faces.iter().map(|f| FaceJson { x: f.point.x, y: f.point.y, holes: f.holes.clone() }).collect(),
            domain_regions: graph.domain_regions,
        },
        checks: checks.entries().iter().map(|(k, c)| (k.to_string(), check_str(c))).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalJson {
    pub x: f64,
    pub y: f64,
    pub rank: String,
    /// For rank zero: the level set has `2m` arcs there (`m - 1` is the
    /// multiplicity of the zero of the complex derivative).
    pub m: Option<u32>,
    pub grad_norm_sq: f64,
    pub jac: f64,
}

pub fn critical(points: &[CriticalPoint]) -> Vec<CriticalJson> {
    points
        .iter()
        .map(|c| CriticalJson {
            x: c.location.x,
            y: c.location.y,
            rank: c.rank.as_str().into(),
            m: c.order_m,
            grad_norm_sq: c.grad_norm_sq,
            jac: c.jac,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use caplab_core::fixtures::Fixture;

    #[test]
    fn geometry_round_trip() {
        for name in ["cassini", "capacitor-example", "rkc-disk"] {
            let spec = Fixture::parse(name).unwrap().spec().unwrap();
            let text = geometry_json(&spec);
            let back: GeometryFile = serde_json::from_str(&text).unwrap();
            let spec2 = back.to_spec().unwrap();
            assert_eq!(spec2.outer, spec.outer);
            assert_eq!(spec2.holes, spec.holes);
            assert_eq!(spec2.hole_values, spec.hole_values);
            assert_eq!(spec2.outer_map, spec.outer_map);
        }
    }

    #[test]
    fn bad_geometry_is_rejected() {
        let g = GeometryFile { outer: vec![[0.0, 0.0], [1.0, 0.0]], holes: vec![], hole_values: vec![], outer_map: vec![] };
        assert!(g.to_spec().is_err());
        assert!(serde_json::from_str::<GeometryFile>("{\"outer\": [], \"extra\": 1, \"outer_map\": []}").is_err());
    }
}
