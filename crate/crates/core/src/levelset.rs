//! Level sets of scalar fields as planar graphs.
//!
//! Marching squares produces a segment soup; the component through a seed is
//! stitched into arcs whose junctions are the critical points (each replaced
//! by a disk of radius `2h`) and whose loose ends are boundary terminals.
//! Faces are counted by flood fill of the rasterized arcs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::geometry::{CurveId, Mask, NodeKind, Point};
use crate::{Error, Result, ScalarField};

/// Identity of a contour vertex: a grid node lying exactly on the level, or
/// the crossing on the link from `node` to its east (`horizontal`) or north
/// neighbour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKey {
    Node(usize),
    Link { node: usize, horizontal: bool },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    /// Lower-left node of the producing cell.
    pub cell: usize,
}

/// Output of marching squares.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentSoup {
    pub level: f64,
    pub keys: Vec<VertexKey>,
    pub points: Vec<Point>,
    pub segments: Vec<Segment>,
    /// Grid spacing of the traced field.
    pub h: f64,
}

impl SegmentSoup {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Marching squares over cells with four domain corners. A node counts as
/// above when its value is `>= level`; saddle cells follow the sign of the
/// cell-centre average.
pub fn trace_level(field: &ScalarField, level: f64) -> SegmentSoup {
    let g = field.grid();
    let n = g.n;
    let v = field.values();
    let mut ids: BTreeMap<VertexKey, usize> = BTreeMap::new();
    let mut keys = Vec::new();
    let mut points = Vec::new();
    let mut segments = Vec::new();
    let mut vertex = |p: usize, q: usize, horizontal: bool| -> usize {
        // p is the lower-index node of the link
        let t = (level - v[p]) / (v[q] - v[p]);
        let key = if t <= 0.0 {
            VertexKey::Node(p)
        } else if t >= 1.0 {
            VertexKey::Node(q)
        } else {
            VertexKey::Link { node: p, horizontal }
        };
        *ids.entry(key).or_insert_with(|| {
            keys.push(key);
            points.push(match key {
                VertexKey::Node(k) => g.point(k),
                VertexKey::Link { .. } => g.point(p).lerp(g.point(q), t),
            });
            keys.len() - 1
        })
    };
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
            if !c.iter().all(|&k| field.mask().in_domain(k)) {
                continue;
            }
            let above = c.map(|k| v[k] >= level);
            // edges: bottom (0-1), right (1-2), top (3-2), left (0-3)
            let edge_nodes = [(c[0], c[1], true), (c[1], c[2], false), (c[3], c[2], true), (c[0], c[3], false)];
            let edge_cut = |e: usize| -> bool {
                let (a, b) = match e {
                    0 => (0, 1),
                    1 => (1, 2),
                    2 => (3, 2),
                    _ => (0, 3),
                };
                above[a] != above[b]
            };
            let cut: Vec<usize> = (0..4).filter(|&e| edge_cut(e)).collect();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            match cut.len() {
                2 => pairs.push((cut[0], cut[1])),
                4 => {
                    let centre = 0.25 * (v[c[0]] + v[c[1]] + v[c[2]] + v[c[3]]) >= level;
                    // isolate the corners on the other side of the centre
                    for (corner, (e1, e2)) in [(0, (3, 0)), (1, (0, 1)), (2, (1, 2)), (3, (2, 3))] {
                        if above[corner] != centre {
                            pairs.push((e1, e2));
                        }
                    }
                }
                _ => {}
            }
            for (e1, e2) in pairs {
                let (p1, q1, h1) = edge_nodes[e1];
                let (p2, q2, h2) = edge_nodes[e2];
                let a = vertex(p1, q1, h1);
                let b = vertex(p2, q2, h2);
                if a != b {
                    segments.push(Segment { a, b, cell: c[0] });
                }
            }
        }
    }
    SegmentSoup { level, keys, points, segments, h: g.h() }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    let t = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    p.dist(a + d * t)
}

/// How an arc ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// Graph node (index into `node_points`).
    Node(usize),
    OuterBoundary,
    HoleBoundary(usize),
    /// Loose end away from the boundary (unresolved at this resolution).
    OpenEnd,
}

impl Terminal {
    pub fn is_boundary(self) -> bool {
        matches!(self, Terminal::OuterBoundary | Terminal::HoleBoundary(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelArc {
    pub points: Vec<Point>,
    pub start: Terminal,
    pub end: Terminal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetComponent {
    pub level: f64,
    pub seed: Point,
    pub arcs: Vec<LevelArc>,
    pub node_points: Vec<Point>,
    /// Whether each node stands for a detected critical point (as opposed to
    /// an undetected junction or the subdivision vertex of a loop).
    pub node_critical: Vec<bool>,
    pub h: f64,
}

impl LevelSetComponent {
    /// Number of arc ends at node `k` (a loop counts twice).
    pub fn node_degree(&self, k: usize) -> usize {
        self.arcs.iter().map(|a| (a.start == Terminal::Node(k)) as usize + (a.end == Terminal::Node(k)) as usize).sum()
    }

    /// Loose ends: boundary terminals and open ends, as (arc, at_end).
    pub fn terminals(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for (k, a) in self.arcs.iter().enumerate() {
            if !matches!(a.start, Terminal::Node(_)) {
                out.push((k, false));
            }
            if !matches!(a.end, Terminal::Node(_)) {
                out.push((k, true));
            }
        }
        out
    }

    /// Directions (radians in `[0, 2 pi)`) in which arcs leave node `k`,
    /// measured at the first arc point at least `radius` away.
    pub fn arc_directions(&self, k: usize, radius: f64) -> Vec<f64> {
        let c = self.node_points[k];
        let mut out = Vec::new();
        for a in &self.arcs {
            let mut ends = Vec::new();
            if a.start == Terminal::Node(k) {
                ends.push(a.points.to_vec());
            }
            if a.end == Terminal::Node(k) {
                ends.push(a.points.iter().rev().copied().collect());
            }
            for pts in ends {
                let p = pts.iter().find(|p| p.dist(c) >= radius).or(pts.last()).copied().unwrap_or(c);
                let t = (p.y - c.y).atan2(p.x - c.x);
                out.push(if t < 0.0 { t + core::f64::consts::TAU } else { t });
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Radius of the disk that replaces a critical point, in cells.
pub const NODE_DISK_CELLS: f64 = 2.0;
/// A seed must lie this many cells from the soup.
pub const SEED_REACH_CELLS: f64 = 2.0;

fn boundary_flag(mask: &Mask, p: Point) -> Terminal {
    let g = mask.grid();
    let h = g.h();
    let c = g.nearest_node(p);
    let (ci, cj) = g.ij(c);
    let mut best: Option<(f64, NodeKind)> = None;
    for dj in -2isize..=2 {
        for di in -2isize..=2 {
            let (i, j) = (ci as isize + di, cj as isize + dj);
            if i < 0 || j < 0 || i >= g.n as isize || j >= g.n as isize {
                continue;
            }
            let k = g.index(i as usize, j as usize);
            let kind = mask.kind(k);
            let d = g.point(k).dist(p);
            if kind.is_boundary() && d <= 2.0 * h && best.is_none_or(|b| d < b.0) {
                best = Some((d, kind));
            }
        }
    }
    match best {
        Some((_, NodeKind::OuterBoundary)) => Terminal::OuterBoundary,
        Some((_, NodeKind::HoleBoundary(k))) => Terminal::HoleBoundary(k),
        _ => Terminal::OpenEnd,
    }
}

/// Stitches the component of the soup nearest to `seed` into a graph.
/// Points of `critical` within `2h` of the component become nodes.
pub fn component_through(soup: &SegmentSoup, seed: Point, critical: &[Point], mask: &Mask) -> Result<LevelSetComponent> {
    let h = soup.h;
    let nearest = soup
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| (point_segment_distance(seed, soup.points[s.a], soup.points[s.b]), k))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let start = match nearest {
        Some((d, k)) if d <= SEED_REACH_CELLS * h => k,
        _ => {
            return Err(Error::Domain(format!(
                "no level-{} segment within {}h of ({}, {})",
                soup.level, SEED_REACH_CELLS, seed.x, seed.y
            )))
        }
    };

    let radius = NODE_DISK_CELLS * h;
    let mut candidates: Vec<Point> = Vec::new();
    for &c in critical {
        if !candidates.iter().any(|p| p.dist(c) <= 2.0 * radius) {
            candidates.push(c);
        }
    }
    let disk_of = |p: Point| candidates.iter().position(|c| c.dist(p) <= radius);

    // connected component over the soup, with each disk merged to a point
    let nv = soup.points.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (k, s) in soup.segments.iter().enumerate() {
        adj[s.a].push((k, s.b));
        adj[s.b].push((k, s.a));
    }
    let mut disk_members: Vec<Vec<usize>> = vec![Vec::new(); candidates.len()];
    for (k, p) in soup.points.iter().enumerate() {
        if let Some(d) = disk_of(*p) {
            disk_members[d].push(k);
        }
    }
    let mut disk_reached = vec![false; candidates.len()];
    let mut in_comp = vec![false; nv];
    let mut stack = vec![soup.segments[start].a];
    in_comp[soup.segments[start].a] = true;
    while let Some(u) = stack.pop() {
        let mut next: Vec<usize> = adj[u].iter().map(|x| x.1).collect();
        if let Some(d) = disk_of(soup.points[u]) {
            if !disk_reached[d] {
                disk_reached[d] = true;
                next.extend_from_slice(&disk_members[d]);
            }
        }
        for w in next {
            if !in_comp[w] {
                in_comp[w] = true;
                stack.push(w);
            }
        }
    }

    // node disks: the candidates the component reaches
    let mut node_points: Vec<Point> = Vec::new();
    let mut node_critical: Vec<bool> = Vec::new();
    for (d, &c) in candidates.iter().enumerate() {
        if disk_reached[d] {
            node_points.push(c);
            node_critical.push(true);
        }
    }
    // contracted graph: vertex id = soup vertex or NODE_BASE + disk
    const NODE_BASE: usize = usize::MAX / 2;
    let rep = |k: usize| -> usize {
        node_points.iter().position(|p| p.dist(soup.points[k]) <= radius).map_or(k, |d| NODE_BASE + d)
    };
    let comp_vertices: Vec<usize> = (0..nv).filter(|&k| in_comp[k]).collect();
    let reps: BTreeMap<usize, usize> = comp_vertices.iter().map(|&k| (k, rep(k))).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for s in &soup.segments {
        if !in_comp[s.a] {
            continue;
        }
        let (a, b) = (reps[&s.a], reps[&s.b]);
        if a == b && a >= NODE_BASE {
            continue;
        }
        edges.push((a, b));
    }
    let mut gadj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        gadj.entry(a).or_default().push((k, b));
        gadj.entry(b).or_default().push((k, a));
    }
    for d in 0..node_points.len() {
        gadj.entry(NODE_BASE + d).or_default();
    }
    let disks = node_points.clone();
    let pos = |v: usize| if v >= NODE_BASE { disks[v - NODE_BASE] } else { soup.points[v] };

    // special vertices: disks and degree != 2
    let mut terminal_of: BTreeMap<usize, Terminal> = BTreeMap::new();
    let mut junctions: Vec<usize> = Vec::new();
    for (&v, list) in &gadj {
        if v >= NODE_BASE {
            terminal_of.insert(v, Terminal::Node(v - NODE_BASE));
        } else if list.len() == 1 {
            terminal_of.insert(v, boundary_flag(mask, soup.points[v]));
        } else if list.len() != 2 {
            junctions.push(v);
        }
    }
    for v in junctions {
        terminal_of.insert(v, Terminal::Node(node_points.len()));
        node_points.push(soup.points[v]);
        node_critical.push(false);
    }

    let mut used = vec![false; edges.len()];
    let mut arcs: Vec<LevelArc> = Vec::new();
    let walk = |from: usize, first: usize, used: &mut Vec<bool>, stop: &dyn Fn(usize) -> bool| -> (Vec<usize>, usize) {
        let mut path = vec![from];
        let (mut e, mut cur) = (first, from);
        loop {
            used[e] = true;
            let (a, b) = edges[e];
            let next = if a == cur { b } else { a };
            path.push(next);
            if stop(next) {
                return (path, next);
            }
            let Some(&(ne, _)) = gadj[&next].iter().find(|(k, _)| !used[*k]) else {
                return (path, next);
            };
            cur = next;
            e = ne;
        }
    };
    let specials: Vec<usize> = terminal_of.keys().copied().collect();
    for &s in &specials {
        let incident: Vec<usize> = gadj[&s].iter().map(|x| x.0).collect();
        for e in incident {
            if used[e] {
                continue;
            }
            let (path, end) = walk(s, e, &mut used, &|v| terminal_of.contains_key(&v));
            let t_end = terminal_of.get(&end).copied().unwrap_or(Terminal::OpenEnd);
            arcs.push(LevelArc { points: path.iter().map(|&v| pos(v)).collect(), start: terminal_of[&s], end: t_end });
        }
    }
    // loops without a special vertex get one subdivision vertex
    for e in 0..edges.len() {
        if used[e] {
            continue;
        }
        let v0 = edges[e].0.min(edges[e].1);
        let first = gadj[&v0].iter().find(|(k, _)| !used[*k]).map(|x| x.0).unwrap_or(e);
        let node = node_points.len();
        node_points.push(pos(v0));
        node_critical.push(false);
        let (path, _) = walk(v0, first, &mut used, &|v| v == v0);
        arcs.push(LevelArc { points: path.iter().map(|&v| pos(v)).collect(), start: Terminal::Node(node), end: Terminal::Node(node) });
    }
    // drop slivers: loops at a disk that never leave its neighbourhood
    arcs.retain(|a| {
        !(a.start == a.end
            && matches!(a.start, Terminal::Node(k) if node_critical[k] && a.points.iter().all(|p| p.dist(node_points[k]) <= radius + 1.5 * h)))
    });
    Ok(LevelSetComponent { level: soup.level, seed, arcs, node_points, node_critical, h })
}

/// A bounded complementary region of a traced component.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub point: Point,
    /// Holes whose representative points lie in this face.
    pub holes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarGraph {
    pub v: usize,
    pub e: usize,
    /// Faces including the unbounded one(s).
    pub f: usize,
    /// Degrees of the nodes followed by the degree-1 terminals.
    pub degrees: Vec<usize>,
    pub node_count: usize,
    pub terminal_count: usize,
    pub bounded_faces: Vec<Face>,
    /// Regions into which the component (extended to the boundary curves)
    /// cuts the domain itself.
    pub domain_regions: usize,
}

/// Supersampled raster of the grid bbox, pixel centres at half-node spacing.
struct Raster {
    m: usize,
    x0: f64,
    y0: f64,
    step: f64,
    wall: Vec<bool>,
}

impl Raster {
    fn new(mask: &Mask) -> Self {
        let g = mask.grid();
        let m = 2 * (g.n - 1) + 1;
        Raster { m, x0: g.xmin, y0: g.ymin, step: 0.5 * g.h(), wall: vec![false; m * m] }
    }

    fn pixel(&self, p: Point) -> Option<usize> {
        let a = ((p.x - self.x0) / self.step).round();
        let b = ((p.y - self.y0) / self.step).round();
        if a < 0.0 || b < 0.0 || a >= self.m as f64 || b >= self.m as f64 {
            return None;
        }
        Some(b as usize * self.m + a as usize)
    }

    fn centre(&self, k: usize) -> Point {
        Point::new(self.x0 + (k % self.m) as f64 * self.step, self.y0 + (k / self.m) as f64 * self.step)
    }

    /// Marks every pixel met by the segment (dense sampling keeps the trace
    /// 8-connected, which blocks a 4-connected fill).
    fn draw(&mut self, a: Point, b: Point) {
        let len = a.dist(b);
        let steps = ((len / (0.25 * self.step)).ceil() as usize).max(1);
        for s in 0..=steps {
            if let Some(k) = self.pixel(a.lerp(b, s as f64 / steps as f64)) {
                self.wall[k] = true;
            }
        }
    }

    /// Marks the pixels of a closed disk.
    fn fill_disk(&mut self, c: Point, r: f64) {
        let reach = (r / self.step).ceil() as isize;
        let Some(k) = self.pixel(c) else { return };
        let (ca, cb) = ((k % self.m) as isize, (k / self.m) as isize);
        for b in cb - reach..=cb + reach {
            for a in ca - reach..=ca + reach {
                if a < 0 || b < 0 || a >= self.m as isize || b >= self.m as isize {
                    continue;
                }
                let q = b as usize * self.m + a as usize;
                if self.centre(q).dist(c) <= r {
                    self.wall[q] = true;
                }
            }
        }
    }

    /// 4-connected regions of open pixels satisfying `allowed`; returns
    /// region label per pixel (`usize::MAX` for walls) and region count.
    fn regions(&self, allowed: impl Fn(usize) -> bool) -> (Vec<usize>, usize) {
        let m = self.m;
        let mut label = vec![usize::MAX; m * m];
        let mut count = 0;
        for s in 0..m * m {
            if self.wall[s] || label[s] != usize::MAX || !allowed(s) {
                continue;
            }
            label[s] = count;
            let mut stack = vec![s];
            while let Some(k) = stack.pop() {
                let (a, b) = (k % m, k / m);
                let mut push = |q: usize| {
                    if !self.wall[q] && label[q] == usize::MAX && allowed(q) {
                        label[q] = count;
                        stack.push(q);
                    }
                };
                if a > 0 {
                    push(k - 1);
                }
                if a + 1 < m {
                    push(k + 1);
                }
                if b > 0 {
                    push(k - m);
                }
                if b + 1 < m {
                    push(k + m);
                }
            }
            count += 1;
        }
        (label, count)
    }
}

/// Planar graph of a component; `hole_points` are representative interior
/// points of the holes.
pub fn build_graph(component: &LevelSetComponent, mask: &Mask, hole_points: &[Point]) -> PlanarGraph {
    let node_count = component.node_points.len();
    let terminals = component.terminals();
    let mut degrees: Vec<usize> = (0..node_count).map(|k| component.node_degree(k)).collect();
    degrees.extend(core::iter::repeat_n(1, terminals.len()));

    let mut raster = Raster::new(mask);
    for a in &component.arcs {
        for w in a.points.windows(2) {
            raster.draw(w[0], w[1]);
        }
    }
    // A node is a point, so walling its disk leaves the faces unchanged while
    // removing pixel pockets pinched off between converging arcs.
    for &c in &component.node_points {
        raster.fill_disk(c, NODE_DISK_CELLS * component.h);
    }
    let m = raster.m;
    let (label, count) = raster.regions(|_| true);
    let mut touches_border = vec![false; count];
    for k in 0..m * m {
        let (a, b) = (k % m, k / m);
        if (a == 0 || b == 0 || a + 1 == m || b + 1 == m) && label[k] != usize::MAX {
            touches_border[label[k]] = true;
        }
    }
    let locate = |p: Point| -> Option<usize> {
        let k = raster.pixel(p)?;
        if label[k] != usize::MAX {
            return Some(label[k]);
        }
        // representative point on a wall pixel: take an open neighbour
        [k.wrapping_sub(1), k + 1, k.wrapping_sub(m), k + m].into_iter().find(|&q| q < m * m && label[q] != usize::MAX).map(|q| label[q])
    };
    let hole_regions: Vec<Option<usize>> = hole_points.iter().map(|&p| locate(p)).collect();
    let mut bounded_faces = Vec::new();
    for r in 0..count {
        if touches_border[r] {
            continue;
        }
        let rep = (0..m * m).find(|&k| label[k] == r).map(|k| raster.centre(k)).unwrap_or_default();
        let holes = (0..hole_points.len()).filter(|&h| hole_regions[h] == Some(r)).collect();
        bounded_faces.push(Face { point: rep, holes });
    }

    // domain regions: extend loose ends to the nearest boundary curve point
    let mut walls = Raster::new(mask);
    walls.wall.clone_from(&raster.wall);
    for &(arc, at_end) in &terminals {
        let pts = &component.arcs[arc].points;
        let p = if at_end { *pts.last().unwrap_or(&component.seed) } else { pts[0] };
        let target = mask
            .links()
            .iter()
            .map(|l| l.point)
            .chain(mask.anchors().iter().map(|a| a.point))
            .min_by(|a, b| a.dist(p).total_cmp(&b.dist(p)));
        if let Some(t) = target {
            if t.dist(p) <= 3.0 * component.h {
                walls.draw(p, t);
            }
        }
    }
    let g = mask.grid();
    let in_domain = |k: usize| mask.in_domain(g.nearest_node(walls.centre(k)));
    let (_, domain_regions) = walls.regions(in_domain);

    PlanarGraph {
        v: node_count + terminals.len(),
        e: component.arcs.len(),
        f: count,
        degrees,
        node_count,
        terminal_count: terminals.len(),
        bounded_faces,
        domain_regions,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Check {
    pub fn passed(&self) -> bool {
        !matches!(self, Check::Fail(_))
    }

    fn from(ok: bool, msg: impl FnOnce() -> String) -> Check {
        if ok {
            Check::Pass
        } else {
            Check::Fail(msg())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub handshake: Check,
    pub euler: Check,
    pub node_degrees: Check,
    pub bounded_faces: Check,
    pub faces_contain_holes: Check,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.entries().iter().all(|(_, c)| c.passed())
    }

    pub fn entries(&self) -> [(&'static str, &Check); 5] {
        [
            ("handshake", &self.handshake),
            ("euler", &self.euler),
            ("node_degrees", &self.node_degrees),
            ("bounded_faces", &self.bounded_faces),
            ("faces_contain_holes", &self.faces_contain_holes),
        ]
    }
}

/// Structural checks. `capacitor_dendrone` enables the face checks that hold
/// for the critical level set of a two-constant capacitor potential.
pub fn structure_checks(graph: &PlanarGraph, component: &LevelSetComponent, capacitor_dendrone: bool) -> CheckReport {
    let sum: usize = graph.degrees.iter().sum();
    let handshake = Check::from(sum == 2 * graph.e, || format!("degree sum {sum} != 2E = {}", 2 * graph.e));
    let expected = graph.e as i64 - graph.v as i64 + 2;
    let euler = Check::from(graph.f as i64 == expected, || format!("F = {} but E - V + 2 = {expected}", graph.f));
    let mut bad = Vec::new();
    for k in 0..graph.node_count {
        let d = graph.degrees[k];
        let ok = if component.node_critical[k] { d.is_multiple_of(2) && d >= 4 } else { d == 2 };
        if !ok {
            let p = component.node_points[k];
            bad.push(format!("node ({:.4}, {:.4}) degree {d}", p.x, p.y));
        }
    }
    let node_degrees = Check::from(bad.is_empty(), || bad.join("; "));
    let has_critical = component.node_critical.iter().any(|&c| c);
    let (bounded_faces, faces_contain_holes) = if capacitor_dendrone && has_critical {
        let b = graph.bounded_faces.len();
        let empty: Vec<String> = graph
            .bounded_faces
            .iter()
            .filter(|f| f.holes.is_empty())
            .map(|f| format!("({:.4}, {:.4})", f.point.x, f.point.y))
            .collect();
        (
            Check::from(b >= 2, || format!("{b} bounded faces, need at least 2")),
            Check::from(empty.is_empty(), || format!("faces without a hole at {}", empty.join(", "))),
        )
    } else {
        let why = if has_critical { "not a capacitor dendrone" } else { "no critical node" };
        (Check::Skipped(why.into()), Check::Skipped(why.into()))
    };
    CheckReport { handshake, euler, node_degrees, bounded_faces, faces_contain_holes }
}

/// Boundary nodes in which one loose end of an arc terminates.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSet {
    pub arc: usize,
    pub at_end: bool,
    pub curve: CurveId,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSets {
    pub sets: Vec<LimitSet>,
    pub disjoint: bool,
}

/// Boundary continua reached by the component: for every boundary terminal,
/// the boundary nodes of its curve within `2h` of the arc's tail.
pub fn limit_sets(component: &LevelSetComponent, mask: &Mask) -> LimitSets {
    let g = mask.grid();
    let h = g.h();
    let mut sets = Vec::new();
    for (arc, at_end) in component.terminals() {
        let a = &component.arcs[arc];
        let (flag, tail) = if at_end { (a.end, *a.points.last().unwrap_or(&component.seed)) } else { (a.start, a.points[0]) };
        let curve = match flag {
            Terminal::OuterBoundary => CurveId::Outer,
            Terminal::HoleBoundary(k) => CurveId::Hole(k),
            _ => continue,
        };
        let want = match curve {
            CurveId::Outer => NodeKind::OuterBoundary,
            CurveId::Hole(k) => NodeKind::HoleBoundary(k),
        };
        let (ci, cj) = g.ij(g.nearest_node(tail));
        let mut nodes = Vec::new();
        for dj in -3isize..=3 {
            for di in -3isize..=3 {
                let (i, j) = (ci as isize + di, cj as isize + dj);
                if i < 0 || j < 0 || i >= g.n as isize || j >= g.n as isize {
                    continue;
                }
                let k = g.index(i as usize, j as usize);
                if mask.kind(k) == want && g.point(k).dist(tail) <= 2.0 * h {
                    nodes.push(k);
                }
            }
        }
        nodes.sort_unstable();
        sets.push(LimitSet { arc, at_end, curve, nodes });
    }
    let mut disjoint = true;
    for (x, s) in sets.iter().enumerate() {
        for t in &sets[x + 1..] {
            if s.nodes.iter().any(|k| t.nodes.binary_search(k).is_ok()) {
                disjoint = false;
            }
        }
    }
    LimitSets { sets, disjoint }
}
