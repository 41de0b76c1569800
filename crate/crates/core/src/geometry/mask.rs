//! Rasterization of a capacitor onto a uniform grid.
//!
//! Nodes strictly inside the dielectric region are in the domain. Domain
//! nodes with a 4-neighbour outside are boundary nodes; each such grid link
//! records where it crosses the boundary curve so the solvers can impose the
//! Dirichlet data at the curve itself rather than at the node.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use super::{CapacitorSpec, Curve, GridSpec, Point};
use crate::{Error, Result};

/// Smallest admissible link fraction; keeps the closure weight `1/theta` bounded.
pub const MIN_THETA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Exterior,
    Interior,
    OuterBoundary,
    HoleBoundary(usize),
}

impl NodeKind {
    pub fn in_domain(self) -> bool {
        self != NodeKind::Exterior
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, NodeKind::OuterBoundary | NodeKind::HoleBoundary(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveId {
    Outer,
    Hole(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    East,
    West,
    North,
    South,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::West, Dir::North, Dir::South];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
            Dir::North => (0, 1),
            Dir::South => (0, -1),
        }
    }
}

/// A grid link from a domain node that crosses a boundary curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingLink {
    pub node: usize,
    pub dir: Dir,
    /// Distance from the node to the crossing, in units of `h`, in `[MIN_THETA, 1]`.
    pub theta: f64,
    pub point: Point,
    pub curve: CurveId,
    /// Arc-length parameter of the crossing along its curve.
    pub param: f64,
}

/// Nearest curve point of a boundary node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchor {
    pub node: usize,
    pub point: Point,
    pub curve: CurveId,
    pub param: f64,
}

/// Per-node classification of a grid, with the boundary crossing geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    grid: GridSpec,
    kinds: Vec<NodeKind>,
    links: Vec<CrossingLink>,
    anchors: Vec<Anchor>,
    holes: usize,
}

impl Mask {
    /// Whole grid as the domain: the outermost ring is boundary, no crossings.
    pub fn full(grid: GridSpec) -> Self {
        let n = grid.n;
        let mut kinds = vec![NodeKind::Interior; grid.len()];
        let mut anchors = Vec::new();
        for idx in 0..grid.len() {
            let (i, j) = grid.ij(idx);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                kinds[idx] = NodeKind::OuterBoundary;
                anchors.push(Anchor { node: idx, point: grid.point(idx), curve: CurveId::Outer, param: 0.0 });
            }
        }
        Mask { grid, kinds, links: Vec::new(), anchors, holes: 0 }
    }

    /// Mask from an in-domain predicate; domain nodes next to non-domain
    /// nodes (or the grid edge) become outer boundary nodes without crossings.
    pub fn from_predicate(grid: GridSpec, inside: impl Fn(Point) -> bool) -> Self {
        let n = grid.n;
        let dom: Vec<bool> = (0..grid.len()).map(|k| inside(grid.point(k))).collect();
        let mut kinds = vec![NodeKind::Exterior; grid.len()];
        let mut anchors = Vec::new();
        for idx in 0..grid.len() {
            if !dom[idx] {
                continue;
            }
            let (i, j) = grid.ij(idx);
            let edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            let open = edge
                || Dir::ALL.iter().any(|&d| {
                    let (di, dj) = d.offset();
                    !dom[grid.index((i as isize + di) as usize, (j as isize + dj) as usize)]
                });
            kinds[idx] = if open {
                anchors.push(Anchor { node: idx, point: grid.point(idx), curve: CurveId::Outer, param: 0.0 });
                NodeKind::OuterBoundary
            } else {
                NodeKind::Interior
            };
        }
        Mask { grid, kinds, links: Vec::new(), anchors, holes: 0 }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    pub fn in_domain(&self, idx: usize) -> bool {
        self.kinds[idx].in_domain()
    }

    pub fn links(&self) -> &[CrossingLink] {
        &self.links
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn hole_count(&self) -> usize {
        self.holes
    }

    /// Neighbour in direction `d`, if inside the grid.
    pub fn neighbor(&self, idx: usize, d: Dir) -> Option<usize> {
        let (i, j) = self.grid.ij(idx);
        let (di, dj) = d.offset();
        let (ni, nj) = (i as isize + di, j as isize + dj);
        let n = self.grid.n as isize;
        if ni < 0 || nj < 0 || ni >= n || nj >= n {
            None
        } else {
            Some(self.grid.index(ni as usize, nj as usize))
        }
    }

    /// Neighbour in direction `d` when it belongs to the domain.
    pub fn domain_neighbor(&self, idx: usize, d: Dir) -> Option<usize> {
        self.neighbor(idx, d).filter(|&k| self.in_domain(k))
    }

    pub fn count(&self, pred: impl Fn(NodeKind) -> bool) -> usize {
        self.kinds.iter().filter(|&&k| pred(k)).count()
    }

    /// Chebyshev distance (in nodes) from every node to the nearest boundary node.
    pub fn boundary_distance(&self) -> Vec<u32> {
        let n = self.grid.n;
        let mut dist = vec![u32::MAX; self.grid.len()];
        let mut queue = VecDeque::new();
        for (idx, k) in self.kinds.iter().enumerate() {
            if k.is_boundary() {
                dist[idx] = 0;
                queue.push_back(idx);
            }
        }
        while let Some(idx) = queue.pop_front() {
            let (i, j) = self.grid.ij(idx);
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                        continue;
                    }
                    let k = self.grid.index(ni as usize, nj as usize);
                    if dist[k] == u32::MAX {
                        dist[k] = dist[idx] + 1;
                        queue.push_back(k);
                    }
                }
            }
        }
        dist
    }

    /// Number of 4-connected components among nodes satisfying `pred`.
    pub fn components(&self, pred: impl Fn(NodeKind) -> bool) -> usize {
        self.count_components(pred, false)
    }

    /// Number of 8-connected components; the right notion for boundary
    /// layers, which follow a curve diagonally.
    pub fn components8(&self, pred: impl Fn(NodeKind) -> bool) -> usize {
        self.count_components(pred, true)
    }

    fn count_components(&self, pred: impl Fn(NodeKind) -> bool, diagonal: bool) -> usize {
        let n = self.grid.n as isize;
        let mut seen = vec![false; self.grid.len()];
        let mut count = 0;
        for start in 0..self.grid.len() {
            if seen[start] || !pred(self.kinds[start]) {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(idx) = stack.pop() {
                let (i, j) = self.grid.ij(idx);
                for dj in -1isize..=1 {
                    for di in -1isize..=1 {
                        if (di == 0 && dj == 0) || (!diagonal && di != 0 && dj != 0) {
                            continue;
                        }
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if ni < 0 || nj < 0 || ni >= n || nj >= n {
                            continue;
                        }
                        let k = self.grid.index(ni as usize, nj as usize);
                        if !seen[k] && pred(self.kinds[k]) {
                            seen[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Crossings of one curve with the grid rows (`y = y_j`) or columns (`x = x_i`).
struct Crossings {
    /// per line: (coordinate along the line, arc-length parameter), sorted
    lines: Vec<Vec<(f64, f64)>>,
}

impl Crossings {
    fn build(curve: &Curve, grid: &GridSpec, rows: bool) -> Self {
        let n = grid.n;
        let h = grid.h();
        let lo0 = if rows { grid.ymin } else { grid.xmin };
        let mut lines = vec![Vec::new(); n];
        for k in 0..curve.num_segments() {
            let (a, b) = curve.segment(k);
            let (ua, va, ub, vb) = if rows { (a.y, a.x, b.y, b.x) } else { (a.x, a.y, b.x, b.y) };
            let (lo, hi) = (ua.min(ub), ua.max(ub));
            if lo == hi {
                continue;
            }
            let first = (((lo - lo0) / h).floor() as isize - 1).max(0) as usize;
            let last = ((((hi - lo0) / h).ceil() as isize) + 1).min(n as isize - 1);
            if last < 0 {
                continue;
            }
            for l in first..=last as usize {
                let u = lo0 + l as f64 * h;
                if (ua <= u && u < ub) || (ub <= u && u < ua) {
                    let s = (u - ua) / (ub - ua);
                    lines[l].push((va + s * (vb - va), curve.param_at(k, s)));
                }
            }
        }
        for l in &mut lines {
            l.sort_by(|p, q| p.0.total_cmp(&q.0));
        }
        Crossings { lines }
    }

    /// Crossing on line `l` with coordinate in `[a, b]` nearest to `from`.
    fn nearest_in(&self, l: usize, a: f64, b: f64, from: f64) -> Option<(f64, f64)> {
        let (lo, hi) = (a.min(b), a.max(b));
        self.lines[l]
            .iter()
            .filter(|c| c.0 >= lo && c.0 <= hi)
            .min_by(|p, q| (p.0 - from).abs().total_cmp(&(q.0 - from).abs()))
            .copied()
    }
}

/// Classify grid nodes against the capacitor and record boundary crossings.
pub fn rasterize(spec: &CapacitorSpec, grid: &GridSpec) -> Result<Mask> {
    let n = grid.n;
    let h = grid.h();
    let (x0, y0, x1, y1) = spec.outer.bbox();
    let tol = 1e-9 * h;
    if x0 - grid.xmin < 2.0 * h - tol
        || y0 - grid.ymin < 2.0 * h - tol
        || grid.xmax - x1 < 2.0 * h - tol
        || grid.ymax - y1 < 2.0 * h - tol
    {
        return Err(Error::InvalidGeometry(
            "grid bbox must contain the outer curve with a margin of 2h".into(),
        ));
    }
    for (k, hole) in spec.holes.iter().enumerate() {
        let (a, b, c, d) = hole.bbox();
        if (c - a).max(d - b) < 4.0 * h {
            return Err(Error::DegenerateGeometry(format!(
                "hole {k} has diameter below 4h = {}",
                4.0 * h
            )));
        }
    }

    let curves: Vec<(&Curve, CurveId)> = core::iter::once((&spec.outer, CurveId::Outer))
        .chain(spec.holes.iter().enumerate().map(|(k, c)| (c, CurveId::Hole(k))))
        .collect();
    let rows: Vec<Crossings> = curves.iter().map(|(c, _)| Crossings::build(c, grid, true)).collect();
    let cols: Vec<Crossings> = curves.iter().map(|(c, _)| Crossings::build(c, grid, false)).collect();

    // inside[c][idx] by crossing parity along each row
    let mut inside = vec![vec![false; grid.len()]; curves.len()];
    for (c, cr) in rows.iter().enumerate() {
        for j in 0..n {
            let line = &cr.lines[j];
            let mut p = 0;
            for i in 0..n {
                let x = grid.x(i);
                while p < line.len() && line[p].0 < x {
                    p += 1;
                }
                inside[c][grid.index(i, j)] = p % 2 == 1;
            }
        }
    }
    let in_domain: Vec<bool> = (0..grid.len())
        .map(|idx| inside[0][idx] && !inside[1..].iter().any(|s| s[idx]))
        .collect();

    let mut kinds = vec![NodeKind::Exterior; grid.len()];
    let mut links = Vec::new();
    for idx in 0..grid.len() {
        if !in_domain[idx] {
            continue;
        }
        let (i, j) = grid.ij(idx);
        if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
            return Err(Error::InvalidGeometry("domain touches the grid edge".into()));
        }
        let mut node_curve: Option<CurveId> = None;
        for d in Dir::ALL {
            let (di, dj) = d.offset();
            let nb = grid.index((i as isize + di) as usize, (j as isize + dj) as usize);
            if in_domain[nb] {
                continue;
            }
            let differing: Vec<usize> =
                (0..curves.len()).filter(|&c| inside[c][idx] != inside[c][nb]).collect();
            if differing.len() != 1 {
                return Err(Error::DegenerateGeometry(format!(
                    "link at node ({i}, {j}) crosses {} boundary curves",
                    differing.len()
                )));
            }
            let c = differing[0];
            let curve_id = curves[c].1;
            match node_curve {
                Some(prev) if prev != curve_id => {
                    return Err(Error::DegenerateGeometry(format!(
                        "node ({i}, {j}) is adjacent to two boundary components; \
                         a hole is within one cell of another boundary"
                    )));
                }
                _ => node_curve = Some(curve_id),
            }
            let here = grid.point(idx);
            let there = grid.point(nb);
            let hit = if dj == 0 {
                rows[c].nearest_in(j, here.x, there.x, here.x).map(|(x, t)| (Point::new(x, here.y), t))
            } else {
                cols[c].nearest_in(i, here.y, there.y, here.y).map(|(y, t)| (Point::new(here.x, y), t))
            };
            let (point, param) = match hit {
                Some(found) => found,
                None => {
                    let mid = here.lerp(there, 0.5);
                    (mid, curves[c].0.nearest(mid).1)
                }
            };
            let theta = (point.dist(here) / h).clamp(MIN_THETA, 1.0);
            links.push(CrossingLink { node: idx, dir: d, theta, point, curve: curve_id, param });
        }
        kinds[idx] = match node_curve {
            None => NodeKind::Interior,
            Some(CurveId::Outer) => NodeKind::OuterBoundary,
            Some(CurveId::Hole(k)) => NodeKind::HoleBoundary(k),
        };
    }

    let anchors = kinds
        .iter()
        .enumerate()
        .filter_map(|(idx, &k)| {
            let (curve, id) = match k {
                NodeKind::OuterBoundary => (&spec.outer, CurveId::Outer),
                NodeKind::HoleBoundary(h) => (&spec.holes[h], CurveId::Hole(h)),
                _ => return None,
            };
            let (point, param) = curve.nearest(grid.point(idx));
            Some(Anchor { node: idx, point, curve: id, param })
        })
        .collect();

    let mask = Mask { grid: *grid, kinds, links, anchors, holes: spec.holes.len() };
    let interior = mask.count(|k| k == NodeKind::Interior);
    if interior == 0 {
        return Err(Error::DegenerateGeometry("no interior nodes".into()));
    }
    if mask.components(|k| k == NodeKind::Interior) != 1 {
        return Err(Error::DegenerateGeometry(
            "interior nodes are not 4-connected; refine the grid".into(),
        ));
    }
    for k in 0..spec.holes.len() {
        if mask.count(|kind| kind == NodeKind::HoleBoundary(k)) == 0 {
            return Err(Error::DegenerateGeometry(format!("hole {k} has no boundary nodes")));
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryMap;
    use crate::C64;

    fn annulus(r: f64, big: f64) -> CapacitorSpec {
        CapacitorSpec::new(
            Curve::circle(Point::default(), big, 512).unwrap(),
            vec![Curve::circle(Point::default(), r, 256).unwrap()],
            vec![C64::new(1.0, 0.0)],
            BoundaryMap::constant(C64::new(0.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn annulus_ring() {
        let spec = annulus(1.0, 2.0);
        let grid = GridSpec::square(0.0, 0.0, 2.2, 65).unwrap();
        let mask = rasterize(&spec, &grid).unwrap();
        assert_eq!(mask.components(|k| k == NodeKind::Interior), 1);
        assert_eq!(mask.components8(|k| k == NodeKind::OuterBoundary), 1);
        assert_eq!(mask.components8(|k| k == NodeKind::HoleBoundary(0)), 1);
        assert!(mask.count(|k| k == NodeKind::HoleBoundary(0)) > 0);
        // interior nodes never touch the exterior
        for idx in 0..grid.len() {
            if mask.kind(idx) == NodeKind::Interior {
                for d in Dir::ALL {
                    assert!(mask.in_domain(mask.neighbor(idx, d).unwrap()));
                }
            }
        }
        // every boundary node owns at least one crossing, theta in range
        for l in mask.links() {
            assert!(mask.kind(l.node).is_boundary());
            assert!(l.theta >= MIN_THETA && l.theta <= 1.0);
            let r = l.point.norm();
            match l.curve {
                CurveId::Outer => assert!((r - 2.0).abs() < 1e-3),
                CurveId::Hole(0) => assert!((r - 1.0).abs() < 1e-3),
                _ => unreachable!(),
            }
        }
        assert_eq!(mask.anchors().len(), mask.count(NodeKind::is_boundary));
    }

    #[test]
    fn square_without_holes() {
        let outer = Curve::closed(vec![
            Point::new(-2.0, -2.0),
            Point::new(2.0, -2.0),
            Point::new(2.0, 2.0),
            Point::new(-2.0, 2.0),
        ])
        .unwrap();
        let spec = CapacitorSpec::new(outer, vec![], vec![], BoundaryMap::constant(C64::new(0.0, 0.0))).unwrap();
        // nodes fall exactly on the square; h = 0.15625
        let grid = GridSpec::square(0.0, 0.0, 2.5, 33).unwrap();
        let mask = rasterize(&spec, &grid).unwrap();
        assert_eq!(mask.components(|k| k == NodeKind::Interior), 1);
        assert_eq!(mask.components8(NodeKind::is_boundary), 1);
        for idx in 0..grid.len() {
            let p = grid.point(idx);
            if p.x.abs() < 2.0 - 1e-9 && p.y.abs() < 2.0 - 1e-9 {
                assert!(mask.in_domain(idx));
            }
        }
    }

    #[test]
    fn hole_near_outer_is_rejected() {
        let spec = CapacitorSpec::new(
            Curve::circle(Point::default(), 2.0, 256).unwrap(),
            vec![Curve::circle(Point::new(1.45, 0.0), 0.5, 128).unwrap()],
            vec![C64::new(1.0, 0.0)],
            BoundaryMap::constant(C64::new(0.0, 0.0)),
        )
        .unwrap();
        let grid = GridSpec::square(0.0, 0.0, 2.4, 33).unwrap();
        assert!(matches!(rasterize(&spec, &grid), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn tiny_hole_is_rejected() {
        let spec = annulus(0.05, 2.0);
        let grid = GridSpec::square(0.0, 0.0, 2.4, 33).unwrap();
        assert!(matches!(rasterize(&spec, &grid), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn margin_is_enforced() {
        let spec = annulus(1.0, 2.0);
        let grid = GridSpec::square(0.0, 0.0, 2.01, 65).unwrap();
        assert!(matches!(rasterize(&spec, &grid), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn resolution_monotone() {
        let spec = annulus(1.0, 2.0);
        let coarse_grid = GridSpec::square(0.0, 0.0, 2.4, 33).unwrap();
        let fine_grid = coarse_grid.refined();
        let coarse = rasterize(&spec, &coarse_grid).unwrap();
        let fine = rasterize(&spec, &fine_grid).unwrap();
        let dist = coarse.boundary_distance();
        for idx in 0..coarse_grid.len() {
            // eroded by one cell
            if coarse.kind(idx) == NodeKind::Interior && dist[idx] >= 2 {
                let (i, j) = coarse_grid.ij(idx);
                assert_eq!(fine.kind(fine_grid.index(2 * i, 2 * j)), NodeKind::Interior);
            }
        }
    }
}
