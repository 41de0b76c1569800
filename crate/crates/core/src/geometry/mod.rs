//! Capacitor geometry: curves, boundary maps, grids and the rasterized mask.

mod boundary;
mod mask;
mod monotone;
mod starlike;

pub use boundary::{boundary_values, BoundaryData, ComplexBoundary, ScalarBoundary};
pub use mask::{rasterize, Anchor, CrossingLink, CurveId, Dir, Mask, NodeKind};
pub use monotone::{is_monotone, is_monotone_with, segment_image_check, SegmentDiagnostic};
pub use starlike::{is_starlike, StarlikeReport};

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::{Error, Result, C64};

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn to_complex(self) -> C64 {
        C64::new(self.x, self.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl From<C64> for Point {
    fn from(z: C64) -> Self {
        Point::new(z.re, z.im)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Closest point to `p` on segment `a`-`b`, returned as the fraction along it.
pub(crate) fn project_on_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(d) / len2).clamp(0.0, 1.0)
}

/// Do the closed segments `a0-a1` and `b0-b1` share a point?
pub(crate) fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        (q - p).cross(r - p)
    }
    fn on_seg(p: Point, q: Point, r: Point) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_seg(b0, b1, a0))
        || (d2 == 0.0 && on_seg(b0, b1, a1))
        || (d3 == 0.0 && on_seg(a0, a1, b0))
        || (d4 == 0.0 && on_seg(a0, a1, b1))
}

/// A polyline; closed curves implicitly join the last point to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    points: Vec<Point>,
    closed: bool,
    /// Cumulative arc length at each vertex (and at the closing vertex).
    cumulative: Vec<f64>,
}

impl Curve {
    /// Closed polyline. An explicit repetition of the first point at the end
    /// is dropped.
    pub fn closed(mut points: Vec<Point>) -> Result<Self> {
        if points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "closed curve needs at least 3 points, got {}",
                points.len()
            )));
        }
        Self::build(points, true)
    }

    pub fn open(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "open curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        Self::build(points, false)
    }

    fn build(points: Vec<Point>, closed: bool) -> Result<Self> {
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        let n = points.len();
        let nseg = if closed { n } else { n - 1 };
        let mut cumulative = Vec::with_capacity(nseg + 1);
        cumulative.push(0.0);
        for k in 0..nseg {
            let a = points[k];
            let b = points[(k + 1) % n];
            if a == b {
                return Err(Error::InvalidGeometry(format!(
                    "repeated consecutive point at index {k}"
                )));
            }
            let last = cumulative[k];
            cumulative.push(last + a.dist(b));
        }
        Ok(Curve { points, closed, cumulative })
    }

    /// Closed curve sampled from a parametrization `t in [0, 1)`.
    pub fn sample_closed(samples: usize, f: impl Fn(f64) -> Point) -> Result<Self> {
        let pts = (0..samples).map(|k| f(k as f64 / samples as f64)).collect();
        Self::closed(pts)
    }

    /// Circle of radius `r` about `c`, positively oriented, first vertex at angle 0.
    pub fn circle(c: Point, r: f64, samples: usize) -> Result<Self> {
        Self::sample_closed(samples, |t| {
            let (s, co) = (core::f64::consts::TAU * t).sin_cos();
            Point::new(c.x + r * co, c.y + r * s)
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn num_segments(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn segment(&self, k: usize) -> (Point, Point) {
        let n = self.points.len();
        (self.points[k], self.points[(k + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.num_segments()).map(move |k| self.segment(k))
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Arc-length fraction in `[0, 1)` of the point at fraction `s` along segment `k`.
    pub fn param_at(&self, k: usize, s: f64) -> f64 {
        let len = self.length();
        if len == 0.0 {
            return 0.0;
        }
        let seg = self.cumulative[k + 1] - self.cumulative[k];
        let t = (self.cumulative[k] + s * seg) / len;
        if t >= 1.0 {
            t - 1.0
        } else {
            t
        }
    }

    /// Nearest point on the curve to `p`, with its arc-length parameter.
    pub fn nearest(&self, p: Point) -> (Point, f64) {
        let mut best = (f64::INFINITY, Point::default(), 0.0);
        for k in 0..self.num_segments() {
            let (a, b) = self.segment(k);
            let s = project_on_segment(p, a, b);
            let q = a.lerp(b, s);
            let d = q.dist(p);
            if d < best.0 {
                best = (d, q, self.param_at(k, s));
            }
        }
        (best.1, best.2)
    }

    /// Twice the signed area (positive for counter-clockwise closed curves).
    pub fn signed_area(&self) -> f64 {
        let a: f64 = self.segments().map(|(p, q)| p.cross(q)).sum();
        a * 0.5
    }

    /// Axis-aligned bounding box `(xmin, ymin, xmax, ymax)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }

    /// Even-odd containment for closed curves; always false for open ones.
    pub fn contains(&self, p: Point) -> bool {
        if !self.closed {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.segments() {
            if (a.y <= p.y && p.y < b.y) || (b.y <= p.y && p.y < a.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x < p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when no two non-adjacent segments touch.
    pub fn is_simple(&self) -> bool {
        let m = self.num_segments();
        for i in 0..m {
            let (a0, a1) = self.segment(i);
            for j in i + 1..m {
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == m - 1);
                if adjacent {
                    continue;
                }
                let (b0, b1) = self.segment(j);
                if segments_intersect(a0, a1, b0, b1) {
                    return false;
                }
            }
        }
        true
    }

    pub fn intersects(&self, other: &Curve) -> bool {
        self.segments()
            .any(|(a0, a1)| other.segments().any(|(b0, b1)| segments_intersect(a0, a1, b0, b1)))
    }

    /// A point strictly inside a closed curve: the vertex centroid when it is
    /// inside, otherwise a point just inside the midpoint of the first edge.
    pub fn interior_point(&self) -> Point {
        let n = self.points.len() as f64;
        let c = self.points.iter().fold(Point::default(), |acc, &p| acc + p) * (1.0 / n);
        if self.contains(c) {
            return c;
        }
        let (a, b) = self.segment(0);
        let mid = a.lerp(b, 0.5);
        let d = b - a;
        let nrm = Point::new(-d.y, d.x) * (1.0 / d.norm());
        let sign = if self.signed_area() >= 0.0 { 1.0 } else { -1.0 };
        let mut eps = 1e-3 * d.norm();
        for _ in 0..40 {
            let q = mid + nrm * (sign * eps);
            if self.contains(q) {
                return q;
            }
            eps *= 0.5;
        }
        mid
    }
}

/// Samples of the outer boundary map: parameter `t in [0, 1)` and target value.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMap {
    samples: Vec<(f64, C64)>,
}

impl BoundaryMap {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(samples: Vec<(f64, C64)>) -> Result<Self> {
        if samples.len() < Self::MIN_SAMPLES {
            return Err(Error::InvalidGeometry(format!(
                "boundary map needs at least {} samples, got {}",
                Self::MIN_SAMPLES,
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidGeometry(
                    "boundary map parameters must be strictly increasing".into(),
                ));
            }
        }
        let (t0, t1) = (samples[0].0, samples[samples.len() - 1].0);
        if t0 < 0.0 || t1 >= 1.0 {
            return Err(Error::InvalidGeometry("boundary map parameters must lie in [0, 1)".into()));
        }
        if samples.iter().any(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite boundary map value".into()));
        }
        Ok(BoundaryMap { samples })
    }

    /// `count` equally spaced samples of `f` on `[0, 1)`.
    pub fn from_fn(count: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new((0..count).map(|k| k as f64 / count as f64).map(|t| (t, f(t))).collect())
    }

    pub fn constant(value: C64) -> Self {
        Self::from_fn(Self::MIN_SAMPLES, |_| value).expect("constant map is valid")
    }

    pub fn samples(&self) -> &[(f64, C64)] {
        &self.samples
    }

    pub fn values(&self) -> impl Iterator<Item = C64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    /// Piecewise-linear evaluation, periodic in `t`.
    pub fn eval(&self, t: f64) -> C64 {
        let t = t - t.floor();
        let s = &self.samples;
        let n = s.len();
        // number of samples with parameter <= t
        let k = s.partition_point(|p| p.0 <= t);
        let (t0, v0, t1, v1) = match k {
            0 => (s[n - 1].0 - 1.0, s[n - 1].1, s[0].0, s[0].1),
            k if k == n => (s[n - 1].0, s[n - 1].1, s[0].0 + 1.0, s[0].1),
            k => (s[k - 1].0, s[k - 1].1, s[k].0, s[k].1),
        };
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    /// Largest distance between two sample values.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.samples.iter().enumerate() {
            for b in &self.samples[i + 1..] {
                d = d.max((a.1 - b.1).norm());
            }
        }
        d
    }
}

/// A capacitor: outer boundary, holes (conductors) and Dirichlet data.
#[derive(Clone, Debug)]
pub struct CapacitorSpec {
    pub outer: Curve,
    pub holes: Vec<Curve>,
    pub hole_values: Vec<C64>,
    pub outer_map: BoundaryMap,
}

impl CapacitorSpec {
    pub fn new(
        outer: Curve,
        holes: Vec<Curve>,
        hole_values: Vec<C64>,
        outer_map: BoundaryMap,
    ) -> Result<Self> {
        if !outer.is_closed() {
            return Err(Error::InvalidGeometry("outer curve must be closed".into()));
        }
        if outer.signed_area() <= 0.0 {
            return Err(Error::InvalidGeometry("outer curve must be positively oriented".into()));
        }
        if !outer.is_simple() {
            return Err(Error::InvalidGeometry("outer curve is not simple".into()));
        }
        if holes.len() != hole_values.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} holes but {} hole values",
                holes.len(),
                hole_values.len()
            )));
        }
        for (k, hole) in holes.iter().enumerate() {
            if !hole.is_closed() {
                return Err(Error::InvalidGeometry(format!("hole {k} must be closed")));
            }
            if !hole.is_simple() {
                return Err(Error::InvalidGeometry(format!("hole {k} is not simple")));
            }
            if hole.intersects(&outer) || !hole.points().iter().all(|&p| outer.contains(p)) {
                return Err(Error::InvalidGeometry(format!("hole {k} is not inside the outer curve")));
            }
            for (j, other) in holes[..k].iter().enumerate() {
                if hole.intersects(other)
                    || other.contains(hole.points()[0])
                    || hole.contains(other.points()[0])
                {
                    return Err(Error::InvalidGeometry(format!("holes {j} and {k} overlap")));
                }
            }
        }
        Ok(CapacitorSpec { outer, holes, hole_values, outer_map })
    }

    /// Is `p` in the open dielectric region (inside outer, outside every hole)?
    pub fn in_domain(&self, p: Point) -> bool {
        self.outer.contains(p) && !self.holes.iter().any(|h| h.contains(p))
    }
}

/// Uniform square grid of `n x n` nodes over `bbox`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
    pub n: usize,
}

impl GridSpec {
    pub const MIN_NODES: usize = 17;

    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64, n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGeometry(format!(
                "grid needs at least {} nodes per side, got {n}",
                Self::MIN_NODES
            )));
        }
        let (w, hgt) = (xmax - xmin, ymax - ymin);
        if !(w > 0.0 && hgt > 0.0) || !w.is_finite() || !hgt.is_finite() {
            return Err(Error::InvalidGeometry("grid bbox must have positive extent".into()));
        }
        if (w - hgt).abs() > 1e-12 * w.max(hgt) {
            return Err(Error::InvalidGeometry("grid bbox must be square".into()));
        }
        Ok(GridSpec { xmin, ymin, xmax, ymax, n })
    }

    /// Square grid centred at `(cx, cy)` with half-width `half`.
    pub fn square(cx: f64, cy: f64, half: f64, n: usize) -> Result<Self> {
        Self::new(cx - half, cy - half, cx + half, cy + half, n)
    }

    /// Smallest centred square grid holding `curve` with `margin_cells` spare cells.
    pub fn enclosing(curve: &Curve, n: usize, margin_cells: f64) -> Result<Self> {
        let (x0, y0, x1, y1) = curve.bbox();
        let (cx, cy) = ((x0 + x1) * 0.5, (y0 + y1) * 0.5);
        let e = ((x1 - x0) * 0.5).max((y1 - y0) * 0.5);
        let shrink = 1.0 - 2.0 * margin_cells / (n as f64 - 1.0);
        if shrink <= 0.0 {
            return Err(Error::InvalidGeometry("margin too large for grid size".into()));
        }
        Self::square(cx, cy, e / shrink * (1.0 + 1e-9), n)
    }

    pub fn h(&self) -> f64 {
        (self.xmax - self.xmin) / (self.n as f64 - 1.0)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.xmin + i as f64 * self.h()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.ymin + j as f64 * self.h()
    }

    pub fn point(&self, idx: usize) -> Point {
        let (i, j) = self.ij(idx);
        Point::new(self.x(i), self.y(j))
    }

    /// Index of the node nearest to `p` (clamped to the grid).
    pub fn nearest_node(&self, p: Point) -> usize {
        let h = self.h();
        let f = |v: f64, lo: f64| (((v - lo) / h).round().max(0.0) as usize).min(self.n - 1);
        self.index(f(p.x, self.xmin), f(p.y, self.ymin))
    }

    /// Grid with `2n - 1` nodes on the same bbox (every old node is a new node).
    pub fn refined(&self) -> GridSpec {
        GridSpec { n: 2 * self.n - 1, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square(half: f64) -> Curve {
        Curve::closed(vec![
            Point::new(-half, -half),
            Point::new(half, -half),
            Point::new(half, half),
            Point::new(-half, half),
        ])
        .unwrap()
    }

    #[test]
    fn curve_rejects_repeated_points() {
        let p = Point::new(0.0, 0.0);
        let err = Curve::closed(vec![p, p, Point::new(1.0, 0.0), Point::new(0.0, 1.0)]);
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
        assert!(Curve::closed(vec![p, Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn closing_duplicate_is_dropped() {
        let c = Curve::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(c.points().len(), 3);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let c = Curve::closed(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!c.is_simple());
        assert!(square(1.0).is_simple());
    }

    #[test]
    fn containment_and_params() {
        let s = square(1.0);
        assert!(s.contains(Point::new(0.2, -0.3)));
        assert!(!s.contains(Point::new(1.2, 0.0)));
        assert_eq!(s.length(), 8.0);
        // midpoint of the second edge is 3/8 of the way round
        assert!((s.param_at(1, 0.5) - 0.375).abs() < 1e-15);
        let (q, t) = s.nearest(Point::new(2.0, 0.0));
        assert_eq!(q, Point::new(1.0, 0.0));
        assert!((t - 0.375).abs() < 1e-15);
    }

    #[test]
    fn boundary_map_validation_and_eval() {
        assert!(BoundaryMap::new(vec![(0.0, C64::new(0.0, 0.0)); 4]).is_err());
        let m = BoundaryMap::from_fn(16, |t| C64::new(t, 0.0)).unwrap();
        assert!((m.eval(0.5).re - 0.5).abs() < 1e-15);
        assert!((m.eval(0.53125).re - 0.53125).abs() < 1e-15);
        // wraps from t = 15/16 back to the value at 0
        let v = m.eval(0.96875);
        assert!((v.re - 0.46875).abs() < 1e-12);
        let mut bad: Vec<_> = (0..16).map(|k| (k as f64 / 16.0, C64::new(0.0, 0.0))).collect();
        bad.swap(3, 4);
        assert!(BoundaryMap::new(bad).is_err());
    }

    #[test]
    fn capacitor_rejects_hole_outside() {
        let outer = Curve::circle(Point::default(), 2.0, 64).unwrap();
        let hole = Curve::circle(Point::new(1.8, 0.0), 0.5, 32).unwrap();
        let r = CapacitorSpec::new(outer, vec![hole], vec![C64::new(1.0, 0.0)], BoundaryMap::constant(C64::new(0.0, 0.0)));
        assert!(r.is_err());
    }

    #[test]
    fn capacitor_rejects_negative_orientation() {
        let mut pts: Vec<_> = Curve::circle(Point::default(), 2.0, 64).unwrap().points().to_vec();
        pts.reverse();
        let r = CapacitorSpec::new(Curve::closed(pts).unwrap(), vec![], vec![], BoundaryMap::constant(C64::new(0.0, 0.0)));
        assert!(r.is_err());
    }

    #[test]
    fn grid_geometry() {
        let g = GridSpec::square(0.0, 0.0, 2.0, 17).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.point(g.index(8, 8)), Point::new(0.0, 0.0));
        assert_eq!(g.nearest_node(Point::new(0.1, -0.1)), g.index(8, 8));
        assert_eq!(g.refined().n, 33);
        assert!(GridSpec::square(0.0, 0.0, 1.0, 16).is_err());
        assert!(GridSpec::new(0.0, 0.0, 1.0, 2.0, 33).is_err());
    }
}
