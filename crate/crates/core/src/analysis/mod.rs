//! Differential analysis of solved fields: Wirtinger derivatives, critical
//! points of rank zero and one, and the real projections `W = aU + bV`.

mod winding;

pub use winding::{argument_principle_zeros, winding_number, NodeWindow, ZeroLocation};

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::analytic::AnalyticField;
use crate::geometry::{Dir, Mask, Point};
use crate::{ComplexField, Error, NodeKind, Result, ScalarField, C64};

/// Per-node Wirtinger derivatives of a complex field.
#[derive(Clone, Debug, PartialEq)]
pub struct WirtingerField {
    mask: Arc<Mask>,
    d_z: Vec<C64>,
    d_zbar: Vec<C64>,
}

const ABSENT: C64 = C64::new(f64::NAN, f64::NAN);

impl WirtingerField {
    /// Exact derivatives of a closed-form field at the domain nodes.
    pub fn from_analytic(mask: Arc<Mask>, field: &AnalyticField) -> Result<Self> {
        let len = mask.grid().len();
        let (mut d_z, mut d_zbar) = (vec![ABSENT; len], vec![ABSENT; len]);
        for idx in 0..len {
            if mask.in_domain(idx) {
                let w = field.eval(mask.grid().point(idx).to_complex())?;
                d_z[idx] = w.d_z;
                d_zbar[idx] = w.d_zbar;
            }
        }
        Ok(WirtingerField { mask, d_z, d_zbar })
    }

    pub fn mask(&self) -> &Arc<Mask> {
        &self.mask
    }

    /// Dense `H_z` values, NaN outside the domain.
    pub fn d_z_values(&self) -> &[C64] {
        &self.d_z
    }

    pub fn d_zbar_values(&self) -> &[C64] {
        &self.d_zbar
    }

    pub fn d_z(&self, idx: usize) -> Option<C64> {
        self.mask.in_domain(idx).then(|| self.d_z[idx])
    }

    pub fn d_zbar(&self, idx: usize) -> Option<C64> {
        self.mask.in_domain(idx).then(|| self.d_zbar[idx])
    }

    /// `|H_z|^2 + |H_zbar|^2`.
    pub fn grad_norm_sq(&self, idx: usize) -> Option<f64> {
        self.mask.in_domain(idx).then(|| self.d_z[idx].norm_sqr() + self.d_zbar[idx].norm_sqr())
    }

    /// `|H_z|^2 - |H_zbar|^2`.
    pub fn jac(&self, idx: usize) -> Option<f64> {
        self.mask.in_domain(idx).then(|| self.d_z[idx].norm_sqr() - self.d_zbar[idx].norm_sqr())
    }
}

/// Derivative of `f` along one axis at `idx`: central where possible,
/// one-sided second order next to the boundary.
fn axis_derivative(mask: &Mask, f: &[C64], idx: usize, lo: Dir, hi: Dir, h: f64) -> C64 {
    let step = |from: usize, d: Dir| mask.domain_neighbor(from, d);
    match (step(idx, lo), step(idx, hi)) {
        (Some(a), Some(b)) => (f[b] - f[a]) / (2.0 * h),
        (None, Some(b)) => match step(b, hi) {
            Some(c) => (f[idx] * -3.0 + f[b] * 4.0 - f[c]) / (2.0 * h),
            None => (f[b] - f[idx]) / h,
        },
        (Some(a), None) => match step(a, lo) {
            Some(c) => (f[idx] * 3.0 - f[a] * 4.0 + f[c]) / (2.0 * h),
            None => (f[idx] - f[a]) / h,
        },
        (None, None) => C64::new(0.0, 0.0),
    }
}

/// `H_z = (H_x - i H_y)/2` and `H_zbar = (H_x + i H_y)/2` by finite differences.
pub fn wirtinger(field: &ComplexField) -> WirtingerField {
    let mask = field.mask().clone();
    let h = mask.grid().h();
    let f = field.values();
    let len = mask.grid().len();
    let (mut d_z, mut d_zbar) = (vec![ABSENT; len], vec![ABSENT; len]);
    let i = C64::new(0.0, 1.0);
    for idx in 0..len {
        if !mask.in_domain(idx) {
            continue;
        }
        let hx = axis_derivative(&mask, f, idx, Dir::West, Dir::East, h);
        let hy = axis_derivative(&mask, f, idx, Dir::South, Dir::North, h);
        d_z[idx] = (hx - i * hy) * 0.5;
        d_zbar[idx] = (hx + i * hy) * 0.5;
    }
    WirtingerField { mask, d_z, d_zbar }
}

/// Wirtinger derivatives of a real field (`H_zbar = conj(H_z)` exactly).
pub fn wirtinger_real(field: &ScalarField) -> WirtingerField {
    wirtinger(&field.to_complex())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rank {
    Zero,
    One,
}

impl Rank {
    pub fn as_str(self) -> &'static str {
        match self {
            Rank::Zero => "zero",
            Rank::One => "one",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub location: Point,
    pub rank: Rank,
    /// Half the number of level-set arcs through the point, once traced.
    pub order_m: Option<u32>,
    pub grad_norm_sq: f64,
    pub jac: f64,
    /// Rank-one loci: the detected zero set of the Jacobian in this cluster.
    pub locus: Vec<Point>,
}

/// Detection thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalParams {
    pub tau_zero: f64,
    pub tau_jac: f64,
    /// Nodes closer than this many cells to the boundary are not examined.
    pub margin: u32,
}

/// Default threshold scales: `tau_zero = h * median`, `tau_jac = 10 h * median`
/// of `grad_norm_sq` over the examined nodes.
pub const TAU_ZERO_SCALE: f64 = 1.0;
pub const TAU_JAC_SCALE: f64 = 10.0;
pub const DEFAULT_MARGIN: u32 = 2;

impl CriticalParams {
    pub fn new(tau_zero: f64, tau_jac: f64, margin: u32) -> Result<Self> {
        if !(tau_zero > 0.0 && tau_jac > 0.0) {
            return Err(Error::Config("critical-point thresholds must be positive".into()));
        }
        Ok(CriticalParams { tau_zero, tau_jac, margin })
    }

    /// Resolution-scaled defaults for `wf`.
    pub fn for_field(wf: &WirtingerField, margin: u32) -> Result<Self> {
        let dist = wf.mask.boundary_distance();
        let mut g: Vec<f64> = eligible(&wf.mask, &dist, margin).filter_map(|k| wf.grad_norm_sq(k)).collect();
        if g.is_empty() {
            return Err(Error::Empty("nodes inside the detection margin"));
        }
        g.sort_by(f64::total_cmp);
        let median = g[g.len() / 2];
        if !(median > 0.0) {
            return Err(Error::Domain("field is constant on the examined nodes".into()));
        }
        let h = wf.mask.grid().h();
        Self::new(TAU_ZERO_SCALE * h * median, TAU_JAC_SCALE * h * median, margin)
    }
}

fn eligible<'a>(mask: &'a Mask, dist: &'a [u32], margin: u32) -> impl Iterator<Item = usize> + 'a {
    (0..mask.grid().len()).filter(move |&k| mask.kind(k) == NodeKind::Interior && dist[k] >= margin)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalReport {
    pub points: Vec<CriticalPoint>,
    pub params: CriticalParams,
    /// Jacobian identically zero (real field): rank-one detection is void.
    pub real_field: bool,
}

impl CriticalReport {
    pub fn rank(&self, r: Rank) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(move |p| p.rank == r)
    }

    /// All rank-one locus points.
    pub fn rank_one_locus(&self) -> Vec<Point> {
        self.rank(Rank::One).flat_map(|p| p.locus.iter().copied()).collect()
    }
}

/// Union-find clusters of points closer than `reach`.
fn cluster_points(points: &[Point], reach: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn root(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    let key = |p: Point| ((p.x / reach).floor() as i64, (p.y / reach).floor() as i64);
    let mut keyed: Vec<((i64, i64), usize)> = points.iter().enumerate().map(|(k, &p)| (key(p), k)).collect();
    keyed.sort();
    for (k, &p) in points.iter().enumerate() {
        let (cx, cy) = key(p);
        for bx in cx - 1..=cx + 1 {
            for by in cy - 1..=cy + 1 {
                let start = keyed.partition_point(|e| e.0 < (bx, by));
                for e in keyed[start..].iter().take_while(|e| e.0 == (bx, by)) {
                    if e.1 != k && points[e.1].dist(p) <= reach {
                        let (a, b) = (root(&mut parent, k), root(&mut parent, e.1));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; points.len()];
    for k in 0..points.len() {
        let r = root(&mut parent, k);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(k);
    }
    groups
}

/// Rank-zero and rank-one critical points.
///
/// Rank zero: 8-connected clusters of nodes with `grad_norm_sq <= tau_zero`,
/// each located at the centroid weighted by `1/grad_norm_sq`, so the point
/// sits where the gradient is smallest. Rank one: the zero set of the
/// Jacobian, found as sign changes along grid links (linear interpolation)
/// plus isolated touching zeros (strict local minima of `|jac|` below
/// `tau_jac` without a sign change); points within `2h` are clustered and each
/// cluster is reported with its locus. Rank zero takes precedence.
pub fn classify_critical(wf: &WirtingerField, params: &CriticalParams) -> CriticalReport {
    let mask = &wf.mask;
    let g = mask.grid();
    let h = g.h();
    let dist = mask.boundary_distance();
    let ok: Vec<bool> = {
        let mut v = vec![false; g.len()];
        for k in eligible(mask, &dist, params.margin) {
            v[k] = true;
        }
        v
    };
    let gns = |k: usize| wf.d_z[k].norm_sqr() + wf.d_zbar[k].norm_sqr();
    let jac = |k: usize| wf.d_z[k].norm_sqr() - wf.d_zbar[k].norm_sqr();
    let neighbours8 = |k: usize| {
        let (i, j) = g.ij(k);
        let n = g.n as isize;
        (-1isize..=1)
            .flat_map(move |dj| (-1isize..=1).map(move |di| (di, dj)))
            .filter(|&(di, dj)| di != 0 || dj != 0)
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as isize + di, j as isize + dj);
                (a >= 0 && b >= 0 && a < n && b < n).then(|| g.index(a as usize, b as usize))
            })
    };

    let mut points = Vec::new();

    // rank zero
    let zero: Vec<bool> = (0..g.len()).map(|k| ok[k] && gns(k) <= params.tau_zero).collect();
    let mut seen = vec![false; g.len()];
    for start in 0..g.len() {
        if !zero[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            for nb in neighbours8(k) {
                if zero[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        members.sort_unstable();
        let floor = 1e-3 * params.tau_zero;
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        let mut best = members[0];
        for &k in &members {
            let w = 1.0 / (gns(k) + floor);
            let p = g.point(k);
            sw += w;
            sx += w * p.x;
            sy += w * p.y;
            if gns(k) < gns(best) {
                best = k;
            }
        }
        points.push(CriticalPoint {
            location: Point::new(sx / sw, sy / sw),
            rank: Rank::Zero,
            order_m: None,
            grad_norm_sq: gns(best),
            jac: jac(best),
            locus: Vec::new(),
        });
    }

    // rank one
    let real_field = (0..g.len()).filter(|&k| ok[k]).all(|k| jac(k) == 0.0);
    if !real_field {
        let mut locus: Vec<(Point, usize)> = Vec::new();
        for k in 0..g.len() {
            if !ok[k] || zero[k] {
                continue;
            }
            for d in [Dir::East, Dir::North] {
                let Some(nb) = mask.neighbor(k, d) else { continue };
                if !ok[nb] || zero[nb] {
                    continue;
                }
                let (a, b) = (jac(k), jac(nb));
                if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
                    let t = a / (a - b);
                    let node = if t < 0.5 { k } else { nb };
                    locus.push((g.point(k).lerp(g.point(nb), t), node));
                }
            }
            let a = jac(k).abs();
            if a <= params.tau_jac {
                let s = jac(k).signum();
                let touching = neighbours8(k).all(|nb| ok[nb] && jac(nb).abs() > a && jac(nb).signum() == s);
                if touching {
                    locus.push((g.point(k), k));
                }
            }
        }
        let pts: Vec<Point> = locus.iter().map(|l| l.0).collect();
        for group in cluster_points(&pts, 2.0 * h) {
            let cx = group.iter().map(|&k| pts[k].x).sum::<f64>() / group.len() as f64;
            let cy = group.iter().map(|&k| pts[k].y).sum::<f64>() / group.len() as f64;
            let c = Point::new(cx, cy);
            let rep = *group.iter().min_by(|&&a, &&b| pts[a].dist(c).total_cmp(&pts[b].dist(c))).unwrap_or(&group[0]);
            let node = locus[rep].1;
            points.push(CriticalPoint {
                location: pts[rep],
                rank: Rank::One,
                order_m: None,
                grad_norm_sq: gns(node),
                jac: jac(node),
                locus: group.iter().map(|&k| pts[k]).collect(),
            });
        }
    }
    CriticalReport { points, params: *params, real_field }
}

/// Unit vector `(alpha, beta)` defining `W = alpha U + beta V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionCoefficients {
    alpha: f64,
    beta: f64,
}

impl ProjectionCoefficients {
    pub const UNIT_TOL: f64 = 1e-12;

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !((alpha * alpha + beta * beta - 1.0).abs() <= Self::UNIT_TOL) {
            return Err(Error::Domain(format!("({alpha}, {beta}) is not a unit vector")));
        }
        Ok(ProjectionCoefficients { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `W = alpha Re H + beta Im H`.
pub fn project_w(field: &ComplexField, c: ProjectionCoefficients) -> ScalarField {
    field.map(|v| c.alpha * v.re + c.beta * v.im)
}

/// Unit vector orthogonal to `value - center`, with positive second
/// component (ties: positive first). Differences at most `tau_eq` give `(1, 0)`.
pub fn choose_coefficients(value: C64, center: C64, tau_eq: f64) -> ProjectionCoefficients {
    let a = value - center;
    let r = a.norm();
    if !(r > tau_eq) {
        return ProjectionCoefficients { alpha: 1.0, beta: 0.0 };
    }
    let (mut alpha, mut beta) = (-a.im / r, a.re / r);
    if beta < 0.0 || (beta == 0.0 && alpha < 0.0) {
        alpha = -alpha;
        beta = -beta;
    }
    if beta == 0.0 {
        beta = 0.0;
    }
    ProjectionCoefficients { alpha, beta }
}
