//! p-harmonic Dirichlet problems by lagged diffusivity, and gradient
//! diagnostics for the resulting potentials.
//!
//! Each outer sweep freezes `w = (|grad u|^2 + eps^2)^((p-2)/2)` on grid
//! edges, solves the weighted linear problem and relaxes towards it. The
//! undamped iteration multiplies the linearised error by `-(p-2)`, which
//! stalls at `p = 3`; relaxing by `1/(p-1)` removes that factor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::cg::pcg;
use crate::geometry::{Dir, Point, ScalarBoundary};
use crate::laplace::{data_scale, solve_dirichlet, Edge, Layout, SolveReport};
use crate::{Error, NodeKind, Result, ScalarField, C64};

pub const DEFAULT_TOL_OUTER: f64 = 1e-8;
pub const DEFAULT_MAX_OUTER: usize = 500;
/// `eps_reg = EPS_REG_FACTOR * range / h` unless given explicitly.
pub const EPS_REG_FACTOR: f64 = 1e-8;
/// Relative tolerance of each inner weighted solve.
pub const INNER_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PharmonicConfig {
    pub p: f64,
    /// Gradient regularisation; `None` selects `1e-8 * range / h`.
    pub eps_reg: Option<f64>,
    pub tol_outer: f64,
    pub max_outer: usize,
}

impl PharmonicConfig {
    pub fn new(p: f64) -> Result<Self> {
        let cfg = PharmonicConfig { p, eps_reg: None, tol_outer: DEFAULT_TOL_OUTER, max_outer: DEFAULT_MAX_OUTER };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must satisfy 1 < p < inf, got {}", self.p)));
        }
        if let Some(e) = self.eps_reg {
            if !(e > 0.0) {
                return Err(Error::Config(format!("eps_reg must be positive, got {e}")));
            }
        }
        if !(self.tol_outer > 0.0) || self.max_outer == 0 {
            return Err(Error::Config("outer tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }

    /// Distortion of the complex gradient, `max(p - 1, 1/(p - 1))`.
    pub fn k(&self) -> f64 {
        (self.p - 1.0).max(1.0 / (self.p - 1.0))
    }

    /// `(K - 1)/(K + 1)`, the matching bound on the Beltrami coefficient.
    pub fn beltrami_bound(&self) -> f64 {
        let k = self.k();
        (k - 1.0) / (k + 1.0)
    }

    fn relaxation(&self) -> f64 {
        (1.0 / (self.p - 1.0)).min(1.0)
    }
}

/// Second-order derivative from samples at `-a` and `+b` around `f0`.
fn nonuniform_derivative(f0: f64, west: (f64, f64), east: (f64, f64)) -> f64 {
    let (a, fw) = west;
    let (b, fe) = east;
    (a * a * fe - b * b * fw + (b * b - a * a) * f0) / (a * b * (a + b))
}

/// Gradient at every domain node, using crossing data where a neighbour is
/// outside the domain.
fn node_gradients(layout: &Layout, u: &[f64], data: &ScalarBoundary) -> Vec<(f64, f64)> {
    let mask = &layout.mask;
    let h = mask.grid().h();
    let sample = |idx: usize, d: Dir| -> Option<(f64, f64)> {
        if let Some(nb) = mask.domain_neighbor(idx, d) {
            return Some((h, u[nb]));
        }
        layout.link_for(idx, d).map(|k| (mask.links()[k].theta * h, data.link_values()[k]))
    };
    let axis = |idx: usize, lo: Dir, hi: Dir| -> f64 {
        match (sample(idx, lo), sample(idx, hi)) {
            (Some(w), Some(e)) => nonuniform_derivative(u[idx], w, e),
            (Some((a, fw)), None) => (u[idx] - fw) / a,
            (None, Some((b, fe))) => (fe - u[idx]) / b,
            (None, None) => 0.0,
        }
    };
    (0..u.len())
        .map(|idx| if mask.in_domain(idx) { (axis(idx, Dir::West, Dir::East), axis(idx, Dir::South, Dir::North)) } else { (0.0, 0.0) })
        .collect()
}

/// Squared gradient on every edge of the stencil.
fn edge_gradient_sq(layout: &Layout, u: &[f64], grads: &[(f64, f64)], data: &ScalarBoundary, e: Edge) -> f64 {
    let mask = &layout.mask;
    let h = mask.grid().h();
    match e {
        Edge::Grid(a, b) => {
            let normal = (u[b] - u[a]) / h;
            let horizontal = a.abs_diff(b) == 1;
            let tangential = if horizontal { 0.5 * (grads[a].1 + grads[b].1) } else { 0.5 * (grads[a].0 + grads[b].0) };
            normal * normal + tangential * tangential
        }
        Edge::Link(k) => {
            let l = &mask.links()[k];
            let normal = (data.link_values()[k] - u[l.node]) / (l.theta * h);
            let tangential = match l.dir {
                Dir::East | Dir::West => grads[l.node].1,
                Dir::North | Dir::South => grads[l.node].0,
            };
            normal * normal + tangential * tangential
        }
    }
}

fn weight(grad_sq: f64, eps: f64, p: f64) -> f64 {
    (grad_sq + eps * eps).powf(0.5 * (p - 2.0))
}

fn resolve_eps(cfg: &PharmonicConfig, data: &ScalarBoundary) -> f64 {
    cfg.eps_reg.unwrap_or_else(|| EPS_REG_FACTOR * data_scale(data) / data.mask().grid().h())
}

/// p-harmonic extension of real boundary data.
///
/// `p = 2` is delegated to the linear solver unchanged. Otherwise the report
/// counts outer sweeps and its residual is the last relative change of `u`.
pub fn solve_p_dirichlet(data: &ScalarBoundary, cfg: &PharmonicConfig) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    if cfg.p == 2.0 {
        return solve_dirichlet(data);
    }
    let (u0, lin) = solve_dirichlet(data)?;
    let layout = Layout::new(data.mask())?;
    let scale = data_scale(data);
    let eps = resolve_eps(cfg, data);
    let tau = cfg.relaxation();
    let n = data.mask().grid().n;
    let mut dense: Vec<f64> = u0.values().to_vec();
    let mut x = layout.gather(&dense);
    let mut report = SolveReport { iterations: 0, final_residual: f64::INFINITY, converged: false };
    if !lin.converged {
        return Ok((u0, SolveReport { converged: false, ..lin }));
    }
    for it in 1..=cfg.max_outer {
        let grads = node_gradients(&layout, &dense, data);
        let (a, rhs) = layout.assemble(data, |e| weight(edge_gradient_sq(&layout, &dense, &grads, data, e), eps, cfg.p))?;
        let mut y = x.clone();
        let inner = pcg(&a, &rhs, &mut y, INNER_TOL * scale, 50 * n);
        let mut change: f64 = 0.0;
        for (xi, yi) in x.iter_mut().zip(&y) {
            let step = tau * (yi - *xi);
            change = change.max(step.abs());
            *xi += step;
        }
        for (k, &idx) in layout.nodes.iter().enumerate() {
            dense[idx] = x[k];
        }
        let change = change / scale;
        report = SolveReport { iterations: it, final_residual: change, converged: false };
        if !change.is_finite() {
            break;
        }
        if change <= cfg.tol_outer && inner.converged {
            report.converged = true;
            break;
        }
    }
    Ok((ScalarField::new(data.mask().clone(), dense)?, report))
}

/// Largest defect of the discrete weighted equation, `div(w grad u) / w`,
/// over interior nodes at least `margin` cells from the boundary, with the
/// weights evaluated from `field` itself.
pub fn weighted_operator_residual(field: &ScalarField, data: &ScalarBoundary, cfg: &PharmonicConfig, margin: u32) -> Result<f64> {
    cfg.validate()?;
    let layout = Layout::new(data.mask())?;
    let dense = field.values();
    let eps = resolve_eps(cfg, data);
    let grads = node_gradients(&layout, dense, data);
    let (a, rhs) = layout.assemble(data, |e| weight(edge_gradient_sq(&layout, dense, &grads, data, e), eps, cfg.p))?;
    let x = layout.gather(dense);
    let mut ax = vec![0.0; x.len()];
    a.apply(&x, &mut ax);
    let dist = data.mask().boundary_distance();
    let h = data.mask().grid().h();
    let mut worst: f64 = 0.0;
    for (row, &idx) in layout.nodes.iter().enumerate() {
        if data.mask().kind(idx) == NodeKind::Interior && dist[idx] >= margin {
            worst = worst.max(((rhs[row] - ax[row]) / a.diag[row]).abs() * 4.0 / (h * h));
        }
    }
    Ok(worst)
}

/// `|grad u|` at a node by central differences, when both neighbours on each
/// axis are in the domain.
pub fn central_gradient(field: &ScalarField, idx: usize) -> Option<(f64, f64)> {
    let mask = field.mask();
    let h = field.grid().h();
    let v = |d: Dir| mask.domain_neighbor(idx, d).map(|k| field.values()[k]);
    Some(((v(Dir::East)? - v(Dir::West)?) / (2.0 * h), (v(Dir::North)? - v(Dir::South)?) / (2.0 * h)))
}

/// Minimum of `|grad u|` over interior nodes at Chebyshev distance at least
/// `margin` from every boundary node, with its location.
pub fn min_interior_gradient_at(field: &ScalarField, margin: u32) -> Result<(f64, Point)> {
    if margin < 2 {
        return Err(Error::Config(format!("gradient margin must be at least 2, got {margin}")));
    }
    let mask = field.mask();
    let dist = mask.boundary_distance();
    let mut best: Option<(f64, usize)> = None;
    for idx in field.domain() {
        if mask.kind(idx) != NodeKind::Interior || dist[idx] < margin {
            continue;
        }
        if let Some((gx, gy)) = central_gradient(field, idx) {
            let g = gx.hypot(gy);
            if best.is_none_or(|(b, _)| g < b) {
                best = Some((g, idx));
            }
        }
    }
    best.map(|(g, idx)| (g, field.grid().point(idx))).ok_or(Error::Empty("margin region"))
}

pub fn min_interior_gradient(field: &ScalarField, margin: u32) -> Result<f64> {
    min_interior_gradient_at(field, margin).map(|r| r.0)
}

/// Minimum of `|grad u|` over domain nodes in the closed disk.
pub fn min_gradient_in_disk(field: &ScalarField, center: Point, radius: f64) -> Result<(f64, Point)> {
    let mut best: Option<(f64, usize)> = None;
    for idx in field.domain() {
        if field.grid().point(idx).dist(center) > radius {
            continue;
        }
        if let Some((gx, gy)) = central_gradient(field, idx) {
            let g = gx.hypot(gy);
            if best.is_none_or(|(b, _)| g < b) {
                best = Some((g, idx));
            }
        }
    }
    best.map(|(g, idx)| (g, field.grid().point(idx))).ok_or(Error::Empty("disk"))
}

/// Standoff (cells) of the nodes used by the distortion estimate.
pub const BELTRAMI_MARGIN: u32 = 3;
/// Nodes with `|f_z|` below this fraction of the largest `|f_z|` are skipped.
pub const BELTRAMI_NOISE_FLOOR: f64 = 1e-6;

/// 95th percentile of `|f_zbar| / |f_z|` for `f = u_z`.
///
/// `f` lives on cell centres; its Wirtinger derivatives are taken at the
/// grid nodes surrounded by four complete cells.
pub fn beltrami_distortion_estimate(field: &ScalarField) -> Result<f64> {
    let g = field.grid();
    let n = g.n;
    let h = g.h();
    let mask = field.mask();
    let dist = mask.boundary_distance();
    // f on cell (i, j) with lower-left corner (i, j)
    let mut f = vec![C64::new(f64::NAN, f64::NAN); (n - 1) * (n - 1)];
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            if let (Some(a), Some(b), Some(c), Some(d)) = (field.at(i, j), field.at(i + 1, j), field.at(i, j + 1), field.at(i + 1, j + 1)) {
                let ux = ((b + d) - (a + c)) / (2.0 * h);
                let uy = ((c + d) - (a + b)) / (2.0 * h);
                f[j * (n - 1) + i] = C64::new(ux, -uy) * 0.5;
            }
        }
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let idx = g.index(i, j);
            if mask.kind(idx) != NodeKind::Interior || dist[idx] < BELTRAMI_MARGIN {
                continue;
            }
            let (sw, se, nw, ne) = (f[(j - 1) * (n - 1) + i - 1], f[(j - 1) * (n - 1) + i], f[j * (n - 1) + i - 1], f[j * (n - 1) + i]);
            let fx = ((se + ne) - (sw + nw)) / (2.0 * h);
            let fy = ((nw + ne) - (sw + se)) / (2.0 * h);
            let i_unit = C64::new(0.0, 1.0);
            let fz = (fx - i_unit * fy) * 0.5;
            let fzb = (fx + i_unit * fy) * 0.5;
            if fz.re.is_finite() && fzb.re.is_finite() {
                samples.push((fz.norm(), fzb.norm()));
            }
        }
    }
    let top = samples.iter().fold(0.0, |m: f64, s| m.max(s.0));
    let mut mu: Vec<f64> = samples.iter().filter(|s| s.0 > BELTRAMI_NOISE_FLOOR * top && top > 0.0).map(|s| s.1 / s.0).collect();
    if mu.is_empty() {
        return Err(Error::Empty("nodes above the noise floor"));
    }
    mu.sort_by(f64::total_cmp);
    let k = ((0.95 * mu.len() as f64).ceil() as usize).clamp(1, mu.len()) - 1;
    Ok(mu[k])
}
