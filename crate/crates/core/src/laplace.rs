//! Harmonic Dirichlet problems on masked grids and the Dirichlet energy.
//!
//! Every domain node is an unknown. A grid link that crosses a boundary curve
//! contributes `(u_i - g) / (theta h^2)` with `g` the data at the crossing, a
//! symmetric closure that keeps the scheme second order up to curved
//! boundaries. Boundary nodes without crossing links (masks built from a
//! predicate) are held at their anchor value.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cg::{pcg, SparseSym};
use crate::geometry::{ComplexBoundary, Dir, Mask, ScalarBoundary};
use crate::{ComplexField, Error, Result, ScalarField};

pub const DEFAULT_TOL: f64 = 1e-10;
/// `max_iter = MAX_ITER_PER_NODE * n` for an `n x n` grid.
pub const MAX_ITER_PER_NODE: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stopping tolerance on the mean-value defect relative to the data range.
    pub tol: f64,
    /// Iteration cap; `None` means `50 n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: DEFAULT_TOL, max_iter: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Largest defect of the (weighted) mean-value property over the
    /// unknowns, divided by the boundary-data range.
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveReport {
    /// Combined report of two component solves.
    pub fn merge(self, other: SolveReport) -> SolveReport {
        SolveReport {
            iterations: self.iterations.max(other.iterations),
            final_residual: self.final_residual.max(other.final_residual),
            converged: self.converged && other.converged,
        }
    }
}

/// A grid edge entering the stencil of an unknown.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Edge {
    /// Link between two domain nodes.
    Grid(usize, usize),
    /// Index into `mask.links()`.
    Link(usize),
}

/// Unknown numbering and link lookup shared by the linear and p-Laplace solvers.
pub(crate) struct Layout {
    pub mask: Arc<Mask>,
    /// unknown number of each node, `usize::MAX` if none
    pub unknown: Vec<usize>,
    /// node of each unknown
    pub nodes: Vec<usize>,
    /// links of each node as a range into `mask.links()`
    link_range: Vec<(u32, u32)>,
}

impl Layout {
    pub fn new(mask: &Arc<Mask>) -> Result<Self> {
        let len = mask.grid().len();
        let mut link_range = vec![(0u32, 0u32); len];
        let links = mask.links();
        let mut k = 0;
        while k < links.len() {
            let node = links[k].node;
            let start = k;
            while k < links.len() && links[k].node == node {
                k += 1;
            }
            link_range[node] = (start as u32, k as u32);
        }
        let mut unknown = vec![usize::MAX; len];
        let mut nodes = Vec::new();
        for idx in 0..len {
            let kind = mask.kind(idx);
            let fixed = kind.is_boundary() && link_range[idx].0 == link_range[idx].1;
            if kind.in_domain() && !fixed {
                unknown[idx] = nodes.len();
                nodes.push(idx);
            }
        }
        if mask.count(|k| k == crate::NodeKind::Interior) == 0 {
            return Err(Error::Empty("interior"));
        }
        Ok(Layout { mask: mask.clone(), unknown, nodes, link_range })
    }

    pub fn link_for(&self, idx: usize, d: Dir) -> Option<usize> {
        let (a, b) = self.link_range[idx];
        (a as usize..b as usize).find(|&k| self.mask.links()[k].dir == d)
    }

    /// Assembles `A u = b` with the given edge weights.
    pub fn assemble(&self, data: &ScalarBoundary, weight: impl Fn(Edge) -> f64) -> Result<(SparseSym, Vec<f64>)> {
        let mask = &self.mask;
        let mut a = SparseSym::with_capacity(self.nodes.len());
        let mut rhs = vec![0.0; self.nodes.len()];
        for (row, &idx) in self.nodes.iter().enumerate() {
            let mut diag = 0.0;
            for d in Dir::ALL {
                match mask.domain_neighbor(idx, d) {
                    Some(nb) => {
                        let w = weight(Edge::Grid(idx, nb));
                        diag += w;
                        if self.unknown[nb] != usize::MAX {
                            a.push_off(self.unknown[nb], -w);
                        } else {
                            let g = data.node_value(nb).ok_or_else(|| {
                                Error::DegenerateGeometry("boundary node without data".into())
                            })?;
                            rhs[row] += w * g;
                        }
                    }
                    None => {
                        let k = self.link_for(idx, d).ok_or_else(|| {
                            let p = mask.grid().point(idx);
                            Error::DegenerateGeometry(format!(
                                "node ({}, {}) has an exterior neighbour but no crossing",
                                p.x, p.y
                            ))
                        })?;
                        let w = weight(Edge::Link(k)) / mask.links()[k].theta;
                        diag += w;
                        rhs[row] += w * data.link_values()[k];
                    }
                }
            }
            a.finish_row(diag);
        }
        Ok((a, rhs))
    }

    /// Dense node values from unknowns plus fixed boundary values.
    pub fn scatter(&self, x: &[f64], data: &ScalarBoundary) -> Vec<f64> {
        let mut values = vec![f64::NAN; self.mask.grid().len()];
        for (idx, v) in values.iter_mut().enumerate() {
            if !self.mask.in_domain(idx) {
                continue;
            }
            *v = match self.unknown[idx] {
                usize::MAX => data.node_value(idx).unwrap_or(f64::NAN),
                u => x[u],
            };
        }
        values
    }

    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&idx| values[idx]).collect()
    }
}

/// Normalisation for relative residuals: the data range, or the data
/// magnitude when the data is constant.
pub(crate) fn data_scale(data: &ScalarBoundary) -> f64 {
    let range = data.range();
    if range > 0.0 {
        return range;
    }
    let m = data.values().fold(0.0, |m: f64, v| m.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Initial guess: the midrange of the data (exact for constant data).
pub(crate) fn data_midrange(data: &ScalarBoundary) -> f64 {
    let (lo, hi) = data.min_max();
    if lo.is_finite() {
        0.5 * (lo + hi)
    } else {
        0.0
    }
}

fn check_data(data: &ScalarBoundary) -> Result<()> {
    if data.values().any(|v| !v.is_finite()) {
        return Err(Error::Domain("boundary data must be finite".into()));
    }
    Ok(())
}

/// Harmonic extension of real boundary data.
pub fn solve_dirichlet(data: &ScalarBoundary) -> Result<(ScalarField, SolveReport)> {
    solve_dirichlet_with(data, &SolverConfig::default())
}

pub fn solve_dirichlet_with(data: &ScalarBoundary, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    if !(cfg.tol > 0.0) {
        return Err(Error::Config("solver tolerance must be positive".into()));
    }
    check_data(data)?;
    let layout = Layout::new(data.mask())?;
    let (a, rhs) = layout.assemble(data, |_| 1.0)?;
    let scale = data_scale(data);
    let mut x = vec![data_midrange(data); layout.nodes.len()];
    let max_iter = cfg.max_iter.unwrap_or(MAX_ITER_PER_NODE * data.mask().grid().n);
    let out = pcg(&a, &rhs, &mut x, cfg.tol * scale, max_iter);
    let field = ScalarField::new(data.mask().clone(), layout.scatter(&x, data))?;
    Ok((field, SolveReport { iterations: out.iterations, final_residual: out.residual / scale, converged: out.converged }))
}

/// Harmonic extension of complex data: two independent real solves.
pub fn solve_complex(data: &ComplexBoundary) -> Result<(ComplexField, SolveReport)> {
    solve_complex_with(data, &SolverConfig::default())
}

pub fn solve_complex_with(data: &ComplexBoundary, cfg: &SolverConfig) -> Result<(ComplexField, SolveReport)> {
    let (re, r1) = solve_dirichlet_with(&data.re(), cfg)?;
    let (im, r2) = solve_dirichlet_with(&data.im(), cfg)?;
    Ok((ComplexField::from_parts(&re, &im)?, r1.merge(r2)))
}

/// Mean-value defect of a solved field relative to the data range, using the
/// same closure as the solver.
pub fn mean_value_residual(field: &ScalarField, data: &ScalarBoundary) -> Result<f64> {
    let layout = Layout::new(data.mask())?;
    let (a, rhs) = layout.assemble(data, |_| 1.0)?;
    let x = layout.gather(field.values());
    Ok(a.scaled_residual(&rhs, &x) / data_scale(data))
}

/// Boundary data whose jump between neighbouring boundary nodes exceeds this
/// fraction of the data diameter is flagged as rough.
pub const ROUGH_JUMP_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    /// Number of complete cells summed.
    pub cells: usize,
    /// Largest value jump between 8-adjacent boundary nodes of one curve.
    pub max_boundary_jump: f64,
    /// Set when the data oscillate at grid scale; the true energy may then
    /// be much larger than (or not even bounded by) the discrete sum.
    pub rough_data: bool,
}

/// `sum (|H_z|^2 + |H_zbar|^2) h^2` over cells with four domain corners,
/// with derivatives taken at cell centres.
pub fn dirichlet_energy(field: &ComplexField) -> f64 {
    energy_sum(field).0
}

fn energy_sum(field: &ComplexField) -> (f64, usize) {
    let g = field.grid();
    let h = g.h();
    let mut total = 0.0;
    let mut cells = 0;
    for j in 0..g.n - 1 {
        for i in 0..g.n - 1 {
            let (Some(f00), Some(f10), Some(f01), Some(f11)) =
                (field.at(i, j), field.at(i + 1, j), field.at(i, j + 1), field.at(i + 1, j + 1))
            else {
                continue;
            };
            let hx = ((f10 + f11) - (f00 + f01)) / (2.0 * h);
            let hy = ((f01 + f11) - (f00 + f10)) / (2.0 * h);
            // |H_z|^2 + |H_zbar|^2 = (|H_x|^2 + |H_y|^2) / 2
            total += 0.5 * (hx.norm_sqr() + hy.norm_sqr()) * h * h;
            cells += 1;
        }
    }
    (total, cells)
}

pub fn energy_report(field: &ComplexField, data: &ComplexBoundary) -> EnergyReport {
    let (energy, cells) = energy_sum(field);
    let mask = data.mask();
    let anchors = mask.anchors();
    let vals = data.anchor_values();
    let g = mask.grid();
    let mut jump: f64 = 0.0;
    let mut diameter: f64 = 0.0;
    for (k, a) in anchors.iter().enumerate() {
        let (i, j) = g.ij(a.node);
        for (di, dj) in [(1isize, 0isize), (0, 1), (1, 1), (1, -1)] {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < 0 || nj < 0 || ni >= g.n as isize || nj >= g.n as isize {
                continue;
            }
            let nb = g.index(ni as usize, nj as usize);
            if let Ok(m) = anchors.binary_search_by_key(&nb, |b| b.node) {
                if anchors[m].curve == a.curve {
                    jump = jump.max((vals[m] - vals[k]).norm());
                }
            }
        }
    }
    for (k, v) in vals.iter().enumerate() {
        for w in &vals[k + 1..] {
            diameter = diameter.max((v - w).norm());
        }
    }
    EnergyReport {
        energy,
        cells,
        max_boundary_jump: jump,
        rough_data: diameter > 0.0 && jump > ROUGH_JUMP_FRACTION * diameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticField;
    use crate::geometry::{boundary_values, rasterize, BoundaryData, BoundaryMap, CapacitorSpec, Curve, GridSpec, Point};
    use crate::{NodeKind, C64};
    use core::f64::consts::PI;

    fn annulus(r: f64, big: f64, n: usize) -> (CapacitorSpec, Arc<Mask>) {
        let spec = CapacitorSpec::new(
            Curve::circle(Point::default(), big, 2048).unwrap(),
            vec![Curve::circle(Point::default(), r, 1024).unwrap()],
            vec![C64::new(1.0, 0.0)],
            BoundaryMap::constant(C64::new(0.0, 0.0)),
        )
        .unwrap();
        let grid = GridSpec::square(0.0, 0.0, big * 1.2, n).unwrap();
        let mask = Arc::new(rasterize(&spec, &grid).unwrap());
        (spec, mask)
    }

    fn log_error(n: usize) -> f64 {
        let (spec, mask) = annulus(1.0, 2.0, n);
        let data = boundary_values(&spec, mask.clone()).unwrap().re();
        let (u, rep) = solve_dirichlet(&data).unwrap();
        assert!(rep.converged && rep.final_residual <= DEFAULT_TOL);
        let exact = AnalyticField::log_annulus(1.0, 2.0).unwrap();
        u.domain()
            .filter(|&k| mask.kind(k) == NodeKind::Interior)
            .map(|k| (u.values()[k] - exact.eval(mask.grid().point(k).to_complex()).unwrap().value.re).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_data_needs_no_iterations() {
        let (_, mask) = annulus(1.0, 2.0, 33);
        let data = BoundaryData::from_points(mask, |_| 0.7);
        let (u, rep) = solve_dirichlet(&data).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(u.domain().all(|k| u.values()[k] == 0.7));
    }

    #[test]
    fn annulus_second_order() {
        let (e1, e2) = (log_error(129), log_error(257));
        assert!(e2 < 5e-3, "{e2}");
        let ratio = e1 / e2;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio} ({e1}, {e2})");
    }

    #[test]
    fn maximum_principle_and_mean_value() {
        let (spec, mask) = annulus(1.0, 2.0, 65);
        let data = boundary_values(&spec, mask.clone()).unwrap().re();
        let (u, _) = solve_dirichlet(&data).unwrap();
        for k in u.domain() {
            let v = u.values()[k];
            assert!(v > 0.0 && v < 1.0);
        }
        assert!(mean_value_residual(&u, &data).unwrap() <= DEFAULT_TOL);
    }

    #[test]
    fn complex_linearity_and_conjugation() {
        let (spec, mask) = annulus(1.0, 2.0, 49);
        let f = BoundaryData::from_points(mask.clone(), |p| C64::new(p.x * p.x, p.y));
        let g = boundary_values(&spec, mask).unwrap();
        let (uf, _) = solve_complex(&f).unwrap();
        let (ug, _) = solve_complex(&g).unwrap();
        let (alpha, beta) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
        let combo = f.zip_with(&g, |a, b| alpha * a + beta * b).unwrap();
        let (uc, _) = solve_complex(&combo).unwrap();
        let expect = uf.zip_with(&ug, |a, b| alpha * a + beta * b).unwrap();
        assert!(uc.max_abs_diff(&expect).unwrap() <= 10.0 * DEFAULT_TOL * 10.0);
        let (conj, _) = solve_complex(&f.conj()).unwrap();
        assert!(conj.max_abs_diff(&uf.conj()).unwrap() == 0.0);
        // real data gives an identically zero imaginary part
        assert!(ug.im().domain().all(|k| ug.values()[k].im == 0.0));
    }

    #[test]
    fn energy_of_simple_fields() {
        let mask = Arc::new(Mask::full(GridSpec::new(0.0, 0.0, 1.0, 1.0, 65).unwrap()));
        let z = ComplexField::from_fn(mask.clone(), |p| p.to_complex());
        assert!((dirichlet_energy(&z) - 1.0).abs() < 1e-12);
        let c = ComplexField::from_fn(mask, |_| C64::new(2.0, 1.0));
        assert_eq!(dirichlet_energy(&c), 0.0);

        // complete-cell truncation drops a boundary strip of width O(h), so
        // the sum converges at first order; the extrapolated value is sharp
        let exact = AnalyticField::log_annulus(1.0, 2.0).unwrap();
        let target = PI / 2f64.ln();
        let rel = |n: usize| {
            let (_, mask) = annulus(1.0, 2.0, n);
            let u = ComplexField::from_fn(mask, |p| exact.eval(p.to_complex()).unwrap().value);
            dirichlet_energy(&u) / target - 1.0
        };
        let (coarse, fine) = (rel(257), rel(513));
        assert!(coarse < 0.0 && fine < 0.0);
        assert!(coarse.abs() < 0.03, "{coarse}");
        assert!((1.6..=2.4).contains(&(coarse / fine)), "{coarse} {fine}");
        assert!((2.0 * fine - coarse).abs() < 5e-3);
    }

    #[test]
    fn rough_data_is_flagged() {
        let (_, mask) = annulus(1.0, 2.0, 49);
        let smooth = BoundaryData::from_points(mask.clone(), |p| C64::new(p.x, 0.0));
        let rough = BoundaryData::from_points(mask, |p| C64::new((40.0 * p.x).sin() * (40.0 * p.y).cos(), 0.0));
        let (us, _) = solve_complex(&smooth).unwrap();
        let (ur, _) = solve_complex(&rough).unwrap();
        assert!(!energy_report(&us, &smooth).rough_data);
        assert!(energy_report(&ur, &rough).rough_data);
    }
}
