//! Scenario pipeline: rasterize, solve, analyze, trace, check.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use caplab_core::analysis::{
    argument_principle_zeros, choose_coefficients, classify_critical, project_w, wirtinger, wirtinger_real, CriticalParams,
    CriticalReport, NodeWindow, Rank, WirtingerField,
};
use caplab_core::analytic::AnalyticField;
use caplab_core::fixtures::Fixture;
use caplab_core::geometry::{boundary_values, is_monotone, is_starlike, rasterize, Curve, NodeKind, SegmentDiagnostic};
use caplab_core::laplace::{energy_report, solve_complex_with, solve_dirichlet_with, SolverConfig as LinearConfig};
use caplab_core::levelset::{build_graph, component_through, limit_sets, structure_checks, trace_level, Check};
use caplab_core::plaplace::{
    beltrami_distortion_estimate, central_gradient, min_interior_gradient, min_interior_gradient_at, solve_p_dirichlet,
    PharmonicConfig,
};
use caplab_core::{CapacitorSpec, ComplexField, GridSpec, Mask, Point, ScalarField, SolveReport, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DendriteAnalysis, Scenario, Seed, SolverKind};
use crate::error::{Error, Result};
use crate::io::{self, ContoursJson, CriticalJson};

/// One verdict. Failures always carry the measured value and the threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    /// How `measured` is compared with `threshold` (`<=`, `>=`, `==`, `>`).
    pub relation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn compare(name: &str, measured: f64, relation: &str, threshold: f64) -> Self {
        let passed = match relation {
            "<=" => measured <= threshold,
            ">=" => measured >= threshold,
            ">" => measured > threshold,
            _ => measured == threshold,
        };
        CheckResult { name: name.into(), passed, measured: Some(measured), threshold: Some(threshold), relation: relation.into(), detail: None }
    }

    fn failed(name: &str, detail: String) -> Self {
        CheckResult { name: name.into(), passed: false, measured: None, threshold: None, relation: "==".into(), detail: Some(detail) }
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub n: usize,
    pub h: f64,
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
    pub domain_nodes: usize,
    pub interior_nodes: usize,
    pub boundary_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveInfo {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub grid: GridInfo,
    pub solve: SolveInfo,
    pub data_real: bool,
    pub data_range: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct Report {
    pub scenario: String,
    pub passed: bool,
    pub config: Scenario,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub K: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_interior_gradient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beltrami_p95: Option<f64>,
    pub measurements: BTreeMap<String, Value>,
    pub checks: Vec<CheckResult>,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub field: ComplexField,
    pub contours: Option<ContoursJson>,
    pub critical: Option<Vec<CriticalJson>>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed
    }

    pub fn report_json(&self) -> String {
        io::to_json(&self.report)
    }

    /// Writes `field.csv`, `report.json` and, when computed, `contours.json`
    /// and `critical.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_file(&dir.join("field.csv"), &io::field_csv(&self.field))?;
        io::write_file(&dir.join("report.json"), &self.report_json())?;
        if let Some(c) = &self.contours {
            io::write_file(&dir.join("contours.json"), &io::to_json(c))?;
        }
        if let Some(c) = &self.critical {
            io::write_file(&dir.join("critical.json"), &io::to_json(c))?;
        }
        Ok(())
    }
}

/// Loaded geometry, grid and mask of a scenario.
pub struct Setup {
    pub fixture: Option<Fixture>,
    pub spec: CapacitorSpec,
    pub grid: GridSpec,
    pub mask: Arc<Mask>,
}

pub fn setup(sc: &Scenario) -> Result<Setup> {
    let fixture = sc.fixture()?;
    let spec = match (&fixture, &sc.geometry.file) {
        (Some(f), _) => f.spec()?,
        (None, Some(path)) => io::read_geometry(path)?,
        (None, None) => return Err(Error::Config("geometry needs a fixture or a file".into())),
    };
    let n = sc.grid.n;
    let grid = match (sc.grid.half, fixture) {
        (Some(half), _) => {
            let [cx, cy] = sc.grid.center.unwrap_or([0.0, 0.0]);
            GridSpec::square(cx, cy, half, n)?
        }
        (None, Some(f)) => f.grid(n)?,
        (None, None) => GridSpec::enclosing(&spec.outer, n, 4.0)?,
    };
    let mask = Arc::new(rasterize(&spec, &grid)?);
    Ok(Setup { fixture, spec, grid, mask })
}

/// Closed-form minimum of `|grad u|` over the domain.
fn oracle_min_gradient(f: &AnalyticField) -> Option<f64> {
    match f {
        AnalyticField::LogAnnulus { r, big_r } => Some(1.0 / (big_r * (big_r / r).ln())),
        AnalyticField::RadialPHarmonic(rp) => Some(rp.min_gradient()),
        _ => None,
    }
}

fn eligible(mask: &Mask, margin: u32) -> Vec<usize> {
    let dist = mask.boundary_distance();
    (0..mask.grid().len()).filter(|&k| mask.kind(k) == NodeKind::Interior && dist[k] >= margin).collect()
}

/// Order `m` of a rank-zero point: one plus the number of zeros (with
/// multiplicity) of `d_z` in the largest domain window around it.
fn order_at(wf: &WirtingerField, mask: &Mask, at: Point) -> Option<u32> {
    let g = mask.grid();
    let scale = wf.d_z_values().iter().filter(|v| v.re.is_finite()).fold(0.0f64, |m, v| m.max(v.norm()));
    for half in (1..=4).rev() {
        let Ok(w) = NodeWindow::around(g, at, half) else { continue };
        let inside = (w.j0..=w.j1).all(|j| (w.i0..=w.i1).all(|i| mask.in_domain(g.index(i, j))));
        if !inside {
            continue;
        }
        if let Ok(zeros) = argument_principle_zeros(wf.d_z_values(), g, w, 1e-12 * scale) {
            let total: i32 = zeros.iter().map(|z| z.multiplicity).sum();
            if total >= 0 {
                return Some(total as u32 + 1);
            }
        }
    }
    None
}

/// Classifies critical points and fills in the order of rank-zero points.
pub fn critical_report(wf: &WirtingerField, mask: &Mask, margin: u32) -> Result<CriticalReport> {
    let params = CriticalParams::for_field(wf, margin)?;
    let mut rep = classify_critical(wf, &params);
    for cp in rep.points.iter_mut().filter(|c| c.rank == Rank::Zero) {
        cp.order_m = order_at(wf, mask, cp.location);
    }
    Ok(rep)
}

struct Ctx<'a> {
    sc: &'a Scenario,
    setup: &'a Setup,
    scalar: Option<&'a ScalarField>,
    field: &'a ComplexField,
    data_range: f64,
    measurements: BTreeMap<String, Value>,
    checks: Vec<CheckResult>,
}

impl Ctx<'_> {
    fn measure(&mut self, k: &str, v: Value) {
        self.measurements.insert(k.into(), v);
    }

    fn real_field(&self, what: &str) -> Result<&ScalarField> {
        self.scalar.ok_or_else(|| Error::Config(format!("the {what} analysis needs a real field")))
    }
}

/// Runs a scenario (resolving it first).
pub fn run(scenario: &Scenario) -> Result<Outcome> {
    let sc = scenario.clone().resolve()?;
    let st = setup(&sc)?;
    let mask = st.mask.clone();
    let g = st.grid;
    let data = boundary_values(&st.spec, mask.clone())?;
    let data_real = data.values().all(|v| v.im == 0.0);
    let data_range = if data_real { data.re().range() } else { data.values().fold(0.0f64, |m, v| m.max((v - data.values().next().unwrap_or_default()).norm())) };
    let lin = LinearConfig { tol: sc.solver.tol, max_iter: sc.solver.max_iter };
    let kind = sc.solver.kind.unwrap_or(SolverKind::Harmonic);
    let mut pcfg = None;
    let (field, scalar, solve): (ComplexField, Option<ScalarField>, SolveReport) = match kind {
        SolverKind::Harmonic if data_real => {
            let (u, r) = solve_dirichlet_with(&data.re(), &lin)?;
            (u.to_complex(), Some(u), r)
        }
        SolverKind::Harmonic => {
            let (w, r) = solve_complex_with(&data, &lin)?;
            (w, None, r)
        }
        SolverKind::PHarmonic => {
            if !data_real {
                return Err(Error::Config("the p-harmonic solver needs real boundary data".into()));
            }
            let cfg = PharmonicConfig {
                p: sc.solver.p.unwrap_or(2.0),
                eps_reg: sc.solver.eps_reg,
                tol_outer: sc.solver.tol_outer,
                max_outer: sc.solver.max_outer,
            };
            cfg.validate()?;
            let (u, r) = solve_p_dirichlet(&data.re(), &cfg)?;
            pcfg = Some(cfg);
            (u.to_complex(), Some(u), r)
        }
    };

    let mut ctx = Ctx { sc: &sc, setup: &st, scalar: scalar.as_ref(), field: &field, data_range, measurements: BTreeMap::new(), checks: Vec::new() };
    ctx.checks.push(
        CheckResult::compare("solver_converged", solve.converged as u8 as f64, "==", 1.0)
            .with_detail(format!("{} iterations, final residual {:e}", solve.iterations, solve.final_residual)),
    );

    let wf = match &scalar {
        Some(u) => wirtinger_real(u),
        None => wirtinger(&field),
    };
    let a = &sc.analyses;
    if let Some(o) = &a.oracle {
        oracle(&mut ctx, o.tolerance)?;
    }
    if let Some(nv) = &a.nonvanishing {
        nonvanishing(&mut ctx, &wf, nv)?;
    }
    if let Some(v) = &a.vanishing {
        let u = ctx.real_field("vanishing")?;
        let node = g.nearest_node(Point::new(v.center[0], v.center[1]));
        let grad = central_gradient(u, node).map(|(gx, gy)| gx.hypot(gy));
        let thr = v.relative_threshold * ctx.data_range;
        match grad {
            Some(gn) => {
                ctx.measure("gradient_at_center", json!(gn));
                let q = g.point(node);
                ctx.checks.push(CheckResult::compare("vanishing", gn, "<=", thr).with_detail(format!("|grad u| at node ({}, {})", q.x, q.y)));
            }
            None => ctx.checks.push(CheckResult::failed("vanishing", "no central gradient at the node nearest the centre".into())),
        }
    }
    let mut crit: Option<CriticalReport> = None;
    let mut critical_json = None;
    if let Some(c) = &a.critical {
        let rep = critical_report(&wf, &mask, c.margin)?;
        let zero = rep.rank(Rank::Zero).count();
        let one = rep.rank(Rank::One).count();
        ctx.measure("rank_zero_count", json!(zero));
        ctx.measure("rank_one_count", json!(one));
        ctx.measure("tau_zero", json!(rep.params.tau_zero));
        ctx.measure("tau_jac", json!(rep.params.tau_jac));
        if let Some(n) = c.expect_rank_zero {
            ctx.checks.push(CheckResult::compare("critical.rank_zero_count", zero as f64, "==", n as f64));
        }
        if c.expect_no_rank_one {
            ctx.checks.push(CheckResult::compare("critical.rank_one_count", one as f64, "==", 0.0));
        }
        if let Some([cx, cy, r]) = c.rank_one_circle {
            let d = rank_one_hausdorff(&rep, &mask, Point::new(cx, cy), r, c.margin);
            let thr = c.hausdorff_cells * g.h();
            match d {
                Some(d) => {
                    ctx.measure("rank_one_hausdorff", json!(d));
                    ctx.checks.push(CheckResult::compare("critical.rank_one_locus", d, "<=", thr));
                }
                None => ctx.checks.push(CheckResult::failed("critical.rank_one_locus", "no rank-one points detected".into())),
            }
        }
        critical_json = Some(io::critical(&rep.points));
        crit = Some(rep);
    }
    if let Some(j) = &a.jacobian {
        let nodes = eligible(&mask, j.margin);
        let min = nodes.iter().filter_map(|&k| wf.jac(k)).fold(f64::INFINITY, f64::min);
        let bad = nodes.iter().filter(|&&k| wf.jac(k).is_some_and(|v| v <= 0.0)).count();
        ctx.measure("min_jacobian", json!(min));
        ctx.measure("nonpositive_jacobian_nodes", json!(bad));
        ctx.checks.push(CheckResult::compare("jacobian_positive", min, ">", 0.0).with_detail(format!("{} nodes with margin {}", nodes.len(), j.margin)));
    }
    let mut contours = None;
    if let Some(d) = &a.dendrite {
        let rep = match crit.take() {
            Some(r) => r,
            None => critical_report(&wf, &mask, caplab_core::analysis::DEFAULT_MARGIN)?,
        };
        contours = dendrite(&mut ctx, &rep, d)?;
    }
    if let Some(e) = &a.energy {
        let rep = energy_report(&field, &data);
        ctx.measure("energy", json!(rep.energy));
        ctx.measure("energy_cells", json!(rep.cells));
        ctx.measure("energy_rough_data", json!(rep.rough_data));
        ctx.measure("max_boundary_jump", json!(rep.max_boundary_jump));
        if let Some(want) = e.expected {
            let rel = (rep.energy - want).abs() / want.abs();
            ctx.checks.push(CheckResult::compare("energy", rel, "<=", e.rel_tol).with_detail(format!("energy {} vs expected {want}", rep.energy)));
        }
    }
    if let Some(s) = &a.starlike {
        starlike(&mut ctx, s.directions)?;
    }
    if a.monotone.is_some() {
        let m = &st.spec.outer_map;
        let diag = SegmentDiagnostic::of(m);
        ctx.measure("segment_diagnostic", json!({"monotone": diag.monotone, "collinear": diag.collinear, "degenerate": diag.degenerate, "contradiction": diag.contradiction}));
        ctx.checks.push(CheckResult::compare("monotone", is_monotone(m) as u8 as f64, "==", 1.0));
        ctx.checks.push(CheckResult::compare("segment_contradiction", diag.contradiction as u8 as f64, "==", 0.0));
    }

    let (mut p, mut big_k, mut min_grad, mut belt) = (None, None, None, None);
    if let (Some(cfg), Some(u)) = (&pcfg, &scalar) {
        p = Some(cfg.p);
        big_k = Some(cfg.k());
        min_grad = min_interior_gradient(u, 4).ok();
        let b = beltrami_distortion_estimate(u)?;
        belt = Some(b);
        if let Some(ba) = &a.beltrami {
            let thr = cfg.beltrami_bound() + ba.slack;
            ctx.checks.push(CheckResult::compare("beltrami", b, "<=", thr));
        }
    }

    let provenance = Provenance {
        grid: GridInfo {
            n: g.n,
            h: g.h(),
            xmin: g.xmin,
            ymin: g.ymin,
            xmax: g.xmax,
            ymax: g.ymax,
            domain_nodes: mask.count(|k| k.in_domain()),
            interior_nodes: mask.count(|k| k == NodeKind::Interior),
            boundary_nodes: mask.count(|k| k.is_boundary()),
        },
        solve: SolveInfo { iterations: solve.iterations, final_residual: solve.final_residual, converged: solve.converged },
        data_real,
        data_range,
    };
    let Ctx { measurements, checks, .. } = ctx;
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        scenario: sc.name.clone(),
        passed,
        config: sc.clone(),
        provenance,
        p,
        K: big_k,
        min_interior_gradient: min_grad,
        beltrami_p95: belt,
        measurements,
        checks,
    };
    Ok(Outcome { report, field, contours, critical: critical_json })
}

fn oracle(ctx: &mut Ctx, tolerance: f64) -> Result<()> {
    let Some(f) = ctx.setup.fixture.and_then(|f| f.analytic()) else {
        return Err(Error::Config("no closed-form solution for this geometry".into()));
    };
    let g = ctx.setup.grid;
    let mut max_err = 0.0f64;
    let mut at = Point::default();
    for k in ctx.field.domain() {
        let p = g.point(k);
        let Ok(w) = f.eval(p.to_complex()) else { continue };
        let e = (w.value - ctx.field.values()[k]).norm();
        if e > max_err {
            max_err = e;
            at = p;
        }
    }
    ctx.measure("max_oracle_error", json!(max_err));
    ctx.checks.push(CheckResult::compare("oracle", max_err, "<=", tolerance).with_detail(format!("worst at ({}, {})", at.x, at.y)));
    Ok(())
}

fn nonvanishing(ctx: &mut Ctx, wf: &WirtingerField, nv: &crate::config::NonVanishing) -> Result<()> {
    let oracle_min = ctx.setup.fixture.and_then(|f| f.analytic()).as_ref().and_then(oracle_min_gradient);
    let measured = match ctx.scalar {
        Some(u) => {
            let (m, at) = min_interior_gradient_at(u, nv.margin)?;
            ctx.measure("min_interior_gradient_at", json!([at.x, at.y]));
            m
        }
        None => {
            // ||dH|| >= | |H_z| - |H_zbar| |; report the norm of the differential
            let nodes = eligible(ctx.setup.mask.as_ref(), nv.margin);
            nodes
                .iter()
                .filter_map(|&k| Some(wf.d_z(k)?.norm() + wf.d_zbar(k)?.norm()))
                .fold(f64::INFINITY, f64::min)
        }
    };
    ctx.measure("min_interior_gradient", json!(measured));
    if let Some(o) = oracle_min {
        ctx.measure("oracle_min_gradient", json!(o));
    }
    let mut any = false;
    if let Some(t) = nv.threshold {
        any = true;
        ctx.checks.push(CheckResult::compare("nonvanishing", measured, ">=", t));
    }
    if let Some(frac) = nv.min_fraction_of_oracle {
        any = true;
        match oracle_min {
            Some(o) => ctx.checks.push(CheckResult::compare("nonvanishing.fraction_of_oracle", measured, ">=", frac * o)),
            None => ctx.checks.push(CheckResult::failed("nonvanishing.fraction_of_oracle", "no closed-form minimum".into())),
        }
    }
    if let Some(tol) = nv.oracle_rel_tol {
        any = true;
        match oracle_min {
            Some(o) => ctx.checks.push(
                CheckResult::compare("nonvanishing.oracle_rel_error", (measured - o).abs() / o, "<=", tol)
                    .with_detail(format!("min gradient {measured} vs closed form {o}")),
            ),
            None => ctx.checks.push(CheckResult::failed("nonvanishing.oracle_rel_error", "no closed-form minimum".into())),
        }
    }
    if !any {
        ctx.checks.push(CheckResult::compare("nonvanishing", measured, ">", 0.0));
    }
    Ok(())
}

/// Hausdorff distance between the detected rank-one locus and the part of
/// the circle the detector can see (nodes with the detection margin).
fn rank_one_hausdorff(rep: &CriticalReport, mask: &Mask, c: Point, r: f64, margin: u32) -> Option<f64> {
    let locus = rep.rank_one_locus();
    if locus.is_empty() {
        return None;
    }
    let g = mask.grid();
    let dist = mask.boundary_distance();
    let samples = 4096;
    let arc: Vec<Point> = (0..samples)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            Point::new(c.x + r * t.cos(), c.y + r * t.sin())
        })
        .filter(|&p| {
            let k = g.nearest_node(p);
            mask.kind(k) == NodeKind::Interior && dist[k] >= margin
        })
        .collect();
    let to_circle = locus.iter().map(|p| (p.dist(c) - r).abs()).fold(0.0f64, f64::max);
    let to_locus = arc
        .iter()
        .map(|a| locus.iter().map(|p| p.dist(*a)).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    Some(to_circle.max(to_locus))
}

fn interpolate_complex(f: &ComplexField, p: Point) -> Option<C64> {
    Some(C64::new(f.re().interpolate(p)?, f.im().interpolate(p)?))
}

fn dendrite(ctx: &mut Ctx, rep: &CriticalReport, d: &DendriteAnalysis) -> Result<Option<ContoursJson>> {
    let st = ctx.setup;
    let h = st.grid.h();
    let zeros: Vec<Point> = rep.rank(Rank::Zero).map(|c| c.location).collect();
    let seed = match &d.seed {
        Seed::Point([x, y]) => Point::new(*x, *y),
        Seed::Keyword(_) => match zeros.first() {
            Some(p) => *p,
            None => {
                ctx.checks.push(CheckResult::failed("dendrite", "auto seed: no rank-zero critical point".into()));
                return Ok(None);
            }
        },
    };
    let traced: ScalarField = match ctx.scalar {
        Some(u) => u.clone(),
        None => {
            let v = interpolate_complex(ctx.field, seed).ok_or_else(|| Error::Config("dendrite seed outside the domain".into()))?;
            let centre = st.spec.hole_values.first().copied().unwrap_or_default();
            let tau = 1e-9 * st.spec.outer_map.diameter().max(1.0);
            project_w(ctx.field, choose_coefficients(v, centre, tau))
        }
    };
    let level = match d.level {
        Some(l) => l,
        None => traced.interpolate(seed).ok_or_else(|| Error::Config("dendrite seed outside the domain".into()))?,
    };
    ctx.measure("dendrite_level", json!(level));
    let soup = trace_level(&traced, level);
    let comp = match component_through(&soup, seed, &zeros, &st.mask) {
        Ok(c) => c,
        Err(e) => {
            ctx.checks.push(CheckResult::failed("dendrite", e.to_string()));
            return Ok(None);
        }
    };
    let hole_points: Vec<Point> = st.spec.holes.iter().map(|c| c.interior_point()).collect();
    let graph = build_graph(&comp, &st.mask, &hole_points);
    let at_critical = zeros.iter().any(|z| z.dist(seed) <= 2.0 * h);
    let two_constant = st.fixture.is_some_and(|f| f.is_two_constant());
    let dendrone = d.capacitor_dendrone.unwrap_or(two_constant && at_critical);
    let checks = structure_checks(&graph, &comp, dendrone);
    for (name, c) in checks.entries() {
        match c {
            Check::Pass => ctx.checks.push(CheckResult::compare(&format!("dendrite.{name}"), 1.0, "==", 1.0)),
            Check::Fail(m) => {
                let (measured, threshold) = match name {
                    "handshake" => (graph.degrees.iter().sum::<usize>() as f64, 2.0 * graph.e as f64),
                    "euler" => (graph.f as f64, graph.e as f64 - graph.v as f64 + 2.0),
                    "bounded_faces" => (graph.bounded_faces.len() as f64, 2.0),
                    _ => (0.0, 1.0),
                };
                ctx.checks.push(CheckResult::compare(&format!("dendrite.{name}"), measured, "==", threshold).with_detail(m.clone()));
                ctx.checks.last_mut().expect("just pushed").passed = false;
            }
            Check::Skipped(_) => {}
        }
    }
    let ls = limit_sets(&comp, &st.mask);
    if ls.sets.len() >= 2 && ctx.sc.solver.kind == Some(SolverKind::Harmonic) {
        ctx.checks.push(CheckResult::compare("dendrite.limit_sets_disjoint", ls.disjoint as u8 as f64, "==", 1.0));
    }
    let seed_node = (0..comp.node_points.len())
        .filter(|&k| comp.node_critical[k])
        .min_by(|&a, &b| comp.node_points[a].dist(seed).total_cmp(&comp.node_points[b].dist(seed)));
    if let Some(want) = d.expect_node_degree {
        match seed_node {
            Some(k) => ctx.checks.push(CheckResult::compare("dendrite.node_degree", comp.node_degree(k) as f64, "==", want as f64)),
            None => ctx.checks.push(CheckResult::failed("dendrite.node_degree", "no critical node on the component".into())),
        }
    }
    if let Some(want) = d.expect_bounded_faces {
        ctx.checks.push(CheckResult::compare("dendrite.bounded_face_count", graph.bounded_faces.len() as f64, "==", want as f64));
    }
    ctx.measure(
        "dendrite",
        json!({
            "V": graph.v, "E": graph.e, "F": graph.f,
            "nodes": graph.node_count, "terminals": graph.terminal_count,
            "bounded_faces": graph.bounded_faces.len(), "domain_regions": graph.domain_regions,
            "limit_sets_disjoint": ls.disjoint,
        }),
    );
    Ok(Some(io::contours(&comp, &graph, &checks)))
}

fn starlike(ctx: &mut Ctx, directions: usize) -> Result<()> {
    let spec = &ctx.setup.spec;
    let pts: Vec<Point> = spec.outer_map.values().map(|v| Point::new(v.re, v.im)).collect();
    let diameter = spec.outer_map.diameter();
    if diameter == 0.0 {
        ctx.checks.push(CheckResult::compare("starlike", 1.0, "==", 1.0).with_detail("degenerate (constant) image"));
        return Ok(());
    }
    let centre = match spec.hole_values.first() {
        Some(v) => Point::new(v.re, v.im),
        None => pts.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / pts.len() as f64),
    };
    let curve = Curve::closed(pts.clone()).or_else(|_| Curve::open(pts))?;
    let rep = is_starlike(&[curve], centre, directions, 1e-9 * diameter)?;
    ctx.measure("starlike_worst_count", json!(rep.worst_component_count));
    ctx.checks.push(
        CheckResult::compare("starlike", rep.worst_component_count as f64, "<=", 2.0)
            .with_detail(format!("worst direction {} rad", rep.worst_direction)),
    );
    Ok(())
}
