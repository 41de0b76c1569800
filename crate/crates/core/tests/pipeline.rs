use std::sync::Arc;

use caplab_core::analysis::{classify_critical, wirtinger_real, CriticalParams, Rank};
use caplab_core::fixtures::Fixture;
use caplab_core::geometry::{boundary_values, rasterize, BoundaryMap, CapacitorSpec, Curve, GridSpec, NodeKind};
use caplab_core::laplace::solve_dirichlet;
use caplab_core::levelset::{build_graph, component_through, structure_checks, trace_level};
use caplab_core::plaplace::{solve_p_dirichlet, PharmonicConfig};
use caplab_core::{Point, C64};
use proptest::prelude::*;

#[test]
fn cassini_dendrone_from_scratch() {
    let f = Fixture::parse("cassini").unwrap();
    let spec = f.spec().unwrap();
    let mask = Arc::new(rasterize(&spec, &f.grid(129).unwrap()).unwrap());
    let (u, rep) = solve_dirichlet(&boundary_values(&spec, mask.clone()).unwrap().re()).unwrap();
    assert!(rep.converged);

    let wf = wirtinger_real(&u);
    let crit = classify_critical(&wf, &CriticalParams::for_field(&wf, 2).unwrap());
    let zeros: Vec<Point> = crit.rank(Rank::Zero).map(|c| c.location).collect();
    assert_eq!(zeros.len(), 1);
    assert!(zeros[0].norm() <= 2.0 * mask.grid().h());

    let level = u.interpolate(Point::default()).unwrap();
    let comp = component_through(&trace_level(&u, level), Point::default(), &zeros, &mask).unwrap();
    let holes: Vec<Point> = spec.holes.iter().map(|c| c.interior_point()).collect();
    let g = build_graph(&comp, &mask, &holes);
    assert_eq!((g.v, g.e, g.f), (1, 2, 3));
    let checks = structure_checks(&g, &comp, true);
    assert!(checks.all_passed(), "{checks:?}");
}

fn eccentric_annulus(dx: f64, n: usize) -> (CapacitorSpec, GridSpec) {
    let outer = Curve::circle(Point::default(), 2.0, 512).unwrap();
    let hole = Curve::circle(Point::new(dx, 0.0), 0.6, 256).unwrap();
    let grid = GridSpec::square(0.0, 0.0, 2.5, n).unwrap();
    (CapacitorSpec::new(outer, vec![hole], vec![C64::new(0.0, 0.0)], BoundaryMap::constant(C64::new(1.0, 0.0))).unwrap(), grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // interior values never leave the range of the boundary data
    #[test]
    fn harmonic_maximum_principle(
        dx in -0.8f64..0.8,
        c in -2.0f64..2.0,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        k in 1usize..5,
    ) {
        let (mut spec, grid) = eccentric_annulus(dx, 49);
        spec.hole_values = vec![C64::new(c, 0.0)];
        spec.outer_map = BoundaryMap::from_fn(256, |t| {
            let th = std::f64::consts::TAU * t * k as f64;
            C64::new(a * th.cos() + b * th.sin(), 0.0)
        }).unwrap();
        let mask = Arc::new(rasterize(&spec, &grid).unwrap());
        let data = boundary_values(&spec, mask.clone()).unwrap().re();
        let (lo, hi) = data.values().fold((c, c), |(l, h), v| (l.min(v), h.max(v)));
        let (u, _) = solve_dirichlet(&data).unwrap();
        let slack = 1e-9 * (hi - lo).max(1.0);
        for kk in u.domain().filter(|&kk| mask.kind(kk) == NodeKind::Interior) {
            let v = u.values()[kk];
            prop_assert!(v >= lo - slack && v <= hi + slack, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn p_harmonic_maximum_principle(dx in -0.8f64..0.8, p in 1.5f64..4.0) {
        let (spec, grid) = eccentric_annulus(dx, 33);
        let mask = Arc::new(rasterize(&spec, &grid).unwrap());
        let data = boundary_values(&spec, mask.clone()).unwrap().re();
        let (u, rep) = solve_p_dirichlet(&data, &PharmonicConfig::new(p).unwrap()).unwrap();
        prop_assert!(rep.converged);
        for kk in u.domain().filter(|&kk| mask.kind(kk) == NodeKind::Interior) {
            let v = u.values()[kk];
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&v), "{v}");
        }
    }
}
