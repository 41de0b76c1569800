//! Dirichlet data attached to a rasterized mask.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{CapacitorSpec, CurveId, Mask, Point};
use crate::{Error, Result, C64};

/// Boundary data on a mask.
///
/// `anchor_values` are the values at the nearest curve point of every
/// boundary node (the node's nominal Dirichlet value); `link_values` are the
/// values at the exact crossing points used by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData<T> {
    mask: Arc<Mask>,
    anchor_values: Vec<T>,
    link_values: Vec<T>,
}

pub type ScalarBoundary = BoundaryData<f64>;
pub type ComplexBoundary = BoundaryData<C64>;

impl<T: Copy> BoundaryData<T> {
    pub fn new(mask: Arc<Mask>, anchor_values: Vec<T>, link_values: Vec<T>) -> Result<Self> {
        if anchor_values.len() != mask.anchors().len() || link_values.len() != mask.links().len() {
            return Err(Error::InvalidGeometry(format!(
                "boundary data sizes ({}, {}) do not match mask ({}, {})",
                anchor_values.len(),
                link_values.len(),
                mask.anchors().len(),
                mask.links().len()
            )));
        }
        Ok(BoundaryData { mask, anchor_values, link_values })
    }

    /// Data sampled from a function of (curve point, curve, arc-length parameter).
    pub fn from_fn(mask: Arc<Mask>, f: impl Fn(Point, CurveId, f64) -> T) -> Self {
        let anchor_values = mask.anchors().iter().map(|a| f(a.point, a.curve, a.param)).collect();
        let link_values = mask.links().iter().map(|l| f(l.point, l.curve, l.param)).collect();
        BoundaryData { mask, anchor_values, link_values }
    }

    /// Data sampled from a function of position only.
    pub fn from_points(mask: Arc<Mask>, f: impl Fn(Point) -> T) -> Self {
        Self::from_fn(mask, |p, _, _| f(p))
    }

    pub fn mask(&self) -> &Arc<Mask> {
        &self.mask
    }

    pub fn anchor_values(&self) -> &[T] {
        &self.anchor_values
    }

    pub fn link_values(&self) -> &[T] {
        &self.link_values
    }

    /// Nominal value at a boundary node; `None` for any other node.
    pub fn node_value(&self, idx: usize) -> Option<T> {
        self.mask
            .anchors()
            .binary_search_by_key(&idx, |a| a.node)
            .ok()
            .map(|k| self.anchor_values[k])
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> BoundaryData<U> {
        BoundaryData {
            mask: self.mask.clone(),
            anchor_values: self.anchor_values.iter().map(|&v| f(v)).collect(),
            link_values: self.link_values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two data sets on the same mask.
    pub fn zip_with<U: Copy, V: Copy>(
        &self,
        other: &BoundaryData<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<BoundaryData<V>> {
        if !Arc::ptr_eq(&self.mask, &other.mask) && *self.mask != *other.mask {
            return Err(Error::InvalidGeometry("boundary data live on different masks".into()));
        }
        Ok(BoundaryData {
            mask: self.mask.clone(),
            anchor_values: self.anchor_values.iter().zip(&other.anchor_values).map(|(&a, &b)| f(a, b)).collect(),
            link_values: self.link_values.iter().zip(&other.link_values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.anchor_values.iter().chain(&self.link_values).copied()
    }
}

impl ScalarBoundary {
    /// `max - min` over all boundary values.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

impl ComplexBoundary {
    pub fn re(&self) -> ScalarBoundary {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarBoundary {
        self.map(|v| v.im)
    }

    pub fn conj(&self) -> ComplexBoundary {
        self.map(|v| v.conj())
    }
}

/// Dirichlet data of a capacitor: hole constants and the outer boundary map.
pub fn boundary_values(spec: &CapacitorSpec, mask: Arc<Mask>) -> Result<ComplexBoundary> {
    if mask.hole_count() != spec.holes.len() {
        return Err(Error::InvalidGeometry("mask was not produced from this capacitor".into()));
    }
    Ok(BoundaryData::from_fn(mask, |_, curve, t| match curve {
        CurveId::Outer => spec.outer_map.eval(t),
        CurveId::Hole(k) => spec.hole_values[k],
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, BoundaryMap, Curve, GridSpec, NodeKind};
    use alloc::vec;

    fn annulus_spec(outer_map: BoundaryMap, outer_r: f64) -> CapacitorSpec {
        CapacitorSpec::new(
            Curve::circle(Point::default(), outer_r, 1024).unwrap(),
            vec![Curve::circle(Point::default(), 1.0, 512).unwrap()],
            vec![C64::new(1.0, 0.0)],
            outer_map,
        )
        .unwrap()
    }

    #[test]
    fn constants_on_annulus() {
        let spec = annulus_spec(BoundaryMap::constant(C64::new(0.0, 0.0)), 2.0);
        let mask = Arc::new(rasterize(&spec, &GridSpec::square(0.0, 0.0, 2.2, 65).unwrap()).unwrap());
        let data = boundary_values(&spec, mask.clone()).unwrap();
        for idx in 0..mask.grid().len() {
            match mask.kind(idx) {
                NodeKind::HoleBoundary(0) => assert_eq!(data.node_value(idx), Some(C64::new(1.0, 0.0))),
                NodeKind::OuterBoundary => assert_eq!(data.node_value(idx), Some(C64::new(0.0, 0.0))),
                _ => assert_eq!(data.node_value(idx), None),
            }
        }
    }

    #[test]
    fn identity_map_on_unit_circle() {
        let spec = CapacitorSpec::new(
            Curve::circle(Point::default(), 1.0, 1024).unwrap(),
            vec![],
            vec![],
            BoundaryMap::from_fn(256, |t| C64::from_polar(1.0, core::f64::consts::TAU * t)).unwrap(),
        )
        .unwrap();
        let grid = GridSpec::square(0.0, 0.0, 1.2, 65).unwrap();
        let mask = Arc::new(rasterize(&spec, &grid).unwrap());
        let data = boundary_values(&spec, mask.clone()).unwrap();
        for (a, v) in mask.anchors().iter().zip(data.anchor_values()) {
            assert!((v.norm() - 1.0).abs() <= grid.h());
            // the map is the identity up to polygon sampling
            assert!((*v - a.point.to_complex()).norm() < 1e-3);
        }
    }

    #[test]
    fn image_circle_of_capacitor_example() {
        // H(3e^{it}) = -2 lambda log 3 + (3 - 1/3) e^{it}, a = 2
        let lambda = 1.25;
        let c = -2.0 * lambda * 3.0f64.ln();
        let map = BoundaryMap::from_fn(512, |t| C64::new(c, 0.0) + C64::from_polar(3.0 - 1.0 / 3.0, core::f64::consts::TAU * t)).unwrap();
        let mut spec = annulus_spec(map, 3.0);
        spec.hole_values = vec![C64::new(0.0, 0.0)];
        let mask = Arc::new(rasterize(&spec, &GridSpec::square(0.0, 0.0, 3.2, 65).unwrap()).unwrap());
        let data = boundary_values(&spec, mask).unwrap();
        for v in data.anchor_values().iter().chain(data.link_values()) {
            if v.norm() == 0.0 {
                continue;
            }
            assert!(((v - C64::new(c, 0.0)).norm() - 8.0 / 3.0).abs() < 1e-3);
        }
    }

    #[test]
    fn linear_combination() {
        let spec = annulus_spec(BoundaryMap::constant(C64::new(0.0, 2.0)), 2.0);
        let mask = Arc::new(rasterize(&spec, &GridSpec::square(0.0, 0.0, 2.4, 33).unwrap()).unwrap());
        let data = boundary_values(&spec, mask).unwrap();
        let sum = data.re().zip_with(&data.im(), |a, b| a + b).unwrap();
        assert_eq!(sum.range(), 1.0);
        assert_eq!(data.conj().im().min_max(), (-2.0, 0.0));
    }
}
