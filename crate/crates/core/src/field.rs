//! Grid functions on a mask.
//!
//! Values are stored densely for the whole grid; exterior nodes hold NaN so
//! that accidental reads are loud.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::geometry::{GridSpec, Mask, Point};
use crate::{Error, Result, C64};

/// Value type of a grid field.
pub trait FieldValue: Copy + core::fmt::Debug + PartialEq {
    /// Placeholder stored at exterior nodes.
    const ABSENT: Self;
    fn is_finite_value(&self) -> bool;
}

impl FieldValue for f64 {
    const ABSENT: Self = f64::NAN;
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for C64 {
    const ABSENT: Self = C64::new(f64::NAN, f64::NAN);
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    mask: Arc<Mask>,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<C64>;

impl<T: FieldValue> Field<T> {
    /// Field from one value per grid node; exterior entries are replaced by
    /// the absent marker, domain entries must be finite.
    pub fn new(mask: Arc<Mask>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != mask.grid().len() {
            return Err(Error::Domain(alloc::format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                mask.grid().len()
            )));
        }
        for (idx, v) in values.iter_mut().enumerate() {
            if !mask.in_domain(idx) {
                *v = T::ABSENT;
            } else if !v.is_finite_value() {
                let p = mask.grid().point(idx);
                return Err(Error::Domain(alloc::format!("non-finite value at ({}, {})", p.x, p.y)));
            }
        }
        Ok(Field { mask, values })
    }

    /// Samples `f` at every domain node.
    pub fn from_fn(mask: Arc<Mask>, f: impl Fn(Point) -> T) -> Self {
        let values = (0..mask.grid().len())
            .map(|idx| if mask.in_domain(idx) { f(mask.grid().point(idx)) } else { T::ABSENT })
            .collect();
        Field { mask, values }
    }

    /// Like [`Field::from_fn`] for fallible samplers.
    pub fn try_from_fn(mask: Arc<Mask>, f: impl Fn(Point) -> Result<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(mask.grid().len());
        for idx in 0..mask.grid().len() {
            values.push(if mask.in_domain(idx) { f(mask.grid().point(idx))? } else { T::ABSENT });
        }
        Ok(Field { mask, values })
    }

    pub fn mask(&self) -> &Arc<Mask> {
        &self.mask
    }

    pub fn grid(&self) -> &GridSpec {
        self.mask.grid()
    }

    /// Dense values, NaN outside the domain.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Option<T> {
        if self.mask.in_domain(idx) {
            Some(self.values[idx])
        } else {
            None
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Option<T> {
        self.get(self.grid().index(i, j))
    }

    /// Indices of domain nodes in storage order.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&k| self.mask.in_domain(k))
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| if self.mask.in_domain(k) { f(v) } else { U::ABSENT })
            .collect();
        Field { mask: self.mask.clone(), values }
    }

    pub fn zip_with<U: FieldValue, V: FieldValue>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Result<Field<V>> {
        if !Arc::ptr_eq(&self.mask, &other.mask) && *self.mask != *other.mask {
            return Err(Error::Domain("fields live on different masks".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (&a, &b))| if self.mask.in_domain(k) { f(a, b) } else { V::ABSENT })
            .collect();
        Ok(Field { mask: self.mask.clone(), values })
    }
}

impl ScalarField {
    pub fn min_max(&self) -> (f64, f64) {
        self.domain()
            .map(|k| self.values[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Largest absolute difference over the domain.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        let d = self.zip_with(other, |a, b| (a - b).abs())?;
        Ok(d.domain().map(|k| d.values[k]).fold(0.0, f64::max))
    }

    /// Bilinear interpolation; `None` unless all four cell corners are in the domain.
    pub fn interpolate(&self, p: Point) -> Option<f64> {
        let g = self.grid();
        let h = g.h();
        let (fx, fy) = ((p.x - g.xmin) / h, (p.y - g.ymin) / h);
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = ((fx.floor() as usize).min(g.n - 2), (fy.floor() as usize).min(g.n - 2));
        let (s, t) = (fx - i as f64, fy - j as f64);
        if s > 1.0 || t > 1.0 {
            return None;
        }
        let v00 = self.at(i, j)?;
        let v10 = self.at(i + 1, j)?;
        let v01 = self.at(i, j + 1)?;
        let v11 = self.at(i + 1, j + 1)?;
        Some((1.0 - t) * ((1.0 - s) * v00 + s * v10) + t * ((1.0 - s) * v01 + s * v11))
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| C64::new(v, 0.0))
    }
}

impl ComplexField {
    pub fn from_parts(re: &ScalarField, im: &ScalarField) -> Result<Self> {
        re.zip_with(im, C64::new)
    }

    pub fn re(&self) -> ScalarField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|v| v.im)
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|v| v.conj())
    }

    /// Largest modulus of the difference over the domain.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        let d = self.zip_with(other, |a, b| (a - b).norm())?;
        Ok(d.domain().map(|k| d.values[k]).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mask() -> Arc<Mask> {
        Arc::new(Mask::from_predicate(GridSpec::square(0.0, 0.0, 1.0, 17).unwrap(), |p| p.norm() < 0.9))
    }

    #[test]
    fn exterior_is_absent() {
        let m = mask();
        let f = ScalarField::from_fn(m.clone(), |p| p.x);
        assert_eq!(f.get(0), None);
        assert!(f.values()[0].is_nan());
        let c = m.grid().nearest_node(Point::new(0.0, 0.0));
        assert_eq!(f.get(c), Some(0.0));
        assert_eq!(f.domain().count(), m.count(|k| k.in_domain()));
    }

    #[test]
    fn new_validates() {
        let m = mask();
        assert!(ScalarField::new(m.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![1.0; m.grid().len()];
        let c = m.grid().nearest_node(Point::new(0.0, 0.0));
        v[c] = f64::INFINITY;
        assert!(ScalarField::new(m.clone(), v.clone()).is_err());
        v[c] = 1.0;
        v[0] = f64::INFINITY;
        assert!(ScalarField::new(m, v).is_ok());
    }

    #[test]
    fn bilinear_reproduces_linear() {
        let f = ScalarField::from_fn(mask(), |p| 2.0 * p.x - p.y + 0.5);
        let p = Point::new(0.123, -0.321);
        assert!((f.interpolate(p).unwrap() - (2.0 * p.x - p.y + 0.5)).abs() < 1e-14);
        assert_eq!(f.interpolate(Point::new(0.99, 0.99)), None);
    }

    #[test]
    fn complex_parts_roundtrip() {
        let m = mask();
        let z = ComplexField::from_fn(m, |p| p.to_complex());
        let back = ComplexField::from_parts(&z.re(), &z.im()).unwrap();
        assert_eq!(back.max_abs_diff(&z).unwrap(), 0.0);
        assert_eq!(z.conj().im().max_abs_diff(&z.im().map(|v| -v)).unwrap(), 0.0);
    }
}
