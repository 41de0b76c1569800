//! Discrete monotonicity of sampled boundary maps.


use super::BoundaryMap;

/// Relative tolerance for value equality (times the data diameter).
pub const TAU_EQ_REL: f64 = 1e-9;

/// Discrete monotonicity with the default tolerance `1e-9 * diameter`.
pub fn is_monotone(map: &BoundaryMap) -> bool {
    is_monotone_with(map, TAU_EQ_REL * map.diameter())
}

/// A sampled map is monotone when, for every sample value, the samples that
/// map within `tau` of it form one circularly contiguous block.
pub fn is_monotone_with(map: &BoundaryMap, tau: f64) -> bool {
    let values: alloc::vec::Vec<_> = map.values().collect();
    let n = values.len();
    for &y in &values {
        let hit = |j: usize| (values[j] - y).norm() <= tau;
        // count block starts in circular order
        let starts = (0..n).filter(|&j| hit(j) && !hit((j + n - 1) % n)).count();
        if starts > 1 {
            return false;
        }
    }
    true
}

/// Are all sample values collinear (within `1e-9 * diameter`)?
pub fn segment_image_check(map: &BoundaryMap) -> bool {
    let values: alloc::vec::Vec<_> = map.values().collect();
    let mut far = (0.0f64, 0usize, 0usize);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d > far.0 {
                far = (d, i, j);
            }
        }
    }
    let tau = TAU_EQ_REL * far.0;
    if far.0 == 0.0 {
        return true;
    }
    let (a, b) = (values[far.1], values[far.2]);
    let u = (b - a) / far.0;
    values.iter().all(|&v| {
        let w = v - a;
        (u.re * w.im - u.im * w.re).abs() <= tau
    })
}

/// Combined check: a monotone map of a closed curve onto a nondegenerate
/// segment cannot exist, so `contradiction` flags inconsistent data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentDiagnostic {
    pub monotone: bool,
    pub collinear: bool,
    pub degenerate: bool,
    pub contradiction: bool,
}

impl SegmentDiagnostic {
    pub fn of(map: &BoundaryMap) -> Self {
        let monotone = is_monotone(map);
        let collinear = segment_image_check(map);
        let degenerate = map.diameter() == 0.0;
        SegmentDiagnostic { monotone, collinear, degenerate, contradiction: monotone && collinear && !degenerate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use alloc::vec::Vec;
    use core::f64::consts::TAU;
    use proptest::prelude::*;

    fn circle_map(turns: f64, n: usize) -> BoundaryMap {
        BoundaryMap::from_fn(n, |t| C64::from_polar(1.0, TAU * turns * t)).unwrap()
    }

    #[test]
    fn identity_is_monotone() {
        assert!(is_monotone(&circle_map(1.0, 64)));
        assert!(!segment_image_check(&circle_map(1.0, 64)));
    }

    #[test]
    fn collapsed_arc_is_monotone() {
        let m = BoundaryMap::from_fn(64, |t| {
            if t <= 0.25 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, TAU * (t - 0.25) / 0.75)
            }
        })
        .unwrap();
        assert!(is_monotone(&m));
    }

    #[test]
    fn double_cover_is_not_monotone() {
        let m = circle_map(2.0, 64);
        // preimage blocks enumerated directly: samples j and j + 32 coincide
        let v: Vec<_> = m.values().collect();
        assert!((v[3] - v[35]).norm() < 1e-12 && (v[3] - v[4]).norm() > 0.1);
        assert!(!is_monotone(&m));
    }

    #[test]
    fn constant_map() {
        let m = BoundaryMap::constant(C64::new(0.5, -1.0));
        assert!(segment_image_check(&m));
        assert!(is_monotone(&m));
        let d = SegmentDiagnostic::of(&m);
        assert!(d.degenerate && !d.contradiction);
    }

    #[test]
    fn folded_segment_map() {
        let m = BoundaryMap::from_fn(64, |t| C64::new((TAU * t).cos().abs(), 0.0)).unwrap();
        let d = SegmentDiagnostic::of(&m);
        assert!(d.collinear);
        assert!(!d.monotone);
        assert!(!d.contradiction);
    }

    #[test]
    fn two_level_map_flags_contradiction() {
        let m = BoundaryMap::from_fn(32, |t| C64::new(if t < 0.5 { 0.0 } else { 1.0 }, 0.0)).unwrap();
        let d = SegmentDiagnostic::of(&m);
        assert!(d.monotone && d.collinear && d.contradiction);
    }

    proptest! {
        #[test]
        fn invariant_under_rotation_and_reversal(
            turns in 1usize..4,
            shift in 0usize..48,
            collapse in 0.0f64..0.5,
        ) {
            let n = 48;
            let vals: Vec<C64> = (0..n).map(|k| {
                let t = k as f64 / n as f64;
                let s = if t < collapse { 0.0 } else { (t - collapse) / (1.0 - collapse) };
                C64::from_polar(1.0, TAU * turns as f64 * s)
            }).collect();
            let mk = |v: Vec<C64>| BoundaryMap::new(v.into_iter().enumerate().map(|(k, v)| (k as f64 / n as f64, v)).collect()).unwrap();
            let base = is_monotone(&mk(vals.clone()));
            let mut rot = vals.clone();
            rot.rotate_left(shift);
            let mut rev = vals.clone();
            rev.reverse();
            prop_assert_eq!(base, is_monotone(&mk(rot)));
            prop_assert_eq!(base, is_monotone(&mk(rev)));
        }
    }
}
