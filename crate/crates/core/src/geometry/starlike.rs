use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use super::{Curve, Point};
use crate::{Error, Result};

/// Outcome of a starlike test: the largest number of connected pieces in
/// which a line through the centre meets the continuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarlikeReport {
    pub is_starlike: bool,
    pub worst_direction: f64,
    pub worst_component_count: usize,
}

/// Number of connected pieces of `line ∩ continuum` for the line through
/// `center` with direction angle `phi`.
pub(crate) fn line_components(continuum: &[Curve], center: Point, phi: f64, tau_merge: f64) -> usize {
    let (s, c) = phi.sin_cos();
    let dir = Point::new(c, s);
    let nrm = Point::new(-s, c);
    let scale = continuum
        .iter()
        .flat_map(|cv| cv.points())
        .fold(0.0f64, |m, p| m.max((*p - center).norm()))
        .max(1.0);
    let eps = 1e-13 * scale;
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for curve in continuum {
        for (a, b) in curve.segments() {
            let (sa, sb) = (nrm.dot(a - center), nrm.dot(b - center));
            let (ta, tb) = (dir.dot(a - center), dir.dot(b - center));
            if sa.abs() <= eps && sb.abs() <= eps {
                pieces.push((ta.min(tb), ta.max(tb)));
            } else if sa.abs() <= eps {
                pieces.push((ta, ta));
            } else if sb.abs() <= eps {
                pieces.push((tb, tb));
            } else if (sa < 0.0) != (sb < 0.0) {
                let t = ta + (tb - ta) * sa / (sa - sb);
                pieces.push((t, t));
            }
        }
    }
    if pieces.is_empty() {
        return 0;
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut count = 1;
    let mut end = pieces[0].1;
    for &(lo, hi) in &pieces[1..] {
        if lo - end > tau_merge {
            count += 1;
        }
        end = end.max(hi);
    }
    count
}

/// Checks the starlike property of a continuum (closed curves and/or open
/// polylines) about `center` on `directions` equally spaced lines.
///
/// Intersection pieces closer than `tau_merge` are merged. The centre need
/// not belong to the continuum.
pub fn is_starlike(
    continuum: &[Curve],
    center: Point,
    directions: usize,
    tau_merge: f64,
) -> Result<StarlikeReport> {
    if continuum.is_empty() {
        return Err(Error::Empty("continuum"));
    }
    if directions < 360 {
        return Err(Error::Domain("starlike check needs at least 360 directions".into()));
    }
    let mut worst = (0usize, 0.0f64);
    for k in 0..directions {
        let phi = core::f64::consts::PI * k as f64 / directions as f64;
        let count = line_components(continuum, center, phi, tau_merge);
        if count > worst.0 {
            worst = (count, phi);
        }
    }
    Ok(StarlikeReport {
        is_starlike: worst.0 <= 2,
        worst_direction: worst.1,
        worst_component_count: worst.0,
    })
}
