//! Zero counting for complex grid functions by the argument principle.
//!
//! The winding number along a window border is accumulated from quadrant
//! transitions, which is integer-exact and insensitive to modulus noise.
//! Windows with nonzero winding are bisected until they span at most two
//! cells per side.

use alloc::format;
use alloc::vec::Vec;

use crate::geometry::{GridSpec, Point};
use crate::{Error, Result, C64};

/// Inclusive rectangle of grid nodes `[i0, i1] x [j0, j1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeWindow {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl NodeWindow {
    pub fn new(i0: usize, j0: usize, i1: usize, j1: usize) -> Result<Self> {
        if i1 <= i0 || j1 <= j0 {
            return Err(Error::Domain(format!("empty window [{i0}, {i1}] x [{j0}, {j1}]")));
        }
        Ok(NodeWindow { i0, j0, i1, j1 })
    }

    /// Window of `half` cells on each side of the node nearest `center`.
    pub fn around(grid: &GridSpec, center: Point, half: usize) -> Result<Self> {
        let (i, j) = grid.ij(grid.nearest_node(center));
        if i < half || j < half || i + half >= grid.n || j + half >= grid.n {
            return Err(Error::Domain("window leaves the grid".into()));
        }
        Self::new(i - half, j - half, i + half, j + half)
    }

    fn border(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let bottom = (self.i0..self.i1).map(move |i| (i, self.j0));
        let right = (self.j0..self.j1).map(move |j| (self.i1, j));
        let top = (self.i0 + 1..=self.i1).rev().map(move |i| (i, self.j1));
        let left = (self.j0 + 1..=self.j1).rev().map(move |j| (self.i0, j));
        bottom.chain(right).chain(top).chain(left)
    }
}

/// A located zero with its multiplicity (negative for poles/antiholomorphic zeros).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroLocation {
    pub location: Point,
    pub multiplicity: i32,
    pub window: NodeWindow,
}

fn quadrant(z: C64) -> u8 {
    if z.re > 0.0 && z.im >= 0.0 {
        0
    } else if z.re <= 0.0 && z.im > 0.0 {
        1
    } else if z.re < 0.0 && z.im <= 0.0 {
        2
    } else {
        3
    }
}

fn value(values: &[C64], grid: &GridSpec, i: usize, j: usize, floor: f64) -> Result<C64> {
    let z = values[grid.index(i, j)];
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Inconclusive(format!("window border leaves the domain at node ({i}, {j})")));
    }
    if z.norm() <= floor {
        let p = grid.point(grid.index(i, j));
        return Err(Error::Inconclusive(format!("|f| below the noise floor on the border at ({}, {})", p.x, p.y)));
    }
    Ok(z)
}

/// Winding number of `values` along the border of `w`, counterclockwise.
pub fn winding_number(values: &[C64], grid: &GridSpec, w: NodeWindow, floor: f64) -> Result<i32> {
    let pts: Vec<C64> = w.border().map(|(i, j)| value(values, grid, i, j, floor)).collect::<Result<_>>()?;
    let mut quarter_turns = 0i32;
    for k in 0..pts.len() {
        let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
        quarter_turns += match (quadrant(b) + 4 - quadrant(a)) % 4 {
            0 => 0,
            1 => 1,
            3 => -1,
            _ => {
                if a.re * b.im - a.im * b.re > 0.0 {
                    2
                } else {
                    -2
                }
            }
        };
    }
    debug_assert_eq!(quarter_turns % 4, 0);
    Ok(quarter_turns / 4)
}

/// Zero estimate inside a small window from a linear fit through its corners.
fn estimate(values: &[C64], grid: &GridSpec, w: NodeWindow) -> Point {
    let h = grid.h();
    let v = |i, j| values[grid.index(i, j)];
    let (f00, f10, f01, f11) = (v(w.i0, w.j0), v(w.i1, w.j0), v(w.i0, w.j1), v(w.i1, w.j1));
    let (wx, wy) = ((w.i1 - w.i0) as f64 * h, (w.j1 - w.j0) as f64 * h);
    let centre = Point::new(0.5 * (grid.x(w.i0) + grid.x(w.i1)), 0.5 * (grid.y(w.j0) + grid.y(w.j1)));
    let fx = ((f10 + f11) - (f00 + f01)) / (2.0 * wx);
    let fy = ((f01 + f11) - (f00 + f10)) / (2.0 * wy);
    let fc = (f00 + f10 + f01 + f11) * 0.25;
    let det = fx.re * fy.im - fy.re * fx.im;
    if det.abs() <= 1e-300 {
        return centre;
    }
    let dx = (-fc.re * fy.im + fy.re * fc.im) / det;
    let dy = (-fx.re * fc.im + fx.im * fc.re) / det;
    if dx.abs() <= 0.5 * wx && dy.abs() <= 0.5 * wy {
        Point::new(centre.x + dx, centre.y + dy)
    } else {
        centre
    }
}

fn line_clear(values: &[C64], grid: &GridSpec, w: NodeWindow, vertical: bool, at: usize, floor: f64) -> bool {
    if vertical {
        (w.j0..=w.j1).all(|j| value(values, grid, at, j, floor).is_ok())
    } else {
        (w.i0..=w.i1).all(|i| value(values, grid, i, at, floor).is_ok())
    }
}

/// Split lines that avoid near-zero nodes, closest to the middle first.
fn split_lines(values: &[C64], grid: &GridSpec, w: NodeWindow, vertical: bool, floor: f64) -> Vec<usize> {
    let (lo, hi) = if vertical { (w.i0, w.i1) } else { (w.j0, w.j1) };
    if hi - lo < 2 {
        return Vec::new();
    }
    let mid = (lo + hi) / 2;
    let mut out: Vec<usize> = (0..hi - lo)
        .flat_map(|d| [mid.checked_sub(d), Some(mid + d)])
        .flatten()
        .filter(|&c| c > lo && c < hi && line_clear(values, grid, w, vertical, c, floor))
        .collect();
    out.dedup();
    out
}

/// Recursive bisection. A split is accepted only when both halves have
/// resolvable, additive winding numbers; phase jumps of half a turn or more
/// between neighbouring border nodes (zeros hugging a split line) make a
/// split unreliable, and if no split works the whole window is reported.
fn locate(values: &[C64], grid: &GridSpec, w: NodeWindow, total: i32, floor: f64, out: &mut Vec<ZeroLocation>) {
    if total == 0 {
        return;
    }
    let (wi, wj) = (w.i1 - w.i0, w.j1 - w.j0);
    if wi > 2 || wj > 2 {
        let order = if wi >= wj { [true, false] } else { [false, true] };
        for vertical in order {
            for c in split_lines(values, grid, w, vertical, floor) {
                let (a, b) = if vertical {
                    (NodeWindow { i1: c, ..w }, NodeWindow { i0: c, ..w })
                } else {
                    (NodeWindow { j1: c, ..w }, NodeWindow { j0: c, ..w })
                };
                let (Ok(na), Ok(nb)) = (winding_number(values, grid, a, floor), winding_number(values, grid, b, floor)) else {
                    continue;
                };
                if na + nb != total {
                    continue;
                }
                locate(values, grid, a, na, floor, out);
                locate(values, grid, b, nb, floor, out);
                return;
            }
        }
    }
    out.push(ZeroLocation { location: estimate(values, grid, w), multiplicity: total, window: w });
}

/// Zeros of a dense complex grid function inside `window`, each localised to
/// a window of at most two cells per side where the bisection resolves it.
pub fn argument_principle_zeros(values: &[C64], grid: &GridSpec, window: NodeWindow, floor: f64) -> Result<Vec<ZeroLocation>> {
    if values.len() != grid.len() {
        return Err(Error::Domain("value count does not match the grid".into()));
    }
    if window.i1 >= grid.n || window.j1 >= grid.n {
        return Err(Error::Domain("window leaves the grid".into()));
    }
    let total = winding_number(values, grid, window, floor)?;
    let mut out = Vec::new();
    locate(values, grid, window, total, floor, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample(grid: &GridSpec, f: impl Fn(C64) -> C64) -> Vec<C64> {
        (0..grid.len()).map(|k| f(grid.point(k).to_complex())).collect()
    }

    fn grid() -> GridSpec {
        GridSpec::square(0.0, 0.0, 1.0, 41).unwrap()
    }

    #[test]
    fn simple_zero() {
        let g = grid();
        let z0 = C64::new(0.137, -0.291);
        let v = sample(&g, |z| z - z0);
        let zs = argument_principle_zeros(&v, &g, NodeWindow::new(2, 2, 38, 38).unwrap(), 1e-12).unwrap();
        assert_eq!(zs.len(), 1);
        assert_eq!(zs[0].multiplicity, 1);
        assert!(zs[0].location.dist(Point::from(z0)) <= g.h());
        // conjugate winds the other way
        let c = sample(&g, |z| (z - z0).conj());
        assert_eq!(winding_number(&c, &g, NodeWindow::new(2, 2, 38, 38).unwrap(), 1e-12).unwrap(), -1);
    }

    #[test]
    fn double_zero_and_node_zero() {
        let g = grid();
        let z0 = C64::new(-0.2, 0.33);
        let v = sample(&g, |z| (z - z0) * (z - z0));
        let zs = argument_principle_zeros(&v, &g, NodeWindow::new(0, 0, 40, 40).unwrap(), 1e-12).unwrap();
        assert_eq!(zs.iter().map(|z| z.multiplicity).sum::<i32>(), 2);
        // zero exactly on a node: the split lines steer around it
        let v = sample(&g, |z| z);
        let zs = argument_principle_zeros(&v, &g, NodeWindow::new(3, 3, 37, 37).unwrap(), 1e-12).unwrap();
        assert_eq!(zs.len(), 1);
        assert!(zs[0].location.norm() <= g.h());
    }

    #[test]
    fn border_on_zero_is_inconclusive() {
        let g = grid();
        let v = sample(&g, |z| z);
        assert!(matches!(
            winding_number(&v, &g, NodeWindow::new(20, 10, 30, 30).unwrap(), 1e-12),
            Err(Error::Inconclusive(_))
        ));
        let mut v = sample(&g, |z| z - 0.5);
        v[g.index(5, 5)] = C64::new(f64::NAN, f64::NAN);
        assert!(winding_number(&v, &g, NodeWindow::new(5, 5, 30, 30).unwrap(), 1e-12).is_err());
    }

    proptest! {
        #[test]
        fn additive_over_partitions(
            zs in proptest::collection::vec((-0.9f64..0.9, -0.9f64..0.9), 1..4),
            cut in 5usize..35,
        ) {
            let g = grid();
            let zeros: Vec<C64> = zs.iter().map(|&(x, y)| C64::new(x, y)).collect();
            let v = sample(&g, |z| zeros.iter().fold(C64::new(1.0, 0.0), |acc, &r| acc * (z - r)));
            let w = NodeWindow::new(0, 0, 40, 40).unwrap();
            let (a, b) = (NodeWindow { i1: cut, ..w }, NodeWindow { i0: cut, ..w });
            let floor = 1e-10;
            if let (Ok(t), Ok(na), Ok(nb)) = (
                winding_number(&v, &g, w, floor),
                winding_number(&v, &g, a, floor),
                winding_number(&v, &g, b, floor),
            ) {
                prop_assert_eq!(t, na + nb);
                prop_assert_eq!(t, zeros.len() as i32);
            }
        }
    }

    #[test]
    fn split_discrete_double_zero() {
        // central-difference derivative of Re(z^3): two close simple zeros
        let g = GridSpec::square(0.0, 0.0, 1.1, 129).unwrap();
        let h = g.h();
        let u = |z: C64| (z * z * z).re;
        let v = sample(&g, |z| {
            let ux = (u(z + h) - u(z - h)) / (2.0 * h);
            let uy = (u(z + C64::new(0.0, h)) - u(z - C64::new(0.0, h))) / (2.0 * h);
            C64::new(ux, -uy) * 0.5
        });
        for half in 1..=4 {
            let w = NodeWindow::around(&g, Point::default(), half).unwrap();
            let zs = argument_principle_zeros(&v, &g, w, 1e-12).unwrap();
            assert_eq!(zs.iter().map(|z| z.multiplicity).sum::<i32>(), 2);
            assert!(zs.iter().all(|z| z.location.norm() <= 2.0 * h));
        }
    }

    #[test]
    fn no_zero_no_output() {
        let g = grid();
        let v = sample(&g, |z| z * 0.1 + C64::new(2.0, 0.0));
        assert!(argument_principle_zeros(&v, &g, NodeWindow::new(0, 0, 40, 40).unwrap(), 1e-12).unwrap().is_empty());
        let _ = vec![0];
    }
}
