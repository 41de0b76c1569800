//! Jacobi-preconditioned conjugate gradients for the assembled stencils.

use alloc::vec;
use alloc::vec::Vec;

/// Symmetric matrix: explicit diagonal plus off-diagonal entries in CSR form.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseSym {
    pub diag: Vec<f64>,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseSym {
    pub fn with_capacity(n: usize) -> Self {
        SparseSym {
            diag: Vec::with_capacity(n),
            row_start: {
                let mut v = Vec::with_capacity(n + 1);
                v.push(0);
                v
            },
            cols: Vec::with_capacity(4 * n),
            vals: Vec::with_capacity(4 * n),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn push_off(&mut self, col: usize, val: f64) {
        self.cols.push(col);
        self.vals.push(val);
    }

    pub fn finish_row(&mut self, diag: f64) {
        self.diag.push(diag);
        self.row_start.push(self.cols.len());
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = self.diag[r] * x[r];
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `max_i |r_i| / d_i`: the scaled residual, i.e. the defect of the
    /// weighted mean-value property at each unknown.
    pub fn scaled_residual(&self, b: &[f64], x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.len()];
        self.apply(x, &mut ax);
        scaled_max(&self.diag, b.iter().zip(&ax).map(|(b, a)| b - a))
    }
}

fn scaled_max(diag: &[f64], r: impl Iterator<Item = f64>) -> f64 {
    r.zip(diag).map(|(r, d)| (r / d).abs()).fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` starting from `x`; stops when the scaled residual is
/// at most `tol`.
pub(crate) fn pcg(a: &SparseSym, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome {
    const RESYNC: usize = 64;
    let n = a.len();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = scaled_max(&a.diag, r.iter().copied());
    if res <= tol || n == 0 {
        return CgOutcome { iterations: 0, residual: res, converged: true };
    }
    let mut z: Vec<f64> = r.iter().zip(&a.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
        }
        if it % RESYNC == 0 {
            // recompute the true residual to stop recurrence drift
            a.apply(x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        } else {
            for i in 0..n {
                r[i] -= alpha * q[i];
            }
        }
        res = scaled_max(&a.diag, r.iter().copied());
        if res <= tol {
            let true_res = a.scaled_residual(b, x);
            if true_res <= tol {
                return CgOutcome { iterations: it, residual: true_res, converged: true };
            }
            a.apply(x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        }
        for i in 0..n {
            z[i] = r[i] / a.diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = a.scaled_residual(b, x);
    CgOutcome { iterations: max_iter, residual, converged: residual <= tol }
}
