//! Closed-form fields with exact Wirtinger derivatives.
//!
//! These are the oracles for the numerical modules. Only `log|.|` appears,
//! so there is no branch cut anywhere.

use alloc::format;
#[allow(unused_imports)] // f64 math is inherent when std is linked
use num_traits::Float;

use crate::{Error, Result, C64};

/// Value of a field together with `H_z` and `H_zbar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WirtingerValue {
    pub value: C64,
    pub d_z: C64,
    pub d_zbar: C64,
}

impl WirtingerValue {
    /// `|H_z|^2 + |H_zbar|^2`, half the squared norm of the differential.
    pub fn grad_norm_sq(&self) -> f64 {
        self.d_z.norm_sqr() + self.d_zbar.norm_sqr()
    }

    /// `|H_z|^2 - |H_zbar|^2`.
    pub fn jacobian(&self) -> f64 {
        self.d_z.norm_sqr() - self.d_zbar.norm_sqr()
    }
}

/// `H(z) = -λ log|z|^2 + z - 1/z̄` with `λ = (a + 1/a)/2`, harmonic on the
/// punctured plane, vanishing on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacitorExample {
    a: f64,
}

impl CapacitorExample {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::Domain(format!("capacitor example needs a > 1, got {a}")));
        }
        Ok(CapacitorExample { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        0.5 * (self.a + 1.0 / self.a)
    }

    /// Radius of the rank-one circle `|z - λ| = ρ`; `ρ^2 = λ^2 - 1`.
    pub fn rho(&self) -> f64 {
        0.5 * (self.a - 1.0 / self.a)
    }

    fn check(z: C64) -> Result<()> {
        if z.norm_sqr() == 0.0 {
            return Err(Error::Singular { field: "capacitor-example", at: (z.re, z.im) });
        }
        Ok(())
    }

    pub fn eval(&self, z: C64) -> Result<WirtingerValue> {
        Self::check(z)?;
        let lambda = self.lambda();
        let zb = z.conj();
        let one = C64::new(1.0, 0.0);
        Ok(WirtingerValue {
            value: C64::new(-lambda * z.norm_sqr().ln(), 0.0) + z - one / zb,
            d_z: one - lambda / z,
            d_zbar: one / (zb * zb) - lambda / zb,
        })
    }

    /// `(|z|^2 - 1)(|z - λ|^2 - (λ^2 - 1)) / |z|^4`.
    pub fn jacobian_factored(&self, z: C64) -> Result<f64> {
        Self::check(z)?;
        let lambda = self.lambda();
        let r2 = z.norm_sqr();
        Ok((r2 - 1.0) * ((z - lambda).norm_sqr() - (lambda * lambda - 1.0)) / (r2 * r2))
    }

    /// `(|z|^2 |H_z|^2 + |z|^4 |H_zbar|^2, (1-λ)^2 (1+|z|^2) + 2λ |1-z|^2)`.
    pub fn grad_identity_check(&self, z: C64) -> Result<(f64, f64)> {
        let w = self.eval(z)?;
        let lambda = self.lambda();
        let r2 = z.norm_sqr();
        let lhs = r2 * w.d_z.norm_sqr() + r2 * r2 * w.d_zbar.norm_sqr();
        let rhs = (1.0 - lambda).powi(2) * (1.0 + r2) + 2.0 * lambda * (C64::new(1.0, 0.0) - z).norm_sqr();
        Ok((lhs, rhs))
    }

    /// Image of the circle `|z| = r`: centre `-2λ log r` and radius `|r - 1/r|`.
    pub fn image_circle(&self, r: f64) -> Result<(C64, f64)> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("image circle needs r > 0, got {r}")));
        }
        Ok((C64::new(-2.0 * self.lambda() * r.ln(), 0.0), (r - 1.0 / r).abs()))
    }
}

/// Radially symmetric p-harmonic function on `A(r, R)` with value 1 on the
/// inner circle and 0 on the outer one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPHarmonic {
    r: f64,
    big_r: f64,
    p: f64,
}

impl RadialPHarmonic {
    pub fn new(r: f64, big_r: f64, p: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(Error::Domain(format!("radial p-harmonic needs 0 < r < R, got r={r}, R={big_r}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("radial p-harmonic needs 1 < p < inf, got {p}")));
        }
        Ok(RadialPHarmonic { r, big_r, p })
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r, self.big_r)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Exponent `(p - 2)/(p - 1)` of the radial solution.
    pub fn alpha(&self) -> f64 {
        (self.p - 2.0) / (self.p - 1.0)
    }

    fn is_log(&self) -> bool {
        self.p == 2.0
    }

    fn unchecked_value(&self, s: f64) -> f64 {
        if self.is_log() {
            (s / self.big_r).ln() / (self.r / self.big_r).ln()
        } else {
            let al = self.alpha();
            (s.powf(al) - self.big_r.powf(al)) / (self.r.powf(al) - self.big_r.powf(al))
        }
    }

    /// `du/ds`.
    pub fn derivative(&self, s: f64) -> f64 {
        if self.is_log() {
            1.0 / (s * (self.r / self.big_r).ln())
        } else {
            let al = self.alpha();
            al * s.powf(al - 1.0) / (self.r.powf(al) - self.big_r.powf(al))
        }
    }

    /// Value at radius `s in [r, R]`.
    pub fn value(&self, s: f64) -> Result<f64> {
        if !(s >= self.r && s <= self.big_r) {
            return Err(Error::Domain(format!("radius {s} outside [{}, {}]", self.r, self.big_r)));
        }
        Ok(self.unchecked_value(s))
    }

    /// Smallest `|∇u|` over the closed annulus (attained on the outer circle).
    pub fn min_gradient(&self) -> f64 {
        self.derivative(self.big_r).abs().min(self.derivative(self.r).abs())
    }

    fn eval(&self, z: C64) -> WirtingerValue {
        let s = z.norm();
        let v = self.unchecked_value(s);
        // u_z = u'(s) * zbar / (2 s)
        let d_z = z.conj() * (self.derivative(s) / (2.0 * s));
        WirtingerValue { value: C64::new(v, 0.0), d_z, d_zbar: d_z.conj() }
    }
}

/// Closed-form fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticField {
    /// `log(|z|/R) / log(r/R)`: 1 on `|z| = r`, 0 on `|z| = R`.
    LogAnnulus { r: f64, big_r: f64 },
    CapacitorExample(CapacitorExample),
    /// `log|z^2 - 1|`.
    Cassini,
    /// `Re(z^m)`.
    Saddle { m: u32 },
    RadialPHarmonic(RadialPHarmonic),
}

impl AnalyticField {
    pub fn log_annulus(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(Error::Domain(format!("log annulus needs 0 < r < R, got r={r}, R={big_r}")));
        }
        Ok(AnalyticField::LogAnnulus { r, big_r })
    }

    pub fn capacitor_example(a: f64) -> Result<Self> {
        Ok(AnalyticField::CapacitorExample(CapacitorExample::new(a)?))
    }

    pub fn saddle(m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("saddle order must be >= 1".into()));
        }
        Ok(AnalyticField::Saddle { m })
    }

    pub fn radial_p(r: f64, big_r: f64, p: f64) -> Result<Self> {
        Ok(AnalyticField::RadialPHarmonic(RadialPHarmonic::new(r, big_r, p)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticField::LogAnnulus { .. } => "log-annulus",
            AnalyticField::CapacitorExample(_) => "capacitor-example",
            AnalyticField::Cassini => "cassini",
            AnalyticField::Saddle { .. } => "saddle",
            AnalyticField::RadialPHarmonic(_) => "radial-p-harmonic",
        }
    }

    /// Real-valued fields have `H_zbar = conj(H_z)`.
    pub fn is_real(&self) -> bool {
        !matches!(self, AnalyticField::CapacitorExample(_))
    }

    pub fn eval(&self, z: C64) -> Result<WirtingerValue> {
        let singular = |field| Err(Error::Singular { field, at: (z.re, z.im) });
        match *self {
            AnalyticField::LogAnnulus { r, big_r } => {
                if z.norm_sqr() == 0.0 {
                    return singular("log-annulus");
                }
                let l = (r / big_r).ln();
                let d_z = C64::new(1.0, 0.0) / (z * (2.0 * l));
                Ok(WirtingerValue {
                    value: C64::new((z.norm() / big_r).ln() / l, 0.0),
                    d_z,
                    d_zbar: d_z.conj(),
                })
            }
            AnalyticField::CapacitorExample(c) => c.eval(z),
            AnalyticField::Cassini => {
                let w = z * z - 1.0;
                if w.norm_sqr() == 0.0 {
                    return singular("cassini");
                }
                let d_z = z / w;
                Ok(WirtingerValue { value: C64::new(w.norm().ln(), 0.0), d_z, d_zbar: d_z.conj() })
            }
            AnalyticField::Saddle { m } => {
                let d_z = if m == 1 { C64::new(0.5, 0.0) } else { z.powu(m - 1) * (m as f64 / 2.0) };
                Ok(WirtingerValue { value: C64::new(z.powu(m).re, 0.0), d_z, d_zbar: d_z.conj() })
            }
            AnalyticField::RadialPHarmonic(rp) => {
                if z.norm_sqr() == 0.0 {
                    return singular("radial-p-harmonic");
                }
                Ok(rp.eval(z))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn capacitor_example_vanishes_on_unit_circle() {
        let f = CapacitorExample::new(2.0).unwrap();
        for k in 0..64 {
            let z = C64::from_polar(1.0, TAU * k as f64 / 64.0);
            assert!(f.eval(z).unwrap().value.norm() < 1e-15);
        }
        assert!(f.eval(c(2.0, 0.0)).unwrap().jacobian().abs() < 1e-15);
        assert!(matches!(f.eval(c(0.0, 0.0)), Err(Error::Singular { .. })));
        assert!(CapacitorExample::new(1.0).is_err());
    }

    #[test]
    fn derived_parameters() {
        for a in [1.5, 2.0, 3.0] {
            let f = CapacitorExample::new(a).unwrap();
            let (l, r) = (f.lambda(), f.rho());
            assert!(l > 1.0 && r > 0.0);
            assert!((l * l - 1.0 - r * r).abs() < 1e-14);
        }
    }

    #[test]
    fn cassini_gradient_vanishes_at_origin() {
        let w = AnalyticField::Cassini.eval(c(0.0, 0.0)).unwrap();
        assert_eq!(w.d_z, c(0.0, 0.0));
        assert_eq!(w.value, c(0.0, 0.0));
        // finite-difference cross-check away from the origin
        let z = c(0.3, 0.7);
        let h = 1e-6;
        let f = |z: C64| AnalyticField::Cassini.eval(z).unwrap().value.re;
        let fx = (f(z + h) - f(z - h)) / (2.0 * h);
        let fy = (f(z + c(0.0, h)) - f(z - c(0.0, h))) / (2.0 * h);
        let fd = c(fx, -fy) * 0.5;
        assert!((fd - AnalyticField::Cassini.eval(z).unwrap().d_z).norm() < 1e-8);
        assert!(AnalyticField::Cassini.eval(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn log_annulus_midpoint() {
        let f = AnalyticField::log_annulus(1.0, 2.0).unwrap();
        let v = f.eval(c(2f64.sqrt(), 0.0)).unwrap().value.re;
        assert!((v - 0.5).abs() < 1e-15);
        assert!(AnalyticField::log_annulus(2.0, 1.0).is_err());
    }

    #[test]
    fn factored_jacobian_values() {
        let f = CapacitorExample::new(2.0).unwrap();
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            assert!(f.jacobian_factored(C64::from_polar(1.0, t)).unwrap().abs() < 1e-14);
            let z = c(f.lambda(), 0.0) + C64::from_polar(f.rho(), t);
            assert!(f.jacobian_factored(z).unwrap().abs() < 1e-14);
        }
        // (9 - 1)(|3 - 1.25|^2 - 0.5625)/81 = 20/81
        assert!((f.jacobian_factored(c(3.0, 0.0)).unwrap() - 20.0 / 81.0).abs() < 1e-15);
        assert!(f.jacobian_factored(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn gradient_identity_values() {
        let f = CapacitorExample::new(2.0).unwrap();
        let (lhs, rhs) = f.grad_identity_check(c(1.0, 0.0)).unwrap();
        assert!((lhs - 0.125).abs() < 1e-15 && (rhs - 0.125).abs() < 1e-15);
        let (lhs, rhs) = f.grad_identity_check(c(2.0, 0.0)).unwrap();
        assert!((rhs - 2.8125).abs() < 1e-15);
        assert!((lhs - rhs).abs() < 1e-14);
        let (_, rhs) = f.grad_identity_check(c(-1.0, 0.0)).unwrap();
        assert!((rhs - (0.0625 * 2.0 + 8.0 * 1.25)).abs() < 1e-14);
    }

    #[test]
    fn image_circles() {
        let f = CapacitorExample::new(2.0).unwrap();
        let (c1, r1) = f.image_circle(1.0).unwrap();
        assert_eq!((c1, r1), (c(0.0, 0.0), 0.0));
        let (c2, r2) = f.image_circle(2.0).unwrap();
        assert!((c2.re - (-2.5 * 2f64.ln())).abs() < 1e-15);
        assert!((r2 - 1.5).abs() < 1e-15);
        assert_eq!(f.image_circle(0.5).unwrap().1, r2);
        for r in [0.3, 0.5, 2.0, 4.0] {
            let (center, radius) = f.image_circle(r).unwrap();
            for k in 0..64 {
                let z = C64::from_polar(r, TAU * k as f64 / 64.0);
                let res = (f.eval(z).unwrap().value - center).norm() - radius;
                assert!(res.abs() <= 1e-12);
            }
        }
        assert!(f.image_circle(0.0).is_err());
    }

    /// Radial p-harmonic oracle by quadrature of the flux equation
    /// `s |u'|^{p-2} u' = const`, i.e. `u(s) = 1 - I(s)/I(R)` with
    /// `I(s) = ∫_r^s t^{-1/(p-1)} dt` (composite Simpson).
    fn radial_by_quadrature(r: f64, big_r: f64, p: f64, s: f64) -> f64 {
        let integral = |b: f64| {
            let n = 20_000;
            let h = (b - r) / n as f64;
            let g = |t: f64| t.powf(-1.0 / (p - 1.0));
            let mut acc = g(r) + g(b);
            for k in 1..n {
                acc += g(r + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        1.0 - integral(s) / integral(big_r)
    }

    #[test]
    fn radial_p_value_against_quadrature() {
        let f = RadialPHarmonic::new(1.0, 2.0, 3.0).unwrap();
        let s = 2f64.sqrt();
        let oracle = radial_by_quadrature(1.0, 2.0, 3.0, s);
        assert!((oracle - 0.5432136168629451).abs() < 1e-10);
        assert!((f.value(s).unwrap() - oracle).abs() < 1e-10);
        for p in [1.5, 2.5, 4.0] {
            let f = RadialPHarmonic::new(1.0, 2.0, p).unwrap();
            for s in [1.1, 1.5, 1.9] {
                assert!((f.value(s).unwrap() - radial_by_quadrature(1.0, 2.0, p, s)).abs() < 1e-9);
            }
        }
        assert_eq!(f.value(1.0).unwrap(), 1.0);
        assert_eq!(f.value(2.0).unwrap(), 0.0);
        assert!(f.value(2.5).is_err());
    }

    #[test]
    fn radial_p_ode_residual() {
        // (s |u'|^{p-2} u')' = 0, checked by central differences of the flux
        for p in [1.5, 3.0] {
            let f = RadialPHarmonic::new(1.0, 2.0, p).unwrap();
            let flux = |s: f64| {
                let d = f.derivative(s);
                s * d.abs().powf(p - 2.0) * d
            };
            for s in [1.2, 1.5, 1.8] {
                let h = 1e-4;
                let res = (flux(s + h) - flux(s - h)) / (2.0 * h);
                assert!(res.abs() < 1e-7, "p={p} s={s} res={res}");
            }
        }
    }

    #[test]
    fn radial_p2_is_log_annulus() {
        let rp = AnalyticField::radial_p(1.0, 2.0, 2.0).unwrap();
        let la = AnalyticField::log_annulus(1.0, 2.0).unwrap();
        for s in [1.0, 1.3, 1.7, 2.0] {
            let z = C64::from_polar(s, 0.4);
            let (a, b) = (rp.eval(z).unwrap(), la.eval(z).unwrap());
            assert!((a.value - b.value).norm() < 1e-15);
            assert!((a.d_z - b.d_z).norm() < 1e-15);
        }
    }

    fn fixtures() -> Vec<(AnalyticField, Vec<C64>)> {
        let pts = vec![c(1.3, 0.4), c(-0.7, 1.1), c(0.2, -1.6)];
        vec![
            (AnalyticField::log_annulus(1.0, 2.0).unwrap(), pts.clone()),
            (AnalyticField::capacitor_example(2.0).unwrap(), pts.clone()),
            (AnalyticField::Cassini, vec![c(0.3, 0.4), c(1.6, 0.5), c(-0.2, -0.9)]),
            (AnalyticField::saddle(3).unwrap(), pts.clone()),
            (AnalyticField::saddle(4).unwrap(), pts.clone()),
            (AnalyticField::radial_p(1.0, 2.0, 3.0).unwrap(), pts.clone()),
            (AnalyticField::radial_p(1.0, 2.0, 1.5).unwrap(), pts),
        ]
    }

    fn fd_error(f: &AnalyticField, z: C64, h: f64) -> f64 {
        let v = |z: C64| f.eval(z).unwrap().value;
        let fx = (v(z + h) - v(z - h)) / (2.0 * h);
        let fy = (v(z + c(0.0, h)) - v(z - c(0.0, h))) / (2.0 * h);
        let i = c(0.0, 1.0);
        let w = f.eval(z).unwrap();
        ((fx - i * fy) * 0.5 - w.d_z).norm() + ((fx + i * fy) * 0.5 - w.d_zbar).norm()
    }

    #[test]
    fn finite_differences_converge_at_second_order() {
        for (f, pts) in fixtures() {
            for z in pts {
                let (e1, e2) = (fd_error(&f, z, 1e-2), fd_error(&f, z, 5e-3));
                let ratio = e1 / e2;
                assert!((3.5..=4.5).contains(&ratio), "{} at {z}: ratio {ratio}", f.name());
            }
        }
    }

    #[test]
    fn real_fields_are_conjugate() {
        for (f, pts) in fixtures() {
            if !f.is_real() {
                continue;
            }
            for z in pts {
                let w = f.eval(z).unwrap();
                assert_eq!(w.d_zbar, w.d_z.conj());
                assert!(w.grad_norm_sq() >= w.jacobian().abs());
            }
        }
    }

    #[test]
    fn jacobian_sign_table() {
        let f = CapacitorExample::new(2.0).unwrap();
        let (l, rho) = (f.lambda(), f.rho());
        for i in 0..200 {
            for j in 0..200 {
                let z = c(-3.0 + 6.0 * i as f64 / 199.0, -3.0 + 6.0 * j as f64 / 199.0);
                let r = z.norm();
                let d = (z - l).norm();
                if r < 0.05 || (r - 1.0).abs() < 1e-3 || (d - rho).abs() < 1e-3 {
                    continue;
                }
                let jac = f.jacobian_factored(z).unwrap();
                let positive = if r > 1.0 { d > rho } else { d < rho };
                assert_eq!(jac > 0.0, positive, "z = {z}");
            }
        }
        let _ = PI;
    }
}
