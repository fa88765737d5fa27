//! Truncated Taylor arithmetic.
//!
//! A `Jet<D>` holds `f(x0), f'(x0), f''(x0)/2!, …` up to degree `D - 1`.
//! Arithmetic on jets propagates exact derivatives through nonlinear
//! expressions, so high-order curvature derivatives never go through
//! repeated numerical differentiation.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet<const D: usize>(pub [f64; D]);

impl<const D: usize> Jet<D> {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; D];
        a[0] = c;
        Jet(a)
    }

    /// The identity function at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut a = [0.0; D];
        a[0] = x0;
        if D > 1 {
            a[1] = 1.0;
        }
        Jet(a)
    }

    /// Builds a jet from plain derivatives `f, f', f'', …`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut a = [0.0; D];
        let mut fact = 1.0;
        for (i, slot) in a.iter_mut().enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            *slot = d.get(i).copied().unwrap_or(0.0) / fact;
        }
        Jet(a)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// The plain `i`-th derivative.
    pub fn deriv(&self, i: usize) -> f64 {
        let fact: f64 = (1..=i).map(|v| v as f64).product();
        self.0[i] * fact
    }

    /// Jet of `f'`; the top coefficient becomes unknown and is set to zero.
    pub fn d(&self) -> Self {
        let mut b = [0.0; D];
        for i in 0..D - 1 {
            b[i] = (i + 1) as f64 * self.0[i + 1];
        }
        Jet(b)
    }

    pub fn recip(&self) -> Self {
        let a = &self.0;
        let mut b = [0.0; D];
        b[0] = 1.0 / a[0];
        for i in 1..D {
            let s: f64 = (1..=i).map(|j| a[j] * b[i - j]).sum();
            b[i] = -s * b[0];
        }
        Jet(b)
    }

    pub fn ln(&self) -> Self {
        let q = self.d() * self.recip();
        let mut l = [0.0; D];
        l[0] = self.0[0].ln();
        for i in 1..D {
            l[i] = q.0[i - 1] / i as f64;
        }
        Jet(l)
    }

    #[cfg(test)]
    pub fn powi(&self, p: u32) -> Self {
        let mut r = Self::constant(1.0);
        for _ in 0..p {
            r = r * *self;
        }
        r
    }
}

impl<const D: usize> From<f64> for Jet<D> {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

impl<const D: usize> Add for Jet<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const D: usize> Sub for Jet<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const D: usize> Neg for Jet<D> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.0.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl<const D: usize> Mul for Jet<D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [0.0; D];
        for i in 0..D {
            for j in 0..D - i {
                c[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Jet(c)
    }
}

impl<const D: usize> Mul<f64> for Jet<D> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const D: usize> Add<f64> for Jet<D> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.0[0] += rhs;
        self
    }
}

impl<const D: usize> Div for Jet<D> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}
