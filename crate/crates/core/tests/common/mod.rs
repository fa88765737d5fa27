//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Elementary symmetric polynomial by enumerating all `k`-subsets.
pub fn subset_sum(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            total += (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).product::<f64>();
        }
    }
    total
}

/// Polynomial in `x` by monomial coefficients.
#[derive(Debug, Clone)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn deriv(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    /// `x(1−x)·p`.
    pub fn mul_x1mx(&self) -> Poly {
        let mut out = vec![0.0; self.0.len() + 2];
        for (i, c) in self.0.iter().enumerate() {
            out[i + 1] += c;
            out[i + 2] -= c;
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).copied().unwrap_or(0.0);
        Poly((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    /// `d/dt = x(1−x) d/dx`.
    pub fn dt(&self) -> Poly {
        self.deriv().mul_x1mx()
    }
}

/// Radial geometry of `u = −(n+1) log(1−x) + φ(x)` for polynomial `φ`,
/// computed from `v = n t − (n−1) log u_t − log u_tt` with exact polynomial
/// `t`-derivatives of `u`.
pub struct RadialOracle {
    pub n: usize,
    pub phi: Poly,
    pub ut: [Poly; 4],
}

impl RadialOracle {
    pub fn new(n: usize, phi_monomials: &[f64]) -> Self {
        let phi = Poly(phi_monomials.to_vec());
        let u0t = Poly(vec![0.0, (n + 1) as f64]);
        let u1 = u0t.add(&phi.dt());
        let u2 = u1.dt();
        let u3 = u2.dt();
        let u4 = u3.dt();
        Self { n, phi, ut: [u1, u2, u3, u4] }
    }

    pub fn lambdas(&self, x: f64) -> (f64, f64) {
        let nf = self.n as f64;
        let [a, b, c, d] = [0, 1, 2, 3].map(|i| self.ut[i].eval(x));
        let vt = nf - (nf - 1.0) * b / a - c / b;
        let vtt = -(nf - 1.0) * (c * a - b * b) / (a * a) - (d * b - c * c) / (b * b);
        (vt / a, vtt / b)
    }

    pub fn spectrum(&self, x: f64) -> Vec<f64> {
        let (lt, lr) = self.lambdas(x);
        let mut s = vec![lt; self.n - 1];
        s.push(lr);
        s
    }

    pub fn sigma(&self, x: f64, k: usize) -> f64 {
        subset_sum(&self.spectrum(x), k)
    }

    /// Ricci potential up to an additive constant.
    pub fn ricci_potential(&self, x: f64) -> f64 {
        let nf = self.n as f64;
        let t = (x / (1.0 - x)).ln();
        let u = -(nf + 1.0) * (-x).ln_1p() + self.phi.eval(x);
        let v = nf * t - (nf - 1.0) * self.ut[0].eval(x).ln() - self.ut[1].eval(x).ln();
        v - u
    }

    /// `Δh = (n−1) h_t/u_t + h_tt/u_tt` with `t`-derivatives of `h ∘ x(t)`
    /// taken by eighth-order central differences.
    pub fn laplacian(&self, h: impl Fn(f64) -> f64, x: f64) -> f64 {
        let nf = self.n as f64;
        let t0 = (x / (1.0 - x)).ln();
        let step = 0.05;
        let at = |i: i32| {
            let t = t0 + i as f64 * step;
            h(1.0 / (1.0 + (-t).exp()))
        };
        let d1c = [1.0 / 280.0, -4.0 / 105.0, 0.2, -0.8, 0.0, 0.8, -0.2, 4.0 / 105.0, -1.0 / 280.0];
        let d2c = [-1.0 / 560.0, 8.0 / 315.0, -0.2, 1.6, -205.0 / 72.0, 1.6, -0.2, 8.0 / 315.0, -1.0 / 560.0];
        let vals: Vec<f64> = (-4..=4).map(at).collect();
        let h1: f64 = d1c.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / step;
        let h2: f64 = d2c.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (step * step);
        (nf - 1.0) * h1 / self.ut[0].eval(x) + h2 / self.ut[1].eval(x)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
