//! Chebyshev series on `[0, 1]` in the variable `s = 2x − 1`.

use std::f64::consts::PI;

/// Interior Chebyshev (Gauss) points on `(0,1)`, increasing.
pub(crate) fn gauss_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
    let theta: Vec<f64> = (0..m).map(|j| (2 * (m - 1 - j) + 1) as f64 * PI / (2 * m) as f64).collect();
    let x = theta.iter().map(|t| 0.5 * (1.0 + t.cos())).collect();
    (x, theta)
}

/// Fejér's first rule on `[0,1]` at the nodes of [`gauss_nodes`]; exact for
/// polynomials of degree below `m`.
pub(crate) fn fejer_weights(theta: &[f64]) -> Vec<f64> {
    let m = theta.len();
    theta
        .iter()
        .map(|t| {
            let s: f64 = (1..=m / 2).map(|k| (2.0 * k as f64 * t).cos() / (4.0 * (k * k) as f64 - 1.0)).sum();
            (1.0 - 2.0 * s) / m as f64
        })
        .collect()
}

/// Coefficients of the interpolant through values at the Gauss nodes.
pub(crate) fn coefficients_from_values(values: &[f64], theta: &[f64]) -> Vec<f64> {
    let m = values.len();
    (0..m)
        .map(|k| {
            let s: f64 = values.iter().zip(theta).map(|(v, t)| v * (k as f64 * t).cos()).sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Coefficients of `d/dx` of the series (the `s`-derivative times 2).
pub(crate) fn derivative(c: &[f64]) -> Vec<f64> {
    let k = c.len();
    if k <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; k + 1];
    for m in (1..k).rev() {
        d[m - 1] = d[m + 1] + 2.0 * m as f64 * c[m];
    }
    d[0] *= 0.5;
    d.truncate(k - 1);
    d.iter_mut().for_each(|v| *v *= 2.0);
    d
}

/// Clenshaw evaluation at `x ∈ [0,1]`.
pub(crate) fn evaluate(c: &[f64], x: f64) -> f64 {
    let s = 2.0 * x - 1.0;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + s * b1 - b2
}

/// Drops trailing coefficients below `tol · max|c|`, keeping at least one.
pub(crate) fn chop(mut c: Vec<f64>, tol: f64) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= tol * scale) {
        c.pop();
    }
    c
}

/// Exact coefficients of the polynomial `Σ a_j x^j`.
pub(crate) fn from_monomials(a: &[f64]) -> Vec<f64> {
    let deg = a.len().max(1);
    let (x, theta) = gauss_nodes(deg);
    let vals: Vec<f64> = x.iter().map(|&x| a.iter().rev().fold(0.0, |acc, &c| acc * x + c)).collect();
    coefficients_from_values(&vals, &theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_round_trip() {
        let a = [0.5, -1.0, 2.0, 0.25];
        let c = from_monomials(&a);
        for x in [0.0, 0.1, 0.5, 0.93, 1.0] {
            let want = a.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            assert!((evaluate(&c, x) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_polynomial() {
        // p = x^4 - x, p' = 4x^3 - 1, p'' = 12 x^2
        let c = from_monomials(&[0.0, -1.0, 0.0, 0.0, 1.0]);
        let d1 = derivative(&c);
        let d2 = derivative(&d1);
        for x in [0.0, 0.3, 0.77, 1.0] {
            assert!((evaluate(&d1, x) - (4.0 * x * x * x - 1.0)).abs() < 1e-13);
            assert!((evaluate(&d2, x) - 12.0 * x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn fejer_integrates_polynomials() {
        let (x, theta) = gauss_nodes(16);
        let w = fejer_weights(&theta);
        for p in 0..15 {
            let q: f64 = w.iter().zip(&x).map(|(w, x)| w * x.powi(p)).sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn chop_keeps_leading_terms() {
        let c = chop(vec![1.0, 0.5, 1e-17, 1e-18], 1e-14);
        assert_eq!(c.len(), 2);
        assert_eq!(chop(vec![0.0, 0.0], 1e-14).len(), 1);
    }
}
