//! Elementary symmetric functions of Ricci spectra.
//!
//! `σ_k` is the coefficient of `t^k` in `Π (1 + t λ_i)`, i.e. the k-th
//! elementary symmetric function of the eigenvalues of the Ricci form
//! relative to the metric. `Σ_k = σ_k / C(n,k)` is its normalization, for
//! which the Maclaurin chain `Σ_1 ≥ Σ_2^{1/2} ≥ … ≥ Σ_n^{1/n}` holds on
//! nonnegative spectra.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest complex dimension supported by [`Spectrum`].
pub const MAX_DIM: usize = 8;

/// Default margin by which `Σ_{k+1}` must exceed zero in the boundary regime.
pub const BOUNDARY_DELTA: f64 = 1e-9;

/// Relative roundoff slack accepted when comparing the two Maclaurin sides.
pub const MACLAURIN_SLACK: f64 = 1e-12;

/// Binomial coefficient as a float, with `C(n,k) = 0` for `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Coefficients of `Π (1 + t v_i)`, lowest degree first.
///
/// Generic so that the radial engine can push Taylor jets through the same
/// recurrence.
pub(crate) fn product_coefficients<T>(values: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<Output = T> + From<f64>,
{
    let mut e = vec![T::from(0.0); values.len() + 1];
    e[0] = T::from(1.0);
    for (i, &v) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] = e[j] + v * e[j - 1];
        }
    }
    e
}

/// The eigenvalues of the Ricci form relative to the metric at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DIM {
            return Err(Error::Domain(format!("spectrum length {} outside 1..={MAX_DIM}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite eigenvalue {v}")));
        }
        Ok(Self { values })
    }

    /// `n` copies of `value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|Ric|²` measured against the metric, `Σ λ_i²`.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `σ_0..σ_n` together with their binomial normalizations `Σ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaVector {
    pub sigma: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl SigmaVector {
    fn from_sigma(sigma: Vec<f64>) -> Self {
        let n = sigma.len() - 1;
        let normalized = sigma.iter().enumerate().map(|(k, s)| s / binomial(n, k)).collect();
        Self { sigma, normalized }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len() - 1
    }
}

/// `e_k(λ)` by the product recurrence, accumulated in increasing order.
pub fn elem_sym(spectrum: &Spectrum, k: usize) -> Result<f64> {
    let n = spectrum.dim();
    if k > n {
        return Err(Error::Domain(format!("k = {k} outside 0..={n}")));
    }
    Ok(product_coefficients(&spectrum.sorted())[k])
}

pub fn sigma_vector(spectrum: &Spectrum) -> SigmaVector {
    SigmaVector::from_sigma(product_coefficients(&spectrum.sorted()))
}

/// Outcome of testing `Σ_k^{k+1} ≥ Σ_{k+1}^k` on one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MaclaurinVerdict {
    Holds {
        lhs: f64,
        rhs: f64,
    },
    /// Never expected on valid input; signals a defect upstream.
    Violated {
        lhs: f64,
        rhs: f64,
    },
    NotApplicable {
        reason: String,
    },
}

impl MaclaurinVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, MaclaurinVerdict::Holds { .. })
    }
}

/// Checks the Maclaurin inequality between consecutive normalized functions.
///
/// Applies to strictly positive spectra, and to nonnegative spectra with
/// `Σ_{k+1} > delta` (the boundary regime). Anything else is reported as
/// not applicable.
pub fn maclaurin_check(spectrum: &Spectrum, k: usize, delta: f64) -> Result<MaclaurinVerdict> {
    let n = spectrum.dim();
    if k >= n {
        return Err(Error::Domain(format!("k = {k} outside 0..{n}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be nonnegative")));
    }
    let s = sigma_vector(spectrum).normalized;
    let min = spectrum.min();
    if min <= 0.0 {
        if min < 0.0 {
            return Ok(MaclaurinVerdict::NotApplicable { reason: format!("spectrum has negative entry {min:e}") });
        }
        if s[k + 1] <= delta {
            return Ok(MaclaurinVerdict::NotApplicable {
                reason: format!("boundary regime needs Σ_{} > {delta:e}, got {:e}", k + 1, s[k + 1]),
            });
        }
    }
    let lhs = s[k].powi(k as i32 + 1);
    let rhs = s[k + 1].powi(k as i32);
    let scale = lhs.abs().max(rhs.abs());
    Ok(if lhs >= rhs - MACLAURIN_SLACK * scale {
        MaclaurinVerdict::Holds { lhs, rhs }
    } else {
        MaclaurinVerdict::Violated { lhs, rhs }
    })
}

/// Relative gap `(Σ_k^{k+1} − Σ_{k+1}^k) / max(|·|)`; zero exactly in the
/// equality case.
pub fn maclaurin_gap(spectrum: &Spectrum, k: usize) -> Result<f64> {
    let n = spectrum.dim();
    if k >= n {
        return Err(Error::Domain(format!("k = {k} outside 0..{n}")));
    }
    let s = sigma_vector(spectrum).normalized;
    let lhs = s[k].powi(k as i32 + 1);
    let rhs = s[k + 1].powi(k as i32);
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs) / scale })
}

/// `(Σ_1, Σ_2^{1/2}, …, Σ_k^{1/k})` for a nonnegative spectrum with `Σ_k > 0`.
pub fn maclaurin_chain(spectrum: &Spectrum, k: usize) -> Result<Vec<f64>> {
    let n = spectrum.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
    }
    if spectrum.min() < 0.0 {
        return Err(Error::Domain(format!(
            "Maclaurin chain needs a nonnegative spectrum, min entry {:e}",
            spectrum.min()
        )));
    }
    let s = sigma_vector(spectrum).normalized;
    if !(s[k] > 0.0) {
        return Err(Error::Domain(format!("Maclaurin chain needs Σ_{k} > 0, got {:e}", s[k])));
    }
    (1..=k)
        .map(|j| {
            if s[j] <= 0.0 {
                Err(Error::InternalConsistency(format!("Σ_{j} = {:e} with nonnegative spectrum and Σ_{k} > 0", s[j])))
            } else {
                Ok(s[j].powf(1.0 / j as f64))
            }
        })
        .collect()
}

/// Whether a chain returned by [`maclaurin_chain`] is non-increasing to `tol`.
pub fn is_non_increasing(chain: &[f64], tol: f64) -> bool {
    chain.windows(2).all(|w| w[1] <= w[0] + tol * w[0].abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn elem_sym_examples() {
        assert_eq!(elem_sym(&spec(&[1.0, 1.0, 1.0]), 2).unwrap(), 3.0);
        assert_eq!(elem_sym(&spec(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert!(matches!(elem_sym(&spec(&[1.0, 2.0]), 3), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![]).is_err());
        assert!(Spectrum::new(vec![0.0; 9]).is_err());
        assert!(Spectrum::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn sigma_vector_examples() {
        let flat = sigma_vector(&spec(&[0.0; 4]));
        assert_eq!(flat.sigma, vec![1.0, 0.0, 0.0, 0.0, 0.0]);

        for n in 1..=MAX_DIM {
            let ke = sigma_vector(&Spectrum::uniform(n, 1.0).unwrap());
            for k in 0..=n {
                assert_eq!(ke.sigma[k], binomial(n, k));
                assert_eq!(ke.normalized[k], 1.0);
            }
        }

        let s = sigma_vector(&spec(&[1.0, 2.0, 3.0]));
        assert!((s.normalized[2] - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.sigma[0], 1.0);
    }

    #[test]
    fn maclaurin_examples() {
        match maclaurin_check(&spec(&[1.0, 2.0, 3.0]), 1, BOUNDARY_DELTA).unwrap() {
            MaclaurinVerdict::Holds { lhs, rhs } => {
                assert!((lhs - 4.0).abs() < 1e-14);
                assert!((rhs - 11.0 / 3.0).abs() < 1e-14);
            }
            v => panic!("{v:?}"),
        }
        match maclaurin_check(&spec(&[0.0, 2.0, 3.0]), 1, BOUNDARY_DELTA).unwrap() {
            MaclaurinVerdict::Holds { lhs, rhs } => {
                assert!((lhs - 25.0 / 9.0).abs() < 1e-14);
                assert!((rhs - 2.0).abs() < 1e-14);
            }
            v => panic!("{v:?}"),
        }
        for k in 0..5 {
            let v = maclaurin_check(&Spectrum::uniform(5, 0.7).unwrap(), k, BOUNDARY_DELTA).unwrap();
            let MaclaurinVerdict::Holds { lhs, rhs } = v else { panic!() };
            assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs());
        }
    }

    #[test]
    fn maclaurin_not_applicable() {
        let mixed = spec(&[-1.0, 2.0, 3.0]);
        assert!(matches!(maclaurin_check(&mixed, 1, BOUNDARY_DELTA).unwrap(), MaclaurinVerdict::NotApplicable { .. }));
        // Nonnegative but Σ_{k+1} = 0.
        let degenerate = spec(&[0.0, 0.0, 3.0]);
        assert!(matches!(
            maclaurin_check(&degenerate, 1, BOUNDARY_DELTA).unwrap(),
            MaclaurinVerdict::NotApplicable { .. }
        ));
    }

    #[test]
    fn chain_examples() {
        assert_eq!(maclaurin_chain(&spec(&[1.0, 1.0, 1.0]), 3).unwrap(), vec![1.0, 1.0, 1.0]);
        let c = maclaurin_chain(&spec(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-15);
        assert!((c[1] - (11.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(is_non_increasing(&c, 1e-12));
        assert!(maclaurin_chain(&spec(&[-1.0, 1.0]), 1).is_err());
        assert!(maclaurin_chain(&spec(&[0.0, 0.0, 1.0]), 2).is_err());
    }
}
