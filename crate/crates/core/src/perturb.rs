//! Seeded random potentials for tests and experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chebyshev;
use crate::cpn::{RadialChart, RadialPotential};
use crate::error::{Error, Result};
use crate::torus::{PotentialField, TorusGrid};

/// Default largest per-axis wavenumber of random torus modes.
pub const TORUS_MAX_WAVENUMBER: i64 = 1;

/// Default smallest metric eigenvalue of random torus potentials.
pub const TORUS_MIN_EIG: f64 = 0.5;

/// Default lower bound for `1 + a` and `1 + b` of random radial perturbations.
pub const RADIAL_MARGIN: f64 = 0.3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A sum of `modes` random Fourier modes with per-axis wavenumbers at most
/// `max_wavenumber`, scaled so that the smallest eigenvalue of `ω_φ` over
/// the grid equals `min_eig`.
pub fn random_torus_potential<R: Rng>(
    grid: &TorusGrid,
    rng: &mut R,
    modes: usize,
    max_wavenumber: i64,
    min_eig: f64,
) -> Result<PotentialField> {
    if !(min_eig > 0.0 && min_eig < 1.0) {
        return Err(Error::Domain(format!("min_eig = {min_eig} must lie in (0,1)")));
    }
    if modes == 0 || max_wavenumber < 1 || 2 * max_wavenumber >= grid.nodes_per_axis() as i64 {
        return Err(Error::Domain(format!(
            "{modes} modes with wavenumbers up to {max_wavenumber} do not fit the grid"
        )));
    }
    let d = grid.axes();
    let terms: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k = loop {
                let k: Vec<f64> = (0..d).map(|_| rng.random_range(-max_wavenumber..=max_wavenumber) as f64).collect();
                if k.iter().any(|&v| v != 0.0) {
                    break k;
                }
            };
            (k, rng.random_range(0.5..1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let values = grid.sample(|x| {
        terms
            .iter()
            .map(|(k, amp, phase)| amp * (2.0 * PI * k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase).cos())
            .sum()
    });
    let hmin = grid.min_hessian_eigenvalue(&values)?;
    if !(hmin < 0.0) {
        return Err(Error::InternalConsistency(format!(
            "nonconstant periodic potential with min Hessian eigenvalue {hmin}"
        )));
    }
    let t = (1.0 - min_eig) / -hmin;
    Ok(PotentialField::new(values.into_iter().map(|v| t * v).collect()))
}

/// Smallest of `1 + a`, `1 + b` on a dense sample of `[0, 1]` for the
/// potential with Chebyshev coefficients `c`.
fn radial_ratio_min(n: usize, c: &[f64]) -> f64 {
    let np1 = (n + 1) as f64;
    let d1 = chebyshev::derivative(c);
    let d2 = chebyshev::derivative(&d1);
    (0..=2000)
        .map(|i| {
            let x = i as f64 / 2000.0;
            let (p1, p2) = (chebyshev::evaluate(&d1, x), chebyshev::evaluate(&d2, x));
            let a = (1.0 - x) * p1 / np1;
            let b = ((1.0 - 2.0 * x) * p1 + x * (1.0 - x) * p2) / np1;
            (1.0 + a).min(1.0 + b)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `ε·p(x)` for a random polynomial `p` of the given degree with
/// `max |p| = 1` on `[0,1]`.
///
/// `ε = amplitude`, reduced if needed so that `1 + a ≥ margin` and
/// `1 + b ≥ margin` on `[0,1]`.
pub fn random_radial_perturbation<R: Rng>(
    chart: &RadialChart,
    rng: &mut R,
    amplitude: f64,
    degree: usize,
    margin: f64,
) -> Result<RadialPotential> {
    if !(amplitude >= 0.0) || !(0.0..1.0).contains(&margin) || degree == 0 {
        return Err(Error::Domain(format!(
            "amplitude = {amplitude}, degree = {degree}, margin = {margin} out of range"
        )));
    }
    let mono: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c = chebyshev::from_monomials(&mono);
    let sup = (0..=2000).map(|i| chebyshev::evaluate(&c, i as f64 / 2000.0).abs()).fold(0.0, f64::max);
    let unit: Vec<f64> = c.iter().map(|v| v / sup).collect();
    // 1 + t·a_unit is affine in t, so the margin fixes the largest usable t.
    let drop = 1.0 - radial_ratio_min(chart.dim(), &unit);
    let eps = if drop > 0.0 { amplitude.min((1.0 - margin) / drop) } else { amplitude };
    Ok(RadialPotential::from_coefficients(unit.iter().map(|v| eps * v).collect()))
}
