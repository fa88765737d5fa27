//! The functionals `E_k` evaluated by quadrature along paths of potentials.
//!
//! Along a path `φ_s` with `φ_0 = 0`, `φ_1 = φ`,
//!
//! ```text
//! E_k(φ) = 1/V ∫_0^1 ∫ φ̇_s · B_k(ω_{φ_s}) ω_{φ_s}^n ds,
//! B_k    = (k+1) C(n,k)⁻¹ (Δσ_k − σ_{k+1}) + (n−k) μ_k,
//! ```
//!
//! and equivalently, before integrating by parts,
//!
//! ```text
//! E_k(φ) = (k+1)/V ∫∫ (Δφ̇) Σ_k ω^n ds − (n−k)/V ∫∫ φ̇ (Σ_{k+1} − μ_k) ω^n ds.
//! ```
//!
//! Both are computed from the same states so that their difference measures
//! the discrete integration-by-parts defect. Geometry is rebuilt at every
//! quadrature node.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurvatureFields, Geometry, GeometryState, Potential, TestbedKind};
use crate::symfun::binomial;

/// Default number of Simpson nodes in the path parameter.
pub const DEFAULT_STEPS: usize = 33;

/// `μ_k`: `1` in the anticanonical class of projective space, `0` on the torus.
pub fn mu_k(testbed: TestbedKind, _n: usize, _k: usize) -> f64 {
    match testbed {
        TestbedKind::Projective => 1.0,
        TestbedKind::Torus => 0.0,
    }
}

/// `(1/V) ∫ Σ_{k+1} ω^n`, the quadrature route to `μ_k`.
pub fn mu_k_quadrature(fields: &CurvatureFields, k: usize) -> f64 {
    fields.average(&fields.normalized(k + 1))
}

/// The first variation density `B_k` of `E_k` at a metric.
pub fn ek_bracket(fields: &CurvatureFields, k: usize, mu: f64) -> Vec<f64> {
    let n = fields.dim();
    assert!(k <= n, "k = {k} exceeds dimension {n}");
    let c = (k as f64 + 1.0) / binomial(n, k);
    let shift = (n - k) as f64 * mu;
    let b: Vec<f64> = fields.lap_sigma(k).iter().zip(fields.sigma(k + 1)).map(|(l, s)| c * (l - s) + shift).collect();
    debug_assert!(
        {
            let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            fields.average(&b).abs() <= 1e-8 * scale
        },
        "bracket mean {:e} is not zero",
        fields.average(&b)
    );
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `φ_s = s φ`
    Linear,
    /// `φ_s = sin²(πs/2) φ`
    Sine,
}

impl Schedule {
    pub fn coefficient(self, s: f64) -> f64 {
        match self {
            Schedule::Linear => s,
            Schedule::Sine => (0.5 * PI * s).sin().powi(2),
        }
    }

    pub fn rate(self, s: f64) -> f64 {
        match self {
            Schedule::Linear => 1.0,
            Schedule::Sine => 0.5 * PI * (PI * s).sin(),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Schedule::Linear => Schedule::Sine,
            Schedule::Sine => Schedule::Linear,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::Sine => "sine",
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Schedule::Linear),
            "sine" => Ok(Schedule::Sine),
            other => Err(Error::Domain(format!("unknown schedule `{other}`"))),
        }
    }
}

/// A path from the background (`φ_0 = 0`) to `target`.
#[derive(Debug, Clone)]
pub struct PathSpec<P> {
    pub target: P,
    pub schedule: Schedule,
    /// Odd number of Simpson nodes `N_t ≥ 3`.
    pub steps: usize,
}

impl<P> PathSpec<P> {
    pub fn new(target: P, schedule: Schedule, steps: usize) -> Result<Self> {
        validate_steps(steps)?;
        Ok(Self { target, schedule, steps })
    }
}

fn validate_steps(steps: usize) -> Result<()> {
    if steps < 3 || steps.is_multiple_of(2) {
        return Err(Error::Domain(format!("Simpson node count {steps} must be odd and ≥ 3")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub k: usize,
    pub n: usize,
    pub testbed: TestbedKind,
    /// Bracket (integrated-by-parts) form.
    pub value: f64,
    /// Two-term form on the same path.
    pub value_alt: f64,
    /// Difference between this schedule and the other one.
    pub path_delta: f64,
    /// Richardson estimate of the error in `value`, from `N_t` against `2N_t − 1` nodes.
    pub quadrature_error: f64,
    pub schedule: Schedule,
    #[serde(rename = "N_t")]
    pub n_t: usize,
}

/// Composite Simpson on `[0,1]` with an odd number of equispaced samples.
pub(crate) fn simpson(values: &[f64]) -> f64 {
    let m = values.len();
    debug_assert!(m >= 3 && m % 2 == 1);
    let h = 1.0 / (m - 1) as f64;
    let mut s = values[0] + values[m - 1];
    for (i, v) in values.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Integrands at one quadrature node, for each requested `k`.
struct NodeIntegrands {
    bracket: Vec<f64>,
    original: Vec<f64>,
}

/// Evaluates both integrands at `base + c·direction` where `φ̇ = rate·direction`.
#[allow(clippy::too_many_arguments)]
fn integrands_at<G: Geometry>(
    geom: &G,
    base: &G::Potential,
    direction: &G::Potential,
    direction_values: &[f64],
    coefficient: f64,
    rate: f64,
    ks: &[usize],
    with_original: bool,
) -> Result<NodeIntegrands> {
    let phi = G::Potential::lincomb(1.0, base, coefficient, direction);
    let state = geom.build(&phi)?;
    let fields = state.fields();
    let n = geom.dim();
    let v = fields.volume();
    let lap_dir = if with_original { Some(geom.laplacian_of(&state, direction)?) } else { None };
    let mut bracket = Vec::with_capacity(ks.len());
    let mut original = Vec::with_capacity(ks.len());
    for &k in ks {
        let mu = geom.mu(k);
        let b = ek_bracket(fields, k, mu);
        let prod: Vec<f64> = b.iter().zip(direction_values).map(|(b, d)| b * d).collect();
        bracket.push(rate * fields.integrate(&prod) / v);
        if let Some(lap) = &lap_dir {
            let sk = fields.normalized(k);
            let sk1 = fields.normalized(k + 1);
            let first: f64 = lap.iter().zip(&sk).zip(fields.weights()).map(|((l, s), w)| w * l * s).sum();
            let second: f64 =
                direction_values.iter().zip(&sk1).zip(fields.weights()).map(|((d, s), w)| w * d * (s - mu)).sum();
            original.push(rate * ((k as f64 + 1.0) * first - (n - k) as f64 * second) / v);
        }
    }
    Ok(NodeIntegrands { bracket, original })
}

/// Integrands on `m` equispaced nodes of `[0,1]` along a scheduled segment.
fn sample_path<G: Geometry>(
    geom: &G,
    base: &G::Potential,
    direction: &G::Potential,
    schedule: Schedule,
    m: usize,
    ks: &[usize],
    original_stride: Option<usize>,
) -> Result<Vec<NodeIntegrands>> {
    let dir_values = geom.nodal_values(direction);
    (0..m)
        .map(|i| {
            let s = i as f64 / (m - 1) as f64;
            integrands_at(
                geom,
                base,
                direction,
                &dir_values,
                schedule.coefficient(s),
                schedule.rate(s),
                ks,
                original_stride.is_some_and(|st| i % st == 0),
            )
            .map_err(|e| Error::Path { s, source: Box::new(e) })
        })
        .collect()
}

fn column(samples: &[NodeIntegrands], idx: usize, original: bool, stride: usize) -> Vec<f64> {
    samples.iter().step_by(stride).map(|s| if original { s.original[idx] } else { s.bracket[idx] }).collect()
}

fn check_ks(n: usize, ks: &[usize]) -> Result<()> {
    if let Some(k) = ks.iter().find(|&&k| k > n) {
        return Err(Error::Domain(format!("k = {k} outside 0..={n}")));
    }
    Ok(())
}

fn richardson(samples: &[NodeIntegrands], idx: usize, stride: usize) -> f64 {
    let fine = simpson(&column(samples, idx, false, stride));
    let coarse = simpson(&column(samples, idx, false, 2 * stride));
    fine + (fine - coarse) / 15.0
}

/// `E_k` for several `k` at once, sharing the states along the path.
///
/// The configured schedule is sampled on `2N_t − 1` nodes; `value` and
/// `value_alt` use every other node. The schedules are compared through
/// their Richardson-extrapolated integrals at equal resolution.
pub fn ek_energies<G: Geometry>(geom: &G, path: &PathSpec<G::Potential>, ks: &[usize]) -> Result<Vec<EnergyReport>> {
    validate_steps(path.steps)?;
    check_ks(geom.dim(), ks)?;
    let zero = geom.zero_potential();
    let fine_m = 2 * path.steps - 1;
    let fine = sample_path(geom, &zero, &path.target, path.schedule, fine_m, ks, Some(2))?;
    // Halving N_t − 1 twice needs it divisible by 4; otherwise compare at the fine level.
    let (other_m, stride) = if (path.steps - 1).is_multiple_of(4) { (path.steps, 2) } else { (fine_m, 1) };
    let other = sample_path(geom, &zero, &path.target, path.schedule.other(), other_m, ks, None)?;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let value = simpson(&column(&fine, i, false, 2));
            let refined = simpson(&column(&fine, i, false, 1));
            let value_alt = simpson(&column(&fine, i, true, 2));
            EnergyReport {
                k,
                n: geom.dim(),
                testbed: geom.testbed(),
                value,
                value_alt,
                path_delta: (richardson(&fine, i, stride) - richardson(&other, i, 1)).abs(),
                quadrature_error: (refined - value).abs() * 16.0 / 15.0,
                schedule: path.schedule,
                n_t: path.steps,
            }
        })
        .collect())
}

pub fn ek_energy<G: Geometry>(geom: &G, path: &PathSpec<G::Potential>, k: usize) -> Result<EnergyReport> {
    Ok(ek_energies(geom, path, &[k])?.remove(0))
}

/// The two-term form alone.
pub fn ek_energy_original<G: Geometry>(geom: &G, path: &PathSpec<G::Potential>, k: usize) -> Result<f64> {
    validate_steps(path.steps)?;
    check_ks(geom.dim(), &[k])?;
    let zero = geom.zero_potential();
    let samples = sample_path(geom, &zero, &path.target, path.schedule, path.steps, &[k], Some(1))?;
    Ok(simpson(&column(&samples, 0, true, 1)))
}

/// `E_k(φ)` along the linear path, bracket form only.
pub fn ek_value<G: Geometry>(geom: &G, phi: &G::Potential, ks: &[usize], steps: usize) -> Result<Vec<f64>> {
    segment_energy(geom, &geom.zero_potential(), phi, ks, steps)
}

/// `E_{k,ω_from}(to − from)`: the energy increment along the straight segment
/// from `from` to `to`, with the background rebased to `ω_from`.
pub fn segment_energy<G: Geometry>(
    geom: &G,
    from: &G::Potential,
    to: &G::Potential,
    ks: &[usize],
    steps: usize,
) -> Result<Vec<f64>> {
    validate_steps(steps)?;
    check_ks(geom.dim(), ks)?;
    let direction = G::Potential::lincomb(1.0, to, -1.0, from);
    let samples = sample_path(geom, from, &direction, Schedule::Linear, steps, ks, None)?;
    Ok((0..ks.len()).map(|i| simpson(&column(&samples, i, false, 1))).collect())
}

/// `|E_ω(φ) − E_ω(ψ) − E_{ω_ψ}(φ − ψ)|`.
pub fn cocycle_check<G: Geometry>(
    geom: &G,
    psi: &G::Potential,
    phi: &G::Potential,
    k: usize,
    steps: usize,
) -> Result<f64> {
    let e_phi = ek_value(geom, phi, &[k], steps)?[0];
    let e_psi = ek_value(geom, psi, &[k], steps)?[0];
    let rebased = segment_energy(geom, psi, phi, &[k], steps)?[0];
    Ok((e_phi - e_psi - rebased).abs())
}

/// `(1/V) ∫ ψ B_k ω_φ^n`, the directional derivative predicted by the bracket.
pub fn first_variation<G: Geometry>(geom: &G, state: &G::State, psi: &G::Potential, k: usize) -> f64 {
    let fields = state.fields();
    let b = ek_bracket(fields, k, geom.mu(k));
    let psi = geom.nodal_values(psi);
    let prod: Vec<f64> = b.iter().zip(&psi).map(|(b, p)| b * p).collect();
    fields.average(&prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let m = 9;
        let v: Vec<f64> = (0..m)
            .map(|i| {
                let s = i as f64 / (m - 1) as f64;
                3.0 * s * s * s - s + 2.0
            })
            .collect();
        assert!((simpson(&v) - (0.75 - 0.5 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn schedules_hit_endpoints() {
        for s in [Schedule::Linear, Schedule::Sine] {
            assert_eq!(s.coefficient(0.0), 0.0);
            assert!((s.coefficient(1.0) - 1.0).abs() < 1e-15);
            // rate is the derivative of the coefficient
            let h = 1e-6;
            let fd = (s.coefficient(0.3 + h) - s.coefficient(0.3 - h)) / (2.0 * h);
            assert!((fd - s.rate(0.3)).abs() < 1e-8);
        }
    }

    #[test]
    fn steps_must_be_odd() {
        assert!(PathSpec::new((), Schedule::Linear, 32).is_err());
        assert!(PathSpec::new((), Schedule::Linear, 1).is_err());
        assert!(PathSpec::new((), Schedule::Linear, 33).is_ok());
    }

    #[test]
    fn mu_constants() {
        for n in 1..=8 {
            for k in 0..=n {
                assert_eq!(mu_k(TestbedKind::Projective, n, k), 1.0);
                assert_eq!(mu_k(TestbedKind::Torus, n, k), 0.0);
            }
        }
    }
}
