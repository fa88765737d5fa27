//! Replays, on a discrete metric, the argument that a critical point of `E_k`
//! in the anticanonical class with nonnegative Ricci curvature (or `R > −n`
//! when `k = 1`) is Kähler–Einstein.
//!
//! The certificate runs the argument's checks in order:
//!
//! 1. criticality: `sup |σ_{k+1} − Δσ_k − C(n,k+1)| ≤ tol`;
//! 2. hypothesis: `min λ ≥ −tol` (`min R ≥ −n + tol` for `k = 1`);
//! 3. minimum principle at `p = argmin Σ_k`: `Δσ_k(p) ≥ −tol` and
//!    `Σ_{k+1}(p) ≥ 1 − tol` (`Σ_n ≥ 1 − tol` for `k = n`);
//! 4. the Maclaurin chain `Σ_1 ≥ … ≥ Σ_k^{1/k} ≥ 1 − tol` at every node;
//! 5. the Ricci potential: `Δf = R − n ≥ −tol`, `‖Δf‖∞ ≤ 10·tol` and
//!    `‖f − f̄‖∞ ≤ 10·tol`.
//!
//! For `k = 0` the critical metrics have constant scalar curvature, so only
//! steps 1 and 5 apply.

use serde::{Deserialize, Serialize};

use crate::critic::critical_residual;
use crate::error::{Error, Result};
use crate::geometry::{argmin, sup_norm, CurvatureFields, GeometryState, RicciPotential, TestbedKind};
use crate::symfun::{is_non_increasing, maclaurin_chain, Spectrum};

/// Multiplier between `tol` and the bounds on `Δf` and on the oscillation of `f`.
pub const POTENTIAL_MULTIPLIER: f64 = 10.0;

pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateStep {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub n: usize,
    pub tol: f64,
    pub steps: Vec<CertificateStep>,
    /// `"PASS"` or `"FAIL(<step>)"`.
    pub overall: String,
    pub ke_deviation: f64,
    pub f_deviation: f64,
    pub potential_multiplier: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.verdict == Verdict::Pass)
    }

    /// Name of the first failing step.
    pub fn failed_step(&self) -> Option<&str> {
        self.steps.iter().find(|s| s.verdict == Verdict::Fail).map(|s| s.name.as_str())
    }

    pub fn step(&self, name: &str) -> Option<&CertificateStep> {
        self.steps.iter().find(|s| s.name == name)
    }
}

fn at_least(name: &str, value: f64, threshold: f64, node: Option<usize>) -> CertificateStep {
    CertificateStep {
        name: name.into(),
        value,
        threshold,
        verdict: if value >= threshold { Verdict::Pass } else { Verdict::Fail },
        node_index: node,
    }
}

fn at_most(name: &str, value: f64, threshold: f64, node: Option<usize>) -> CertificateStep {
    CertificateStep {
        name: name.into(),
        value,
        threshold,
        verdict: if value <= threshold { Verdict::Pass } else { Verdict::Fail },
        node_index: node,
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    argmin(v.iter().map(|x| -x.abs())).1
}

fn require_anticanonical(state: &dyn GeometryState) -> Result<RicciPotential<'_>> {
    if state.testbed() != TestbedKind::Projective {
        return Err(Error::NotApplicable(format!(
            "the {} testbed is not in the anticanonical class of a Fano manifold",
            state.testbed()
        )));
    }
    state.ricci_potential().ok_or_else(|| Error::NotApplicable("state carries no Ricci potential".into()))
}

/// `(max |λ_i − 1|, ‖f − f̄‖∞)`.
pub fn ke_deviation(state: &dyn GeometryState) -> Result<(f64, f64)> {
    let rp = require_anticanonical(state)?;
    let fields = state.fields();
    let spec_dev = (0..fields.num_nodes())
        .flat_map(|j| fields.spectrum_values(j).iter().map(|l| (l - 1.0).abs()))
        .fold(0.0, f64::max);
    let mean = fields.average(rp.f);
    let f_dev = rp.f.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    Ok((spec_dev, f_dev))
}

fn chain_step(fields: &CurvatureFields, k: usize, tol: f64) -> CertificateStep {
    let name = "maclaurin_chain";
    if k == 1 {
        // Σ_1² ≥ Σ_2 holds for any real spectrum; only the bound is needed.
        let s1 = fields.normalized(1);
        let (v, node) = argmin(s1.iter().copied());
        return at_least(name, v, 1.0 - tol, Some(node));
    }
    let mut worst = (f64::INFINITY, 0usize);
    for j in 0..fields.num_nodes() {
        // Eigenvalues within tol of zero are treated as zero (boundary case).
        let clamped: Vec<f64> =
            fields.spectrum_values(j).iter().map(|&l| if (-tol..0.0).contains(&l) { 0.0 } else { l }).collect();
        let value = Spectrum::new(clamped)
            .ok()
            .and_then(|sp| maclaurin_chain(&sp, k).ok())
            .filter(|chain| is_non_increasing(chain, 1e-12))
            .map_or(f64::NEG_INFINITY, |chain| chain[k - 1]);
        if value < worst.0 {
            worst = (value, j);
        }
    }
    at_least(name, worst.0, 1.0 - tol, Some(worst.1))
}

/// Runs the Kähler–Einstein argument on `state` for the functional `E_k`.
pub fn theorem_certificate(state: &dyn GeometryState, k: usize, tol: f64) -> Result<Certificate> {
    let rp = require_anticanonical(state)?;
    let fields = state.fields();
    let n = fields.dim();
    if k > n {
        return Err(Error::Domain(format!("k = {k} outside 0..={n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be positive")));
    }
    let mu = 1.0;
    let mut steps = Vec::new();

    let r = critical_residual(fields, k, mu);
    let worst = argmax_abs(&r);
    steps.push(at_most("criticality", sup_norm(&r), tol, Some(worst)));

    if k == 1 {
        let (min_r, node) = fields.min_scalar_curvature();
        steps.push(at_least("scalar_curvature_hypothesis", min_r, -(n as f64) + tol, Some(node)));
    } else if k > 1 {
        let (min_l, node) = fields.min_ricci_eigenvalue();
        steps.push(at_least("ricci_hypothesis", min_l, -tol, Some(node)));
    }

    if k >= 1 {
        let sk = fields.normalized(k);
        let (_, p) = argmin(sk.iter().copied());
        steps.push(at_least("minimum_slack", fields.lap_sigma(k)[p], -tol, Some(p)));
        if k < n {
            let sk1 = fields.normalized(k + 1);
            steps.push(at_least("minimum_principle", sk1[p], 1.0 - tol, Some(p)));
        } else {
            // Δσ_n = 0 forces σ_n constant, and its mean is C(n,n) μ = 1.
            steps.push(at_least("minimum_principle", sk[p], 1.0 - tol, Some(p)));
        }
        steps.push(chain_step(fields, k, tol));
    }

    let (min_lap, node) = argmin(rp.laplacian.iter().copied());
    steps.push(at_least("laplacian_f_nonnegative", min_lap, -tol, Some(node)));
    steps.push(at_most(
        "laplacian_f_small",
        sup_norm(rp.laplacian),
        POTENTIAL_MULTIPLIER * tol,
        Some(argmax_abs(rp.laplacian)),
    ));
    let (ke_dev, f_dev) = ke_deviation(state)?;
    steps.push(at_most("f_constant", f_dev, POTENTIAL_MULTIPLIER * tol, None));

    let overall = match steps.iter().find(|s| s.verdict == Verdict::Fail) {
        None => "PASS".to_string(),
        Some(s) => format!("FAIL({})", s.name),
    };
    Ok(Certificate {
        k,
        n,
        tol,
        steps,
        overall,
        ke_deviation: ke_dev,
        f_deviation: f_dev,
        potential_multiplier: POTENTIAL_MULTIPLIER,
    })
}

/// A state assembled from prescribed fields, for manufactured test cases.
#[derive(Debug, Clone)]
pub struct ManufacturedState {
    pub testbed: TestbedKind,
    pub fields: CurvatureFields,
    pub f: Vec<f64>,
    pub lap_f: Vec<f64>,
}

impl GeometryState for ManufacturedState {
    fn testbed(&self) -> TestbedKind {
        self.testbed
    }

    fn fields(&self) -> &CurvatureFields {
        &self.fields
    }

    fn ricci_potential(&self) -> Option<RicciPotential<'_>> {
        Some(RicciPotential { f: &self.f, laplacian: &self.lap_f })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manufactured(n: usize, spectra: Vec<Spectrum>, lap: f64) -> ManufacturedState {
        let m = spectra.len();
        let fields =
            CurvatureFields::from_spectra(n, vec![1.0 / m as f64; m], &spectra, vec![vec![lap; m]; n + 1]).unwrap();
        ManufacturedState { testbed: TestbedKind::Projective, fields, f: vec![0.0; m], lap_f: vec![0.0; m] }
    }

    #[test]
    fn unit_spectrum_passes_tightly() {
        for n in 1..=4 {
            let st = manufactured(n, vec![Spectrum::uniform(n, 1.0).unwrap(); 10], 0.0);
            for k in 0..=n {
                let c = theorem_certificate(&st, k, 1e-8).unwrap();
                assert!(c.passed(), "n={n} k={k}: {:?}", c.failed_step());
                assert_eq!(c.overall, "PASS");
                assert_eq!(c.ke_deviation, 0.0);
            }
        }
    }

    #[test]
    fn k_zero_has_no_maclaurin_step() {
        let st = manufactured(2, vec![Spectrum::uniform(2, 1.0).unwrap(); 4], 0.0);
        let c = theorem_certificate(&st, 0, 1e-6).unwrap();
        assert!(c.step("maclaurin_chain").is_none());
        assert!(c.step("criticality").is_some());
    }

    #[test]
    fn large_residual_fails_first() {
        let st = manufactured(2, vec![Spectrum::uniform(2, 1.0).unwrap(); 4], 1e-3);
        let c = theorem_certificate(&st, 1, 1e-5).unwrap();
        assert_eq!(c.failed_step(), Some("criticality"));
        assert_eq!(c.overall, "FAIL(criticality)");
    }

    #[test]
    fn torus_is_rejected() {
        let mut st = manufactured(1, vec![Spectrum::uniform(1, 0.0).unwrap(); 4], 0.0);
        st.testbed = TestbedKind::Torus;
        assert!(matches!(theorem_certificate(&st, 0, 1e-5), Err(Error::NotApplicable(_))));
        assert!(matches!(ke_deviation(&st), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn synthetic_unit_spectrum_has_zero_deviation() {
        let st = manufactured(3, vec![Spectrum::uniform(3, 1.0).unwrap(); 5], 0.0);
        assert_eq!(ke_deviation(&st).unwrap(), (0.0, 0.0));
    }
}
