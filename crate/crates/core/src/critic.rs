//! Critical-equation residuals and the `E_k` gradient flow.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::energy::{ek_bracket, ek_value, segment_energy};
use crate::error::{Error, Result};
use crate::geometry::{sup_norm, CurvatureFields, Geometry, GeometryState, Potential};
use crate::symfun::binomial;

/// `r = σ_{k+1} − Δσ_k − C(n,k+1) μ_k`; for `k = n` this is `−Δσ_n`.
pub fn critical_residual(fields: &CurvatureFields, k: usize, mu: f64) -> Vec<f64> {
    let n = fields.dim();
    assert!(k <= n, "k = {k} exceeds dimension {n}");
    let target = binomial(n, k + 1) * mu;
    fields.sigma(k + 1).iter().zip(fields.lap_sigma(k)).map(|(s, l)| s - l - target).collect()
}

/// `R² − |Ric|² − 2ΔR − n(n−1) μ_1`, the `k = 1` equation written with the
/// scalar curvature and the norm of the Ricci form.
pub fn e1_residual(fields: &CurvatureFields, mu1: f64) -> Vec<f64> {
    let n = fields.dim();
    let r = fields.scalar_curvature();
    let lap_r = fields.lap_sigma(1);
    (0..fields.num_nodes())
        .map(|j| {
            let norm2: f64 = fields.spectrum_values(j).iter().map(|l| l * l).sum();
            r[j] * r[j] - norm2 - 2.0 * lap_r[j] - (n * (n - 1)) as f64 * mu1
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub k: usize,
    /// Initial (and largest) step size.
    pub step: f64,
    /// Target sup-norm of the critical residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Backtracking factor in `(0,1)`.
    pub shrink: f64,
    /// Degree of the finite basis the flow moves in (Chebyshev degree on the
    /// radial testbed, per-axis wavenumber on the torus).
    pub basis_degree: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Simpson nodes for the starting energy.
    pub steps: usize,
    /// Below this step size the flow gives up.
    pub min_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            k: 1,
            step: 0.1,
            tol: 1e-6,
            max_iters: 100_000,
            shrink: 0.5,
            basis_degree: 8,
            armijo: 1e-4,
            steps: crate::energy::DEFAULT_STEPS,
            min_step: 1e-14,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::Domain(format!("step = {} must be positive", self.step)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Domain(format!("shrink = {} must lie in (0,1)", self.shrink)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tol = {} must be positive", self.tol)));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::Domain(format!("armijo = {} must lie in (0,1)", self.armijo)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    AdmissibilityFloor,
}

/// Monitors recorded at the start of every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub iter: usize,
    pub energy: f64,
    pub sup_residual: f64,
    pub min_ricci_eig: f64,
    #[serde(rename = "min_R")]
    pub min_r: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct FlowTrace<P> {
    pub records: Vec<FlowRecord>,
    pub final_potential: P,
    pub termination: Termination,
}

impl<P> FlowTrace<P> {
    pub fn last(&self) -> Option<&FlowRecord> {
        self.records.last()
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }
}

fn monitor(fields: &CurvatureFields, k: usize, mu: f64, iter: usize, energy: f64, step: f64) -> FlowRecord {
    FlowRecord {
        iter,
        energy,
        sup_residual: sup_norm(&critical_residual(fields, k, mu)),
        min_ricci_eig: fields.min_ricci_eigenvalue().0,
        min_r: fields.min_scalar_curvature().0,
        step,
    }
}

/// L²(ω_φ^n) projection of a nodal field onto the span of `basis`.
fn project(fields: &CurvatureFields, basis: &[Vec<f64>], field: &[f64]) -> Option<Vec<f64>> {
    let m = basis.len();
    let w = fields.weights();
    let dot = |a: &[f64], b: &[f64]| -> f64 { w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum() };
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &basis[j]));
    let rhs = DVector::from_fn(m, |i, _| dot(&basis[i], field));
    gram.cholesky().map(|c| c.solve(&rhs).iter().copied().collect())
}

/// Descends `E_k` from `start` along the basis-projected L² gradient.
///
/// Each iteration takes `φ ← φ − h·P(B_k)` where `P` is the L²(ω_φ^n)
/// projection onto the flow basis, accepts the step only if the metric stays
/// admissible and the energy increment (a three-node Simpson integral along
/// the step) satisfies the Armijo condition, and otherwise shrinks `h`. After
/// an accepted step `h` grows by `1/√shrink`, capped at `config.step`.
/// An inadmissible start terminates immediately with
/// [`Termination::AdmissibilityFloor`] and no records.
pub fn gradient_flow<G: Geometry>(
    geom: &G,
    start: &G::Potential,
    config: &FlowConfig,
) -> Result<FlowTrace<G::Potential>> {
    config.validate()?;
    let n = geom.dim();
    if config.k > n {
        return Err(Error::Domain(format!("k = {} outside 0..={n}", config.k)));
    }
    let k = config.k;
    let mu = geom.mu(k);
    let mut phi = start.clone();
    geom.normalize(&mut phi);
    let mut state = match geom.build(&phi) {
        Ok(s) => s,
        Err(Error::Admissibility { .. }) => {
            return Ok(FlowTrace {
                records: vec![],
                final_potential: phi,
                termination: Termination::AdmissibilityFloor,
            })
        }
        Err(e) => return Err(e),
    };
    let mut energy = ek_value(geom, &phi, &[k], config.steps)?[0];
    let basis_pots = geom.flow_basis(config.basis_degree);
    let basis: Vec<Vec<f64>> = basis_pots.iter().map(|p| geom.nodal_values(p)).collect();
    let grow = 1.0 / config.shrink.sqrt();
    let mut step = config.step;
    let mut records = Vec::new();

    for iter in 0..=config.max_iters {
        let fields = state.fields();
        let rec = monitor(fields, k, mu, iter, energy, step);
        records.push(rec);
        if rec.sup_residual <= config.tol {
            return Ok(FlowTrace { records, final_potential: phi, termination: Termination::Converged });
        }
        if iter == config.max_iters {
            break;
        }
        let b = ek_bracket(fields, k, mu);
        let Some(coef) = project(fields, &basis, &b) else {
            return Err(Error::InternalConsistency("flow basis Gram matrix is singular".into()));
        };
        let mut direction = geom.zero_potential();
        for (c, p) in coef.iter().zip(&basis_pots) {
            direction = G::Potential::lincomb(1.0, &direction, *c, p);
        }
        let dir_values = geom.nodal_values(&direction);
        let slope: f64 = fields.average(&dir_values.iter().zip(&b).map(|(d, b)| d * b).collect::<Vec<_>>());

        loop {
            if step < config.min_step {
                return Ok(FlowTrace { records, final_potential: phi, termination: Termination::AdmissibilityFloor });
            }
            let mut trial = G::Potential::lincomb(1.0, &phi, -step, &direction);
            geom.normalize(&mut trial);
            let trial_state = match geom.build(&trial) {
                Ok(s) => s,
                Err(Error::Admissibility { .. }) => {
                    step *= config.shrink;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let delta = match segment_energy(geom, &phi, &trial, &[k], 3) {
                Ok(d) => d[0],
                Err(Error::Path { .. }) => {
                    step *= config.shrink;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if delta <= -config.armijo * step * slope {
                phi = trial;
                state = trial_state;
                energy += delta;
                step = (step * grow).min(config.step);
                break;
            }
            step *= config.shrink;
        }
    }
    Ok(FlowTrace { records, final_potential: phi, termination: Termination::MaxIters })
}
