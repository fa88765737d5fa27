//! Types shared by the two geometry engines.
//!
//! Both testbeds reduce a potential to the same per-node data: volume
//! weights, the relative Ricci spectrum, the `σ_k` fields and their
//! Laplacians. Everything downstream (energies, residuals, flows,
//! certificates) reads only [`CurvatureFields`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::symfun::{binomial, SigmaVector, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestbedKind {
    /// Flat complex torus, `c_1 = 0`.
    Torus,
    /// Projective space in the anticanonical class, `c_1 > 0`.
    Projective,
}

impl fmt::Display for TestbedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestbedKind::Torus => "torus",
            TestbedKind::Projective => "projective",
        })
    }
}

impl std::str::FromStr for TestbedKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(TestbedKind::Torus),
            "projective" | "cpn" => Ok(TestbedKind::Projective),
            other => Err(Error::Domain(format!("unknown testbed `{other}`"))),
        }
    }
}

/// Curvature data of one metric, sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct CurvatureFields {
    n: usize,
    weights: Vec<f64>,
    volume: f64,
    /// Node-major, `n` eigenvalues per node.
    spectra: Vec<f64>,
    /// `sigma[k][node]` for `k = 0..=n+1`; the last row is identically zero.
    sigma: Vec<Vec<f64>>,
    /// `lap_sigma[k][node] = Δσ_k` for `k = 0..=n`.
    lap_sigma: Vec<Vec<f64>>,
}

impl CurvatureFields {
    /// Assembles fields from per-node data. `sigma` must hold rows
    /// `σ_0..σ_n` and `lap_sigma` rows `Δσ_0..Δσ_n`.
    pub fn new(
        n: usize,
        weights: Vec<f64>,
        spectra: Vec<f64>,
        mut sigma: Vec<Vec<f64>>,
        lap_sigma: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let nodes = weights.len();
        check_len(nodes * n, spectra.len())?;
        if sigma.len() != n + 1 || lap_sigma.len() != n + 1 {
            return Err(Error::Domain(format!(
                "expected {} sigma rows, got {} and {}",
                n + 1,
                sigma.len(),
                lap_sigma.len()
            )));
        }
        for row in sigma.iter().chain(lap_sigma.iter()) {
            check_len(nodes, row.len())?;
        }
        sigma.push(vec![0.0; nodes]);
        let volume = weights.iter().sum();
        Ok(Self { n, weights, volume, spectra, sigma, lap_sigma })
    }

    /// Fields for prescribed spectra, with `Δσ_k` supplied by the caller.
    /// Used to manufacture states with known properties.
    pub fn from_spectra(n: usize, weights: Vec<f64>, spectra: &[Spectrum], lap_sigma: Vec<Vec<f64>>) -> Result<Self> {
        check_len(weights.len(), spectra.len())?;
        let mut sigma = vec![Vec::with_capacity(spectra.len()); n + 1];
        let mut flat = Vec::with_capacity(n * spectra.len());
        for sp in spectra {
            if sp.dim() != n {
                return Err(Error::Domain(format!("spectrum of length {} in dimension {n}", sp.dim())));
            }
            flat.extend_from_slice(sp.values());
            let sv = crate::symfun::sigma_vector(sp);
            for (k, row) in sigma.iter_mut().enumerate() {
                row.push(sv.sigma[k]);
            }
        }
        Self::new(n, weights, flat, sigma, lap_sigma)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.weights.len()
    }

    /// Quadrature weights: `Σ_j w_j h_j ≈ ∫ h ω_φ^n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn spectrum_values(&self, node: usize) -> &[f64] {
        &self.spectra[node * self.n..(node + 1) * self.n]
    }

    pub fn spectrum(&self, node: usize) -> Spectrum {
        Spectrum::new(self.spectrum_values(node).to_vec()).expect("stored spectra are valid")
    }

    /// `σ_k` as a field; `k = n + 1` gives the zero field.
    pub fn sigma(&self, k: usize) -> &[f64] {
        &self.sigma[k]
    }

    /// `Σ_k = σ_k / C(n,k)` as a field.
    pub fn normalized(&self, k: usize) -> Vec<f64> {
        let c = binomial(self.n, k);
        if c == 0.0 {
            return vec![0.0; self.num_nodes()];
        }
        self.sigma[k].iter().map(|s| s / c).collect()
    }

    pub fn sigma_vector(&self, node: usize) -> SigmaVector {
        let sigma: Vec<f64> = (0..=self.n).map(|k| self.sigma[k][node]).collect();
        let normalized = sigma.iter().enumerate().map(|(k, s)| s / binomial(self.n, k)).collect();
        SigmaVector { sigma, normalized }
    }

    /// `Δσ_k` for `k = 0..=n`.
    pub fn lap_sigma(&self, k: usize) -> &[f64] {
        &self.lap_sigma[k]
    }

    /// Scalar curvature `R = σ_1`.
    pub fn scalar_curvature(&self) -> &[f64] {
        &self.sigma[1]
    }

    pub fn integrate(&self, h: &[f64]) -> f64 {
        debug_assert_eq!(h.len(), self.weights.len());
        self.weights.iter().zip(h).map(|(w, v)| w * v).sum()
    }

    /// `(1/V) ∫ h ω_φ^n`.
    pub fn average(&self, h: &[f64]) -> f64 {
        self.integrate(h) / self.volume
    }

    /// Smallest Ricci eigenvalue over all nodes, with its node.
    pub fn min_ricci_eigenvalue(&self) -> (f64, usize) {
        argmin(self.spectra.chunks(self.n).map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)))
    }

    pub fn min_scalar_curvature(&self) -> (f64, usize) {
        argmin(self.sigma[1].iter().copied())
    }
}

pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> (f64, usize) {
    values.enumerate().fold((f64::INFINITY, 0), |(m, i), (j, v)| if v < m { (v, j) } else { (m, i) })
}

pub(crate) fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// A Kähler potential living in a linear space.
pub trait Potential: Clone + Send + Sync + fmt::Debug {
    /// `a·x + b·y`.
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self;

    fn scaled(&self, c: f64) -> Self {
        Self::lincomb(c, self, 0.0, self)
    }
}

/// Ricci potential `f` with `Ric = ω + i∂∂̄f`, and its Laplacian.
#[derive(Debug, Clone, Copy)]
pub struct RicciPotential<'a> {
    pub f: &'a [f64],
    pub laplacian: &'a [f64],
}

/// A metric whose curvature has been evaluated at every node.
pub trait GeometryState: Send + Sync {
    fn testbed(&self) -> TestbedKind;
    fn fields(&self) -> &CurvatureFields;
    /// Only defined in the anticanonical class.
    fn ricci_potential(&self) -> Option<RicciPotential<'_>>;
}

/// A discretized background manifold on which potentials can be turned into
/// curvature.
pub trait Geometry: Sync {
    type Potential: Potential;
    type State: GeometryState;

    fn testbed(&self) -> TestbedKind;
    fn dim(&self) -> usize;
    fn num_nodes(&self) -> usize;
    fn zero_potential(&self) -> Self::Potential;
    /// Curvature of `ω_φ`; fails with [`Error::Admissibility`] when the
    /// metric is not positive definite.
    fn build(&self, phi: &Self::Potential) -> Result<Self::State>;
    /// `Δ_φ` applied to a potential-type function, using the geometry of `state`.
    fn laplacian_of(&self, state: &Self::State, h: &Self::Potential) -> Result<Vec<f64>>;
    fn nodal_values(&self, phi: &Self::Potential) -> Vec<f64>;
    /// Removes the constant part of `phi`.
    fn normalize(&self, phi: &mut Self::Potential);
    /// Finite basis in which gradient flows move.
    fn flow_basis(&self, degree: usize) -> Vec<Self::Potential>;
    /// `μ_k` of the Kähler class of this geometry.
    fn mu(&self, k: usize) -> f64 {
        crate::energy::mu_k(self.testbed(), self.dim(), k)
    }
}
