//! U(n)-invariant Kähler geometry on projective space in the anticanonical class.
//!
//! With `t = log|z|²` an invariant metric is `i∂∂̄u(t)`; its eigenvalues
//! relative to the Euclidean form are `u_t / |z|²` (transverse, multiplicity
//! `n − 1`) and `u_tt / |z|²` (radial). All profiles are functions of the
//! compactified coordinate `x = e^t / (1 + e^t) ∈ (0,1)`, with
//! `d/dt = x(1−x) d/dx`, and the background is the Fubini–Study potential
//! `u_0 = −(n+1) log(1−x)`, normalized so that `Ric(ω_0) = ω_0`.
//!
//! Writing `u = u_0 + φ`,
//!
//! ```text
//! u_t  = (n+1) x        (1 + a),   a = (1−x) φ_x / (n+1)
//! u_tt = (n+1) x (1−x)  (1 + b),   b = ((1−2x) φ_x + x(1−x) φ_xx) / (n+1)
//! ```
//!
//! and the Ricci potential `f = v − u` of `v = n t − (n−1) log u_t − log u_tt`
//! simplifies to `−(n−1) log(1+a) − log(1+b) − φ`, smooth up to both ends.
//! `φ` is held as a Chebyshev series, its derivatives are taken exactly from
//! the series, and every nonlinear step after that carries Taylor jets, so
//! the eigenvalues `λ_trans = 1 + f_t/u_t`, `λ_rad = 1 + f_tt/u_tt` and the
//! Laplacians `Δσ_k` never pass through repeated numerical differentiation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev;
use crate::error::{check_len, Error, Result};
use crate::geometry::{CurvatureFields, Geometry, GeometryState, Potential, RicciPotential, TestbedKind};
use crate::jet::Jet;
use crate::symfun::{product_coefficients, MAX_DIM};

/// Smallest ratio `ω_φ / ω` eigenvalue accepted at any node.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-8;

/// Nodes outside this band carry an accuracy caveat and are excluded from
/// acceptance sup-norms.
pub const ACCURACY_BAND: (f64, f64) = (0.01, 0.99);

/// Trailing Chebyshev coefficients below this fraction of the largest are dropped.
pub const CHOP_TOL: f64 = 1e-15;

type J = Jet<7>;

/// Interior Chebyshev collocation chart on `(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialChart {
    n: usize,
    nodes: Vec<f64>,
    theta: Vec<f64>,
    fejer: Vec<f64>,
}

impl RadialChart {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::Domain(format!("projective dimension n = {n} outside 1..={MAX_DIM}")));
        }
        if !(64..=1024).contains(&m) {
            return Err(Error::Domain(format!("radial node count M = {m} outside 64..=1024")));
        }
        let (nodes, theta) = chebyshev::gauss_nodes(m);
        let fejer = chebyshev::fejer_weights(&theta);
        Ok(Self { n, nodes, theta, fejer })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn in_accuracy_band(&self, node: usize) -> bool {
        let x = self.nodes[node];
        x >= ACCURACY_BAND.0 && x <= ACCURACY_BAND.1
    }

    /// `V = τ_max^n / n` with `τ_max = n + 1`.
    pub fn volume_closed_form(&self) -> f64 {
        let n = self.n as f64;
        (n + 1.0).powi(self.n as i32) / n
    }

    fn np1(&self) -> f64 {
        self.n as f64 + 1.0
    }

    /// Quadrature weights of the background volume form `ω_0^n`.
    fn background_weights(&self) -> Vec<f64> {
        let c = self.np1().powi(self.n as i32);
        self.nodes.iter().zip(&self.fejer).map(|(x, w)| w * c * x.powi(self.n as i32 - 1)).collect()
    }

    /// Values of `φ, φ', …, φ^{(order)}` at every node.
    fn derivative_values(&self, phi: &RadialPotential, order: usize) -> Vec<Vec<f64>> {
        let mut series = phi.coeffs.clone();
        let mut out = Vec::with_capacity(order + 1);
        for r in 0..=order {
            if r > 0 {
                series = chebyshev::derivative(&series);
            }
            out.push(self.nodes.iter().map(|&x| chebyshev::evaluate(&series, x)).collect());
        }
        out
    }

    fn lap_at(&self, x: f64, h1: f64, h2: f64, ta: f64, rb: f64) -> f64 {
        let n = self.n as f64;
        let np1 = self.np1();
        (n - 1.0) * (1.0 - x) * h1 / (np1 * ta) + ((1.0 - 2.0 * x) * h1 + x * (1.0 - x) * h2) / (np1 * rb)
    }

    /// Curvature of the radial metric `u_0 + φ`.
    pub fn build_radial_state(&self, pot: &RadialPotential) -> Result<RadialState> {
        let n = self.n;
        let nf = n as f64;
        let np1 = self.np1();
        let dv = self.derivative_values(pot, 6);

        struct NodeData {
            ta: f64,
            rb: f64,
            lt: f64,
            lr: f64,
            f: f64,
            lap_f: f64,
            sigma: Vec<f64>,
            lap_sigma: Vec<f64>,
        }

        let per_node: Vec<std::result::Result<NodeData, (usize, f64)>> = (0..self.num_nodes())
            .into_par_iter()
            .map(|j| {
                let x = self.nodes[j];
                let d: Vec<f64> = dv.iter().map(|row| row[j]).collect();
                let phi = J::from_derivatives(&d);
                let xj = J::variable(x);
                let one_minus_x = J::constant(1.0) - xj;
                let p1 = phi.d();
                let p2 = p1.d();
                let ta = one_minus_x * p1 * (1.0 / np1) + 1.0;
                let rb = ((J::constant(1.0) - xj * 2.0) * p1 + xj * one_minus_x * p2) * (1.0 / np1) + 1.0;
                let worst = ta.value().min(rb.value());
                if !(worst >= ADMISSIBILITY_MARGIN) {
                    return Err((j, worst));
                }
                let f = -(ta.ln() * (nf - 1.0)) - rb.ln() - phi;
                let f1 = f.d();
                let f2 = f1.d();
                let lt = one_minus_x * f1 / (ta * np1) + 1.0;
                let lr = ((J::constant(1.0) - xj * 2.0) * f1 + xj * one_minus_x * f2) / (rb * np1) + 1.0;
                let mut spectrum = vec![lt; n - 1];
                spectrum.push(lr);
                let sig = product_coefficients(&spectrum);
                let (tav, rbv) = (ta.value(), rb.value());
                let lap = |h: &J| self.lap_at(x, h.deriv(1), h.deriv(2), tav, rbv);
                Ok(NodeData {
                    ta: tav,
                    rb: rbv,
                    lt: lt.value(),
                    lr: lr.value(),
                    f: f.value(),
                    lap_f: lap(&f),
                    sigma: sig.iter().map(|s| s.value()).collect(),
                    lap_sigma: sig.iter().map(lap).collect(),
                })
            })
            .collect();

        let mut worst: Option<(usize, f64)> = None;
        for r in &per_node {
            if let Err((j, v)) = r {
                if worst.is_none_or(|(_, w)| *v < w) {
                    worst = Some((*j, *v));
                }
            }
        }
        if let Some((node, min_eig)) = worst {
            return Err(Error::Admissibility { node, min_eig });
        }
        let data: Vec<NodeData> = per_node.into_iter().map(|r| r.expect("checked")).collect();

        let scale = np1.powi(n as i32);
        let weights: Vec<f64> = data
            .iter()
            .zip(self.nodes.iter().zip(&self.fejer))
            .map(|(d, (x, w))| w * scale * x.powi(n as i32 - 1) * d.ta.powi(n as i32 - 1) * d.rb)
            .collect();
        let mut spectra = Vec::with_capacity(n * data.len());
        for d in &data {
            spectra.extend(std::iter::repeat_n(d.lt, n - 1));
            spectra.push(d.lr);
        }
        let sigma = (0..=n).map(|k| data.iter().map(|d| d.sigma[k]).collect()).collect();
        let lap_sigma = (0..=n).map(|k| data.iter().map(|d| d.lap_sigma[k]).collect()).collect();
        let fields = CurvatureFields::new(n, weights, spectra, sigma, lap_sigma)?;

        let raw_f: Vec<f64> = data.iter().map(|d| d.f).collect();
        let mean_f = fields.average(&raw_f);
        Ok(RadialState {
            n,
            transverse_ratio: data.iter().map(|d| d.ta).collect(),
            radial_ratio: data.iter().map(|d| d.rb).collect(),
            lambda_trans: data.iter().map(|d| d.lt).collect(),
            lambda_rad: data.iter().map(|d| d.lr).collect(),
            f: raw_f.iter().map(|v| v - mean_f).collect(),
            lap_f: data.iter().map(|d| d.lap_f).collect(),
            fields,
        })
    }

    /// `Δf = (n−1) f_t/u_t + f_tt/u_tt` for a field given by its nodal values.
    pub fn laplacian_radial(&self, state: &RadialState, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.num_nodes(), f.len())?;
        check_len(self.num_nodes(), state.transverse_ratio.len())?;
        let c = chebyshev::coefficients_from_values(f, &self.theta);
        let pot = RadialPotential { coeffs: c };
        let dv = self.derivative_values(&pot, 2);
        Ok(self.apply_laplacian(state, &dv))
    }

    fn apply_laplacian(&self, state: &RadialState, dv: &[Vec<f64>]) -> Vec<f64> {
        (0..self.num_nodes())
            .map(|j| self.lap_at(self.nodes[j], dv[1][j], dv[2][j], state.transverse_ratio[j], state.radial_ratio[j]))
            .collect()
    }
}

/// A radial potential `φ = u − u_0`, held as a Chebyshev series in `s = 2x − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    coeffs: Vec<f64>,
}

impl RadialPotential {
    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn from_coefficients(coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { coeffs }
    }

    /// `φ(x) = Σ a_j x^j`.
    pub fn from_polynomial(monomials: &[f64]) -> Self {
        Self::from_coefficients(chebyshev::from_monomials(monomials))
    }

    /// Interpolates nodal values on `chart`, chopping coefficients below `chop_tol`.
    pub fn from_values(chart: &RadialChart, values: &[f64], chop_tol: f64) -> Result<Self> {
        check_len(chart.num_nodes(), values.len())?;
        let c = chebyshev::coefficients_from_values(values, &chart.theta);
        Ok(Self::from_coefficients(chebyshev::chop(c, chop_tol)))
    }

    /// Chebyshev interpolant of a smooth `f` on `degree + 1` points, chopped.
    pub fn from_fn(f: impl Fn(f64) -> f64, degree: usize) -> Self {
        let (x, theta) = chebyshev::gauss_nodes(degree + 1);
        let vals: Vec<f64> = x.iter().map(|&x| f(x)).collect();
        let c = chebyshev::coefficients_from_values(&vals, &theta);
        Self::from_coefficients(chebyshev::chop(c, CHOP_TOL))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        chebyshev::evaluate(&self.coeffs, x)
    }

    pub fn phi_values(&self, chart: &RadialChart) -> Vec<f64> {
        chart.nodes.iter().map(|&x| self.eval(x)).collect()
    }

    /// The full potential `u = −(n+1) log(1−x) + φ` at the nodes.
    pub fn u_values(&self, chart: &RadialChart) -> Vec<f64> {
        let np1 = chart.np1();
        chart.nodes.iter().map(|&x| -np1 * (-x).ln_1p() + self.eval(x)).collect()
    }

    /// `u_t = (n+1) x + x(1−x) φ_x` at the nodes.
    pub fn u_t_values(&self, chart: &RadialChart) -> Vec<f64> {
        let d = chebyshev::derivative(&self.coeffs);
        let np1 = chart.np1();
        chart.nodes.iter().map(|&x| np1 * x + x * (1.0 - x) * chebyshev::evaluate(&d, x)).collect()
    }

    /// Relative deviation of `u_t` from `(n+1)x` at the outermost node; small
    /// whenever `φ` is bounded, i.e. the class is anticanonical.
    pub fn class_deviation(&self, chart: &RadialChart) -> f64 {
        let last = chart.num_nodes() - 1;
        let x = chart.nodes[last];
        (self.u_t_values(chart)[last] / (chart.np1() * x) - 1.0).abs()
    }
}

impl Potential for RadialPotential {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let len = x.coeffs.len().max(y.coeffs.len());
        let get = |c: &[f64], i: usize| c.get(i).copied().unwrap_or(0.0);
        Self { coeffs: (0..len).map(|i| a * get(&x.coeffs, i) + b * get(&y.coeffs, i)).collect() }
    }
}

/// The Kähler–Einstein potential of the anticanonical class: `φ = 0`, i.e.
/// `u = −(n+1) log(1−x)`.
pub fn fubini_study(n: usize) -> Result<RadialPotential> {
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::Domain(format!("projective dimension n = {n} outside 1..={MAX_DIM}")));
    }
    Ok(RadialPotential::zero())
}

/// Curvature of a radial metric at every chart node.
#[derive(Debug, Clone)]
pub struct RadialState {
    n: usize,
    /// `u_t / u_{0,t} = 1 + a`.
    transverse_ratio: Vec<f64>,
    /// `u_tt / u_{0,tt} = 1 + b`.
    radial_ratio: Vec<f64>,
    lambda_trans: Vec<f64>,
    lambda_rad: Vec<f64>,
    f: Vec<f64>,
    lap_f: Vec<f64>,
    fields: CurvatureFields,
}

impl RadialState {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lambda_trans(&self) -> &[f64] {
        &self.lambda_trans
    }

    pub fn lambda_rad(&self) -> &[f64] {
        &self.lambda_rad
    }

    /// Ricci potential, volume-weighted mean zero.
    pub fn ricci_potential_values(&self) -> &[f64] {
        &self.f
    }

    pub fn lap_ricci_potential(&self) -> &[f64] {
        &self.lap_f
    }

    /// Eigenvalues of `ω_φ` relative to `ω_0`: transverse and radial ratios.
    pub fn metric_ratios(&self) -> (&[f64], &[f64]) {
        (&self.transverse_ratio, &self.radial_ratio)
    }

    pub fn volume(&self) -> f64 {
        self.fields.volume()
    }
}

impl GeometryState for RadialState {
    fn testbed(&self) -> TestbedKind {
        TestbedKind::Projective
    }

    fn fields(&self) -> &CurvatureFields {
        &self.fields
    }

    fn ricci_potential(&self) -> Option<RicciPotential<'_>> {
        Some(RicciPotential { f: &self.f, laplacian: &self.lap_f })
    }
}

/// Hypothesis monitors: smallest Ricci eigenvalue and smallest scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_ricci_eigenvalue: f64,
    pub min_scalar_curvature: f64,
}

pub fn positivity_report(fields: &CurvatureFields) -> PositivityReport {
    PositivityReport {
        min_ricci_eigenvalue: fields.min_ricci_eigenvalue().0,
        min_scalar_curvature: fields.min_scalar_curvature().0,
    }
}

impl Geometry for RadialChart {
    type Potential = RadialPotential;
    type State = RadialState;

    fn testbed(&self) -> TestbedKind {
        TestbedKind::Projective
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn zero_potential(&self) -> RadialPotential {
        RadialPotential::zero()
    }

    fn build(&self, phi: &RadialPotential) -> Result<RadialState> {
        self.build_radial_state(phi)
    }

    fn laplacian_of(&self, state: &RadialState, h: &RadialPotential) -> Result<Vec<f64>> {
        check_len(self.num_nodes(), state.transverse_ratio.len())?;
        Ok(self.apply_laplacian(state, &self.derivative_values(h, 2)))
    }

    fn nodal_values(&self, phi: &RadialPotential) -> Vec<f64> {
        phi.phi_values(self)
    }

    fn normalize(&self, phi: &mut RadialPotential) {
        let w = self.background_weights();
        let vals = phi.phi_values(self);
        let mean = w.iter().zip(&vals).map(|(w, v)| w * v).sum::<f64>() / w.iter().sum::<f64>();
        phi.coeffs[0] -= mean;
    }

    fn flow_basis(&self, degree: usize) -> Vec<RadialPotential> {
        (0..=degree)
            .map(|m| {
                let mut c = vec![0.0; m + 1];
                c[m] = 1.0;
                RadialPotential::from_coefficients(c)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_validation() {
        assert!(RadialChart::new(0, 128).is_err());
        assert!(RadialChart::new(9, 128).is_err());
        assert!(RadialChart::new(2, 32).is_err());
        let c = RadialChart::new(2, 64).unwrap();
        assert!(c.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(c.nodes()[0] > 0.0 && c.nodes()[63] < 1.0);
    }

    #[test]
    fn fubini_study_u_t_is_linear() {
        for n in 1..=4 {
            let chart = RadialChart::new(n, 64).unwrap();
            let fs = fubini_study(n).unwrap();
            for (ut, x) in fs.u_t_values(&chart).iter().zip(chart.nodes()) {
                assert!((ut - (n as f64 + 1.0) * x).abs() < 1e-14);
            }
            assert!(fs.class_deviation(&chart) < 1e-14);
        }
    }

    #[test]
    fn fubini_study_has_unit_spectrum() {
        for n in 1..=8 {
            let chart = RadialChart::new(n, 64).unwrap();
            let st = chart.build_radial_state(&fubini_study(n).unwrap()).unwrap();
            for j in 0..64 {
                assert!(st.fields.spectrum_values(j).iter().all(|l| (l - 1.0).abs() < 1e-14));
                assert!(st.f[j].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn positivity_violation_is_reported() {
        let chart = RadialChart::new(2, 64).unwrap();
        // φ = -6x gives 1 + a = 2x - 1, most negative at the first node.
        let pot = RadialPotential::from_polynomial(&[0.0, -6.0]);
        assert!(matches!(chart.build_radial_state(&pot), Err(Error::Admissibility { node: 0, .. })));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let chart = RadialChart::new(3, 64).unwrap();
        let st = chart.build_radial_state(&RadialPotential::from_polynomial(&[0.0, 0.0, 0.1, -0.1])).unwrap();
        let lap = chart.laplacian_radial(&st, &[2.5; 64]).unwrap();
        assert!(lap.iter().all(|v| v.abs() < 1e-10));
        assert!(chart.laplacian_radial(&st, &[0.0; 10]).is_err());
    }
}
