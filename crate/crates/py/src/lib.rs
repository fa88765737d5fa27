//! Python bindings for the E_k laboratory.
//!
//! Potentials on projective space are passed as Chebyshev coefficients in
//! `s = 2x − 1`; torus potentials are drawn from a seed. Reports come back
//! as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use eklab::cpn::RadialChart;
use eklab::symfun::{self, MaclaurinVerdict, BOUNDARY_DELTA};
use eklab::{
    critical_residual, e1_residual, ek_bracket, ek_energies, gradient_flow, ke_deviation, perturb, positivity_report,
    theorem_certificate, Certificate, EnergyReport, Error, FlowConfig, FlowRecord, Geometry, GeometryState, PathSpec,
    PotentialField, RadialPotential, RadialState, Schedule, Spectrum, Termination, TorusGrid,
};

create_exception!(eklab_py, InadmissibleError, PyValueError, "The potential does not define a Kähler metric.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Admissibility { .. } | Error::Path { .. } => InadmissibleError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn spectrum(values: Vec<f64>) -> PyResult<Spectrum> {
    Spectrum::new(values).map_err(err)
}

/// `σ_k` of a spectrum.
#[pyfunction]
fn elem_sym(values: Vec<f64>, k: usize) -> PyResult<f64> {
    symfun::elem_sym(&spectrum(values)?, k).map_err(err)
}

/// `(σ_0..σ_n, Σ_0..Σ_n)`.
#[pyfunction]
fn sigma_vector(values: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = symfun::sigma_vector(&spectrum(values)?);
    Ok((s.sigma, s.normalized))
}

/// `True` if `Σ_k^{k+1} ≥ Σ_{k+1}^k` holds, `False` if violated, `None`
/// outside the positive and boundary regimes.
#[pyfunction]
#[pyo3(signature = (values, k, delta = BOUNDARY_DELTA))]
fn maclaurin_check(values: Vec<f64>, k: usize, delta: f64) -> PyResult<Option<bool>> {
    Ok(match symfun::maclaurin_check(&spectrum(values)?, k, delta).map_err(err)? {
        MaclaurinVerdict::Holds { .. } => Some(true),
        MaclaurinVerdict::Violated { .. } => Some(false),
        MaclaurinVerdict::NotApplicable { .. } => None,
    })
}

/// Chebyshev coefficients of `Σ c_j x^j`.
#[pyfunction]
fn chebyshev_from_monomials(monomials: Vec<f64>) -> Vec<f64> {
    RadialPotential::from_polynomial(&monomials).coefficients().to_vec()
}

/// Chebyshev coefficients of a seeded random perturbation of Fubini–Study.
#[pyfunction]
#[pyo3(signature = (n, seed, amplitude = 0.05, degree = 6, margin = perturb::RADIAL_MARGIN, nodes = 256))]
fn random_radial_perturbation(
    n: usize,
    seed: u64,
    amplitude: f64,
    degree: usize,
    margin: f64,
    nodes: usize,
) -> PyResult<Vec<f64>> {
    let chart = RadialChart::new(n, nodes).map_err(err)?;
    let p =
        perturb::random_radial_perturbation(&chart, &mut perturb::rng(seed), amplitude, degree, margin).map_err(err)?;
    Ok(p.coefficients().to_vec())
}

fn report_dict<'py>(py: Python<'py>, r: &EnergyReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("k", r.k)?;
    d.set_item("n", r.n)?;
    d.set_item("testbed", r.testbed.to_string())?;
    d.set_item("value", r.value)?;
    d.set_item("value_alt", r.value_alt)?;
    d.set_item("path_delta", r.path_delta)?;
    d.set_item("quadrature_error", r.quadrature_error)?;
    d.set_item("schedule", r.schedule.name())?;
    d.set_item("N_t", r.n_t)?;
    Ok(d)
}

fn record_dict<'py>(py: Python<'py>, r: &FlowRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iter", r.iter)?;
    d.set_item("energy", r.energy)?;
    d.set_item("sup_residual", r.sup_residual)?;
    d.set_item("min_ricci_eig", r.min_ricci_eig)?;
    d.set_item("min_R", r.min_r)?;
    d.set_item("step", r.step)?;
    Ok(d)
}

fn certificate_dict<'py>(py: Python<'py>, c: &Certificate) -> PyResult<Bound<'py, PyDict>> {
    let steps = c
        .steps
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("name", &s.name)?;
            d.set_item("value", s.value)?;
            d.set_item("threshold", s.threshold)?;
            d.set_item("verdict", if s.verdict == eklab::Verdict::Pass { "PASS" } else { "FAIL" })?;
            d.set_item("node_index", s.node_index)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("k", c.k)?;
    d.set_item("n", c.n)?;
    d.set_item("tol", c.tol)?;
    d.set_item("steps", steps)?;
    d.set_item("overall", &c.overall)?;
    d.set_item("ke_deviation", c.ke_deviation)?;
    d.set_item("f_deviation", c.f_deviation)?;
    d.set_item("potential_multiplier", c.potential_multiplier)?;
    Ok(d)
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max_iters",
        Termination::AdmissibilityFloor => "admissibility_floor",
    }
}

fn energies<'py, G: Geometry>(
    py: Python<'py>,
    geom: &G,
    target: &G::Potential,
    ks: Vec<usize>,
    schedule: &str,
    steps: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let schedule: Schedule = schedule.parse().map_err(err)?;
    let path = PathSpec::new(target.clone(), schedule, steps).map_err(err)?;
    let reports = py.detach(|| ek_energies(geom, &path, &ks)).map_err(err)?;
    reports.iter().map(|r| report_dict(py, r)).collect()
}

/// Runs the flow; returns the summary dict and the final potential.
fn flow<'py, G: Geometry>(
    py: Python<'py>,
    geom: &G,
    start: &G::Potential,
    config: FlowConfig,
) -> PyResult<(Bound<'py, PyDict>, G::Potential)> {
    let trace = py.detach(|| gradient_flow(geom, start, &config)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("termination", termination_name(trace.termination))?;
    d.set_item("iterations", trace.iterations())?;
    let records = trace.records.iter().map(|r| record_dict(py, r)).collect::<PyResult<Vec<_>>>()?;
    d.set_item("records", records)?;
    Ok((d, trace.final_potential))
}

fn flow_config(k: usize, tol: f64, max_iters: usize, step: f64, basis_degree: usize) -> FlowConfig {
    FlowConfig { k, tol, max_iters, step, basis_degree, ..FlowConfig::default() }
}

fn check_k(n: usize, k: usize) -> PyResult<()> {
    if k > n {
        return Err(PyValueError::new_err(format!("k = {k} outside 0..={n}")));
    }
    Ok(())
}

/// Per-node curvature of one metric.
fn spectra(state: &dyn GeometryState) -> Vec<Vec<f64>> {
    let f = state.fields();
    (0..f.num_nodes()).map(|j| f.spectrum_values(j).to_vec()).collect()
}

/// A `U(n)`-invariant metric on projective space, FS plus a radial potential.
#[pyclass(frozen)]
struct ProjectiveMetric {
    chart: RadialChart,
    potential: RadialPotential,
    state: RadialState,
}

#[pymethods]
impl ProjectiveMetric {
    #[new]
    #[pyo3(signature = (n, coefficients = None, nodes = 256))]
    fn new(n: usize, coefficients: Option<Vec<f64>>, nodes: usize) -> PyResult<Self> {
        let chart = RadialChart::new(n, nodes).map_err(err)?;
        let potential = coefficients.map_or_else(RadialPotential::zero, RadialPotential::from_coefficients);
        let state = chart.build(&potential).map_err(err)?;
        Ok(Self { chart, potential, state })
    }

    #[getter]
    fn n(&self) -> usize {
        self.chart.dim()
    }

    /// Moment coordinate of each node.
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.chart.nodes().to_vec()
    }

    /// Quadrature weights of `ω_φ^n`.
    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.state.fields().weights().to_vec()
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.potential.coefficients().to_vec()
    }

    /// Eigenvalues of `Ric` relative to `ω_φ`, one list per node.
    fn spectrum(&self) -> Vec<Vec<f64>> {
        spectra(&self.state)
    }

    fn sigma(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(self.state.fields().sigma(k).to_vec())
    }

    fn normalized(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(self.state.fields().normalized(k))
    }

    fn critical_residual(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(critical_residual(self.state.fields(), k, self.chart.mu(k)))
    }

    fn e1_residual(&self) -> Vec<f64> {
        e1_residual(self.state.fields(), self.chart.mu(1))
    }

    fn bracket(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(ek_bracket(self.state.fields(), k, self.chart.mu(k)))
    }

    /// `(min Ricci eigenvalue, min scalar curvature)`.
    fn positivity(&self) -> (f64, f64) {
        let r = positivity_report(self.state.fields());
        (r.min_ricci_eigenvalue, r.min_scalar_curvature)
    }

    /// `(max |λ − 1|, ‖f − f̄‖∞)`.
    fn ke_deviation(&self) -> PyResult<(f64, f64)> {
        ke_deviation(&self.state).map_err(err)
    }

    #[pyo3(signature = (k, tol = eklab::verifier::DEFAULT_TOL))]
    fn certificate<'py>(&self, py: Python<'py>, k: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        certificate_dict(py, &theorem_certificate(&self.state, k, tol).map_err(err)?)
    }

    /// `E_k` along the path from Fubini–Study to this metric.
    #[pyo3(signature = (ks, schedule = "linear", steps = eklab::energy::DEFAULT_STEPS))]
    fn energies<'py>(
        &self,
        py: Python<'py>,
        ks: Vec<usize>,
        schedule: &str,
        steps: usize,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        energies(py, &self.chart, &self.potential, ks, schedule, steps)
    }

    /// Gradient flow of `E_k` from this metric. The result holds the
    /// Chebyshev coefficients of the final potential under `coefficients`.
    #[pyo3(signature = (k, tol = 1e-6, max_iters = 100_000, step = 0.1, basis_degree = 8))]
    fn flow<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        tol: f64,
        max_iters: usize,
        step: f64,
        basis_degree: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (d, last) = flow(py, &self.chart, &self.potential, flow_config(k, tol, max_iters, step, basis_degree))?;
        d.set_item("coefficients", last.coefficients().to_vec())?;
        Ok(d)
    }
}

/// A Kähler metric on the flat torus of complex dimension `n`.
#[pyclass(frozen)]
struct TorusMetric {
    grid: TorusGrid,
    potential: PotentialField,
    state: eklab::MetricState,
}

#[pymethods]
impl TorusMetric {
    /// The flat metric, or a random potential when `seed` is given.
    #[new]
    #[pyo3(signature = (n, nodes = 16, seed = None, modes = 4, min_eig = perturb::TORUS_MIN_EIG))]
    fn new(py: Python<'_>, n: usize, nodes: usize, seed: Option<u64>, modes: usize, min_eig: f64) -> PyResult<Self> {
        let grid = TorusGrid::new(n, nodes).map_err(err)?;
        let potential = match seed {
            None => PotentialField::zero(&grid),
            Some(s) => perturb::random_torus_potential(
                &grid,
                &mut perturb::rng(s),
                modes,
                perturb::TORUS_MAX_WAVENUMBER,
                min_eig,
            )
            .map_err(err)?,
        };
        let state = py.detach(|| grid.build(&potential)).map_err(err)?;
        Ok(Self { grid, potential, state })
    }

    #[getter]
    fn n(&self) -> usize {
        self.grid.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.state.fields().weights().to_vec()
    }

    /// Nodal values of the potential.
    #[getter]
    fn potential(&self) -> Vec<f64> {
        self.potential.values.clone()
    }

    fn spectrum(&self) -> Vec<Vec<f64>> {
        spectra(&self.state)
    }

    fn sigma(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(self.state.fields().sigma(k).to_vec())
    }

    fn critical_residual(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(critical_residual(self.state.fields(), k, self.grid.mu(k)))
    }

    fn bracket(&self, k: usize) -> PyResult<Vec<f64>> {
        check_k(self.n(), k)?;
        Ok(ek_bracket(self.state.fields(), k, self.grid.mu(k)))
    }

    fn positivity(&self) -> (f64, f64) {
        let r = positivity_report(self.state.fields());
        (r.min_ricci_eigenvalue, r.min_scalar_curvature)
    }

    /// `E_k` along the path from the flat metric to this one.
    #[pyo3(signature = (ks, schedule = "linear", steps = eklab::energy::DEFAULT_STEPS))]
    fn energies<'py>(
        &self,
        py: Python<'py>,
        ks: Vec<usize>,
        schedule: &str,
        steps: usize,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        energies(py, &self.grid, &self.potential, ks, schedule, steps)
    }

    /// Gradient flow of `E_k`; `basis_degree` is the largest per-axis wavenumber.
    #[pyo3(signature = (k, tol = 1e-6, max_iters = 100_000, step = 0.1, basis_degree = 1))]
    fn flow<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        tol: f64,
        max_iters: usize,
        step: f64,
        basis_degree: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (d, last) = flow(py, &self.grid, &self.potential, flow_config(k, tol, max_iters, step, basis_degree))?;
        d.set_item("potential", last.values)?;
        Ok(d)
    }
}

#[pymodule]
pub fn eklab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("InadmissibleError", m.py().get_type::<InadmissibleError>())?;
    m.add_function(wrap_pyfunction!(elem_sym, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_vector, m)?)?;
    m.add_function(wrap_pyfunction!(maclaurin_check, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_from_monomials, m)?)?;
    m.add_function(wrap_pyfunction!(random_radial_perturbation, m)?)?;
    m.add_class::<ProjectiveMetric>()?;
    m.add_class::<TorusMetric>()?;
    Ok(())
}
