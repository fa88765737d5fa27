//! The experiment operations behind each subcommand.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use eklab::cpn::RadialChart;
use eklab::perturb;
use eklab::{
    critical_residual, e1_residual, ek_bracket, ek_energies, gradient_flow, positivity_report, theorem_certificate,
    Certificate, Error, FlowConfig, Geometry, GeometryState, PathSpec, PotentialField, RadialPotential, Termination,
    TestbedKind, TorusGrid,
};

use crate::config::{ExperimentConfig, PotentialConfig};
use crate::output::Sink;

/// How a run ended when no error occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    /// A flow stopped before converging.
    Incomplete,
    /// A certificate failed on a converged (or unflowed) state.
    CertificateFailed,
}

/// Node layout of a geometry, for CSV output.
pub trait Layout: Geometry {
    fn coord_names(&self) -> Vec<String>;
    fn coords(&self, node: usize) -> Vec<f64>;
    /// Whether sup-norm summaries should include this node.
    fn in_band(&self, _node: usize) -> bool {
        true
    }
}

impl Layout for RadialChart {
    fn coord_names(&self) -> Vec<String> {
        vec!["x".into()]
    }

    fn coords(&self, node: usize) -> Vec<f64> {
        vec![self.nodes()[node]]
    }

    fn in_band(&self, node: usize) -> bool {
        self.in_accuracy_band(node)
    }
}

impl Layout for TorusGrid {
    fn coord_names(&self) -> Vec<String> {
        (1..=self.axes()).map(|a| format!("x{a}")).collect()
    }

    fn coords(&self, node: usize) -> Vec<f64> {
        TorusGrid::coords(self, node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sigma,
    Energy,
    Residual,
    Flow,
    Verify,
    All,
}

pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Status> {
    let sink = Sink::new(config)?;
    match config.testbed {
        TestbedKind::Projective => {
            let chart = RadialChart::new(config.n, config.nodes())?;
            let start = match &config.potential {
                PotentialConfig::Background => RadialPotential::zero(),
                PotentialConfig::Random { amplitude, degree, margin, .. } => perturb::random_radial_perturbation(
                    &chart,
                    &mut perturb::rng(config.seed),
                    *amplitude,
                    *degree,
                    *margin,
                )?,
                PotentialConfig::Polynomial { monomials } => RadialPotential::from_polynomial(monomials),
            };
            dispatch(command, config, &sink, &chart, &start)
        }
        TestbedKind::Torus => {
            let grid = TorusGrid::new(config.n, config.nodes())?;
            let start = match &config.potential {
                PotentialConfig::Background => PotentialField::zero(&grid),
                PotentialConfig::Random { modes, max_wavenumber, min_eig, .. } => perturb::random_torus_potential(
                    &grid,
                    &mut perturb::rng(config.seed),
                    *modes,
                    *max_wavenumber,
                    *min_eig,
                )?,
                PotentialConfig::Polynomial { .. } => unreachable!("rejected by validation"),
            };
            dispatch(command, config, &sink, &grid, &start)
        }
    }
}

fn dispatch<G: Layout>(
    command: Command,
    config: &ExperimentConfig,
    sink: &Sink,
    geom: &G,
    start: &G::Potential,
) -> Result<Status> {
    Ok(match command {
        Command::Sigma => sigma(config, sink, geom, start)?,
        Command::Energy => energy(config, sink, geom, start)?,
        Command::Residual => residual(config, sink, geom, start)?,
        Command::Flow => flow(config, sink, geom, start)?,
        Command::Verify => verify(config, sink, geom, start)?,
        Command::All => [
            sigma(config, sink, geom, start)?,
            energy(config, sink, geom, start)?,
            residual(config, sink, geom, start)?,
            flow(config, sink, geom, start)?,
        ]
        .into_iter()
        .max()
        .unwrap_or(Status::Success),
    })
}

fn num(v: f64) -> String {
    v.to_string()
}

fn node_prefix<G: Layout>(geom: &G, node: usize) -> Vec<String> {
    std::iter::once(node.to_string()).chain(geom.coords(node).into_iter().map(num)).collect()
}

fn announce(path: std::path::PathBuf) {
    eprintln!("wrote {}", path.display());
}

fn sigma<G: Layout>(_config: &ExperimentConfig, sink: &Sink, geom: &G, start: &G::Potential) -> Result<Status> {
    let state = geom.build(start).context("building the starting metric")?;
    let fields = state.fields();
    let n = fields.dim();
    let normalized: Vec<Vec<f64>> = (1..=n).map(|k| fields.normalized(k)).collect();

    let mut header: Vec<String> = std::iter::once("node".to_string()).chain(geom.coord_names()).collect();
    header.push("weight".into());
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    header.extend((1..=n).map(|k| format!("sigma_{k}")));
    header.extend((1..=n).map(|k| format!("Sigma_{k}")));
    let rows = (0..fields.num_nodes()).map(|j| {
        let mut row = node_prefix(geom, j);
        row.push(num(fields.weights()[j]));
        row.extend(fields.spectrum_values(j).iter().copied().map(num));
        row.extend((1..=n).map(|k| num(fields.sigma(k)[j])));
        row.extend(normalized.iter().map(|s| num(s[j])));
        row
    });
    announce(sink.csv("sigma.csv", &header, rows)?);

    #[derive(Serialize)]
    struct Range {
        k: usize,
        min: f64,
        max: f64,
        mean: f64,
    }
    let ranges: Vec<Range> = normalized
        .iter()
        .enumerate()
        .map(|(i, s)| Range {
            k: i + 1,
            min: s.iter().copied().fold(f64::INFINITY, f64::min),
            max: s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: fields.average(s),
        })
        .collect();
    let summary = json!({ "positivity": positivity_report(fields), "Sigma": ranges, "volume": fields.volume() });
    announce(sink.json("sigma.json", "summary", &summary)?);
    Ok(Status::Success)
}

fn energy<G: Layout>(config: &ExperimentConfig, sink: &Sink, geom: &G, start: &G::Potential) -> Result<Status> {
    let path = PathSpec::new(start.clone(), config.schedule, config.n_t)?;
    let reports = ek_energies(geom, &path, &config.k)?;
    for r in &reports {
        eprintln!(
            "E_{} = {:.12e}  (path_delta {:.2e}, quadrature_error {:.2e})",
            r.k, r.value, r.path_delta, r.quadrature_error
        );
    }
    announce(sink.json("energy.json", "reports", &reports)?);
    Ok(Status::Success)
}

fn residual<G: Layout>(config: &ExperimentConfig, sink: &Sink, geom: &G, start: &G::Potential) -> Result<Status> {
    let state = geom.build(start).context("building the starting metric")?;
    let fields = state.fields();
    let residuals: Vec<Vec<f64>> = config.k.iter().map(|&k| critical_residual(fields, k, geom.mu(k))).collect();
    let brackets: Vec<Vec<f64>> = config.k.iter().map(|&k| ek_bracket(fields, k, geom.mu(k))).collect();
    let e1 = config.k.contains(&1).then(|| e1_residual(fields, geom.mu(1)));

    let mut header: Vec<String> = std::iter::once("node".to_string()).chain(geom.coord_names()).collect();
    header.push("in_band".into());
    header.extend(config.k.iter().map(|k| format!("residual_{k}")));
    header.extend(config.k.iter().map(|k| format!("bracket_{k}")));
    if e1.is_some() {
        header.push("e1_residual".into());
    }
    let rows = (0..fields.num_nodes()).map(|j| {
        let mut row = node_prefix(geom, j);
        row.push(u8::from(geom.in_band(j)).to_string());
        row.extend(residuals.iter().chain(&brackets).map(|c| num(c[j])));
        if let Some(e) = &e1 {
            row.push(num(e[j]));
        }
        row
    });
    announce(sink.csv("residual.csv", &header, rows)?);

    let sup = |v: &[f64], band: bool| {
        v.iter().enumerate().filter(|&(j, _)| !band || geom.in_band(j)).fold(0.0_f64, |m, (_, x)| m.max(x.abs()))
    };
    let summary: Vec<_> = config
        .k
        .iter()
        .zip(residuals.iter().zip(&brackets))
        .map(|(&k, (r, b))| {
            json!({
                "k": k,
                "mu": geom.mu(k),
                "sup_residual": sup(r, false),
                "sup_residual_band": sup(r, true),
                "bracket_mean": fields.average(b),
            })
        })
        .collect();
    announce(sink.json("residual.json", "residuals", &summary)?);
    Ok(Status::Success)
}

/// Certificate of a state, or `None` where the theorem does not apply.
fn certify(state: &dyn GeometryState, k: usize, tol: f64) -> Result<Option<Certificate>> {
    match theorem_certificate(state, k, tol) {
        Ok(c) => Ok(Some(c)),
        Err(Error::NotApplicable(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn flow<G: Layout>(config: &ExperimentConfig, sink: &Sink, geom: &G, start: &G::Potential) -> Result<Status> {
    let mut status = Status::Success;
    let mut summary = Vec::new();
    for &k in &config.k {
        let fc = FlowConfig { k, ..config.flow.clone() };
        let trace = gradient_flow(geom, start, &fc)?;
        let header: Vec<String> = ["iter", "energy", "sup_residual", "min_ricci_eig", "min_R", "step"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = trace.records.iter().map(|r| {
            vec![
                r.iter.to_string(),
                num(r.energy),
                num(r.sup_residual),
                num(r.min_ricci_eig),
                num(r.min_r),
                num(r.step),
            ]
        });
        announce(sink.csv(&format!("flow_k{k}.csv"), &header, rows)?);

        let certificate = match geom.build(&trace.final_potential) {
            Ok(state) => certify(&state, k, config.tol)?,
            Err(_) => None,
        };
        let converged = trace.termination == Termination::Converged;
        if !converged {
            status = status.max(Status::Incomplete);
        } else if certificate.as_ref().is_some_and(|c| !c.passed()) {
            status = status.max(Status::CertificateFailed);
        }
        let overall = certificate.as_ref().map_or("not_applicable".to_string(), |c| c.overall.clone());
        eprintln!(
            "flow k = {k}: {} after {} iterations, certificate {overall}",
            serde_json::to_value(trace.termination)?.as_str().unwrap_or_default(),
            trace.iterations(),
        );
        let result = json!({
            "k": k,
            "termination": trace.termination,
            "converged": converged,
            "iterations": trace.iterations(),
            "final": trace.last(),
            "certificate": certificate,
        });
        announce(sink.json(&format!("flow_k{k}.json"), "result", &result)?);
        summary.push(json!({
            "k": k,
            "termination": trace.termination,
            "iterations": trace.iterations(),
            "certificate": overall,
            "ke_deviation": certificate.as_ref().map(|c| c.ke_deviation),
        }));
    }
    announce(sink.json("flow.json", "runs", &summary)?);
    Ok(status)
}

fn verify<G: Layout>(config: &ExperimentConfig, sink: &Sink, geom: &G, start: &G::Potential) -> Result<Status> {
    let state = geom.build(start).context("building the starting metric")?;
    let mut status = Status::Success;
    let mut summary = Vec::new();
    for &k in &config.k {
        let cert = theorem_certificate(&state, k, config.tol)?;
        eprintln!("certificate k = {k}: {}", cert.overall);
        if !cert.passed() {
            status = Status::CertificateFailed;
        }
        summary.push(json!({ "k": k, "overall": cert.overall, "ke_deviation": cert.ke_deviation }));
        announce(sink.json(&format!("verify_k{k}.json"), "certificate", &cert)?);
    }
    announce(sink.json("verify.json", "certificates", &summary)?);
    Ok(status)
}
