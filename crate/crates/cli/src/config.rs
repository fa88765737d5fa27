//! Experiment manifests: TOML on disk, flag overrides, validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use eklab::{FlowConfig, Schedule, TestbedKind};

/// Largest dimension each testbed supports.
pub fn dimension_bound(testbed: TestbedKind) -> usize {
    match testbed {
        TestbedKind::Projective => eklab::symfun::MAX_DIM,
        TestbedKind::Torus => 3,
    }
}

fn default_nodes(testbed: TestbedKind) -> usize {
    match testbed {
        TestbedKind::Projective => 256,
        TestbedKind::Torus => 16,
    }
}

/// Starting potential of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `φ = 0`: Fubini–Study or the flat metric.
    #[default]
    Background,
    /// Seeded random perturbation. `amplitude`, `degree` and `margin` apply
    /// on the projective testbed; `modes`, `max_wavenumber` and `min_eig` on
    /// the torus.
    Random {
        #[serde(default = "defaults::amplitude")]
        amplitude: f64,
        #[serde(default = "defaults::degree")]
        degree: usize,
        #[serde(default = "defaults::margin")]
        margin: f64,
        #[serde(default = "defaults::modes")]
        modes: usize,
        #[serde(default = "defaults::max_wavenumber")]
        max_wavenumber: i64,
        #[serde(default = "defaults::min_eig")]
        min_eig: f64,
    },
    /// Projective only: `φ(x) = Σ c_j x^j` in the moment coordinate.
    Polynomial { monomials: Vec<f64> },
}

mod defaults {
    pub fn amplitude() -> f64 {
        0.05
    }
    pub fn degree() -> usize {
        6
    }
    pub fn margin() -> f64 {
        eklab::perturb::RADIAL_MARGIN
    }
    pub fn modes() -> usize {
        4
    }
    pub fn max_wavenumber() -> i64 {
        eklab::perturb::TORUS_MAX_WAVENUMBER
    }
    pub fn min_eig() -> f64 {
        eklab::perturb::TORUS_MIN_EIG
    }
}

/// Everything that determines the numbers an experiment emits.
///
/// `nodes` is the radial node count `M` on the projective testbed and the
/// per-axis node count `N` on the torus. An empty `k` list means every
/// `k` in `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub testbed: TestbedKind,
    pub n: usize,
    pub nodes: Option<usize>,
    pub k: Vec<usize>,
    pub schedule: Schedule,
    #[serde(rename = "N_t")]
    pub n_t: usize,
    /// Certificate tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Not part of the config hash: moving the output does not change results.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub potential: PotentialConfig,
    pub flow: FlowConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            testbed: TestbedKind::Projective,
            n: 2,
            nodes: None,
            k: Vec::new(),
            schedule: Schedule::Linear,
            n_t: eklab::energy::DEFAULT_STEPS,
            tol: eklab::verifier::DEFAULT_TOL,
            seed: 0,
            out: PathBuf::from("ek-lab-out"),
            potential: PotentialConfig::Background,
            flow: FlowConfig::default(),
        }
    }
}

/// Command-line values that replace manifest entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub testbed: Option<TestbedKind>,
    pub n: Option<usize>,
    pub nodes: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies overrides, fills testbed-dependent defaults and validates.
    pub fn resolve(mut self, o: Overrides) -> Result<Self> {
        if let Some(t) = o.testbed {
            if t != self.testbed {
                self.nodes = None;
            }
            self.testbed = t;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(m) = o.nodes {
            self.nodes = Some(m);
        }
        if let Some(k) = o.k {
            self.k = k;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = o.out {
            self.out = out;
        }
        self.nodes.get_or_insert(default_nodes(self.testbed));
        if self.k.is_empty() {
            self.k = (0..=self.n).collect();
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bound = dimension_bound(self.testbed);
        if !(1..=bound).contains(&self.n) {
            bail!("field `n`: {} dimension n = {} outside 1..={bound} (bound {bound})", self.testbed, self.n);
        }
        if let Some(&k) = self.k.iter().find(|&&k| k > self.n) {
            bail!("field `k`: k = {k} exceeds n = {}", self.n);
        }
        let mut ks = self.k.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() != self.k.len() {
            bail!("field `k`: repeated entries in {:?}", self.k);
        }
        if self.n_t < 3 || self.n_t.is_multiple_of(2) {
            bail!("field `N_t`: {} must be odd and at least 3", self.n_t);
        }
        if !(self.tol > 0.0) {
            bail!("field `tol`: {} must be positive", self.tol);
        }
        if let PotentialConfig::Polynomial { .. } = self.potential {
            if self.testbed == TestbedKind::Torus {
                bail!("field `potential.kind`: polynomial potentials need the projective testbed");
            }
        }
        self.flow.validate().context("field `flow`")?;
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes.expect("resolved config")
    }

    /// Hex SHA-256 of the canonical JSON form (compact, keys sorted), which
    /// is also the form embedded in JSON outputs.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_vec(&value).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::default().resolve(Overrides::default()).unwrap();
        assert_eq!(c.nodes(), 256);
        assert_eq!(c.k, vec![0, 1, 2]);
    }

    #[test]
    fn partial_manifest_parses() {
        let c: ExperimentConfig = toml::from_str(
            "testbed = \"torus\"\nn = 1\n[potential]\nkind = \"random\"\nmodes = 2\n[flow]\ntol = 1e-4\n",
        )
        .unwrap();
        assert_eq!(c.testbed, TestbedKind::Torus);
        assert_eq!(c.flow.tol, 1e-4);
        assert_eq!(c.flow.max_iters, FlowConfig::default().max_iters);
        assert!(matches!(c.potential, PotentialConfig::Random { modes: 2, degree: 6, .. }));
    }

    #[test]
    fn unknown_field_reports_line() {
        let err = toml::from_str::<ExperimentConfig>("n = 2\nnodez = 64\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nodez") && msg.contains('2'), "{msg}");
    }

    #[test]
    fn switching_testbed_resets_nodes() {
        let c = ExperimentConfig { nodes: Some(128), ..Default::default() };
        let c = c.resolve(Overrides { testbed: Some(TestbedKind::Torus), n: Some(1), ..Default::default() }).unwrap();
        assert_eq!(c.nodes(), 16);
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = ExperimentConfig::default().resolve(Overrides::default()).unwrap();
        let b = ExperimentConfig { out: "elsewhere".into(), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn dimension_bound_is_named() {
        let err = ExperimentConfig::default().resolve(Overrides { n: Some(9), ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("bound 8"), "{err}");
    }
}
