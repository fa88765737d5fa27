//! Numerical laboratory for the `E_k` functionals of Kähler geometry.
//!
//! Two discretized testbeds, a flat complex torus ([`torus`]) and the
//! `U(n)`-invariant metrics on projective space ([`cpn`]), reduce a Kähler
//! potential to per-node curvature data ([`geometry::CurvatureFields`]). On
//! top of that sit the symmetric functions of the Ricci spectrum
//! ([`symfun`]), the energies ([`energy`]), the critical equations and the
//! gradient flow ([`critic`]), and the Kähler–Einstein certificate
//! ([`verifier`]).

mod chebyshev;
mod herm;
mod jet;

pub mod cpn;
pub mod critic;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod perturb;
pub mod symfun;
pub mod torus;
pub mod verifier;

pub use cpn::{fubini_study, positivity_report, PositivityReport, RadialChart, RadialPotential, RadialState};
pub use critic::{critical_residual, e1_residual, gradient_flow, FlowConfig, FlowRecord, FlowTrace, Termination};
pub use energy::{
    ek_bracket, ek_energies, ek_energy, ek_energy_original, ek_value, first_variation, mu_k, segment_energy,
    EnergyReport, PathSpec, Schedule,
};
pub use error::{Error, Result};
pub use geometry::{CurvatureFields, Geometry, GeometryState, Potential, RicciPotential, TestbedKind};
pub use symfun::{elem_sym, maclaurin_chain, maclaurin_check, sigma_vector, MaclaurinVerdict, SigmaVector, Spectrum};
pub use torus::{MetricState, PotentialField, TorusGrid};
pub use verifier::{ke_deviation, theorem_certificate, Certificate, CertificateStep, ManufacturedState, Verdict};
