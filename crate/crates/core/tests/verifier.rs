use eklab::error::Error;
use eklab::perturb::{random_radial_perturbation, rng, RADIAL_MARGIN};
use eklab::{
    fubini_study, ke_deviation, theorem_certificate, CurvatureFields, Geometry, ManufacturedState, PotentialField,
    RadialChart, Spectrum, TestbedKind, TorusGrid, Verdict,
};

/// Uniform spectra with `Δσ_k = 0` and prescribed `f`, `Δf`.
fn manufactured(spectrum: &[f64], nodes: usize, lap_f: f64) -> ManufacturedState {
    let n = spectrum.len();
    let sp = vec![Spectrum::new(spectrum.to_vec()).unwrap(); nodes];
    let fields = CurvatureFields::from_spectra(n, vec![1.0; nodes], &sp, vec![vec![0.0; nodes]; n + 1]).unwrap();
    ManufacturedState { testbed: TestbedKind::Projective, fields, f: vec![0.0; nodes], lap_f: vec![lap_f; nodes] }
}

fn step_names(c: &eklab::Certificate) -> Vec<&str> {
    c.steps.iter().map(|s| s.name.as_str()).collect()
}

#[test]
fn fubini_study_passes_for_every_k() {
    for n in 1..=3 {
        let chart = RadialChart::new(n, 128).unwrap();
        let st = chart.build(&fubini_study(n).unwrap()).unwrap();
        for k in 0..=n {
            let c = theorem_certificate(&st, k, 1e-5).unwrap();
            assert!(c.passed(), "n={n} k={k}: {:?}", c.failed_step());
            assert!(c.ke_deviation <= 1e-12);
        }
    }
}

#[test]
fn perturbation_fails_at_criticality() {
    let chart = RadialChart::new(2, 128).unwrap();
    let phi = random_radial_perturbation(&chart, &mut rng(1), 0.05, 6, RADIAL_MARGIN).unwrap();
    let st = chart.build(&phi).unwrap();
    for k in 0..=2 {
        let c = theorem_certificate(&st, k, 1e-5).unwrap();
        assert_eq!(c.overall, "FAIL(criticality)");
        assert_eq!(c.steps[0].verdict, Verdict::Fail);
    }
}

#[test]
fn step_sets_follow_k() {
    let st = manufactured(&[1.0, 1.0, 1.0], 4, 0.0);
    let tail = ["laplacian_f_nonnegative", "laplacian_f_small", "f_constant"];
    let c0 = theorem_certificate(&st, 0, 1e-6).unwrap();
    assert_eq!(step_names(&c0), [&["criticality"][..], &tail].concat());
    let c1 = theorem_certificate(&st, 1, 1e-6).unwrap();
    assert_eq!(
        step_names(&c1),
        [&["criticality", "scalar_curvature_hypothesis", "minimum_slack", "minimum_principle", "maclaurin_chain"][..], &tail]
            .concat()
    );
    let c3 = theorem_certificate(&st, 3, 1e-6).unwrap();
    assert_eq!(c3.steps[1].name, "ricci_hypothesis");
    assert!(c0.passed() && c1.passed() && c3.passed());
}

#[test]
fn negative_ricci_eigenvalue_fails_the_hypothesis() {
    // σ_2 = −1.5 is constant, so Δσ_2 = 0 and the k = n equation holds.
    let st = manufactured(&[-0.5, 3.0], 4, 0.0);
    let c = theorem_certificate(&st, 2, 1e-6).unwrap();
    assert_eq!(c.steps[0].verdict, Verdict::Pass);
    assert_eq!(c.failed_step(), Some("ricci_hypothesis"));
}

#[test]
fn inconsistent_ricci_potential_is_caught() {
    // σ_2 = 1 and Δσ_1 = 0 solve the k = 1 equation pointwise, but R = 2.5
    // would force Δf = 1/2 everywhere, impossible on a closed manifold.
    let st = manufactured(&[0.5, 2.0], 4, 0.5);
    let c = theorem_certificate(&st, 1, 1e-6).unwrap();
    for name in [
        "criticality",
        "scalar_curvature_hypothesis",
        "minimum_principle",
        "maclaurin_chain",
        "laplacian_f_nonnegative",
    ] {
        assert_eq!(c.step(name).unwrap().verdict, Verdict::Pass, "{name}");
    }
    assert_eq!(c.failed_step(), Some("laplacian_f_small"));
    assert!((c.ke_deviation - 1.0).abs() <= 1e-15);
}

#[test]
fn top_degree_uses_sigma_n_at_the_minimum() {
    // σ_2 = 0.8 is constant: critical for k = n, but below the normalization.
    let st = manufactured(&[0.8, 1.0], 4, 0.0);
    let c = theorem_certificate(&st, 2, 1e-6).unwrap();
    assert_eq!(c.failed_step(), Some("minimum_principle"));
    assert!((c.step("minimum_principle").unwrap().value - 0.8).abs() <= 1e-15);
}

#[test]
fn constant_scalar_curvature_branch() {
    // k = 0 only sees R = n; a non-Einstein spectrum with that trace passes
    // the equation, and the Ricci potential decides.
    let st = manufactured(&[0.5, 1.5], 4, 0.0);
    let c = theorem_certificate(&st, 0, 1e-6).unwrap();
    assert!(c.passed());
    assert!((c.ke_deviation - 0.5).abs() <= 1e-15);
}

#[test]
fn small_perturbation_has_moderate_deviation() {
    let chart = RadialChart::new(2, 128).unwrap();
    let phi = random_radial_perturbation(&chart, &mut rng(4), 0.01, 6, RADIAL_MARGIN).unwrap();
    let st = chart.build(&phi).unwrap();
    let (dev, f_dev) = ke_deviation(&st).unwrap();
    assert!(dev > 0.0 && dev < 0.5, "{dev}");
    assert!(f_dev > 0.0 && f_dev < 0.5, "{f_dev}");
}

#[test]
fn torus_states_are_not_applicable() {
    let grid = TorusGrid::new(1, 8).unwrap();
    let st = grid.build(&PotentialField::zero(&grid)).unwrap();
    assert!(matches!(theorem_certificate(&st, 1, 1e-5), Err(Error::NotApplicable(_))));
}

#[test]
fn certificate_serializes_with_uppercase_verdicts() {
    let st = manufactured(&[1.0, 1.0], 2, 0.0);
    let json = serde_json::to_value(theorem_certificate(&st, 1, 1e-5).unwrap()).unwrap();
    assert_eq!(json["overall"], "PASS");
    assert_eq!(json["steps"][0]["verdict"], "PASS");
    assert_eq!(json["potential_multiplier"], 10.0);
}
