mod common;

use common::subset_sum;
use eklab::symfun::{binomial, is_non_increasing, maclaurin_gap};
use eklab::{elem_sym, maclaurin_chain, maclaurin_check, sigma_vector, MaclaurinVerdict, Spectrum};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(v: &[f64]) -> Spectrum {
    Spectrum::new(v.to_vec()).unwrap()
}

#[test]
fn elem_sym_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let n = rng.random_range(1..=8);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let s = spec(&v);
        for k in 0..=n {
            let scale = subset_sum(&abs, k).max(f64::MIN_POSITIVE);
            let err = (elem_sym(&s, k).unwrap() - subset_sum(&v, k)).abs() / scale;
            assert!(err <= 1e-12, "{v:?} k={k} err={err:e}");
        }
    }
}

#[test]
fn sigma_vector_is_characteristic_polynomial() {
    // Π(1 + tλ_i) = Σ σ_k t^k, sampled at enough t to pin every coefficient.
    let v = [0.3, -1.2, 2.5, 0.7, -0.4];
    let sv = sigma_vector(&spec(&v));
    for i in 0..16 {
        let t = -1.0 + i as f64 / 7.5;
        let prod: f64 = v.iter().map(|l| 1.0 + t * l).product();
        let poly: f64 = sv.sigma.iter().enumerate().map(|(k, s)| s * t.powi(k as i32)).sum();
        assert!((prod - poly).abs() <= 1e-13 * prod.abs().max(1.0));
    }
    for k in 0..=5 {
        assert!((sv.normalized[k] - sv.sigma[k] / binomial(5, k)).abs() <= 1e-15);
    }
}

#[test]
fn equality_case_is_sharp() {
    for n in 2..=8 {
        let s = Spectrum::uniform(n, 1.7).unwrap();
        for k in 0..n {
            assert!(maclaurin_gap(&s, k).unwrap().abs() <= 1e-14);
            assert!(maclaurin_check(&s, k, 1e-9).unwrap().holds());
        }
        let chain = maclaurin_chain(&s, n).unwrap();
        assert!(chain.iter().all(|c| (c - 1.7).abs() <= 1e-14));
    }
}

#[test]
fn mixed_sign_spectrum_is_not_applicable() {
    let v = maclaurin_check(&spec(&[2.0, -0.1, 1.0]), 1, 1e-9).unwrap();
    assert!(matches!(v, MaclaurinVerdict::NotApplicable { .. }));
    assert!(maclaurin_chain(&spec(&[2.0, -0.1]), 2).is_err());
}

#[test]
fn boundary_spectrum_with_vanishing_top_function() {
    // One zero eigenvalue makes Σ_n = 0, below the boundary threshold.
    let s = spec(&[0.0, 1.0, 2.0]);
    assert!(matches!(maclaurin_check(&s, 2, 1e-9).unwrap(), MaclaurinVerdict::NotApplicable { .. }));
    assert!(maclaurin_check(&s, 1, 1e-9).unwrap().holds());
}

fn positive_spectrum() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=8).prop_flat_map(|n| prop::collection::vec(1e-6f64..50.0, n))
}

proptest! {
    #[test]
    fn maclaurin_holds_on_positive_spectra(v in positive_spectrum()) {
        let s = spec(&v);
        for k in 0..v.len() {
            let verdict = maclaurin_check(&s, k, 1e-9).unwrap();
            prop_assert!(verdict.holds(), "{:?} k={} {:?}", v, k, verdict);
        }
    }

    #[test]
    fn chain_is_non_increasing(v in positive_spectrum()) {
        let s = spec(&v);
        let chain = maclaurin_chain(&s, v.len()).unwrap();
        prop_assert!(is_non_increasing(&chain, 1e-12));
        prop_assert!(chain[0] <= s.max() * (1.0 + 1e-12));
        prop_assert!(*chain.last().unwrap() >= s.min() * (1.0 - 1e-12));
    }

    #[test]
    fn elem_sym_is_permutation_invariant(v in prop::collection::vec(-5.0f64..5.0, 1..=8), seed in any::<u64>()) {
        let mut w = v.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..w.len()).rev() {
            w.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(sigma_vector(&spec(&v)), sigma_vector(&spec(&w)));
    }

    #[test]
    fn scaling_is_homogeneous(v in prop::collection::vec(-5.0f64..5.0, 1..=8), c in 0.1f64..10.0) {
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        for k in 0..=v.len() {
            let lhs = elem_sym(&spec(&scaled), k).unwrap();
            let rhs = c.powi(k as i32) * elem_sym(&spec(&v), k).unwrap();
            let scale = c.powi(k as i32) * subset_sum(&abs, k);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }
}
