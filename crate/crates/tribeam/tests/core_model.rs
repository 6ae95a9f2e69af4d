mod common;

use approx::assert_relative_eq;
use common::*;
use proptest::prelude::*;
use rand::Rng;
use tribeam::model::*;

#[test]
fn seralian_window_examples() {
    let (lo, hi) = seralian_bounds(1.0, 1.0).unwrap();
    assert_relative_eq!(lo, 2.0, epsilon = 1e-12);
    assert_relative_eq!(hi, 2.0, epsilon = 1e-12);
    let (lo, hi) = seralian_bounds(0.5, 0.25).unwrap();
    assert_relative_eq!(lo, 8.0, epsilon = 1e-9);
    assert_relative_eq!(hi, 8.0, epsilon = 1e-9);
    let (lo, hi) = seralian_bounds(0.8, 0.652352).unwrap();
    assert!(lo < 3.06639 && 3.06639 < hi, "({lo}, {hi})");
}

#[test]
fn standard_form_examples() {
    let p = standard_form(&StateInvariants::new(1.0, 1.0, 2.0)).unwrap();
    assert_eq!((p.a, p.c_plus, p.c_minus), (1.0, 0.0, 0.0));
    let p = standard_form(&StateInvariants::new(0.5, 0.25, 8.0)).unwrap();
    assert_relative_eq!(p.a, 2.0, epsilon = 1e-12);
    assert!(p.c_plus.abs() < 1e-6 && p.c_minus.abs() < 1e-6);

    let inv = StateInvariants::new(0.8, 0.652352, 3.06639);
    let p = standard_form(&inv).unwrap();
    assert_relative_eq!(p.a, 1.25, epsilon = 1e-12);
    let back = invariants_from_standard_form(&p).unwrap();
    assert_relative_eq!(back.mu2, inv.mu2, max_relative = 1e-10);
    assert_relative_eq!(back.delta2, inv.delta2, max_relative = 1e-10);
}

#[test]
fn pure_and_thermal_inverse() {
    let v = invariants_from_standard_form(&StandardFormParams::new(1.0, 0.0, 0.0)).unwrap();
    assert_eq!((v.mu1, v.mu2, v.delta2), (1.0, 1.0, 2.0));
    let v = invariants_from_standard_form(&StandardFormParams::new(2.0, 0.0, 0.0)).unwrap();
    assert_eq!((v.mu1, v.mu2, v.delta2), (0.5, 0.25, 8.0));
    assert!(invariants_from_standard_form(&StandardFormParams::new(0.9, 0.0, 0.0)).is_err());
}

#[test]
fn assembled_matrix() {
    let id = assemble_cm(&StandardFormParams::vacuum());
    assert_eq!(id.to_rows(), CovarianceMatrix::identity().to_rows());
    let p = StandardFormParams::new(1.7, 0.6, -0.3);
    let got = assemble_cm(&p).dynamic();
    assert_eq!(got, cm(1.7, 0.6, -0.3));
    let det = got.determinant();
    let inv = invariants_from_standard_form(&p).unwrap();
    assert_relative_eq!(purity3(&inv).unwrap(), det.powf(-0.5), max_relative = 1e-10);
}

#[test]
fn physicality_examples() {
    assert!(!check_physical(&StateInvariants::new(0.5, 0.6, 3.0)).passes());
    assert!(check_physical(&StateInvariants::new(1.0, 1.0, 2.0)).passes());
    let (lo, hi) = seralian_bounds(0.5, 0.28).unwrap();
    let inv = StateInvariants::new(0.5, 0.28, 0.5 * (lo + hi));
    assert!(check_physical(&inv).passes());
    let p = standard_form(&inv).unwrap();
    assert!(symplectic_eigs(&cm(p.a, p.c_plus, p.c_minus))[0] >= 1.0 - 1e-9);
}

#[test]
fn purity3_examples() {
    assert_relative_eq!(purity3(&StateInvariants::new(1.0, 1.0, 2.0)).unwrap(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(purity3(&StateInvariants::new(0.5, 0.25, 8.0)).unwrap(), 0.125, epsilon = 1e-9);
    // GHZ/W relation μ₃ = (μ₂/μ₁)³ and the determinant oracle
    let inv = StateInvariants::new(0.8, 0.652352, 3.06639);
    let mu3 = purity3(&inv).unwrap();
    assert_relative_eq!(mu3, 0.54222, epsilon = 5e-6);
    assert_relative_eq!(mu3, (0.652352f64 / 0.8).powi(3), epsilon = 5e-6);
    let p = standard_form(&inv).unwrap();
    assert_relative_eq!(mu3, cm(p.a, p.c_plus, p.c_minus).determinant().powf(-0.5), max_relative = 1e-9);
}

#[test]
fn delta2_inversion_examples() {
    assert_relative_eq!(delta2_from_mu3(0.5, 0.25, 0.125).unwrap(), 8.0, epsilon = 1e-6);
    let d = delta2_from_mu3(0.8, 0.652352, 0.54222).unwrap();
    assert_relative_eq!(d, 3.06639, epsilon = 1e-3);
    assert!(matches!(delta2_from_mu3(0.8, 0.652352, 0.99), Err(tribeam::Error::Range { .. })));
}

#[test]
fn symplectic_spectrum_examples() {
    let s = CovarianceMatrix::identity().symplectic_spectrum().unwrap();
    for v in s.values {
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }
    let s = assemble_cm(&StandardFormParams::thermal(0.5)).symplectic_spectrum().unwrap();
    for v in s.values {
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }
}

#[test]
fn spectrum_of_near_degenerate_matrix() {
    // symmetric CM: ν = √((a+2c₊)(a+2c₋)) once and √((a−c₊)(a−c₋)) twice
    let p = StandardFormParams::new(1.4630147958295463, 0.9713291040089329, -0.5713121406558999);
    let s = assemble_cm(&p).symplectic_spectrum().unwrap();
    let twice = ((p.a - p.c_plus) * (p.a - p.c_minus)).sqrt();
    let once = ((p.a + 2.0 * p.c_plus) * (p.a + 2.0 * p.c_minus)).sqrt();
    let mut want = [twice, twice, once];
    want.sort_by(f64::total_cmp);
    for (x, y) in s.values.iter().zip(&want) {
        assert_relative_eq!(*x, *y, max_relative = 1e-10);
    }
}

#[test]
fn renyi_entropy_examples() {
    assert_eq!(renyi2_entropy(1.0).unwrap(), 0.0);
    assert_relative_eq!(renyi2_entropy(0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
    assert_relative_eq!(renyi2_entropy(0.125).unwrap(), 3.0 * std::f64::consts::LN_2, epsilon = 1e-14);
    assert!(renyi2_entropy(0.0).is_err());
}

#[test]
fn purity3_matches_determinant_on_random_states() {
    let mut r = rng(101);
    for _ in 0..10_000 {
        let inv = random_invariants(&mut r);
        let p = standard_form(&inv).unwrap();
        let det = cm(p.a, p.c_plus, p.c_minus).determinant();
        let mu3 = purity3(&inv).unwrap();
        assert!(rel(mu3, det.powf(-0.5)) < 1e-9, "{inv:?}");
    }
}

#[test]
fn physicality_matches_spectrum() {
    let mut r = rng(102);
    for _ in 0..10_000 {
        let inv = random_invariants(&mut r);
        let p = standard_form(&inv).unwrap();
        let nu = symplectic_eigs(&cm(p.a, p.c_plus, p.c_minus))[0];
        assert!(check_physical(&inv).passes());
        assert!(nu >= 1.0 - 1e-9, "{inv:?} {nu}");
    }
    // outside the window the spectrum drops below one
    for _ in 0..2000 {
        let (mu1, mu2) = random_purities(&mut r);
        let (lo, _) = seralian_bounds(mu1, mu2).unwrap();
        let d = lo * (1.0 - r.gen_range(0.01..0.2));
        let inv = StateInvariants::new(mu1, mu2, d);
        assert!(!check_physical(&inv).passes());
    }
}

#[test]
fn window_is_continuous_at_branch_switch() {
    let mut r = rng(103);
    for _ in 0..1000 {
        let mu1: f64 = r.gen_range(0.1..0.99);
        let s = bound_branch_switch(mu1);
        let h = 1e-12;
        let (below, _) = seralian_bounds(mu1, s - h).unwrap();
        let (above, _) = seralian_bounds(mu1, s + h).unwrap();
        assert!((below - above).abs() < 1e-9 * below.max(1.0), "{mu1}: {below} {above}");
    }
}

#[test]
fn purity3_extremes_bracket_window() {
    let mut r = rng(104);
    for _ in 0..500 {
        let (mu1, mu2) = random_purities(&mut r);
        let (lo, hi) = seralian_bounds(mu1, mu2).unwrap();
        let ((_, p_min), (_, p_max)) = purity3_extremes(mu1, mu2).unwrap();
        for i in 0..100 {
            let v = purity3(&StateInvariants::new(mu1, mu2, lo + (hi - lo) * i as f64 / 99.0)).unwrap();
            assert!(v >= p_min - 1e-12 && v <= p_max + 1e-12, "({mu1}, {mu2}): {p_min} {v} {p_max}");
        }
    }
}

#[test]
fn mu3_can_have_two_preimages() {
    // μ₃ dips inside the window here
    let (mu1, mu2) = (0.670299133666029, 0.46894401528850965);
    let (lo, hi) = seralian_bounds(mu1, mu2).unwrap();
    let ((d_min, p_min), _) = purity3_extremes(mu1, mu2).unwrap();
    assert!(lo < d_min && d_min < hi);
    let f = |d| purity3(&StateInvariants::new(mu1, mu2, d)).unwrap();
    assert!(p_min < f(lo) && p_min < f(hi));
    let target = 0.5 * (p_min + f(lo).min(f(hi)));
    let roots = delta2_roots_from_mu3(mu1, mu2, target).unwrap();
    assert_eq!(roots.len(), 2);
    for d in roots {
        assert!((f(d) - target).abs() < 1e-10);
    }
}

#[test]
fn invariants_json_schema() {
    let inv = StateInvariants::new(0.8, 0.7, 3.0).with_mu3(0.6);
    let v: serde_json::Value = serde_json::to_value(inv).unwrap();
    for k in ["mu1", "mu2", "delta2", "mu3"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    let p: serde_json::Value = serde_json::to_value(StandardFormParams::new(1.2, 0.3, -0.1)).unwrap();
    for k in ["a", "c_plus", "c_minus"] {
        assert!(p.get(k).is_some(), "{k}");
    }
    let m: serde_json::Value = serde_json::to_value(CovarianceMatrix::identity()).unwrap();
    assert_eq!(m[0][0], 1.0);
    assert_eq!(m.as_array().unwrap().len(), 6);
}

proptest! {
    #[test]
    fn standard_form_round_trip(seed in any::<u64>()) {
        let p = random_params(&mut rng(seed));
        let back = standard_form(&invariants_from_standard_form(&p).unwrap()).unwrap();
        prop_assert!((back.a - p.a).abs() < 1e-10);
        prop_assert!((back.c_plus - p.c_plus).abs() < 1e-10 * p.a.max(1.0).powi(2), "{:?} {:?}", p, back);
        prop_assert!((back.c_minus - p.c_minus).abs() < 1e-10 * p.a.max(1.0).powi(2), "{:?} {:?}", p, back);
    }

    #[test]
    fn delta2_round_trip(seed in any::<u64>()) {
        let inv = random_invariants(&mut rng(seed));
        let mu3 = purity3(&inv).unwrap();
        let roots = delta2_roots_from_mu3(inv.mu1, inv.mu2, mu3).unwrap();
        prop_assert!(roots.iter().any(|&d| (d - inv.delta2).abs() < 1e-6 * inv.delta2), "{:?} {:?}", inv, roots);
        for d in roots {
            let back = purity3(&StateInvariants::new(inv.mu1, inv.mu2, d)).unwrap();
            prop_assert!((back - mu3).abs() < 1e-9, "{:?} {} {}", inv, d, back);
        }
    }

    #[test]
    fn random_params_are_physical(seed in any::<u64>()) {
        let p = random_params(&mut rng(seed));
        let s = assemble_cm(&p).symplectic_spectrum().unwrap();
        prop_assert!(s.values.iter().all(|&v| v >= 1.0));
        let oracle = symplectic_eigs(&cm(p.a, p.c_plus, p.c_minus));
        for (x, y) in s.values.iter().zip(&oracle) {
            prop_assert!(rel(*x, *y) < 1e-9);
        }
    }
}
