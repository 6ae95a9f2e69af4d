#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use tribeam::model::{seralian_bounds, StandardFormParams, StateInvariants};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric three-beam CM built entry by entry.
pub fn cm(a: f64, cp: f64, cm: f64) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| {
        let same_quad = i % 2 == j % 2;
        if !same_quad {
            0.0
        } else if i / 2 == j / 2 {
            a
        } else if i % 2 == 0 {
            cp
        } else {
            cm
        }
    })
}

pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

/// Symplectic eigenvalues, ascending: with σ = LLᵀ, the antisymmetric
/// LᵀΩL has singular values ν (each twice).
pub fn symplectic_eigs(sigma: &DMatrix<f64>) -> Vec<f64> {
    let n = sigma.nrows() / 2;
    let l = sigma.clone().cholesky().expect("positive definite").unpack();
    let a = l.transpose() * omega(n) * &l;
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Flips the momentum of mode 0.
pub fn transpose_first(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    let n = sigma.nrows();
    let l = DMatrix::from_fn(n, n, |i, j| if i != j { 0.0 } else if i == 1 { -1.0 } else { 1.0 });
    &l * sigma * &l
}

pub fn block(sigma: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| sigma[(rows[i], cols[j])])
}

/// σ_kk − σ_kr σ_rr⁻¹ σ_rk over quadrature indices.
pub fn schur(sigma: &DMatrix<f64>, removed: &[usize], kept: &[usize]) -> DMatrix<f64> {
    let rr = block(sigma, removed, removed).try_inverse().expect("invertible");
    block(sigma, kept, kept) - block(sigma, kept, removed) * rr * block(sigma, removed, kept)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn random_purities(r: &mut ChaCha8Rng) -> (f64, f64) {
    let mu1: f64 = r.gen_range(0.1..0.999);
    let mu2 = r.gen_range(mu1 * mu1..mu1);
    (mu1, mu2)
}

/// Uniform over the admissible (μ₁, μ₂, Δ₂) domain with μ₁ ∈ [0.1, 0.999).
pub fn random_invariants(r: &mut ChaCha8Rng) -> StateInvariants {
    let (mu1, mu2) = random_purities(r);
    let (lo, hi) = seralian_bounds(mu1, mu2).unwrap();
    let d = if hi > lo { r.gen_range(lo..=hi) } else { lo };
    StateInvariants::new(mu1, mu2, d)
}

pub fn positive_definite(sigma: &DMatrix<f64>) -> bool {
    sigma.clone().symmetric_eigen().eigenvalues.iter().all(|&l| l > 0.0)
}

/// Physical standard-form parameters on the branch c₋ ≤ c₊, c₊ + c₋ ≥ 0.
pub fn random_params(r: &mut ChaCha8Rng) -> StandardFormParams {
    loop {
        let a: f64 = r.gen_range(1.0..4.0);
        let p = StandardFormParams::new(a, r.gen_range(-a..a), r.gen_range(-a..a));
        let s = cm(p.a, p.c_plus, p.c_minus);
        if p.c_minus <= p.c_plus
            && p.c_plus + p.c_minus >= 0.0
            && positive_definite(&s)
            && symplectic_eigs(&s)[0] > 1.0 + 1e-6
        {
            return p;
        }
    }
}
