use nalgebra::{DMatrix, Matrix6};

use crate::error::{Error, Result};
use crate::model::{assemble_cm, CovarianceMatrix, StandardFormParams};
use crate::photonics::moments::{MomentScope, MomentTable, MAX_ORDER};
use crate::series::Series3;

/// Normally ordered correlators N_ij = ⟨a_i†a_j⟩ and M_ij = ⟨a_i a_j⟩ as
/// (real, imaginary) parts, from a CM ordered (x₁, p₁, x₂, p₂, x₃, p₃) with vacuum σ = I.
pub fn normal_correlators(sigma: &Matrix6<f64>) -> ([[(f64, f64); 3]; 3], [[(f64, f64); 3]; 3]) {
    let mut n = [[(0.0, 0.0); 3]; 3];
    let mut m = [[(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (xi, pi, xj, pj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            let xx = sigma[(xi, xj)];
            let pp = sigma[(pi, pj)];
            let xp = sigma[(xi, pj)];
            let px = sigma[(pi, xj)];
            let delta = if i == j { 0.5 } else { 0.0 };
            n[i][j] = (0.25 * (xx + pp) - delta, 0.25 * (xp - px));
            m[i][j] = (0.25 * (xx - pp), 0.25 * (xp + px));
        }
    }
    (n, m)
}

/// Formal real covariance of (u₁, v₁, u₂, v₂, u₃, v₃) with α_j = u_j + i v_j
/// reproducing the normally ordered correlators.
fn formal_covariance(sigma: &Matrix6<f64>) -> DMatrix<f64> {
    let (n, m) = normal_correlators(sigma);
    let mut c = DMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            c[(2 * i, 2 * j)] = 0.5 * (n[i][j].0 + m[i][j].0);
            c[(2 * i + 1, 2 * j + 1)] = 0.5 * (n[i][j].0 - m[i][j].0);
            c[(2 * i, 2 * j + 1)] = 0.5 * (n[i][j].1 + m[i][j].1);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            c[(2 * j + 1, 2 * i)] = c[(2 * i, 2 * j + 1)];
        }
    }
    c
}

/// Exact normally ordered moments of the zero-mean Gaussian state with CM `sigma`.
///
/// The generating function Σ⟨W^k⟩t^k/k! equals det(I − 2TC)^{−1/2} with C the
/// formal covariance and T = diag(t₁, t₁, t₂, t₂, t₃, t₃); its log is
/// expanded as ½ Σ_k tr((2TC)^k)/k.
pub fn moments_from_covariance(sigma: &CovarianceMatrix, order: usize) -> Result<MomentTable> {
    if order > MAX_ORDER {
        return Err(Error::Config(format!("moment order {order} above {MAX_ORDER}")));
    }
    let c = formal_covariance(&sigma.entries);
    let beam = |a: usize| a / 2;
    // B = (2TC)^k as a matrix of series; row a carries the factor t_{beam(a)}
    let first: Vec<Series3> = (0..36)
        .map(|ab| Series3::var(order, beam(ab / 6)).scale(2.0 * c[(ab / 6, ab % 6)]))
        .collect();
    let mut power = first;
    let mut log_g = Series3::zero(order);
    for k in 1..=order {
        let trace = (0..6).fold(Series3::zero(order), |acc, a| &acc + &power[a * 6 + a]);
        log_g = &log_g + &trace.scale(0.5 / k as f64);
        if k == order {
            break;
        }
        let mut next = Vec::with_capacity(36);
        for a in 0..6 {
            for b in 0..6 {
                let mut s = Series3::zero(order);
                for m in 0..6 {
                    let w = 2.0 * c[(a, m)];
                    if w != 0.0 {
                        s = &s + &power[m * 6 + b].scale(w);
                    }
                }
                next.push(s.mul_var(beam(a), 1.0));
            }
        }
        power = next;
    }
    Ok(MomentTable::from_series(&log_g.exp(), MomentScope::PerMode))
}

/// Moments of the symmetric state in standard form.
pub fn moments_from_cm(p: &StandardFormParams, order: usize) -> Result<MomentTable> {
    moments_from_covariance(&assemble_cm(p), order)
}
