use crate::error::{Error, Result};
use crate::model::{
    assemble_cm, check_purities, clamp_radicand, invariants_from_standard_form, schur_complement,
    symplectic_spectrum, StandardFormParams, StateInvariants,
};

/// γ_aux = √(μ₂²Δ₂² − 4).
pub fn gamma_aux(inv: &StateInvariants) -> Result<f64> {
    let g2 = inv.mu2 * inv.mu2 * inv.delta2 * inv.delta2;
    Ok(clamp_radicand(g2 - 4.0, g2, "gamma_aux")?.sqrt())
}

/// Squared symplectic eigenvalue ν̄² of the Schur complement of one beam.
///
/// This is the smaller eigenvalue wherever it drops below one; elsewhere it can
/// be the larger, which leaves the steering measure at zero either way.
pub fn nu_bar_squared(inv: &StateInvariants) -> Result<f64> {
    check_purities(inv.mu1, inv.mu2)?;
    let (mu1, mu2, d) = (inv.mu1, inv.mu2, inv.delta2);
    let g = gamma_aux(inv)?;
    let num = 3.0 * mu2 * (g - mu2 * d) + mu1 * mu1 * (4.0 + mu2 * d * (mu2 * d - g));
    Ok(num / (2.0 * mu2 * mu2))
}

/// The purity-ratio expression of the 2→1 scenario, which evaluates to (μ₃/μ₂)².
pub fn purity_ratio_2to1(inv: &StateInvariants) -> Result<f64> {
    check_purities(inv.mu1, inv.mu2)?;
    let (mu1, mu2, d) = (inv.mu1, inv.mu2, inv.delta2);
    let g = gamma_aux(inv)?;
    let den = 3.0 * mu2 * (g - mu2 * d) + mu1 * mu1 * (4.0 + mu2 * d * (mu2 * d - g));
    if den <= 0.0 {
        return Err(Error::domain("non-positive purity-ratio denominator", den));
    }
    Ok(mu1 * mu1 * mu2 * (mu2 * d + g) / den)
}

/// Steering of one beam by the other two, max{0, ln(μ₃/μ₂)}.
pub fn steering_2to1(inv: &StateInvariants) -> Result<f64> {
    Ok((0.5 * purity_ratio_2to1(inv)?.ln()).max(0.0))
}

/// Steering of two beams by one, max{0, −ln ν̄}.
pub fn steering_1to2(inv: &StateInvariants) -> Result<f64> {
    let nu2 = nu_bar_squared(inv)?;
    if nu2 <= 0.0 {
        return Err(Error::domain("non-positive Schur-complement eigenvalue", nu2));
    }
    Ok((-0.5 * nu2.ln()).max(0.0))
}

/// Single-beam to single-beam steering, max{0, ln(μ₂/μ₁)}; zero on the physical domain.
pub fn steering_1to1(inv: &StateInvariants) -> Result<f64> {
    check_purities(inv.mu1, inv.mu2)?;
    Ok((inv.mu2 / inv.mu1).ln().max(0.0))
}

pub fn steering_2to1_params(p: &StandardFormParams) -> Result<f64> {
    let inv = invariants_from_standard_form(p)?;
    let mu3 = inv.mu3.expect("filled by invariants_from_standard_form");
    Ok((mu3 / inv.mu2).ln().max(0.0))
}

pub fn steering_1to2_params(p: &StandardFormParams) -> Result<f64> {
    steering_1to2(&invariants_from_standard_form(p)?)
}

/// Numeric 1→2 steering from the symplectic spectrum of σ_BC − Cᵀσ_A⁻¹C.
pub fn steering_1to2_oracle(p: &StandardFormParams) -> Result<f64> {
    let sc = schur_complement(&assemble_cm(p).dynamic(), &[0], &[1, 2])?;
    let nu = symplectic_spectrum(&sc)?;
    Ok(nu.values.iter().filter(|&&v| v < 1.0).map(|v| -v.ln()).sum())
}

/// Smallest symplectic eigenvalue of the 1→2 Schur complement.
pub fn nu_bar_oracle(p: &StandardFormParams) -> Result<f64> {
    let sc = schur_complement(&assemble_cm(p).dynamic(), &[0], &[1, 2])?;
    Ok(symplectic_spectrum(&sc)?.min())
}

/// Numeric 2→1 steering from σ_A − Cσ_BC⁻¹Cᵀ.
pub fn steering_2to1_oracle(p: &StandardFormParams) -> Result<f64> {
    let sc = schur_complement(&assemble_cm(p).dynamic(), &[1, 2], &[0])?;
    let nu = symplectic_spectrum(&sc)?;
    Ok((-nu.min().ln()).max(0.0))
}
