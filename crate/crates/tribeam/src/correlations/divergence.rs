use crate::error::{Error, Result};

fn check_positive(values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v > 0.0) {
            return Err(Error::domain("purity must be positive", v));
        }
    }
    Ok(())
}

/// H₂ = S₁ + S₁ − S₁₂ with Rényi-2 entropies.
pub fn kl_divergence_2(mu1: f64, mu2: f64) -> Result<f64> {
    check_positive(&[mu1, mu2])?;
    Ok(-2.0 * mu1.ln() + mu2.ln())
}

/// H₃ = S_A + S_BC − S_ABC with Rényi-2 entropies.
pub fn kl_divergence_3(mu1: f64, mu2: f64, mu3: f64) -> Result<f64> {
    check_positive(&[mu1, mu2, mu3])?;
    Ok(-mu1.ln() - mu2.ln() + mu3.ln())
}
