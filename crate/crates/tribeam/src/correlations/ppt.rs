use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    assemble_cm, clamp_radicand, symplectic_spectrum, StandardFormParams, SymplecticSpectrum,
};

/// Symplectic eigenvalues of the A|BC partially transposed CM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptSpectrum {
    pub v1: f64,
    pub v_plus: f64,
    pub v_minus: f64,
}

pub fn ppt_eigenvalues(p: &StandardFormParams) -> Result<PptSpectrum> {
    let (a, cp, cm) = (p.a, p.c_plus, p.c_minus);
    let v1sq = (a - cm) * (a - cp);
    if v1sq < 0.0 {
        return Err(Error::domain("negative (a - c-)(a - c+)", v1sq));
    }
    let theta_sq = 9.0 * a * a * cm * cm
        + 2.0 * a * cm * cp * (cm - 7.0 * a)
        + (9.0 * a - 7.0 * cm) * (a + cm) * cp * cp;
    let scale = 9.0 * a * a * (cm * cm + cp * cp + cm.abs() * cp.abs());
    let theta = clamp_radicand(theta_sq, scale, "theta")?.sqrt();
    let base = 2.0 * a * a - 3.0 * cm * cp + a * (cm + cp);
    let plus = clamp_radicand(0.5 * (base + theta), base.abs() + theta, "v+")?;
    let minus = clamp_radicand(0.5 * (base - theta), base.abs() + theta, "v-")?;
    Ok(PptSpectrum {
        v1: v1sq.sqrt(),
        v_plus: plus.sqrt(),
        v_minus: minus.sqrt(),
    })
}

/// Numeric spectrum of Λσ₃Λ with Λ = diag(1, −1, 1, 1, 1, 1).
pub fn ppt_spectrum_oracle(p: &StandardFormParams) -> Result<SymplecticSpectrum> {
    assemble_cm(p).partial_transpose(0).symplectic_spectrum()
}

/// Tripartite logarithmic negativity max{0, −ln ṽ₋}.
pub fn log_negativity_3(p: &StandardFormParams) -> Result<f64> {
    Ok((-ppt_eigenvalues(p)?.v_minus.ln()).max(0.0))
}

/// Two-beam logarithmic negativity of the reduced state.
pub fn log_negativity_2(p: &StandardFormParams) -> Result<f64> {
    let (a, cp, cm) = (p.a, p.c_plus, p.c_minus);
    let arg = a * a - a * (cm - cp).abs() - cm * cp;
    if arg <= 0.0 {
        return Err(Error::domain("non-positive two-beam negativity argument", arg));
    }
    Ok((-0.5 * arg.ln()).max(0.0))
}

/// Two-beam negativity from the numeric 4×4 partial-transpose spectrum.
pub fn log_negativity_2_oracle(p: &StandardFormParams) -> Result<f64> {
    let two = assemble_cm(p).reduced(&[0, 1]);
    let mut pt = two.clone();
    for j in 0..4 {
        if j != 1 {
            pt[(1, j)] = -two[(1, j)];
            pt[(j, 1)] = -two[(j, 1)];
        }
    }
    let nu = symplectic_spectrum(&pt)?;
    Ok((-nu.min().ln()).max(0.0))
}

/// Residual cotangle E_{N,3}² − 2E_{N,2}².
pub fn cotangle(p: &StandardFormParams) -> Result<f64> {
    let e3 = log_negativity_3(p)?;
    let e2 = log_negativity_2(p)?;
    Ok(e3 * e3 - 2.0 * e2 * e2)
}
