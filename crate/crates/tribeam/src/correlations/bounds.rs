use serde::{Deserialize, Serialize};

use crate::correlations::ppt::{cotangle, log_negativity_2, log_negativity_3, ppt_eigenvalues};
use crate::correlations::steering::{steering_1to2, steering_2to1};
use crate::error::Result;
use crate::model::{seralian_bounds, standard_form, StateInvariants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    En2,
    En3,
    Cotangle,
    G12,
    G21,
    VMinus,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::En2,
        Quantity::En3,
        Quantity::Cotangle,
        Quantity::G12,
        Quantity::G21,
        Quantity::VMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::En2 => "e_n2",
            Quantity::En3 => "e_n3",
            Quantity::Cotangle => "cotangle",
            Quantity::G12 => "g_1to2",
            Quantity::G21 => "g_2to1",
            Quantity::VMinus => "v_minus",
        }
    }
}

pub fn evaluate(quantity: Quantity, inv: &StateInvariants) -> Result<f64> {
    match quantity {
        Quantity::G12 => steering_1to2(inv),
        Quantity::G21 => steering_2to1(inv),
        _ => {
            let p = standard_form(inv)?;
            match quantity {
                Quantity::En2 => log_negativity_2(&p),
                Quantity::En3 => log_negativity_3(&p),
                Quantity::Cotangle => cotangle(&p),
                Quantity::VMinus => Ok(ppt_eigenvalues(&p)?.v_minus),
                _ => unreachable!(),
            }
        }
    }
}

/// Extremes of a quantity over the admissible Δ₂ window, with the Δ₂ at which
/// each is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
    pub delta2_at_min: f64,
    pub delta2_at_max: f64,
}

impl Bounds {
    pub fn pair(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.min - tol && x <= self.max + tol
    }
}

/// Endpoint evaluation over the Δ₂ window; orientation is detected, not assumed.
pub fn correlation_bounds_detailed(mu1: f64, mu2: f64, quantity: Quantity) -> Result<Bounds> {
    let (lo, hi) = seralian_bounds(mu1, mu2)?;
    let f_lo = evaluate(quantity, &StateInvariants::new(mu1, mu2, lo))?;
    let f_hi = evaluate(quantity, &StateInvariants::new(mu1, mu2, hi))?;
    Ok(if f_lo <= f_hi {
        Bounds {
            min: f_lo,
            max: f_hi,
            delta2_at_min: lo,
            delta2_at_max: hi,
        }
    } else {
        Bounds {
            min: f_hi,
            max: f_lo,
            delta2_at_min: hi,
            delta2_at_max: lo,
        }
    })
}

pub fn correlation_bounds(mu1: f64, mu2: f64, quantity: Quantity) -> Result<(f64, f64)> {
    Ok(correlation_bounds_detailed(mu1, mu2, quantity)?.pair())
}
