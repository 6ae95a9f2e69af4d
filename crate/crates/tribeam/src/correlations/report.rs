use serde::{Deserialize, Serialize};

use crate::correlations::bounds::{correlation_bounds, evaluate, Quantity};
use crate::correlations::regions::{
    classify_entanglement, classify_steering, EntanglementRegion, SteeringDirection, SteeringRegion,
};
use crate::error::Result;
use crate::model::{propagate, StateInvariants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementBounds {
    pub e_n3: (f64, f64),
    pub e_n2: (f64, f64),
    pub cotangle: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementErrors {
    pub e_n3: f64,
    pub e_n2: f64,
    pub cotangle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub e_n3: f64,
    pub e_n2: f64,
    pub cotangle: f64,
    pub bounds: Option<EntanglementBounds>,
    pub region: EntanglementRegion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<EntanglementErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringBounds {
    pub g_1to2: (f64, f64),
    pub g_2to1: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringErrors {
    pub g_1to2: f64,
    pub g_2to1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub g_1to2: f64,
    pub g_2to1: f64,
    pub bounds: Option<SteeringBounds>,
    pub region_1to2: SteeringRegion,
    pub region_2to1: SteeringRegion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<SteeringErrors>,
}

/// Point values, Δ₂-window bounds and propagated errors for the entanglement measures.
pub fn entanglement_report(inv: &StateInvariants) -> Result<EntanglementReport> {
    let (e_n3, s3) = propagate(inv, |s| evaluate(Quantity::En3, s))?;
    let (e_n2, s2) = propagate(inv, |s| evaluate(Quantity::En2, s))?;
    let (cot, st) = propagate(inv, |s| evaluate(Quantity::Cotangle, s))?;
    let bounds = EntanglementBounds {
        e_n3: correlation_bounds(inv.mu1, inv.mu2, Quantity::En3)?,
        e_n2: correlation_bounds(inv.mu1, inv.mu2, Quantity::En2)?,
        cotangle: correlation_bounds(inv.mu1, inv.mu2, Quantity::Cotangle)?,
    };
    Ok(EntanglementReport {
        e_n3,
        e_n2,
        cotangle: cot,
        bounds: Some(bounds),
        region: classify_entanglement(inv.mu1, inv.mu2)?,
        errors: match (s3, s2, st) {
            (Some(e_n3), Some(e_n2), Some(cotangle)) => Some(EntanglementErrors { e_n3, e_n2, cotangle }),
            _ => None,
        },
    })
}

pub fn steering_report(inv: &StateInvariants) -> Result<SteeringReport> {
    let (g12, s12) = propagate(inv, |s| evaluate(Quantity::G12, s))?;
    let (g21, s21) = propagate(inv, |s| evaluate(Quantity::G21, s))?;
    Ok(SteeringReport {
        g_1to2: g12,
        g_2to1: g21,
        bounds: Some(SteeringBounds {
            g_1to2: correlation_bounds(inv.mu1, inv.mu2, Quantity::G12)?,
            g_2to1: correlation_bounds(inv.mu1, inv.mu2, Quantity::G21)?,
        }),
        region_1to2: classify_steering(inv.mu1, inv.mu2, SteeringDirection::OneToTwo)?,
        region_2to1: classify_steering(inv.mu1, inv.mu2, SteeringDirection::TwoToOne)?,
        errors: match (s12, s21) {
            (Some(g_1to2), Some(g_2to1)) => Some(SteeringErrors { g_1to2, g_2to1 }),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{seralian_bounds, InvariantErrors};

    #[test]
    fn point_lies_within_bounds() {
        let (lo, hi) = seralian_bounds(0.8, 0.75).unwrap();
        let inv = StateInvariants::new(0.8, 0.75, 0.3 * lo + 0.7 * hi);
        let r = entanglement_report(&inv).unwrap();
        let b = r.bounds.clone().unwrap();
        assert!(b.e_n3.0 <= r.e_n3 && r.e_n3 <= b.e_n3.1);
        assert!(r.errors.is_none());
        let s = steering_report(&inv).unwrap();
        let sb = s.bounds.unwrap();
        assert!(sb.g_1to2.0 <= s.g_1to2 && s.g_1to2 <= sb.g_1to2.1);
    }

    #[test]
    fn errors_propagate() {
        let (lo, hi) = seralian_bounds(0.8, 0.75).unwrap();
        let inv = StateInvariants::new(0.8, 0.75, 0.5 * (lo + hi)).with_errors(InvariantErrors {
            mu1: 1e-3,
            mu2: 1e-3,
            delta2: 1e-3,
            mu3: None,
        });
        let r = entanglement_report(&inv).unwrap();
        assert!(r.errors.unwrap().e_n3 > 0.0);
    }
}
