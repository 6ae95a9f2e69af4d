use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::check_purities;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntanglementRegion {
    #[serde(rename = "region_i")]
    RegionI,
    #[serde(rename = "region_ii")]
    RegionII,
    #[serde(rename = "fully_entangled")]
    FullyEntangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringRegion {
    Unsteerable,
    Coexistence,
    Steerable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringDirection {
    /// One beam steers the other two.
    OneToTwo,
    /// Two beams steer the remaining one.
    TwoToOne,
}

impl EntanglementRegion {
    pub fn label(self) -> &'static str {
        match self {
            EntanglementRegion::RegionI => "region_i",
            EntanglementRegion::RegionII => "region_ii",
            EntanglementRegion::FullyEntangled => "fully_entangled",
        }
    }
}

impl SteeringRegion {
    pub fn label(self) -> &'static str {
        match self {
            SteeringRegion::Unsteerable => "unsteerable",
            SteeringRegion::Coexistence => "coexistence",
            SteeringRegion::Steerable => "steerable",
        }
    }
}

/// Absolute width within which a value counts as sitting on a threshold.
pub fn tie_tolerance(threshold: f64) -> f64 {
    1e-12 * threshold.abs().max(1.0)
}

/// Strictly above the threshold, ties (within [`tie_tolerance`]) resolving below.
pub(crate) fn above(x: f64, threshold: f64) -> bool {
    x > threshold + tie_tolerance(threshold)
}

pub fn on_boundary(x: f64, threshold: f64) -> bool {
    (x - threshold).abs() <= tie_tolerance(threshold)
}

/// (PPT-for-all-Δ₂ threshold, full-inseparability threshold) on μ₂.
pub fn entanglement_thresholds(mu1: f64) -> (f64, f64) {
    let s = mu1 * mu1;
    let region1 = (3.0 * s + (9.0 + 62.0 * s - 7.0 * s * s).sqrt() - 3.0) / (10.0 - 2.0 * s);
    let full = mu1 / (2.0 - s).sqrt();
    (region1, full)
}

/// (unsteerable, steerable) thresholds on μ₂ for the given direction.
pub fn steering_thresholds(mu1: f64, direction: SteeringDirection) -> (f64, f64) {
    let s = mu1 * mu1;
    match direction {
        SteeringDirection::OneToTwo => (
            ((16.0 * s + 9.0).sqrt() - 3.0) / 2.0,
            3f64.sqrt() * mu1 / (4.0 - s).sqrt(),
        ),
        SteeringDirection::TwoToOne => (4.0 * s / (3.0 + s), 2f64.sqrt() * mu1 / (3.0 - s).sqrt()),
    }
}

pub fn classify_entanglement(mu1: f64, mu2: f64) -> Result<EntanglementRegion> {
    check_purities(mu1, mu2)?;
    let (t1, t2) = entanglement_thresholds(mu1);
    Ok(if above(mu2, t2) {
        EntanglementRegion::FullyEntangled
    } else if above(mu2, t1) {
        EntanglementRegion::RegionII
    } else {
        EntanglementRegion::RegionI
    })
}

pub fn classify_steering(mu1: f64, mu2: f64, direction: SteeringDirection) -> Result<SteeringRegion> {
    check_purities(mu1, mu2)?;
    let (lo, hi) = steering_thresholds(mu1, direction);
    Ok(if above(mu2, hi) {
        SteeringRegion::Steerable
    } else if above(mu2, lo) {
        SteeringRegion::Coexistence
    } else {
        SteeringRegion::Unsteerable
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states() {
        assert_eq!(classify_entanglement(0.5, 0.25).unwrap(), EntanglementRegion::RegionI);
        assert_eq!(classify_entanglement(0.5, 0.28).unwrap(), EntanglementRegion::RegionII);
        assert_eq!(classify_entanglement(0.5, 0.45).unwrap(), EntanglementRegion::FullyEntangled);
        let t = entanglement_thresholds(0.5).1;
        assert!((t - 0.377964).abs() < 1e-6);
    }

    #[test]
    fn steering_examples() {
        use SteeringDirection::*;
        assert_eq!(classify_steering(0.5, 0.30, OneToTwo).unwrap(), SteeringRegion::Unsteerable);
        assert!((steering_thresholds(0.5, OneToTwo).0 - 0.302776).abs() < 1e-6);
        assert_eq!(classify_steering(0.5, 0.45, OneToTwo).unwrap(), SteeringRegion::Steerable);
        assert_eq!(classify_steering(0.5, 0.45, TwoToOne).unwrap(), SteeringRegion::Steerable);
        assert!((steering_thresholds(0.5, OneToTwo).1 - 0.447214).abs() < 1e-6);
        assert!((steering_thresholds(0.5, TwoToOne).1 - 0.426401).abs() < 1e-6);
    }

    #[test]
    fn pure_corner_ties_go_low() {
        // every threshold equals 1 at mu1 = 1
        assert_eq!(classify_entanglement(1.0, 1.0).unwrap(), EntanglementRegion::RegionI);
        assert_eq!(
            classify_steering(1.0, 1.0, SteeringDirection::TwoToOne).unwrap(),
            SteeringRegion::Unsteerable
        );
    }

    #[test]
    fn labels() {
        assert_eq!(serde_json::to_string(&EntanglementRegion::RegionII).unwrap(), "\"region_ii\"");
        assert_eq!(serde_json::to_string(&SteeringRegion::Coexistence).unwrap(), "\"coexistence\"");
        assert_eq!(EntanglementRegion::FullyEntangled.label(), "fully_entangled");
    }
}
