//! Noisy GHZ/W reference states and their classification.

use serde::{Deserialize, Serialize};

use crate::correlations::{above, on_boundary};
use crate::error::{Error, Result};
use crate::model::{check_purities, clamp_radicand, StateInvariants};

/// Noisy GHZ/W state fixed by its marginal purities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzwState {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub delta2: f64,
}

impl GhzwState {
    pub fn invariants(&self) -> StateInvariants {
        StateInvariants::new(self.mu1, self.mu2, self.delta2).with_mu3(self.mu3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GhzwClass {
    #[serde(rename = "class_1")]
    Class1,
    #[serde(rename = "class_4")]
    Class4,
    #[serde(rename = "class_5")]
    Class5,
}

impl GhzwClass {
    pub fn label(self) -> &'static str {
        match self {
            GhzwClass::Class1 => "class_1",
            GhzwClass::Class4 => "class_4",
            GhzwClass::Class5 => "class_5",
        }
    }
}

pub fn ghzw_from_marginals(mu1: f64, mu2: f64) -> Result<GhzwState> {
    check_purities(mu1, mu2)?;
    let r = mu2 / mu1;
    Ok(GhzwState {
        mu1,
        mu2,
        mu3: r * r * r,
        delta2: 1.0 / (mu1 * mu1) + mu1 * mu1 / (mu2 * mu2),
    })
}

/// (class-5 ceiling, class-1 floor) on μ₂.
pub fn ghzw_thresholds(mu1: f64) -> (f64, f64) {
    let s = mu1 * mu1;
    let s3 = s * s * s;
    let class5 = ((5.0 * s * s + 3.0 * (s3 * (8.0 + s)).sqrt()) / (18.0 - 4.0 * s)).sqrt();
    let class1 = (mu1 * s / (2.0 - mu1)).sqrt();
    (class5, class1)
}

pub fn ghzw_classify(mu1: f64, mu2: f64) -> Result<GhzwClass> {
    check_purities(mu1, mu2)?;
    let (t5, t1) = ghzw_thresholds(mu1);
    Ok(if above(mu2, t1) {
        GhzwClass::Class1
    } else if above(mu2, t5) {
        GhzwClass::Class4
    } else {
        GhzwClass::Class5
    })
}

/// Outcome of the bi-/tripartite coexistence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coexistence {
    pub coexists: bool,
    /// Set when a condition holds only with equality.
    pub boundary: bool,
}

/// Thresholds (μ₁√((1+μ₁²)/(3−μ₁²)), μ₁/√3); both must lie strictly below μ₂.
pub fn coexistence_thresholds(mu1: f64) -> (f64, f64) {
    let s = mu1 * mu1;
    (mu1 * ((1.0 + s) / (3.0 - s)).sqrt(), mu1 / 3f64.sqrt())
}

pub fn coexistence_detail(mu1: f64, mu2: f64) -> Result<Coexistence> {
    check_purities(mu1, mu2)?;
    let (t1, t2) = coexistence_thresholds(mu1);
    let boundary = on_boundary(mu2, t1) || on_boundary(mu2, t2);
    let pure_corner = on_boundary(mu1, 1.0) && on_boundary(mu2, 1.0);
    Ok(Coexistence {
        coexists: pure_corner || (above(mu2, t1) && above(mu2, t2)),
        boundary,
    })
}

pub fn coexistence_check(mu1: f64, mu2: f64) -> Result<bool> {
    Ok(coexistence_detail(mu1, mu2)?.coexists)
}

/// Rényi-2 divergence between a state and the GHZ/W state with the same marginals.
pub fn kl_to_ghzw(inv: &StateInvariants) -> Result<f64> {
    check_purities(inv.mu1, inv.mu2)?;
    let (m1, m2, d) = (inv.mu1, inv.mu2, inv.delta2);
    let m1_4 = m1.powi(4);
    let g2 = d * d * m2 * m2;
    let g = clamp_radicand(g2 - 4.0, g2, "gamma_aux")?.sqrt();

    let u = d * m1 * m1 - 4.0;
    let f1 = clamp_radicand(u * u * m2 * m2 - 4.0 * m1_4, u * u * m2 * m2, "h1 first factor")?;
    let f2 = (m2 * m2 - m1_4) * (9.0 * m2 * m2 - m1_4);
    let h1 = clamp_radicand(f1 * f2, f1 * (m1_4 * m1_4 + 9.0 * m2.powi(4)), "h1")?;
    let h2 = 3.0 * (m2 * m2 - m1_4) * (8.0 * m2 + m1 * m1 * g);
    let h3 = 6.0 + d * d * (d * m1 * m1 - 3.0) * m2 * m2 - 2.0 * m1 * m1 * g / m2
        + d * (3.0 - d * m1 * m1) * m2 * g;
    if h3 <= 0.0 {
        return Err(Error::domain("non-positive h3", h3));
    }
    let value = (h2 - 3.0 * h1.sqrt()) / (8.0 * m1_4 * m2)
        + (2f64.sqrt() * m1_4 / (m2 * m2 * h3.sqrt())).ln();
    // Cancellation at the GHZ/W submanifold leaves values of order 1e-12 of either sign.
    let scale = 1.0 + (h2.abs() + 3.0 * h1.sqrt()) / (8.0 * m1_4 * m2);
    if value < -1e-9 * scale {
        return Err(Error::Numerical(format!("negative divergence {value:.3e}")));
    }
    Ok(value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_physical, purity3, seralian_bounds};
    use approx::assert_relative_eq;

    #[test]
    fn parametrization() {
        let g = ghzw_from_marginals(1.0, 1.0).unwrap();
        assert_eq!((g.mu3, g.delta2), (1.0, 2.0));
        let g = ghzw_from_marginals(0.5, 0.25).unwrap();
        assert_relative_eq!(g.mu3, 0.125);
        assert_relative_eq!(g.delta2, 8.0);
        let g = ghzw_from_marginals(0.8, 0.652352).unwrap();
        assert!((g.mu3 - 0.54222).abs() < 5e-6);
        assert!((g.delta2 - 3.06639).abs() < 5e-6);
        assert!(check_physical(&g.invariants()).passes());
        assert_relative_eq!(purity3(&g.invariants()).unwrap(), g.mu3, max_relative = 1e-9);
    }

    #[test]
    fn classes() {
        assert_eq!(ghzw_classify(0.5, 0.25).unwrap(), GhzwClass::Class5);
        assert_eq!(ghzw_classify(0.8, 0.652352).unwrap(), GhzwClass::Class4);
        assert_eq!(ghzw_classify(0.5, 0.5 / 3f64.sqrt()).unwrap(), GhzwClass::Class4);
        assert_eq!(ghzw_classify(0.5, 0.45).unwrap(), GhzwClass::Class1);
    }

    #[test]
    fn coexistence() {
        let c = coexistence_detail(1.0, 1.0).unwrap();
        assert!(c.coexists && c.boundary);
        assert!(!coexistence_check(0.5, 0.25).unwrap());
        assert!(coexistence_check(0.5, 0.45).unwrap());
    }

    #[test]
    fn divergence_vanishes_on_ghzw() {
        let g = ghzw_from_marginals(0.8, 0.652352).unwrap();
        assert!(kl_to_ghzw(&g.invariants()).unwrap() < 1e-8);
        assert_eq!(kl_to_ghzw(&StateInvariants::new(1.0, 1.0, 2.0)).unwrap(), 0.0);
        let (_, hi) = seralian_bounds(0.8, 0.652352).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let d = hi + (g.delta2 - hi) * k as f64 / 10.0;
            let h = kl_to_ghzw(&StateInvariants::new(0.8, 0.652352, d)).unwrap();
            assert!(h <= prev + 1e-12);
            prev = h;
        }
        assert!(kl_to_ghzw(&StateInvariants::new(0.8, 0.652352, hi)).unwrap() > 0.0);
    }
}
