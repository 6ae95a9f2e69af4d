use serde::{Deserialize, Serialize};

use crate::correlations::{
    classify_entanglement, classify_steering, correlation_bounds, EntanglementRegion, Quantity,
    SteeringDirection, SteeringRegion,
};
use crate::error::{Error, Result};
use crate::ghzw::{coexistence_check, ghzw_classify, GhzwClass};
use crate::model::check_purities;

/// Axes of a purity grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxes {
    /// μ₁ along x, μ₂ along y.
    Purities,
    /// u = (μ₁ + μ₂)/2 along x, v = (μ₁ − μ₂)/2 along y.
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: GridAxes,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub points: usize,
}

impl GridSpec {
    pub fn purities(points: usize) -> Self {
        GridSpec {
            axes: GridAxes::Purities,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            points,
        }
    }

    /// Rotated grid covering the physical domain: v ≤ μ₁(1 − μ₁)/2 ≤ 1/8.
    pub fn rotated(points: usize) -> Self {
        GridSpec {
            axes: GridAxes::Rotated,
            x_range: (0.0, 1.0),
            y_range: (0.0, 0.25),
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config("grid needs at least 2 points per axis".into()));
        }
        if !(self.x_range.1 > self.x_range.0 && self.y_range.1 > self.y_range.0) {
            return Err(Error::Config("grid ranges must be increasing".into()));
        }
        Ok(())
    }

    /// Grid nodes as (x, y, μ₁, μ₂).
    pub fn nodes(&self) -> Vec<(f64, f64, f64, f64)> {
        let axis = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (self.points - 1) as f64;
        let mut out = Vec::with_capacity(self.points * self.points);
        for j in 0..self.points {
            for i in 0..self.points {
                let (x, y) = (axis(self.x_range, i), axis(self.y_range, j));
                let (mu1, mu2) = match self.axes {
                    GridAxes::Purities => (x, y),
                    GridAxes::Rotated => (x + y, x - y),
                };
                out.push((x, y, mu1, mu2));
            }
        }
        out
    }
}

/// Classification and Δ₂-window bounds at one physical grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub x: f64,
    pub y: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub region: EntanglementRegion,
    pub steering_1to2: SteeringRegion,
    pub steering_2to1: SteeringRegion,
    pub ghzw_class: GhzwClass,
    pub coexistence: bool,
    pub e_n3_min: f64,
    pub e_n3_max: f64,
    pub e_n2_min: f64,
    pub e_n2_max: f64,
    pub cotangle_min: f64,
    pub cotangle_max: f64,
    pub g_1to2_min: f64,
    pub g_1to2_max: f64,
    pub g_2to1_min: f64,
    pub g_2to1_max: f64,
}

pub fn region_row(x: f64, y: f64, mu1: f64, mu2: f64) -> Result<RegionRow> {
    let b = |q| correlation_bounds(mu1, mu2, q);
    let (e3, e2, ct, g12, g21) = (
        b(Quantity::En3)?,
        b(Quantity::En2)?,
        b(Quantity::Cotangle)?,
        b(Quantity::G12)?,
        b(Quantity::G21)?,
    );
    Ok(RegionRow {
        x,
        y,
        mu1,
        mu2,
        region: classify_entanglement(mu1, mu2)?,
        steering_1to2: classify_steering(mu1, mu2, SteeringDirection::OneToTwo)?,
        steering_2to1: classify_steering(mu1, mu2, SteeringDirection::TwoToOne)?,
        ghzw_class: ghzw_classify(mu1, mu2)?,
        coexistence: coexistence_check(mu1, mu2)?,
        e_n3_min: e3.0,
        e_n3_max: e3.1,
        e_n2_min: e2.0,
        e_n2_max: e2.1,
        cotangle_min: ct.0,
        cotangle_max: ct.1,
        g_1to2_min: g12.0,
        g_1to2_max: g12.1,
        g_2to1_min: g21.0,
        g_2to1_max: g21.1,
    })
}

/// Rows for every grid node inside the physical domain, in row-major order.
pub fn region_map(spec: &GridSpec) -> Result<Vec<RegionRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (x, y, mu1, mu2) in spec.nodes() {
        if mu1 <= 0.0 || check_purities(mu1, mu2).is_err() {
            continue;
        }
        rows.push(region_row(x, y, mu1, mu2)?);
    }
    Ok(rows)
}
