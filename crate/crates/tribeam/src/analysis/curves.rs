use serde::{Deserialize, Serialize};

use crate::correlations::{
    classify_entanglement, correlation_bounds, evaluate, kl_divergence_2, kl_divergence_3,
    EntanglementRegion, Quantity,
};
use crate::error::Result;
use crate::ghzw::{coexistence_check, ghzw_classify, GhzwClass};
use crate::model::StateInvariants;
use crate::photonics::{
    estimate_state_from_moments, structural_moments, structural_noise_reduction, AnalysisOrder,
    Estimate, EstimateOptions, MomentScope, MultimodeModel,
};

/// Per-mode quantities of one state, with their Δ₂-window bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub delta2: f64,
    pub delta2_min: f64,
    pub delta2_max: f64,
    pub e_n3: f64,
    pub e_n3_min: f64,
    pub e_n3_max: f64,
    pub e_n2: f64,
    pub e_n2_min: f64,
    pub e_n2_max: f64,
    pub cotangle: f64,
    pub cotangle_min: f64,
    pub cotangle_max: f64,
    pub g_1to2: f64,
    pub g_1to2_min: f64,
    pub g_1to2_max: f64,
    pub g_2to1: f64,
    pub g_2to1_min: f64,
    pub g_2to1_max: f64,
    pub h2: f64,
    pub h3: f64,
    pub region: EntanglementRegion,
    pub ghzw_class: GhzwClass,
    pub coexistence: bool,
}

impl StateRow {
    pub fn from_invariants(inv: &StateInvariants, window: (f64, f64)) -> Result<Self> {
        let (mu1, mu2) = (inv.mu1, inv.mu2);
        let inv = inv.completed()?;
        let b = |q| correlation_bounds(mu1, mu2, q);
        let (e3, e2, ct, g12, g21) = (
            b(Quantity::En3)?,
            b(Quantity::En2)?,
            b(Quantity::Cotangle)?,
            b(Quantity::G12)?,
            b(Quantity::G21)?,
        );
        let mu3 = inv.mu3.expect("completed");
        Ok(StateRow {
            mu1,
            mu2,
            mu3,
            delta2: inv.delta2,
            delta2_min: window.0,
            delta2_max: window.1,
            e_n3: evaluate(Quantity::En3, &inv)?,
            e_n3_min: e3.0,
            e_n3_max: e3.1,
            e_n2: evaluate(Quantity::En2, &inv)?,
            e_n2_min: e2.0,
            e_n2_max: e2.1,
            cotangle: evaluate(Quantity::Cotangle, &inv)?,
            cotangle_min: ct.0,
            cotangle_max: ct.1,
            g_1to2: evaluate(Quantity::G12, &inv)?,
            g_1to2_min: g12.0,
            g_1to2_max: g12.1,
            g_2to1: evaluate(Quantity::G21, &inv)?,
            g_2to1_min: g21.0,
            g_2to1_max: g21.1,
            h2: kl_divergence_2(mu1, mu2)?,
            h3: kl_divergence_3(mu1, mu2, mu3)?,
            region: classify_entanglement(mu1, mu2)?,
            ghzw_class: ghzw_classify(mu1, mu2)?,
            coexistence: coexistence_check(mu1, mu2)?,
        })
    }
}

/// One point of a model curve against the noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub noise: f64,
    pub modes: f64,
    pub order: AnalysisOrder,
    pub mean: f64,
    pub fano: f64,
    pub r12: f64,
    #[serde(flatten)]
    pub state: StateRow,
}

/// Estimate from the exact per-mode moments of the structural model.
pub fn model_estimate(model: &MultimodeModel, order: AnalysisOrder) -> Result<Estimate> {
    let table = structural_moments(model, order.moments(), MomentScope::PerMode)?;
    estimate_state_from_moments(
        &table,
        order,
        &EstimateOptions {
            residual: false,
            ..EstimateOptions::default()
        },
    )
}

pub fn model_point(model: &MultimodeModel, order: AnalysisOrder) -> Result<CurvePoint> {
    let e = model_estimate(model, order)?;
    let beam = structural_moments(model, 2, MomentScope::PerBeam)?;
    Ok(CurvePoint {
        noise: model.noise_mean,
        modes: model.modes,
        order,
        mean: model.beam_mean(),
        fano: crate::photonics::fano(&beam, 0)?,
        r12: structural_noise_reduction(model),
        state: StateRow::from_invariants(&e.invariants, e.delta2_window)?,
    })
}

/// Model curve over a noise grid; the template fixes modes, pair level and noise occupancy rule.
pub fn model_curve(template: &MultimodeModel, noise: &[f64], order: AnalysisOrder) -> Vec<Result<CurvePoint>> {
    noise
        .iter()
        .map(|&n| {
            let m = MultimodeModel {
                noise_mean: n,
                ..*template
            };
            model_point(&m, order)
        })
        .collect()
}

/// Evenly spaced grid on [lo, hi] with `points` ≥ 2 entries.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}
