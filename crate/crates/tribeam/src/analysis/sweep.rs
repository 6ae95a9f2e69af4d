use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InvariantErrors;
use crate::photonics::{
    analyze_histogram, apply_detector, correct_for_detection, factorial_moments, fano,
    noise_reduction, sample_photons, AnalysisOrder, DetectorSpec, MultimodeModel, PipelineOptions,
    DEFAULT_USABILITY_THRESHOLD,
};

use super::curves::StateRow;

/// SplitMix64 step: independent seeds for the points of a sweep.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub realizations: u64,
    pub detectors: [DetectorSpec; 3],
    pub bootstrap: usize,
    pub seed: u64,
    pub usability_threshold: f64,
    pub orders: Vec<AnalysisOrder>,
}

impl SimulationSettings {
    pub fn new(realizations: u64, detectors: [DetectorSpec; 3], seed: u64) -> Self {
        SimulationSettings {
            realizations,
            detectors,
            bootstrap: 200,
            seed,
            usability_threshold: DEFAULT_USABILITY_THRESHOLD,
            orders: AnalysisOrder::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOrder {
    pub order: AnalysisOrder,
    pub usable: bool,
    pub relative_error: f64,
    pub failure_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<InvariantErrors>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Monte Carlo result at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub noise: f64,
    pub modes: f64,
    pub realizations: u64,
    pub seed: u64,
    /// Noise reduction and Fano factor of the true photon numbers.
    pub photon_r12: f64,
    pub photon_fano: f64,
    /// Noise reduction from detection-corrected count moments.
    pub r12: f64,
    pub orders: Vec<McOrder>,
}

/// Sample photons, detect, reconstruct moments and estimate at every order.
pub fn simulate_point(model: &MultimodeModel, settings: &SimulationSettings, seed: u64) -> Result<McPoint> {
    let photons = sample_photons(model, settings.realizations, seed)?;
    let truth = factorial_moments(&photons, 2)?;
    let counts = apply_detector(&photons, &settings.detectors, derive_seed(seed, u64::MAX))?;
    let corrected = correct_for_detection(&factorial_moments(&counts, 2)?, &settings.detectors)?;
    let options = PipelineOptions {
        orders: settings.orders.clone(),
        bootstrap: settings.bootstrap,
        seed: derive_seed(seed, 0),
        usability_threshold: settings.usability_threshold,
        ..PipelineOptions::new(settings.detectors, model.modes)
    };
    let analysis = analyze_histogram(&counts, &options)?;
    let orders = analysis
        .orders
        .into_iter()
        .map(|o| {
            let (state, error) = match &o.estimate {
                Some(e) => match StateRow::from_invariants(&e.invariants, e.delta2_window) {
                    Ok(s) => (Some(s), o.error.clone()),
                    Err(err) => (None, Some(err.to_string())),
                },
                None => (None, o.error.clone()),
            };
            McOrder {
                order: o.order,
                usable: o.usable,
                relative_error: o.relative_error,
                failure_rate: o.failure_rate,
                errors: o.std_errors,
                state,
                error,
            }
        })
        .collect();
    Ok(McPoint {
        noise: model.noise_mean,
        modes: model.modes,
        realizations: settings.realizations,
        seed,
        photon_r12: noise_reduction(&truth, 0, 1)?,
        photon_fano: fano(&truth, 0)?,
        r12: noise_reduction(&corrected, 0, 1)?,
        orders,
    })
}

/// Monte Carlo sweep over noise levels; point `i` uses seed `derive_seed(settings.seed, i)`.
pub fn noise_sweep(template: &MultimodeModel, noise: &[f64], settings: &SimulationSettings) -> Vec<Result<McPoint>> {
    noise
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let m = MultimodeModel {
                noise_mean: n,
                ..*template
            };
            simulate_point(&m, settings, derive_seed(settings.seed, i as u64))
        })
        .collect()
}

/// Usability of every analysis order at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub realizations: u64,
    pub order: AnalysisOrder,
    pub usable: bool,
    pub relative_error: f64,
    pub failure_rate: f64,
    pub mu1: Option<f64>,
    pub mu1_err: Option<f64>,
    pub key_value: Option<f64>,
}

/// Repeats simulation and analysis for every sample size.
pub fn convergence_study(
    model: &MultimodeModel,
    sizes: &[u64],
    settings: &SimulationSettings,
) -> Result<Vec<ConvergenceRow>> {
    if sizes.is_empty() {
        return Err(Error::Config("no sample sizes given".into()));
    }
    let mut rows = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let s = SimulationSettings {
            realizations: n,
            ..settings.clone()
        };
        let p = simulate_point(model, &s, derive_seed(settings.seed, i as u64))?;
        for o in p.orders {
            let key_value = o.state.as_ref().map(|s| match o.order {
                AnalysisOrder::Second => s.mu1,
                AnalysisOrder::Fourth => s.mu2,
                AnalysisOrder::Sixth => s.mu3,
            });
            rows.push(ConvergenceRow {
                realizations: n,
                order: o.order,
                usable: o.usable,
                relative_error: o.relative_error,
                failure_rate: o.failure_rate,
                mu1: o.state.as_ref().map(|s| s.mu1),
                mu1_err: o.errors.map(|e| e.mu1),
                key_value,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of ln(error) against ln(N).
pub fn log_log_slope(sizes: &[u64], errors: &[f64]) -> Result<f64> {
    if sizes.len() != errors.len() || sizes.len() < 2 {
        return Err(Error::Config("slope needs at least two matching points".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("errors must be positive for a log-log fit", 0.0));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
