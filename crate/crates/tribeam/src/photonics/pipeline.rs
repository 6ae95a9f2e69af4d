use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InvariantErrors;
use crate::photonics::estimate::{estimate_state_from_moments, AnalysisOrder, Estimate, EstimateOptions};
use crate::photonics::histogram::PhotocountHistogram;
use crate::photonics::model::DetectorSpec;
use crate::photonics::moments::{
    correct_for_detection, factorial_moments_weighted, MomentTable, MAX_ORDER,
};
use crate::series::Index3;

/// Relative bootstrap error of the leading invariant below which an analysis
/// order counts as usable.
pub const DEFAULT_USABILITY_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub detectors: [DetectorSpec; 3],
    pub modes: f64,
    pub orders: Vec<AnalysisOrder>,
    /// Bootstrap resamples; zero disables error estimation.
    pub bootstrap: usize,
    pub seed: u64,
    pub usability_threshold: f64,
    pub estimate: EstimateOptions,
}

impl PipelineOptions {
    pub fn new(detectors: [DetectorSpec; 3], modes: f64) -> Self {
        PipelineOptions {
            detectors,
            modes,
            orders: AnalysisOrder::ALL.to_vec(),
            bootstrap: 200,
            seed: 0,
            usability_threshold: DEFAULT_USABILITY_THRESHOLD,
            estimate: EstimateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderAnalysis {
    pub order: AnalysisOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Bootstrap standard errors of the invariants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<InvariantErrors>,
    /// Fraction of bootstrap resamples on which the estimator failed.
    pub failure_rate: f64,
    /// Relative error of the invariant this order adds (μ₁, μ₂ or μ₃).
    pub relative_error: f64,
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramAnalysis {
    pub realizations: u64,
    /// Photon intensity moments per mode, detection corrected, with bootstrap errors.
    pub moments: MomentTable,
    pub orders: Vec<OrderAnalysis>,
}

/// Count factorial moments → photon moments → per-mode moments.
pub fn per_mode_moments(
    cells: &[([u32; 3], f64)],
    detectors: &[DetectorSpec; 3],
    modes: f64,
    order: usize,
) -> Result<MomentTable> {
    let counts = factorial_moments_weighted(cells.iter().copied(), order)?;
    correct_for_detection(&counts, detectors)?.reduce_per_mode(modes)
}

pub fn histogram_cells(hist: &PhotocountHistogram) -> Vec<([u32; 3], f64)> {
    let total = hist.total() as f64;
    hist.iter().map(|(c, n)| (c, n as f64 / total)).collect()
}

/// Multinomial resample of the realizations, drawn cell by cell as
/// conditional binomials. Returns normalized weights aligned with `counts`.
pub fn multinomial_weights(counts: &[u64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let mut left = total;
    let mut mass_left = total;
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        let k = if left == 0 || mass_left == 0 {
            0
        } else if c >= mass_left {
            left
        } else {
            Binomial::new(left, c as f64 / mass_left as f64).expect("probability in [0, 1]").sample(rng)
        };
        out.push(k as f64 / total as f64);
        left -= k;
        mass_left -= c;
    }
    out
}

fn key_invariant(order: AnalysisOrder, e: &Estimate) -> f64 {
    match order {
        AnalysisOrder::Second => e.invariants.mu1,
        AnalysisOrder::Fourth => e.invariants.mu2,
        AnalysisOrder::Sixth => e.invariants.mu3.unwrap_or(f64::NAN),
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Detection correction, per-mode reduction, estimation at every requested
/// order, and bootstrap errors with the usability rule.
pub fn analyze_histogram(hist: &PhotocountHistogram, options: &PipelineOptions) -> Result<HistogramAnalysis> {
    if hist.is_empty() {
        return Err(Error::Data("empty histogram".into()));
    }
    if options.orders.is_empty() {
        return Err(Error::Config("no analysis order requested".into()));
    }
    let order = options.orders.iter().map(|o| o.moments()).max().unwrap_or(2).min(MAX_ORDER);
    let cells = histogram_cells(hist);
    let mut table = per_mode_moments(&cells, &options.detectors, options.modes, order)?;

    let counts: Vec<u64> = hist.iter().map(|(_, n)| n).collect();
    let replicas: Vec<(MomentTable, Vec<Option<Estimate>>)> = (0..options.bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(b as u64 + 1);
            let w = multinomial_weights(&counts, &mut rng);
            let resampled: Vec<([u32; 3], f64)> =
                cells.iter().zip(&w).filter(|(_, &w)| w > 0.0).map(|(&(c, _), &w)| (c, w)).collect();
            let t = per_mode_moments(&resampled, &options.detectors, options.modes, order)?;
            let quick = EstimateOptions {
                residual: false,
                ..options.estimate
            };
            let est = options
                .orders
                .iter()
                .map(|&o| estimate_state_from_moments(&t, o, &quick).ok())
                .collect();
            Ok((t, est))
        })
        .collect::<Result<_>>()?;

    if !replicas.is_empty() {
        let mut errs = BTreeMap::new();
        for &k in table.entries.keys() {
            let xs: Vec<f64> = replicas.iter().filter_map(|(t, _)| t.get(k)).collect();
            errs.insert(k, if k == [0, 0, 0] as Index3 { 0.0 } else { std_dev(&xs) });
        }
        table.std_errors = Some(errs);
    }

    let mut orders = Vec::new();
    for (i, &o) in options.orders.iter().enumerate() {
        let mut opts = options.estimate;
        let ok: Vec<&Estimate> = replicas.iter().filter_map(|(_, e)| e[i].as_ref()).collect();
        let failure_rate = if replicas.is_empty() {
            0.0
        } else {
            1.0 - ok.len() as f64 / replicas.len() as f64
        };
        let pick = |f: fn(&Estimate) -> f64| std_dev(&ok.iter().map(|e| f(e)).collect::<Vec<_>>());
        let std_errors = (!ok.is_empty()).then(|| InvariantErrors {
            mu1: pick(|e| e.invariants.mu1),
            mu2: pick(|e| e.invariants.mu2),
            delta2: pick(|e| e.invariants.delta2),
            mu3: Some(pick(|e| e.invariants.mu3.unwrap_or(f64::NAN))),
        });
        if o == AnalysisOrder::Fourth {
            opts.delta2_sigma = std_errors.map(|s| s.delta2);
        }
        let (estimate, error) = match estimate_state_from_moments(&table, o, &opts) {
            Ok(mut e) => {
                if let Some(s) = std_errors {
                    e.invariants.errors = Some(s);
                }
                (Some(e), None)
            }
            Err(err) => (None, Some(err.to_string())),
        };
        let relative_error = match &estimate {
            Some(e) => {
                let spread = std_dev(&ok.iter().map(|r| key_invariant(o, r)).collect::<Vec<_>>());
                spread / key_invariant(o, e).abs()
            }
            None => f64::INFINITY,
        };
        let usable = estimate.is_some()
            && relative_error.is_finite()
            && relative_error < options.usability_threshold
            && failure_rate <= 0.05;
        orders.push(OrderAnalysis {
            order: o,
            estimate,
            error,
            std_errors,
            failure_rate,
            relative_error,
            usable,
        });
    }
    Ok(HistogramAnalysis {
        realizations: hist.total(),
        moments: table,
        orders,
    })
}
