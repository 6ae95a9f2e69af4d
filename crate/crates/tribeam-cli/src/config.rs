use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tribeam::analysis::{linspace, GridAxes, GridSpec, SimulationSettings};
use tribeam::photonics::{
    beam_detectors, AnalysisOrder, DetectorSpec, MultimodeModel, DEFAULT_USABILITY_THRESHOLD,
    IDLER_DETECTOR, DEFAULT_MODES, DEFAULT_PAIR_MEAN, SIGNAL_DETECTOR,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub signal_efficiency: f64,
    pub signal_dark: f64,
    pub idler_efficiency: f64,
    pub idler_dark: f64,
    /// Give every beam the averaged response.
    pub symmetrize: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            signal_efficiency: SIGNAL_DETECTOR.efficiency,
            signal_dark: SIGNAL_DETECTOR.dark_rate,
            idler_efficiency: IDLER_DETECTOR.efficiency,
            idler_dark: IDLER_DETECTOR.dark_rate,
            symmetrize: true,
        }
    }
}

impl DetectorConfig {
    pub fn specs(&self) -> [DetectorSpec; 3] {
        beam_detectors(
            DetectorSpec::new(self.signal_efficiency, self.signal_dark),
            DetectorSpec::new(self.idler_efficiency, self.idler_dark),
            self.symmetrize,
        )
    }

    pub fn ideal() -> Self {
        DetectorConfig {
            signal_efficiency: 1.0,
            signal_dark: 0.0,
            idler_efficiency: 1.0,
            idler_dark: 0.0,
            symmetrize: true,
        }
    }
}

/// Settings shared by `sweep`, `convergence`, `simulate` and `reconstruct`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// Mean pair number of each twin-beam link.
    pub pair_mean: f64,
    /// Effective mode numbers; one set of curves per value.
    pub modes: Vec<f64>,
    /// Thermal noise modes per beam; derived from the link occupancy when absent.
    pub noise_modes: Option<f64>,
    /// Noise grid of the model curves.
    pub noise: Vec<f64>,
    /// Noise points of the Monte Carlo sweep; empty skips it.
    pub mc_noise: Vec<f64>,
    pub realizations: u64,
    pub bootstrap: usize,
    pub orders: Vec<u8>,
    pub usability_threshold: f64,
    /// Sample sizes of the convergence study.
    pub sizes: Vec<u64>,
    /// Noise level of the convergence study.
    pub convergence_noise: f64,
    /// Points per axis of the region maps.
    pub grid: usize,
    pub purity_mu1: [f64; 2],
    pub purity_mu2: [f64; 2],
    /// Extent of the rotated axes (μ₁+μ₂)/2 and (μ₁−μ₂)/2.
    pub rotated_u: [f64; 2],
    pub rotated_v: [f64; 2],
    /// Upper end of the threshold search.
    pub max_noise: f64,
    pub detectors: DetectorConfig,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 1,
            pair_mean: DEFAULT_PAIR_MEAN,
            modes: vec![DEFAULT_MODES, 40.0],
            noise_modes: None,
            noise: linspace(0.0, 6.0, 61),
            mc_noise: vec![0.0, 1.0, 2.0, 3.0],
            realizations: 1_000_000,
            bootstrap: 200,
            orders: vec![2, 4, 6],
            usability_threshold: DEFAULT_USABILITY_THRESHOLD,
            sizes: vec![10_000, 100_000, 1_000_000],
            convergence_noise: 1.0,
            grid: 200,
            purity_mu1: [0.0, 1.0],
            purity_mu2: [0.0, 1.0],
            rotated_u: [0.0, 1.0],
            rotated_v: [0.0, 0.25],
            max_noise: 10.0,
            detectors: DetectorConfig::default(),
            out: None,
        }
    }
}

pub fn parse_order(s: &str) -> Result<Vec<AnalysisOrder>> {
    match s {
        "all" => Ok(AnalysisOrder::ALL.to_vec()),
        _ => Ok(vec![order_from_u8(s.parse().with_context(|| format!("bad order {s:?}"))?)?]),
    }
}

fn order_from_u8(k: u8) -> Result<AnalysisOrder> {
    AnalysisOrder::from_moments(k as usize).with_context(|| format!("analysis order must be 2, 4 or 6, got {k}"))
}

impl SweepConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: SweepConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => SweepConfig::default(),
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            bail!("config: modes must not be empty");
        }
        if self.noise.is_empty() {
            bail!("config: noise grid must not be empty");
        }
        if self.realizations < 1 {
            bail!("config: realizations must be at least 1");
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 1) {
            bail!("config: sample sizes must be non-empty and at least 1");
        }
        if self.grid < 2 {
            bail!("config: grid needs at least 2 points per axis");
        }
        self.analysis_orders()?;
        for m in &self.modes {
            self.model(*m, 0.0).validate()?;
        }
        for d in self.detectors.specs() {
            d.validate()?;
        }
        Ok(())
    }

    pub fn analysis_orders(&self) -> Result<Vec<AnalysisOrder>> {
        if self.orders.is_empty() {
            bail!("config: orders must not be empty");
        }
        let mut out: Vec<AnalysisOrder> = self.orders.iter().map(|&k| order_from_u8(k)).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn model(&self, modes: f64, noise: f64) -> MultimodeModel {
        MultimodeModel {
            noise_modes: self.noise_modes,
            symmetrize: self.detectors.symmetrize,
            ..MultimodeModel::new(modes, self.pair_mean, noise)
        }
    }

    pub fn settings(&self) -> Result<SimulationSettings> {
        Ok(SimulationSettings {
            bootstrap: self.bootstrap,
            usability_threshold: self.usability_threshold,
            orders: self.analysis_orders()?,
            ..SimulationSettings::new(self.realizations, self.detectors.specs(), self.seed)
        })
    }

    pub fn purity_grid(&self) -> GridSpec {
        GridSpec {
            axes: GridAxes::Purities,
            x_range: (self.purity_mu1[0], self.purity_mu1[1]),
            y_range: (self.purity_mu2[0], self.purity_mu2[1]),
            points: self.grid,
        }
    }

    pub fn rotated_grid(&self) -> GridSpec {
        GridSpec {
            axes: GridAxes::Rotated,
            x_range: (self.rotated_u[0], self.rotated_u[1]),
            y_range: (self.rotated_v[0], self.rotated_v[1]),
            points: self.grid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: SweepConfig = toml::from_str("seed = 9\nmodes = [40.0]\n[detectors]\nsymmetrize = false\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.modes, vec![40.0]);
        assert!(!cfg.detectors.symmetrize);
        assert_eq!(cfg.detectors.signal_efficiency, SIGNAL_DETECTOR.efficiency);
        assert_eq!(cfg.grid, 200);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(toml::from_str::<SweepConfig>("sead = 9\n").is_err());
    }

    #[test]
    fn order_flag() {
        assert_eq!(parse_order("all").unwrap().len(), 3);
        assert_eq!(parse_order("4").unwrap(), vec![AnalysisOrder::Fourth]);
        assert!(parse_order("3").is_err());
    }
}
