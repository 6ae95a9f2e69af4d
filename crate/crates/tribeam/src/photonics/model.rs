use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three beams pairwise linked by multimode twin beams, plus independent
/// thermal noise on every beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultimodeModel {
    /// Effective number of modes M of every twin-beam link.
    pub modes: f64,
    /// Mean photon-pair number of one link (each beam receives two links).
    pub pair_mean: f64,
    /// Mean noise photon number per beam.
    pub noise_mean: f64,
    /// Number of thermal noise modes per beam. `None` gives noise modes the
    /// same occupancy as link modes, i.e. `modes * noise_mean / pair_mean`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_modes: Option<f64>,
    /// Alternate signal and idler roles so every beam sees the averaged detector.
    #[serde(default = "default_true")]
    pub symmetrize: bool,
}

fn default_true() -> bool {
    true
}

/// Pair level giving 0.8 correlated photons per beam.
pub const DEFAULT_PAIR_MEAN: f64 = 0.4;
/// Effective mode number of the compound beams.
pub const DEFAULT_MODES: f64 = 6.7;

impl MultimodeModel {
    pub fn new(modes: f64, pair_mean: f64, noise_mean: f64) -> Self {
        MultimodeModel {
            modes,
            pair_mean,
            noise_mean,
            noise_modes: None,
            symmetrize: true,
        }
    }

    /// 0.8 correlated photons per beam over `modes` modes with the given noise.
    pub fn standard(modes: f64, noise_mean: f64) -> Self {
        MultimodeModel::new(modes, DEFAULT_PAIR_MEAN, noise_mean)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.modes > 0.0 && self.modes.is_finite()) {
            return Err(Error::Config(format!("mode number must be positive, got {}", self.modes)));
        }
        if !(self.pair_mean >= 0.0 && self.pair_mean.is_finite()) {
            return Err(Error::Config(format!("negative pair mean {}", self.pair_mean)));
        }
        if !(self.noise_mean >= 0.0 && self.noise_mean.is_finite()) {
            return Err(Error::Config(format!("negative noise mean {}", self.noise_mean)));
        }
        if let Some(k) = self.noise_modes {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Config(format!("noise mode number must be positive, got {k}")));
            }
        }
        Ok(())
    }

    /// Mean occupation of one noise mode.
    pub fn noise_occupancy(&self) -> f64 {
        match self.noise_modes {
            Some(k) => self.noise_mean / k,
            None if self.pair_mean > 0.0 => self.pair_mean / self.modes,
            None => self.noise_mean / self.modes,
        }
    }

    /// Number of noise modes per beam.
    pub fn effective_noise_modes(&self) -> f64 {
        let u = self.noise_occupancy();
        if u > 0.0 {
            self.noise_mean / u
        } else {
            self.modes
        }
    }

    /// Mean photon number per beam.
    pub fn beam_mean(&self) -> f64 {
        2.0 * self.pair_mean + self.noise_mean
    }

    /// Per-mode link occupation κ and noise mean b.
    pub fn per_mode(&self) -> (f64, f64) {
        (self.pair_mean / self.modes, self.noise_mean / self.modes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub efficiency: f64,
    /// Mean dark counts per detection window.
    pub dark_rate: f64,
}

impl DetectorSpec {
    pub const fn new(efficiency: f64, dark_rate: f64) -> Self {
        DetectorSpec {
            efficiency,
            dark_rate,
        }
    }

    pub const fn ideal() -> Self {
        DetectorSpec::new(1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Config(format!("efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::Config(format!("negative dark-count mean {}", self.dark_rate)));
        }
        Ok(())
    }

    pub fn average(a: &DetectorSpec, b: &DetectorSpec) -> DetectorSpec {
        DetectorSpec::new(0.5 * (a.efficiency + b.efficiency), 0.5 * (a.dark_rate + b.dark_rate))
    }
}

pub const SIGNAL_DETECTOR: DetectorSpec = DetectorSpec::new(0.274, 2.8e-3);
pub const IDLER_DETECTOR: DetectorSpec = DetectorSpec::new(0.324, 3.8e-3);

/// Per-beam responses: the averaged detector everywhere when symmetrized,
/// otherwise signal, idler, signal.
pub fn beam_detectors(signal: DetectorSpec, idler: DetectorSpec, symmetrize: bool) -> [DetectorSpec; 3] {
    if symmetrize {
        [DetectorSpec::average(&signal, &idler); 3]
    } else {
        [signal, idler, signal]
    }
}
