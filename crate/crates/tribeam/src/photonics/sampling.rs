use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::photonics::histogram::PhotocountHistogram;
use crate::photonics::model::{DetectorSpec, MultimodeModel};

/// Realizations per independently seeded block.
const BLOCK: u64 = 1 << 16;
/// Histogram cells per block when thinning.
const CELL_BLOCK: usize = 512;
/// Stream offset separating detector randomness from photon sampling.
const DETECTOR_STREAM: u64 = 1 << 40;

fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Negative-binomial count with real shape `modes` and the given mean
/// (gamma-mixed Poisson; M geometric modes summed for integer M).
fn multimode_count<R: Rng>(rng: &mut R, modes: f64, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let lambda = Gamma::new(modes, mean / modes).expect("validated shape").sample(rng);
    poisson(rng, lambda)
}

fn poisson<R: Rng>(rng: &mut R, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u32
}

/// True photon numbers of `n` realizations of the three-beam model.
pub fn sample_photons(model: &MultimodeModel, n: u64, seed: u64) -> Result<PhotocountHistogram> {
    model.validate()?;
    if n == 0 {
        return Err(Error::Config("number of realizations must be at least 1".into()));
    }
    let noise_modes = model.effective_noise_modes();
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<PhotocountHistogram> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let size = BLOCK.min(n - b * BLOCK);
            let mut hist = PhotocountHistogram::new();
            for _ in 0..size {
                let l01 = multimode_count(&mut rng, model.modes, model.pair_mean);
                let l12 = multimode_count(&mut rng, model.modes, model.pair_mean);
                let l20 = multimode_count(&mut rng, model.modes, model.pair_mean);
                let mut cell = [l01 + l20, l01 + l12, l12 + l20];
                for c in cell.iter_mut() {
                    *c += multimode_count(&mut rng, noise_modes, model.noise_mean);
                }
                hist.add(cell, 1);
            }
            hist
        })
        .collect();
    let mut out = PhotocountHistogram::new();
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

/// Binomial thinning with per-beam efficiency plus Poisson dark counts.
pub fn apply_detector(
    photons: &PhotocountHistogram,
    specs: &[DetectorSpec; 3],
    seed: u64,
) -> Result<PhotocountHistogram> {
    for s in specs {
        s.validate()?;
    }
    let cells: Vec<([u32; 3], u64)> = photons.iter().collect();
    let parts: Vec<PhotocountHistogram> = cells
        .par_chunks(CELL_BLOCK)
        .enumerate()
        .map(|(b, chunk)| {
            let mut rng = block_rng(seed, DETECTOR_STREAM + b as u64);
            let mut hist = PhotocountHistogram::new();
            for &(cell, count) in chunk {
                for _ in 0..count {
                    let mut out = [0u32; 3];
                    for j in 0..3 {
                        let eta = specs[j].efficiency;
                        let kept = if cell[j] == 0 || eta <= 0.0 {
                            0
                        } else if eta >= 1.0 {
                            cell[j]
                        } else {
                            Binomial::new(cell[j] as u64, eta)
                                .expect("validated efficiency")
                                .sample(&mut rng) as u32
                        };
                        out[j] = kept + poisson(&mut rng, specs[j].dark_rate);
                    }
                    hist.add(out, 1);
                }
            }
            hist
        })
        .collect();
    let mut out = PhotocountHistogram::new();
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

/// Photon sampling followed by detection, with independent derived seeds.
pub fn simulate_counts(
    model: &MultimodeModel,
    specs: &[DetectorSpec; 3],
    n: u64,
    seed: u64,
) -> Result<PhotocountHistogram> {
    let photons = sample_photons(model, n, seed)?;
    apply_detector(&photons, specs, seed.wrapping_add(0x9E37_79B9_7F4A_7C15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_is_vacuum() {
        let h = sample_photons(&MultimodeModel::new(3.0, 0.0, 0.0), 1000, 1).unwrap();
        assert_eq!(h.get([0, 0, 0]), 1000);
    }

    #[test]
    fn deterministic_across_calls() {
        let m = MultimodeModel::standard(6.7, 1.0);
        let a = sample_photons(&m, 200_000, 42).unwrap();
        let b = sample_photons(&m, 200_000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_photons(&m, 200_000, 43).unwrap());
    }

    #[test]
    fn detector_limits() {
        let m = MultimodeModel::standard(2.0, 1.0);
        let h = sample_photons(&m, 5000, 3).unwrap();
        assert_eq!(apply_detector(&h, &[DetectorSpec::ideal(); 3], 9).unwrap(), h);
        let dark = apply_detector(&h, &[DetectorSpec::new(0.0, 0.0); 3], 9).unwrap();
        assert_eq!(dark.get([0, 0, 0]), 5000);
        assert!(apply_detector(&h, &[DetectorSpec::new(1.5, 0.0); 3], 9).is_err());
    }

    #[test]
    fn thinned_poisson_mean() {
        // Poisson(1) photons through η = 0.274, d = 2.8e-3 gives mean 0.2768
        let mut rng = block_rng(5, 0);
        let mut h = PhotocountHistogram::new();
        for _ in 0..400_000 {
            h.add([poisson(&mut rng, 1.0), 0, 0], 1);
        }
        let out = apply_detector(&h, &[DetectorSpec::new(0.274, 2.8e-3); 3], 6).unwrap();
        let sigma = (0.2768f64 / 400_000.0).sqrt();
        assert!((out.mean(0) - 0.2768).abs() < 4.0 * sigma, "{}", out.mean(0));
    }
}
