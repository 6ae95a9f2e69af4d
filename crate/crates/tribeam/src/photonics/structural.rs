use crate::error::Result;
use crate::photonics::model::MultimodeModel;
use crate::photonics::moments::{MomentScope, MomentTable, MAX_ORDER};
use crate::series::Series3;

const LINKS: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Log factorial-moment generating function of one typical mode: three
/// geometric pair links of occupancy κ, plus `b/u` thermal noise modes of
/// occupancy `u` on every beam.
pub fn per_mode_log_gf(kappa: f64, noise: f64, occupancy: f64, order: usize) -> Series3 {
    let one = Series3::one(order);
    let mut out = Series3::zero(order);
    for [i, j] in LINKS {
        let joint = &(&one + &Series3::var(order, i)) * &(&one + &Series3::var(order, j));
        let arg = &one - &(&joint - &one).scale(kappa);
        out = &out - &arg.ln();
    }
    if noise > 0.0 {
        for j in 0..3 {
            let term = if occupancy > 0.0 {
                (&one - &Series3::var(order, j).scale(occupancy)).ln().scale(-noise / occupancy)
            } else {
                Series3::var(order, j).scale(noise)
            };
            out = &out + &term;
        }
    }
    out
}

/// Exact intensity moments of the twin-beam-plus-noise model, per beam or per mode.
pub fn structural_moments(model: &MultimodeModel, order: usize, scope: MomentScope) -> Result<MomentTable> {
    model.validate()?;
    let order = order.min(MAX_ORDER);
    let (kappa, b) = model.per_mode();
    let log_gf = per_mode_log_gf(kappa, b, model.noise_occupancy(), order);
    let scale = match scope {
        MomentScope::PerMode => 1.0,
        MomentScope::PerBeam => model.modes,
    };
    Ok(MomentTable::from_series(&log_gf.scale(scale).exp(), scope))
}

/// Beam-level noise reduction of the model:
/// [2p(1 + p/M) + 2n(1 + u)] / (2(2p + n)) for pair mean p, noise n and occupancy u.
pub fn structural_noise_reduction(model: &MultimodeModel) -> f64 {
    let (p, n, m, u) = (model.pair_mean, model.noise_mean, model.modes, model.noise_occupancy());
    let mean = 2.0 * p + n;
    if mean <= 0.0 {
        return 1.0;
    }
    (2.0 * p * (1.0 + p / m) + 2.0 * n * (1.0 + u)) / (2.0 * mean)
}
