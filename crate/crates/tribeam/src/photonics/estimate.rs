use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::model::{
    delta2_roots_from_mu3, invariants_from_standard_form, purity3, purity3_extremes, seralian_bounds, standard_form,
    StandardFormParams, StateInvariants, DEFAULT_TOLERANCE,
};
use crate::photonics::moments::{MomentScope, MomentTable};
use crate::photonics::structural::per_mode_log_gf;
use crate::photonics::wick::moments_from_cm;
use crate::series::{indices, Index3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum AnalysisOrder {
    Second,
    Fourth,
    Sixth,
}

impl AnalysisOrder {
    pub const ALL: [AnalysisOrder; 3] = [AnalysisOrder::Second, AnalysisOrder::Fourth, AnalysisOrder::Sixth];

    /// Highest total moment order used.
    pub fn moments(self) -> usize {
        match self {
            AnalysisOrder::Second => 2,
            AnalysisOrder::Fourth => 4,
            AnalysisOrder::Sixth => 6,
        }
    }

    pub fn from_moments(k: usize) -> Result<Self> {
        match k {
            2 => Ok(AnalysisOrder::Second),
            4 => Ok(AnalysisOrder::Fourth),
            6 => Ok(AnalysisOrder::Sixth),
            _ => Err(Error::Config(format!("analysis order must be 2, 4 or 6, got {k}"))),
        }
    }
}

impl From<AnalysisOrder> for u8 {
    fn from(o: AnalysisOrder) -> u8 {
        o.moments() as u8
    }
}

impl TryFrom<u8> for AnalysisOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        AnalysisOrder::from_moments(v as usize)
    }
}

impl std::fmt::Display for AnalysisOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.moments())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order6Method {
    /// Purities read off the moment generating function directly.
    Exact,
    /// Levenberg–Marquardt matching of (a, c₊, c₋) against Gaussian moments.
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub order6: Order6Method,
    /// Residual norm above which least-squares matching fails.
    pub fit_tolerance: f64,
    /// Clamp unphysical purities onto the domain (with a warning) instead of failing.
    pub clamp: bool,
    /// Standard error of the surrogate Δ₂ point, widening its interval.
    pub delta2_sigma: Option<f64>,
    /// Also report the Gaussian moment mismatch of the final estimate.
    pub residual: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            order6: Order6Method::Exact,
            fit_tolerance: 1e-6,
            clamp: true,
            delta2_sigma: None,
            residual: true,
        }
    }
}

/// Twin-beam-plus-noise parameters fitted per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralFit {
    pub kappa: f64,
    pub noise: f64,
}

/// Δ₂ narrowed by fourth-order three-beam moments. Approximate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta2Surrogate {
    pub point: f64,
    pub interval: (f64, f64),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub order: AnalysisOrder,
    /// μ₁, μ₂, Δ₂ and μ₃; Δ₂ is the surrogate point at fourth order.
    pub invariants: StateInvariants,
    pub delta2_window: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<Delta2Surrogate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralFit>,
    /// Relative mismatch between the table and the Gaussian moments of the estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub warnings: Vec<Warning>,
}

/// Purity of the reduced state on `beams` from normally ordered moments up to
/// order 2|beams|: det σ_S equals G⁻² restricted to per-variable degree two
/// and evaluated at t_j = −2.
pub fn purity_from_moments(t: &MomentTable, beams: &[usize]) -> Result<f64> {
    if beams.is_empty() || beams.len() > 3 || beams.iter().any(|&b| b > 2) {
        return Err(Error::Config(format!("invalid beam set {beams:?}")));
    }
    let need = 2 * beams.len();
    t.require_complete(need)?;
    let mut keep = [false; 3];
    let mut at = [0.0; 3];
    for &b in beams {
        keep[b] = true;
        at[b] = -2.0;
    }
    let det = t.truncated(need).to_series().restrict(keep).powf(-2.0).eval_capped(at, 2);
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::domain("non-positive reduced determinant", det));
    }
    Ok(det.powf(-0.5))
}

fn push_clamp(warnings: &mut Vec<Warning>, what: &str, margin: f64) {
    if margin.abs() > DEFAULT_TOLERANCE {
        warnings.push(Warning::Clamped {
            what: what.into(),
            margin,
        });
    }
}

/// Moves (μ₁, μ₂) onto the physical domain, or fails when clamping is off.
fn clamp_purities(mu1: f64, mu2: f64, clamp: bool, warnings: &mut Vec<Warning>) -> Result<(f64, f64)> {
    if !(mu1.is_finite() && mu2.is_finite()) || mu1 <= 0.0 {
        return Err(Error::domain("purity estimate outside (0, 1]", mu1));
    }
    let m1 = mu1.min(1.0);
    let m2 = mu2.clamp(m1 * m1, m1);
    if !clamp && ((m1 - mu1).abs() > DEFAULT_TOLERANCE || (m2 - mu2).abs() > DEFAULT_TOLERANCE * m1) {
        return Err(Error::domain("estimated purities outside the physical domain", (m1 - mu1) + (m2 - mu2)));
    }
    push_clamp(warnings, "mu1", m1 - mu1);
    push_clamp(warnings, "mu2", m2 - mu2);
    Ok((m1, m2))
}

/// Δ₂ from μ₃, clamped to the extreme of μ₃ when it is out of reach. When two
/// Δ₂ reproduce μ₃, the one whose Gaussian moments best match `t` is kept.
fn delta2_clamped(
    t: &MomentTable,
    mu1: f64,
    mu2: f64,
    mu3: f64,
    clamp: bool,
    warnings: &mut Vec<Warning>,
) -> Result<(f64, f64)> {
    match delta2_roots_from_mu3(mu1, mu2, mu3) {
        Ok(roots) if roots.len() == 1 => Ok((roots[0], mu3)),
        Ok(roots) => {
            let mut best = (roots[0], f64::INFINITY);
            for d in roots {
                let r = gaussian_residual(t, &StateInvariants::new(mu1, mu2, d), 6).unwrap_or(f64::INFINITY);
                if r < best.1 {
                    best = (d, r);
                }
            }
            Ok((best.0, mu3))
        }
        Err(Error::Range { lo, hi, .. }) if clamp => {
            let ((d_min, p_min), (d_max, p_max)) = purity3_extremes(mu1, mu2)?;
            let target = mu3.clamp(lo, hi);
            let (d, at) = if (p_min - target).abs() <= (p_max - target).abs() { (d_min, p_min) } else { (d_max, p_max) };
            push_clamp(warnings, "mu3", target - mu3);
            let (wlo, whi) = seralian_bounds(mu1, mu2)?;
            if d <= wlo || d >= whi {
                warnings.push(Warning::Boundary {
                    what: "delta2 at the seralian window edge".into(),
                });
            }
            Ok((d, at))
        }
        Err(e) => Err(e),
    }
}

fn relative_residual(t: &MomentTable, model: &MomentTable, keys: &[Index3]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in keys {
        let (a, b) = (t.get(*k).unwrap_or(0.0), model.get(*k).unwrap_or(0.0));
        num += (a - b) * (a - b);
        den += a * a;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn gaussian_residual(t: &MomentTable, inv: &StateInvariants, order: usize) -> Result<f64> {
    let model = moments_from_cm(&standard_form(inv)?, order)?;
    let keys: Vec<Index3> = indices(order).into_iter().skip(1).collect();
    Ok(relative_residual(t, &model, &keys))
}

/// Fits the per-mode link occupancy κ and noise b to first and second moments.
pub fn fit_structural(t: &MomentTable, warnings: &mut Vec<Warning>) -> Result<StructuralFit> {
    t.require_complete(2)?;
    let s = t.symmetrized();
    let w = s.require([1, 0, 0])?;
    let cov = s.require([1, 1, 0])? - w * w;
    let kappa = if cov > 0.0 { 0.5 * ((1.0 + 4.0 * cov).sqrt() - 1.0) } else { 0.0 };
    if cov < 0.0 {
        push_clamp(warnings, "pair covariance", -cov);
    }
    let noise = w - 2.0 * kappa;
    if noise < 0.0 {
        push_clamp(warnings, "noise mean", -noise);
    }
    Ok(StructuralFit {
        kappa,
        noise: noise.max(0.0),
    })
}

fn estimate_second(t: &MomentTable, options: &EstimateOptions) -> Result<Estimate> {
    let mut warnings = Vec::new();
    let fit = fit_structural(t, &mut warnings)?;
    let model = MomentTable::from_series(
        &per_mode_log_gf(fit.kappa, fit.noise, fit.kappa, 6).exp(),
        MomentScope::PerMode,
    );
    let mu1 = purity_from_moments(&model, &[0])?;
    let mu2 = purity_from_moments(&model, &[0, 1])?;
    let mu3 = purity_from_moments(&model, &[0, 1, 2])?;
    let (mu1, mu2) = clamp_purities(mu1, mu2, options.clamp, &mut warnings)?;
    let window = seralian_bounds(mu1, mu2)?;
    let (delta2, mu3) = delta2_clamped(&model, mu1, mu2, mu3, options.clamp, &mut warnings)?;
    Ok(Estimate {
        order: AnalysisOrder::Second,
        invariants: StateInvariants::new(mu1, mu2, delta2).with_mu3(mu3),
        delta2_window: window,
        surrogate: None,
        structural: Some(fit),
        residual: None,
        warnings,
    })
}

const SURROGATE_KEYS: [Index3; 4] = [[1, 1, 1], [2, 1, 1], [1, 2, 1], [1, 1, 2]];

fn surrogate_residual(t: &MomentTable, mu1: f64, mu2: f64, d: f64) -> Result<f64> {
    let model = moments_from_cm(&standard_form(&StateInvariants::new(mu1, mu2, d))?, 4)?;
    let mut sum = 0.0;
    for k in SURROGATE_KEYS {
        let (a, b) = (t.require(k)?, model.require(k)?);
        let r = if a.abs() > 1e-300 { (b - a) / a } else { b - a };
        sum += r * r;
    }
    Ok(sum.sqrt())
}

/// Minimizes the surrogate residual over the window: grid scan, then golden section.
fn surrogate_point(t: &MomentTable, mu1: f64, mu2: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if hi - lo <= 1e-12 {
        return Ok((lo, surrogate_residual(t, mu1, mu2, lo)?));
    }
    const GRID: usize = 24;
    let at = |i: usize| lo + (hi - lo) * i as f64 / GRID as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..=GRID {
        let r = surrogate_residual(t, mu1, mu2, at(i))?;
        if r < best.1 {
            best = (i, r);
        }
    }
    let (mut a, mut b) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(GRID)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = surrogate_residual(t, mu1, mu2, x1)?;
    let mut f2 = surrogate_residual(t, mu1, mu2, x2)?;
    while b - a > 1e-10 * (1.0 + hi.abs()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = surrogate_residual(t, mu1, mu2, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = surrogate_residual(t, mu1, mu2, x2)?;
        }
    }
    let x = 0.5 * (a + b);
    let r = surrogate_residual(t, mu1, mu2, x)?;
    Ok(if r <= best.1 { (x, r) } else { (at(best.0), best.1) })
}

fn estimate_fourth(t: &MomentTable, options: &EstimateOptions) -> Result<Estimate> {
    let mut warnings = Vec::new();
    let s = t.symmetrized();
    let mu1 = purity_from_moments(&s, &[0])?;
    let mu2 = purity_from_moments(&s, &[0, 1])?;
    let (mu1, mu2) = clamp_purities(mu1, mu2, options.clamp, &mut warnings)?;
    let (lo, hi) = seralian_bounds(mu1, mu2)?;
    let (point, residual) = surrogate_point(&s, mu1, mu2, lo, hi)?;
    let sigma = options.delta2_sigma.unwrap_or(0.0);
    let interval = ((point - 2.0 * sigma).max(lo), hi);
    let mu3 = purity3(&StateInvariants::new(mu1, mu2, point))?;
    Ok(Estimate {
        order: AnalysisOrder::Fourth,
        invariants: StateInvariants::new(mu1, mu2, point).with_mu3(mu3),
        delta2_window: (lo, hi),
        surrogate: Some(Delta2Surrogate {
            point,
            interval,
            residual,
        }),
        structural: None,
        residual: None,
        warnings,
    })
}

fn estimate_sixth_exact(t: &MomentTable, options: &EstimateOptions) -> Result<Estimate> {
    let mut warnings = Vec::new();
    let s = t.symmetrized();
    let mu1 = purity_from_moments(&s, &[0])?;
    let mu2 = purity_from_moments(&s, &[0, 1])?;
    let mu3 = purity_from_moments(&s, &[0, 1, 2])?;
    let (mu1, mu2) = clamp_purities(mu1, mu2, options.clamp, &mut warnings)?;
    let window = seralian_bounds(mu1, mu2)?;
    let (delta2, mu3) = delta2_clamped(&s, mu1, mu2, mu3, options.clamp, &mut warnings)?;
    let invariants = StateInvariants::new(mu1, mu2, delta2).with_mu3(mu3);
    let residual = if options.residual { Some(gaussian_residual(&s, &invariants, 6)?) } else { None };
    Ok(Estimate {
        order: AnalysisOrder::Sixth,
        invariants,
        delta2_window: window,
        surrogate: None,
        structural: None,
        residual,
        warnings,
    })
}

fn ls_residuals(t: &MomentTable, p: &StandardFormParams, keys: &[Index3]) -> Result<DVector<f64>> {
    let m = moments_from_cm(p, 6)?;
    Ok(DVector::from_iterator(
        keys.len(),
        keys.iter().map(|k| {
            let a = t.get(*k).unwrap_or(0.0);
            (m.get(*k).unwrap_or(0.0) - a) / (1.0 + a.abs())
        }),
    ))
}

/// Levenberg–Marquardt fit of (a, c₊, c₋) to every moment up to order six.
pub fn fit_standard_form(t: &MomentTable, start: StandardFormParams) -> Result<(StandardFormParams, f64)> {
    t.require_complete(6)?;
    let keys: Vec<Index3> = indices(6).into_iter().skip(1).collect();
    let mut x = [start.a, start.c_plus, start.c_minus];
    let params = |x: &[f64; 3]| StandardFormParams::new(x[0], x[1], x[2]);
    let mut r = ls_residuals(t, &params(&x), &keys)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jac = DMatrix::zeros(keys.len(), 3);
        for i in 0..3 {
            let h = 1e-7 * x[i].abs().max(1e-3);
            let mut xp = x;
            xp[i] += h;
            let mut xm = x;
            xm[i] -= h;
            let d = (ls_residuals(t, &params(&xp), &keys)? - ls_residuals(t, &params(&xm), &keys)?) / (2.0 * h);
            jac.set_column(i, &d);
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let xn = [x[0] + step[0], x[1] + step[1], x[2] + step[2]];
            let rn = match ls_residuals(t, &params(&xn), &keys) {
                Ok(rn) if params(&xn).is_physical(1e-12) => rn,
                _ => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let cn = rn.norm_squared();
            if cn < cost {
                let small = (cost - cn) <= 1e-30 + 1e-15 * cost;
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || cost < 1e-30 {
            break;
        }
    }
    Ok((params(&x), cost.sqrt()))
}

fn estimate_sixth_ls(t: &MomentTable, options: &EstimateOptions) -> Result<Estimate> {
    let s = t.symmetrized();
    let start = match estimate_sixth_exact(&s, &EstimateOptions { residual: false, ..*options }) {
        Ok(e) => standard_form(&e.invariants)?,
        Err(_) => {
            let w = s.require([1, 0, 0])?;
            StandardFormParams::new(1.0 + 2.0 * w, 0.0, 0.0)
        }
    };
    let (p, residual) = fit_standard_form(&s, start)?;
    if residual > options.fit_tolerance {
        return Err(Error::Fit {
            reason: "moment matching did not reach the tolerance".into(),
            residual,
        });
    }
    let invariants = invariants_from_standard_form(&p)?;
    let window = seralian_bounds(invariants.mu1, invariants.mu2)?;
    Ok(Estimate {
        order: AnalysisOrder::Sixth,
        invariants,
        delta2_window: window,
        surrogate: None,
        structural: None,
        residual: Some(residual),
        warnings: Vec::new(),
    })
}

/// State invariants from per-mode intensity moments at the requested analysis order.
pub fn estimate_state_from_moments(
    t: &MomentTable,
    order: AnalysisOrder,
    options: &EstimateOptions,
) -> Result<Estimate> {
    if t.scope != MomentScope::PerMode {
        return Err(Error::Data("state estimation needs a per-mode moment table".into()));
    }
    t.require_complete(order.moments())?;
    match order {
        AnalysisOrder::Second => estimate_second(t, options),
        AnalysisOrder::Fourth => estimate_fourth(t, options),
        AnalysisOrder::Sixth => match options.order6 {
            Order6Method::Exact => estimate_sixth_exact(t, options),
            Order6Method::LeastSquares => estimate_sixth_ls(t, options),
        },
    }
}
