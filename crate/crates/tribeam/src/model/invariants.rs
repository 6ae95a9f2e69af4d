use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for physicality checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Square-root arguments down to `-RADICAND_TOLERANCE * scale` are clamped to zero.
pub const RADICAND_TOLERANCE: f64 = 1e-12;
/// Absolute accuracy of the Δ₂ bisection.
pub const BISECTION_TOLERANCE: f64 = 1e-12;

/// Standard errors attached to an experimental estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InvariantErrors {
    pub mu1: f64,
    pub mu2: f64,
    pub delta2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu3: Option<f64>,
}

/// Universal invariants of a symmetric three-beam Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateInvariants {
    pub mu1: f64,
    pub mu2: f64,
    pub delta2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<InvariantErrors>,
}

impl StateInvariants {
    pub fn new(mu1: f64, mu2: f64, delta2: f64) -> Self {
        StateInvariants {
            mu1,
            mu2,
            delta2,
            mu3: None,
            errors: None,
        }
    }

    pub fn with_mu3(mut self, mu3: f64) -> Self {
        self.mu3 = Some(mu3);
        self
    }

    pub fn with_errors(mut self, errors: InvariantErrors) -> Self {
        self.errors = Some(errors);
        self
    }

    /// Fills `mu3` from the closed form if absent.
    pub fn completed(self) -> Result<Self> {
        match self.mu3 {
            Some(_) => Ok(self),
            None => Ok(self.with_mu3(purity3(&self)?)),
        }
    }
}

/// Standard-form entries: α = diag(a, a), γ = diag(c₊, c₋).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardFormParams {
    pub a: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl StandardFormParams {
    pub fn new(a: f64, c_plus: f64, c_minus: f64) -> Self {
        StandardFormParams { a, c_plus, c_minus }
    }

    pub fn vacuum() -> Self {
        StandardFormParams::new(1.0, 0.0, 0.0)
    }

    /// Thermal product state with mean photon number `n` per beam.
    pub fn thermal(n: f64) -> Self {
        StandardFormParams::new(1.0 + 2.0 * n, 0.0, 0.0)
    }

    /// Symplectic eigenvalues from the block structure of the fully symmetric CM:
    /// the symmetric combination α + 2γ and the doubly degenerate α − γ.
    pub fn symplectic_closed_form(&self) -> [f64; 3] {
        let (a, cp, cm) = (self.a, self.c_plus, self.c_minus);
        let sym = ((a + 2.0 * cp) * (a + 2.0 * cm)).max(0.0).sqrt();
        let anti = ((a - cp) * (a - cm)).max(0.0).sqrt();
        let mut v = [sym, anti, anti];
        v.sort_by(f64::total_cmp);
        v
    }

    /// Det σ₃ from the block eigenstructure.
    pub fn determinant(&self) -> f64 {
        let (a, cp, cm) = (self.a, self.c_plus, self.c_minus);
        let anti = (a - cp) * (a - cm);
        (a + 2.0 * cp) * (a + 2.0 * cm) * anti * anti
    }

    /// Minimum symplectic eigenvalue at least `1 - tol` and positive-definite blocks.
    pub fn is_physical(&self, tol: f64) -> bool {
        let (a, cp, cm) = (self.a, self.c_plus, self.c_minus);
        a >= 1.0 - tol
            && cm <= cp
            && a - cp > 0.0
            && a + 2.0 * cm > 0.0
            && self.symplectic_closed_form()[0] >= 1.0 - tol
    }
}

/// Clamps small negative square-root arguments produced by cancellation.
pub(crate) fn clamp_radicand(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    let tol = RADICAND_TOLERANCE * scale.abs().max(1.0);
    if value >= -tol {
        Ok(0.0)
    } else {
        Err(Error::domain(format!("negative square-root argument in {what}"), value))
    }
}

/// Validates 0 < μ₁ ≤ 1 and μ₁² ≤ μ₂ ≤ μ₁ with relative tolerance.
pub fn check_purities(mu1: f64, mu2: f64) -> Result<()> {
    check_purities_with(mu1, mu2, DEFAULT_TOLERANCE)
}

pub fn check_purities_with(mu1: f64, mu2: f64, tol: f64) -> Result<()> {
    if !mu1.is_finite() || !mu2.is_finite() {
        return Err(Error::domain("non-finite purity", f64::NAN));
    }
    if mu1 <= 0.0 || mu1 > 1.0 + tol {
        let margin = if mu1 <= 0.0 { mu1 } else { 1.0 - mu1 };
        return Err(Error::domain("mu1 must lie in (0, 1]", margin));
    }
    if mu2 > mu1 * (1.0 + tol) {
        return Err(Error::domain("mu2 exceeds mu1", mu1 - mu2));
    }
    if mu2 < mu1 * mu1 * (1.0 - tol) {
        return Err(Error::domain("mu2 below mu1^2", mu2 - mu1 * mu1));
    }
    Ok(())
}

/// Branch switch of the lower Δ₂ bound, μ₂ = 4μ₁²/(3 + μ₁²).
pub fn bound_branch_switch(mu1: f64) -> f64 {
    4.0 * mu1 * mu1 / (3.0 + mu1 * mu1)
}

/// Admissible Δ₂ window `(F(μ₁, μ₂), min{4/μ₁² − 2/μ₂, 1 + 1/μ₂²})`.
pub fn seralian_bounds(mu1: f64, mu2: f64) -> Result<(f64, f64)> {
    check_purities(mu1, mu2)?;
    let m1s = mu1 * mu1;
    let lo = if mu2 <= bound_branch_switch(mu1) {
        2.0 / mu2
    } else {
        let t = (m1s + 3.0) * (m1s + 3.0) / (m1s * m1s);
        let omega = clamp_radicand(t - 12.0 / (mu2 * mu2), t, "seralian lower bound")?.sqrt();
        (2.0 + 6.0 / m1s - omega) / 3.0
    };
    let hi = (4.0 / m1s - 2.0 / mu2).min(1.0 + 1.0 / (mu2 * mu2));
    if lo > hi {
        // The window closes on the domain edges; cancellation can invert it by a few ulps.
        if lo - hi <= DEFAULT_TOLERANCE * hi.abs().max(1.0) {
            return Ok((lo, lo));
        }
        return Err(Error::domain("empty seralian window", hi - lo));
    }
    Ok((lo, hi))
}

fn check_window(inv: &StateInvariants, tol: f64) -> Result<(f64, f64)> {
    check_purities_with(inv.mu1, inv.mu2, tol)?;
    let (lo, hi) = seralian_bounds(inv.mu1.min(1.0), inv.mu2.clamp(inv.mu1 * inv.mu1, inv.mu1))?;
    let d = inv.delta2;
    if !d.is_finite() {
        return Err(Error::domain("non-finite delta2", f64::NAN));
    }
    if d < lo - tol * lo.abs() {
        return Err(Error::domain("delta2 below the admissible window", d - lo));
    }
    if d > hi + tol * hi.abs() {
        return Err(Error::domain("delta2 above the admissible window", hi - d));
    }
    Ok((lo, hi))
}

/// Standard-form entries from invariants.
pub fn standard_form(inv: &StateInvariants) -> Result<StandardFormParams> {
    check_window(inv, DEFAULT_TOLERANCE)?;
    let (mu1, mu2, d) = (inv.mu1, inv.mu2, inv.delta2);
    let m1s = mu1 * mu1;
    let r1 = m1s * (d * d - 4.0 / (mu2 * mu2));
    let r1 = clamp_radicand(r1, m1s * d * d, "c± common term")?;
    let s = 0.25 * r1.sqrt();
    let u = 4.0 * m1s - m1s * m1s * d;
    let lead = u * u / (m1s * m1s * m1s);
    let r2 = clamp_radicand(lead - 4.0 * m1s / (mu2 * mu2), lead, "epsilon")?;
    let eps = 0.25 * r2.sqrt();
    Ok(StandardFormParams::new(1.0 / mu1, s + eps, s - eps))
}

/// Invariants (μ₁, μ₂, Δ₂, μ₃) of a standard-form CM.
pub fn invariants_from_standard_form(p: &StandardFormParams) -> Result<StateInvariants> {
    let (a, cp, cm) = (p.a, p.c_plus, p.c_minus);
    if !(a.is_finite() && cp.is_finite() && cm.is_finite()) {
        return Err(Error::domain("non-finite standard-form entry", f64::NAN));
    }
    if a < 1.0 - DEFAULT_TOLERANCE {
        return Err(Error::domain("a below 1", a - 1.0));
    }
    let two = (a * a - cp * cp) * (a * a - cm * cm);
    if two <= 0.0 {
        return Err(Error::domain("two-beam determinant not positive", two));
    }
    let det = p.determinant();
    if det <= 0.0 {
        return Err(Error::domain("three-beam determinant not positive", det));
    }
    Ok(StateInvariants {
        mu1: 1.0 / a,
        mu2: two.powf(-0.5),
        delta2: 2.0 * a * a + 2.0 * cp * cm,
        mu3: Some(det.powf(-0.5)),
        errors: None,
    })
}

/// Three-beam purity from (μ₁, μ₂, Δ₂).
pub fn purity3(inv: &StateInvariants) -> Result<f64> {
    let (mu1, mu2, d) = (inv.mu1, inv.mu2, inv.delta2);
    check_purities(mu1, mu2)?;
    let g2 = mu2 * mu2 * d * d;
    let g = clamp_radicand(g2 - 4.0, g2, "gamma_aux")?.sqrt();
    let m1s = mu1 * mu1;
    let m2c = mu2 * mu2 * mu2;
    let bracket = 6.0 * mu2 - 3.0 * m2c * d * d
        + m1s * m2c * d * d * d
        + g * (3.0 * mu2 * mu2 * d - 2.0 * m1s - m1s * mu2 * mu2 * d * d);
    let det = bracket / (2.0 * m1s * m2c);
    if det <= 0.0 {
        return Err(Error::domain("three-beam determinant not positive", det));
    }
    Ok(det.powf(-0.5))
}

const SCAN_POINTS: usize = 64;

fn golden<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > BISECTION_TOLERANCE * b.abs().max(1.0) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Extremes of μ₃ over the Δ₂ window as `((Δ₂, μ₃) at the minimum, (Δ₂, μ₃) at the maximum)`.
///
/// μ₃ need not be monotone in Δ₂; interior extremes are located by a scan
/// followed by golden-section refinement.
pub fn purity3_extremes(mu1: f64, mu2: f64) -> Result<((f64, f64), (f64, f64))> {
    let (lo, hi) = seralian_bounds(mu1, mu2)?;
    let f = |d: f64| purity3(&StateInvariants::new(mu1, mu2, d.clamp(lo, hi)));
    if hi - lo <= BISECTION_TOLERANCE {
        let v = f(lo)?;
        return Ok(((lo, v), (lo, v)));
    }
    let xs: Vec<f64> = (0..=SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64).collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let refine = |sign: f64| -> Result<(f64, f64)> {
        let i = (0..ys.len()).min_by(|&a, &b| (sign * ys[a]).total_cmp(&(sign * ys[b]))).unwrap();
        // an extreme near the edge can hide in the end cell, so refine that too
        let x = golden(&|d| Ok(sign * f(d)?), xs[i.saturating_sub(1)], xs[(i + 1).min(SCAN_POINTS)])?;
        let v = f(x)?;
        Ok(if sign * v <= sign * ys[i] { (x, v) } else { (xs[i], ys[i]) })
    };
    Ok((refine(1.0)?, refine(-1.0)?))
}

/// Every Δ₂ in the window with `purity3(μ₁, μ₂, Δ₂) = μ₃`, ascending.
///
/// Up to two roots occur when μ₃ has an interior extremum. A μ₃ within
/// tolerance of an extreme value returns the extremal Δ₂.
pub fn delta2_roots_from_mu3(mu1: f64, mu2: f64, mu3: f64) -> Result<Vec<f64>> {
    let ((d_min, p_min), (d_max, p_max)) = purity3_extremes(mu1, mu2)?;
    let slack = DEFAULT_TOLERANCE * p_max;
    if !(mu3 >= p_min - slack && mu3 <= p_max + slack) {
        return Err(Error::Range {
            quantity: "mu3",
            value: mu3,
            lo: p_min,
            hi: p_max,
        });
    }
    let (lo, hi) = seralian_bounds(mu1, mu2)?;
    if hi - lo <= BISECTION_TOLERANCE {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    if mu3 <= p_min + slack && (mu3 - p_min).abs() <= (mu3 - p_max).abs() {
        return Ok(vec![d_min]);
    }
    if mu3 >= p_max - slack {
        return Ok(vec![d_max]);
    }
    let g = |d: f64| Ok::<f64, Error>(purity3(&StateInvariants::new(mu1, mu2, d))? - mu3);
    // monotone pieces split at the interior extremes
    let mut knots = vec![lo, hi];
    for d in [d_min, d_max] {
        if d > lo && d < hi {
            knots.push(d);
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (ga, gb) = (g(a)?, g(b)?);
        if ga == 0.0 {
            roots.push(a);
            continue;
        }
        if ga.signum() == gb.signum() {
            continue;
        }
        let rising = gb > ga;
        while b - a > BISECTION_TOLERANCE {
            let m = 0.5 * (a + b);
            if (g(m)? < 0.0) == rising {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if roots.is_empty() {
        // μ₃ sits within tolerance of a value the scan could not bracket
        roots.push(if (mu3 - p_min).abs() <= (mu3 - p_max).abs() { d_min } else { d_max });
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 10.0 * BISECTION_TOLERANCE);
    Ok(roots)
}

/// Smallest Δ₂ for which `purity3(μ₁, μ₂, Δ₂) = μ₃`; see [`delta2_roots_from_mu3`].
pub fn delta2_from_mu3(mu1: f64, mu2: f64, mu3: f64) -> Result<f64> {
    Ok(delta2_roots_from_mu3(mu1, mu2, mu3)?[0])
}

/// Rényi-2 entropy −ln μ.
pub fn renyi2_entropy(mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain("purity must be positive", mu));
    }
    Ok(-mu.ln())
}

/// Per-condition physicality diagnostics with signed margins (≥ 0 means satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    pub mu1_range: bool,
    pub mu1_margin: f64,
    pub mu_ordering: bool,
    pub ordering_margin: f64,
    pub delta2_window: bool,
    pub delta2_margin: f64,
    pub window: Option<(f64, f64)>,
}

impl PhysicalityReport {
    pub fn passes(&self) -> bool {
        self.mu1_range && self.mu_ordering && self.delta2_window
    }
}

pub fn check_physical(inv: &StateInvariants) -> PhysicalityReport {
    check_physical_with(inv, DEFAULT_TOLERANCE)
}

pub fn check_physical_with(inv: &StateInvariants, tol: f64) -> PhysicalityReport {
    let (mu1, mu2, d) = (inv.mu1, inv.mu2, inv.delta2);
    let mu1_margin = mu1.min(1.0 - mu1);
    let mu1_range = mu1 > 0.0 && mu1 <= 1.0 + tol;
    let ordering_margin = (mu1 - mu2).min(mu2 - mu1 * mu1);
    let mu_ordering = mu2 <= mu1 * (1.0 + tol) && mu2 >= mu1 * mu1 * (1.0 - tol);
    let mut report = PhysicalityReport {
        mu1_range,
        mu1_margin,
        mu_ordering,
        ordering_margin,
        delta2_window: false,
        delta2_margin: f64::NEG_INFINITY,
        window: None,
    };
    if mu1_range && mu_ordering {
        if let Ok((lo, hi)) = seralian_bounds(mu1.min(1.0), mu2.clamp(mu1 * mu1, mu1.min(1.0))) {
            report.window = Some((lo, hi));
            report.delta2_margin = (d - lo).min(hi - d);
            report.delta2_window = d >= lo - tol * lo.abs() && d <= hi + tol * hi.abs();
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bounds_collapse_at_corners() {
        assert_eq!(seralian_bounds(1.0, 1.0).unwrap(), (2.0, 2.0));
        let (lo, hi) = seralian_bounds(0.5, 0.25).unwrap();
        assert_relative_eq!(lo, 8.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn ghzw_seralian_is_admissible() {
        let (lo, hi) = seralian_bounds(0.8, 0.652352).unwrap();
        assert!(lo < 3.06639 && 3.06639 < hi, "{lo} {hi}");
    }

    #[test]
    fn bounds_reject_outside_domain() {
        assert!(matches!(seralian_bounds(0.5, 0.6), Err(Error::Domain { .. })));
        assert!(matches!(seralian_bounds(0.5, 0.2), Err(Error::Domain { .. })));
        assert!(seralian_bounds(0.0, 0.0).is_err());
    }

    #[test]
    fn vacuum_and_thermal_standard_form() {
        let p = standard_form(&StateInvariants::new(1.0, 1.0, 2.0)).unwrap();
        assert_eq!(p, StandardFormParams::vacuum());
        let p = standard_form(&StateInvariants::new(0.5, 0.25, 8.0)).unwrap();
        assert_relative_eq!(p.a, 2.0);
        assert!(p.c_plus.abs() < 1e-9 && p.c_minus.abs() < 1e-9);
    }

    #[test]
    fn ghzw_standard_form_round_trip() {
        let inv = StateInvariants::new(0.8, 0.652352, 3.06639);
        let p = standard_form(&inv).unwrap();
        assert_relative_eq!(p.a, 1.25, epsilon = 1e-12);
        let back = invariants_from_standard_form(&p).unwrap();
        assert_relative_eq!(back.mu1, inv.mu1, epsilon = 1e-10);
        assert_relative_eq!(back.mu2, inv.mu2, epsilon = 1e-10);
        assert_relative_eq!(back.delta2, inv.delta2, epsilon = 1e-10);
    }

    #[test]
    fn purity3_known_values() {
        assert_relative_eq!(purity3(&StateInvariants::new(1.0, 1.0, 2.0)).unwrap(), 1.0);
        assert_relative_eq!(
            purity3(&StateInvariants::new(0.5, 0.25, 8.0)).unwrap(),
            0.125,
            epsilon = 1e-9
        );
        let m3 = purity3(&StateInvariants::new(0.8, 0.652352, 3.06639)).unwrap();
        assert!((m3 - 0.54222).abs() < 5e-6, "{m3}");
    }

    #[test]
    fn delta2_inversion() {
        assert_relative_eq!(delta2_from_mu3(0.5, 0.25, 0.125).unwrap(), 8.0, epsilon = 1e-9);
        let m3 = purity3(&StateInvariants::new(0.8, 0.652352, 3.06639)).unwrap();
        assert_relative_eq!(delta2_from_mu3(0.8, 0.652352, m3).unwrap(), 3.06639, epsilon = 1e-9);
        match delta2_from_mu3(0.8, 0.652352, 0.9) {
            Err(Error::Range { lo, hi, .. }) => assert!(lo < hi && hi < 0.9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn physicality_report() {
        assert!(!check_physical(&StateInvariants::new(0.5, 0.6, 4.0)).passes());
        assert!(check_physical(&StateInvariants::new(1.0, 1.0, 2.0)).passes());
        let (lo, hi) = seralian_bounds(0.5, 0.28).unwrap();
        let r = check_physical(&StateInvariants::new(0.5, 0.28, 0.5 * (lo + hi)));
        assert!(r.passes() && r.delta2_margin > 0.0);
        let r = check_physical(&StateInvariants::new(0.5, 0.28, hi + 0.1));
        assert!(!r.delta2_window && r.delta2_margin < 0.0);
    }

    #[test]
    fn renyi() {
        assert_eq!(renyi2_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(renyi2_entropy(0.125).unwrap(), 3.0 * 2f64.ln());
        assert!(renyi2_entropy(0.0).is_err());
    }

    #[test]
    fn json_keys() {
        let inv = StateInvariants::new(0.8, 0.6, 3.2).with_mu3(0.5);
        let s = serde_json::to_string(&inv).unwrap();
        assert!(s.contains("\"mu1\"") && s.contains("\"delta2\"") && s.contains("\"mu3\""));
        let p = serde_json::to_string(&StandardFormParams::new(1.5, 0.2, -0.1)).unwrap();
        assert_eq!(p, r#"{"a":1.5,"c_plus":0.2,"c_minus":-0.1}"#);
    }
}
