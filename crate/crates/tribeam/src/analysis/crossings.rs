use serde::{Deserialize, Serialize};

use crate::correlations::{correlation_bounds, evaluate, ppt_eigenvalues, Quantity};
use crate::error::{Error, Result};
use crate::ghzw::{coexistence_thresholds, ghzw_thresholds};
use crate::model::standard_form;
use crate::photonics::{AnalysisOrder, MultimodeModel};

use super::curves::model_estimate;

/// Noise-driven transitions of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// Tripartite negativity vanishes.
    En3,
    /// Two-beam negativity vanishes.
    En2,
    /// μ₂ drops to the class-1 floor.
    Class1,
    /// μ₂ drops to the class-5 ceiling.
    Class5,
    /// Coexistence of bi- and tripartite entanglement ends.
    Coexistence,
    /// Point value of the residual cotangle vanishes.
    Cotangle,
    /// Lower Δ₂-window bound of the residual cotangle vanishes.
    CotangleLowerBound,
}

impl Transition {
    pub const ALL: [Transition; 7] = [
        Transition::En3,
        Transition::En2,
        Transition::Class1,
        Transition::Class5,
        Transition::Coexistence,
        Transition::Cotangle,
        Transition::CotangleLowerBound,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Transition::En3 => "e_n3",
            Transition::En2 => "e_n2",
            Transition::Class1 => "class_1",
            Transition::Class5 => "class_5",
            Transition::Coexistence => "coexistence",
            Transition::Cotangle => "cotangle",
            Transition::CotangleLowerBound => "cotangle_lower_bound",
        }
    }

    /// Analysis order the transition is evaluated at by default.
    pub fn default_order(self) -> AnalysisOrder {
        match self {
            Transition::CotangleLowerBound => AnalysisOrder::Fourth,
            _ => AnalysisOrder::Sixth,
        }
    }
}

/// Signed margin that is positive before the transition and non-positive after it.
pub fn transition_margin(model: &MultimodeModel, which: Transition, order: AnalysisOrder) -> Result<f64> {
    let e = model_estimate(model, order)?;
    let inv = e.invariants;
    let (mu1, mu2) = (inv.mu1, inv.mu2);
    match which {
        Transition::En3 => Ok(-ppt_eigenvalues(&standard_form(&inv)?)?.v_minus.ln()),
        Transition::En2 => {
            let p = standard_form(&inv)?;
            // −ln of the two-beam PPT eigenvalue without the max(0, ·) clip
            let arg = p.a * p.a - p.a * (p.c_minus - p.c_plus).abs() - p.c_minus * p.c_plus;
            if arg <= 0.0 {
                return Err(Error::domain("non-positive two-beam negativity argument", arg));
            }
            Ok(-0.5 * arg.ln())
        }
        Transition::Class1 => Ok(mu2 - ghzw_thresholds(mu1).1),
        Transition::Class5 => Ok(mu2 - ghzw_thresholds(mu1).0),
        Transition::Coexistence => {
            let (t1, t2) = coexistence_thresholds(mu1);
            Ok((mu2 - t1).min(mu2 - t2))
        }
        Transition::Cotangle => evaluate(Quantity::Cotangle, &inv),
        Transition::CotangleLowerBound => Ok(correlation_bounds(mu1, mu2, Quantity::Cotangle)?.0),
    }
}

/// First noise level in [lo, hi] where `margin` stops being positive: a scan
/// with `steps` intervals, then bisection to `tol`. `None` if it never does.
pub fn find_crossing<F>(margin: F, lo: f64, hi: f64, steps: usize, tol: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(hi > lo) || steps == 0 {
        return Err(Error::Config("crossing search needs lo < hi and at least one step".into()));
    }
    let positive = |x: f64| -> Result<bool> { Ok(margin(x)? > 0.0) };
    if !positive(lo)? {
        return Ok(Some(lo));
    }
    let mut prev = lo;
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        if !positive(x)? {
            let (mut a, mut b) = (prev, x);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if positive(m)? {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev = x;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub transition: Transition,
    pub modes: f64,
    pub order: AnalysisOrder,
    /// Noise level of the transition; `None` when not reached below the search limit.
    pub noise: Option<f64>,
}

/// Noise level at which a transition occurs for the model with the template's modes and pair level.
pub fn noise_threshold(
    template: &MultimodeModel,
    which: Transition,
    order: AnalysisOrder,
    max_noise: f64,
) -> Result<Crossing> {
    let at = |n: f64| {
        let m = MultimodeModel {
            noise_mean: n,
            ..*template
        };
        transition_margin(&m, which, order)
    };
    let steps = (max_noise / 0.05).ceil().max(1.0) as usize;
    Ok(Crossing {
        transition: which,
        modes: template.modes,
        order,
        noise: find_crossing(at, 0.0, max_noise, steps, 1e-6)?,
    })
}
