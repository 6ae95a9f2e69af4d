use crate::error::Result;
use crate::model::invariants::StateInvariants;

/// Value of `f` at `inv` and, when `inv` carries standard errors, its
/// first-order propagated error (independent inputs, finite differences).
///
/// Central differences are used where both neighbours evaluate; otherwise the
/// one-sided difference that stays in the domain.
pub fn propagate<F>(inv: &StateInvariants, f: F) -> Result<(f64, Option<f64>)>
where
    F: Fn(&StateInvariants) -> Result<f64>,
{
    let value = f(inv)?;
    let Some(err) = inv.errors else {
        return Ok((value, None));
    };
    let mut bare = *inv;
    bare.errors = None;

    let mut var = 0.0;
    for k in 0..4 {
        let (x, sigma) = match k {
            0 => (inv.mu1, err.mu1),
            1 => (inv.mu2, err.mu2),
            2 => (inv.delta2, err.delta2),
            _ => match (inv.mu3, err.mu3) {
                (Some(m), Some(s)) => (m, s),
                _ => continue,
            },
        };
        if sigma == 0.0 || !sigma.is_finite() {
            continue;
        }
        let h = (1e-6 * x.abs()).max(1e-9);
        let shifted = |dx: f64| {
            let mut s = bare;
            match k {
                0 => s.mu1 += dx,
                1 => s.mu2 += dx,
                2 => s.delta2 += dx,
                _ => s.mu3 = s.mu3.map(|m| m + dx),
            }
            f(&s)
        };
        let slope = match (shifted(h), shifted(-h)) {
            (Ok(up), Ok(down)) => (up - down) / (2.0 * h),
            (Ok(up), Err(_)) => (up - value) / h,
            (Err(_), Ok(down)) => (value - down) / h,
            (Err(e), Err(_)) => return Err(e),
        };
        var += (slope * sigma).powi(2);
    }
    Ok((value, Some(var.sqrt())))
}
