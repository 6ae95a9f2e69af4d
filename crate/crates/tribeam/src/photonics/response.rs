use nalgebra::DMatrix;

use crate::photonics::model::DetectorSpec;

/// Binomial probabilities B(j; n, η) for j = 0..=n.
fn binomial_pmf(n: usize, eta: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let mut coef = 1.0;
    for (j, o) in out.iter_mut().enumerate() {
        if j > 0 {
            coef *= (n - j + 1) as f64 / j as f64;
        }
        *o = coef * eta.powi(j as i32) * (1.0 - eta).powi((n - j) as i32);
    }
    out
}

fn poisson_pmf(k_max: usize, d: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    let mut v = (-d).exp();
    for (k, o) in out.iter_mut().enumerate() {
        if k > 0 {
            v *= d / k as f64;
        }
        *o = v;
    }
    out
}

/// Detection kernel T(c|n), rows c = 0..=c_max and columns n = 0..=n_max.
pub fn detector_response_matrix(spec: &DetectorSpec, n_max: usize, c_max: usize) -> DMatrix<f64> {
    let dark = poisson_pmf(c_max, spec.dark_rate);
    let mut t = DMatrix::zeros(c_max + 1, n_max + 1);
    for n in 0..=n_max {
        let b = binomial_pmf(n, spec.efficiency);
        for c in 0..=c_max {
            t[(c, n)] = (0..=n.min(c)).map(|j| b[j] * dark[c - j]).sum();
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ideal_detector_is_identity() {
        let t = detector_response_matrix(&DetectorSpec::ideal(), 5, 5);
        assert_eq!(t, DMatrix::identity(6, 6));
    }

    #[test]
    fn half_efficiency_column() {
        let t = detector_response_matrix(&DetectorSpec::new(0.5, 0.0), 2, 4);
        assert_eq!(t.column(2).as_slice(), &[0.25, 0.5, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn column_deficit_is_tail_mass() {
        let spec = DetectorSpec::new(0.274, 0.3);
        let t = detector_response_matrix(&spec, 6, 4);
        let full = detector_response_matrix(&spec, 6, 60);
        for n in 0..=6 {
            let tail: f64 = (5..=60).map(|c| full[(c, n)]).sum();
            assert!(t.column(n).sum() <= 1.0);
            assert_relative_eq!(t.column(n).sum() + tail, 1.0, epsilon = 1e-12);
        }
    }
}
