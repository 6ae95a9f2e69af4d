use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::photonics::histogram::PhotocountHistogram;
use crate::photonics::model::DetectorSpec;
use crate::photonics::response::detector_response_matrix;

/// Dense joint distribution p(n₁, n₂, n₃) on a box of per-beam cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    cutoffs: [usize; 3],
    probs: Vec<f64>,
}

impl PhotonNumberDistribution {
    pub fn zeros(cutoffs: [usize; 3]) -> Self {
        let len = (cutoffs[0] + 1) * (cutoffs[1] + 1) * (cutoffs[2] + 1);
        PhotonNumberDistribution {
            cutoffs,
            probs: vec![0.0; len],
        }
    }

    /// Normalized relative frequencies of a histogram.
    pub fn from_histogram(hist: &PhotocountHistogram) -> Result<Self> {
        if hist.is_empty() {
            return Err(Error::Data("empty histogram".into()));
        }
        let m = hist.max_counts();
        let mut p = Self::zeros([m[0] as usize, m[1] as usize, m[2] as usize]);
        let total = hist.total() as f64;
        for (c, n) in hist.iter() {
            p.set([c[0] as usize, c[1] as usize, c[2] as usize], n as f64 / total);
        }
        Ok(p)
    }

    pub fn cutoffs(&self) -> [usize; 3] {
        self.cutoffs
    }

    fn idx(&self, n: [usize; 3]) -> usize {
        (n[0] * (self.cutoffs[1] + 1) + n[1]) * (self.cutoffs[2] + 1) + n[2]
    }

    pub fn get(&self, n: [usize; 3]) -> f64 {
        if (0..3).any(|j| n[j] > self.cutoffs[j]) {
            0.0
        } else {
            self.probs[self.idx(n)]
        }
    }

    pub fn set(&mut self, n: [usize; 3], v: f64) {
        let i = self.idx(n);
        self.probs[i] = v;
    }

    /// Nonzero entries.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        let [_, c1, c2] = self.cutoffs;
        self.probs.iter().enumerate().filter(|(_, &p)| p != 0.0).map(move |(i, &p)| {
            let n3 = i % (c2 + 1);
            let n2 = (i / (c2 + 1)) % (c1 + 1);
            let n1 = i / ((c1 + 1) * (c2 + 1));
            ([n1, n2, n3], p)
        })
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn marginal(&self, beam: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cutoffs[beam] + 1];
        for (n, p) in self.iter() {
            out[n[beam]] += p;
        }
        out
    }

    /// Probability on the outermost shell n_j = cutoff_j of one beam, a proxy
    /// for mass lost beyond the cutoff.
    pub fn edge_mass(&self, beam: usize) -> f64 {
        *self.marginal(beam).last().unwrap_or(&0.0)
    }

    pub fn mean(&self, beam: usize) -> f64 {
        self.iter().map(|(n, p)| n[beam] as f64 * p).sum()
    }

    fn normalize(&mut self) {
        let s = self.total();
        if s > 0.0 {
            for p in &mut self.probs {
                *p /= s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when the largest absolute change of any probability is below this.
    pub tol: f64,
    /// Photon-number cutoffs; chosen from the counts when `None`.
    pub cutoffs: Option<[usize; 3]>,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 10_000,
            tol: 1e-8,
            cutoffs: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmResult {
    pub distribution: PhotonNumberDistribution,
    pub iterations: usize,
    /// Mean log-likelihood per realization after every iteration, starting
    /// with the initial guess.
    pub log_likelihood: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Contracts `x` (shape `dims`) with `mat` along `axis`: out[..i..] = Σ_k mat(i, k) x[..k..].
fn contract(x: &[f64], dims: [usize; 3], mat: &DMatrix<f64>, axis: usize) -> (Vec<f64>, [usize; 3]) {
    debug_assert_eq!(mat.ncols(), dims[axis]);
    let mut out_dims = dims;
    out_dims[axis] = mat.nrows();
    let mut out = vec![0.0; out_dims.iter().product()];
    let stride = |d: [usize; 3]| [d[1] * d[2], d[2], 1];
    let (si, so) = (stride(dims), stride(out_dims));
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    for u in 0..dims[a] {
        for v in 0..dims[b] {
            let base_in = u * si[a] + v * si[b];
            let base_out = u * so[a] + v * so[b];
            for k in 0..dims[axis] {
                let xv = x[base_in + k * si[axis]];
                if xv == 0.0 {
                    continue;
                }
                for i in 0..out_dims[axis] {
                    out[base_out + i * so[axis]] += mat[(i, k)] * xv;
                }
            }
        }
    }
    (out, out_dims)
}

fn forward(x: &[f64], dims: [usize; 3], t: &[DMatrix<f64>; 3]) -> Vec<f64> {
    let (y, d) = contract(x, dims, &t[0], 0);
    let (y, d) = contract(&y, d, &t[1], 1);
    contract(&y, d, &t[2], 2).0
}

/// Photon cutoff per beam: the count range mapped back through the efficiency
/// with a generous margin.
pub fn default_cutoffs(hist: &PhotocountHistogram, specs: &[DetectorSpec; 3]) -> [usize; 3] {
    let m = hist.max_counts();
    let mut out = [0; 3];
    for j in 0..3 {
        let eta = specs[j].efficiency.max(0.05);
        let mean = ((hist.mean(j) - specs[j].dark_rate) / eta).max(0.0);
        let reach = (m[j] as f64 + 1.0) / eta;
        out[j] = (reach + 3.0 * mean.sqrt() + 4.0).ceil().min(400.0) as usize;
    }
    out
}

/// Maximum-likelihood photon-number distribution by the EM (Richardson–Lucy)
/// iteration with a separable three-beam detection kernel.
pub fn em_reconstruct(
    hist: &PhotocountHistogram,
    specs: &[DetectorSpec; 3],
    options: &EmOptions,
) -> Result<EmResult> {
    if hist.is_empty() {
        return Err(Error::Data("empty histogram".into()));
    }
    for s in specs {
        s.validate()?;
    }
    let cutoffs = options.cutoffs.unwrap_or_else(|| default_cutoffs(hist, specs));
    let cmax = hist.max_counts();
    let t: [DMatrix<f64>; 3] =
        std::array::from_fn(|j| detector_response_matrix(&specs[j], cutoffs[j], cmax[j] as usize));
    let tt: [DMatrix<f64>; 3] = std::array::from_fn(|j| t[j].transpose());
    let sens: [Vec<f64>; 3] =
        std::array::from_fn(|j| (0..=cutoffs[j]).map(|n| t[j].column(n).sum()).collect());
    if sens.iter().any(|s| s.iter().all(|&v| v <= 0.0)) {
        return Err(Error::Config("detector response has no support on the observed counts".into()));
    }
    let ndims = [cutoffs[0] + 1, cutoffs[1] + 1, cutoffs[2] + 1];
    let cdims = [cmax[0] as usize + 1, cmax[1] as usize + 1, cmax[2] as usize + 1];
    let total = hist.total() as f64;
    let mut f = vec![0.0; cdims.iter().product()];
    for (c, n) in hist.iter() {
        f[(c[0] as usize * cdims[1] + c[1] as usize) * cdims[2] + c[2] as usize] = n as f64 / total;
    }
    let sens_at = |i: usize| {
        let n3 = i % ndims[2];
        let n2 = (i / ndims[2]) % ndims[1];
        let n1 = i / (ndims[1] * ndims[2]);
        sens[0][n1] * sens[1][n2] * sens[2][n3]
    };

    // start from independent geometric laws at the detection-corrected means
    let start: [Vec<f64>; 3] = std::array::from_fn(|j| {
        let eta = specs[j].efficiency.max(1e-3);
        let m = ((hist.mean(j) - specs[j].dark_rate) / eta).max(1e-3);
        (0..=cutoffs[j]).map(|n| (m / (1.0 + m)).powi(n as i32)).collect()
    });
    let len: usize = ndims.iter().product();
    let mut p: Vec<f64> = (0..len)
        .map(|i| {
            if sens_at(i) <= 0.0 {
                return 0.0;
            }
            let n3 = i % ndims[2];
            let n2 = (i / ndims[2]) % ndims[1];
            let n1 = i / (ndims[1] * ndims[2]);
            start[0][n1] * start[1][n2] * start[2][n3]
        })
        .collect();
    let norm: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= norm);

    let loglik = |q: &[f64]| -> f64 {
        let qs: f64 = q.iter().sum();
        f.iter()
            .zip(q)
            .filter(|(&fv, _)| fv > 0.0)
            .map(|(&fv, &qv)| fv * (qv / qs).ln())
            .sum()
    };
    let step = |p: &[f64]| -> Vec<f64> {
        let q = forward(p, ndims, &t);
        let ratio: Vec<f64> = f
            .iter()
            .zip(&q)
            .map(|(&fv, &qv)| if fv > 0.0 && qv > 0.0 { fv / qv } else { 0.0 })
            .collect();
        let g = forward(&ratio, cdims, &tt);
        p.iter()
            .enumerate()
            .map(|(i, &v)| {
                let s = sens_at(i);
                if s > 0.0 {
                    v * g[i] / s
                } else {
                    0.0
                }
            })
            .collect()
    };
    let lik = |p: &[f64]| loglik(&forward(p, ndims, &t));

    // EM steps accelerated by squared extrapolation (SQUAREM), falling back to
    // the plain double step whenever the extrapolated point does worse
    let mut history = vec![lik(&p)];
    let mut iterations = 0;
    let mut last_update = f64::INFINITY;
    while iterations < options.max_iter {
        let p1 = step(&p);
        let p2 = step(&p1);
        let (l1, l2) = (lik(&p1), lik(&p2));
        let r: Vec<f64> = p1.iter().zip(&p).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = p2.iter().zip(&p1).zip(&r).map(|((c, b), r)| c - b - r).collect();
        let (rr, vv) = (r.iter().map(|x| x * x).sum::<f64>(), v.iter().map(|x| x * x).sum::<f64>());
        let mut next = p2.clone();
        let mut l_next = l2;
        iterations += 2;
        if vv > 0.0 && rr > 0.0 {
            let alpha = -(rr / vv).sqrt().max(1.0);
            let x: Vec<f64> = p
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((p0, r), v)| (p0 - 2.0 * alpha * r + alpha * alpha * v).max(0.0))
                .collect();
            if x.iter().sum::<f64>() > 0.0 {
                let y = step(&x);
                iterations += 1;
                let ly = lik(&y);
                if ly.is_finite() && ly >= l2 {
                    next = y;
                    l_next = ly;
                }
            }
        }
        history.push(l1);
        history.push(l2);
        if l_next > l2 {
            history.push(l_next);
        }
        let (sum, prev_sum) = (next.iter().sum::<f64>(), p.iter().sum::<f64>());
        last_update = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a / sum - b / prev_sum).abs())
            .fold(0.0, f64::max);
        p = next;
        if last_update < options.tol {
            break;
        }
    }

    let mut warnings = Vec::new();
    if last_update >= options.tol {
        warnings.push(Warning::Convergence {
            iterations,
            last_update,
        });
    }
    let mut distribution = PhotonNumberDistribution {
        cutoffs,
        probs: p,
    };
    distribution.normalize();
    for j in 0..3 {
        let edge = distribution.edge_mass(j);
        if edge > 1e-6 {
            warnings.push(Warning::Cutoff {
                beam: j,
                tail_mass: edge,
            });
        }
    }
    Ok(EmResult {
        distribution,
        iterations,
        log_likelihood: history,
        warnings,
    })
}
