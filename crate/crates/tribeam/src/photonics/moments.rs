use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::photonics::em::PhotonNumberDistribution;
use crate::photonics::histogram::PhotocountHistogram;
use crate::photonics::model::DetectorSpec;
use crate::series::{indices, multi_factorial, Index3, Series3};

/// Largest supported total moment order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentScope {
    PerBeam,
    PerMode,
}

/// Normally ordered intensity moments ⟨W₁^{k₁}W₂^{k₂}W₃^{k₃}⟩ up to a total order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MomentTableJson", try_from = "MomentTableJson")]
pub struct MomentTable {
    pub order: usize,
    pub scope: MomentScope,
    pub entries: BTreeMap<Index3, f64>,
    pub std_errors: Option<BTreeMap<Index3, f64>>,
}

#[derive(Serialize, Deserialize)]
struct MomentTableJson {
    order: usize,
    scope: MomentScope,
    entries: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    std_errors: Option<BTreeMap<String, f64>>,
}

pub fn index_key(k: Index3) -> String {
    format!("{}_{}_{}", k[0], k[1], k[2])
}

pub fn parse_index_key(s: &str) -> Result<Index3> {
    let parts: Vec<&str> = s.split('_').collect();
    if parts.len() != 3 {
        return Err(Error::Data(format!("bad moment key {s:?}")));
    }
    let mut k = [0; 3];
    for (v, p) in k.iter_mut().zip(parts) {
        *v = p.parse().map_err(|_| Error::Data(format!("bad moment key {s:?}")))?;
    }
    Ok(k)
}

impl From<MomentTable> for MomentTableJson {
    fn from(t: MomentTable) -> Self {
        let keyed = |m: BTreeMap<Index3, f64>| m.into_iter().map(|(k, v)| (index_key(k), v)).collect();
        MomentTableJson {
            order: t.order,
            scope: t.scope,
            entries: keyed(t.entries),
            std_errors: t.std_errors.map(keyed),
        }
    }
}

impl TryFrom<MomentTableJson> for MomentTable {
    type Error = Error;
    fn try_from(j: MomentTableJson) -> Result<Self> {
        let parse = |m: BTreeMap<String, f64>| -> Result<BTreeMap<Index3, f64>> {
            m.into_iter().map(|(k, v)| Ok((parse_index_key(&k)?, v))).collect()
        };
        let t = MomentTable {
            order: j.order,
            scope: j.scope,
            entries: parse(j.entries)?,
            std_errors: j.std_errors.map(parse).transpose()?,
        };
        t.validate()?;
        Ok(t)
    }
}

impl MomentTable {
    pub fn new(order: usize, scope: MomentScope) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert([0, 0, 0], 1.0);
        MomentTable {
            order,
            scope,
            entries,
            std_errors: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order > MAX_ORDER {
            return Err(Error::Data(format!("moment order {} above {MAX_ORDER}", self.order)));
        }
        match self.entries.get(&[0, 0, 0]) {
            Some(v) if (v - 1.0).abs() < 1e-12 => {}
            _ => return Err(Error::Data("moment (0,0,0) must equal 1".into())),
        }
        if let Some(k) = self.entries.keys().find(|k| k.iter().sum::<usize>() > self.order) {
            return Err(Error::Data(format!("entry {k:?} beyond order {}", self.order)));
        }
        Ok(())
    }

    pub fn get(&self, k: Index3) -> Option<f64> {
        self.entries.get(&k).copied()
    }

    pub fn require(&self, k: Index3) -> Result<f64> {
        self.get(k)
            .ok_or_else(|| Error::Data(format!("moment table lacks entry {}", index_key(k))))
    }

    pub fn set(&mut self, k: Index3, v: f64) {
        self.entries.insert(k, v);
    }

    pub fn std_error(&self, k: Index3) -> Option<f64> {
        self.std_errors.as_ref().and_then(|e| e.get(&k).copied())
    }

    /// True when every entry up to `order` is present.
    pub fn is_complete(&self, order: usize) -> bool {
        order <= self.order && indices(order).iter().all(|k| self.entries.contains_key(k))
    }

    pub fn require_complete(&self, order: usize) -> Result<()> {
        if self.is_complete(order) {
            Ok(())
        } else {
            Err(Error::Data(format!("moment table incomplete at order {order}")))
        }
    }

    /// Factorial-moment generating series Σ ⟨W^k⟩ t^k / k!.
    pub fn to_series(&self) -> Series3 {
        let mut s = Series3::zero(self.order);
        for (&k, &v) in &self.entries {
            s.set(k, v / multi_factorial(k));
        }
        s
    }

    pub fn from_series(s: &Series3, scope: MomentScope) -> Self {
        let mut t = MomentTable::new(s.order(), scope);
        for k in indices(s.order()) {
            t.entries.insert(k, s.get(k) * multi_factorial(k));
        }
        t
    }

    /// Table restricted to total order ≤ `order`.
    pub fn truncated(&self, order: usize) -> Self {
        let keep = |m: &BTreeMap<Index3, f64>| {
            m.iter().filter(|(k, _)| k.iter().sum::<usize>() <= order).map(|(&k, &v)| (k, v)).collect()
        };
        MomentTable {
            order: order.min(self.order),
            scope: self.scope,
            entries: keep(&self.entries),
            std_errors: self.std_errors.as_ref().map(keep),
        }
    }

    /// Averages every entry over the permutations of its index.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for &k in self.entries.keys() {
            let perms = permutations(k);
            let vals: Vec<f64> = perms.iter().filter_map(|p| self.get(*p)).collect();
            out.entries.insert(k, vals.iter().sum::<f64>() / vals.len() as f64);
        }
        out
    }

    /// Joint factorial cumulants divided by M, reconverted to moments.
    pub fn reduce_per_mode(&self, modes: f64) -> Result<Self> {
        self.rescale_cumulants(modes, MomentScope::PerBeam, MomentScope::PerMode, 1.0 / modes)
    }

    /// Beam-level table of M independent identical modes.
    pub fn aggregate(&self, modes: f64) -> Result<Self> {
        self.rescale_cumulants(modes, MomentScope::PerMode, MomentScope::PerBeam, modes)
    }

    fn rescale_cumulants(&self, modes: f64, from: MomentScope, to: MomentScope, factor: f64) -> Result<Self> {
        if !(modes > 0.0 && modes.is_finite()) {
            return Err(Error::domain("mode number must be positive", modes));
        }
        if self.scope != from {
            return Err(Error::Data(format!("expected a {from:?} table, got {:?}", self.scope)));
        }
        self.require_complete(self.order)?;
        let cumulants = self.to_series().ln();
        // standard errors do not propagate through the cumulant map; bootstrap the reduced table instead
        Ok(MomentTable::from_series(&cumulants.scale(factor).exp(), to))
    }
}

fn permutations(k: Index3) -> Vec<Index3> {
    let mut out = vec![
        [k[0], k[1], k[2]],
        [k[0], k[2], k[1]],
        [k[1], k[0], k[2]],
        [k[1], k[2], k[0]],
        [k[2], k[0], k[1]],
        [k[2], k[1], k[0]],
    ];
    out.sort();
    out.dedup();
    out
}

/// Signed Stirling numbers of the first kind s(n, k) for n, k ≤ `max`.
pub fn stirling_first(max: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; max + 1]; max + 1];
    s[0][0] = 1.0;
    for n in 0..max {
        for k in 1..=n + 1 {
            s[n + 1][k] = s[n][k - 1] - n as f64 * s[n][k];
        }
    }
    s
}

/// Raw photon-number moments ⟨n₁^{k₁}n₂^{k₂}n₃^{k₃}⟩ for total order ≤ `max_order`.
pub fn photon_moments(
    p: &PhotonNumberDistribution,
    max_order: usize,
) -> Result<(BTreeMap<Index3, f64>, Vec<Warning>)> {
    if max_order > MAX_ORDER {
        return Err(Error::Config(format!("moment order {max_order} above {MAX_ORDER}")));
    }
    let mut out: BTreeMap<Index3, f64> = indices(max_order).into_iter().map(|k| (k, 0.0)).collect();
    for (n, prob) in p.iter() {
        for (k, v) in out.iter_mut() {
            *v += prob * (0..3).map(|j| (n[j] as f64).powi(k[j] as i32)).product::<f64>();
        }
    }
    let mut warnings = Vec::new();
    let cut = p.cutoffs();
    for j in 0..3 {
        let tail = p.edge_mass(j);
        if tail * (cut[j] as f64).powi(max_order as i32) > 1e-6 {
            warnings.push(Warning::Cutoff {
                beam: j,
                tail_mass: tail,
            });
        }
    }
    Ok((out, warnings))
}

/// Factorial (normally ordered) moments from raw moments, converting every
/// beam index with Stirling numbers of the first kind.
pub fn intensity_moments(raw: &BTreeMap<Index3, f64>, order: usize) -> Result<MomentTable> {
    let s = stirling_first(order);
    let mut t = MomentTable::new(order, MomentScope::PerBeam);
    for k in indices(order) {
        let mut v = 0.0;
        for i0 in 0..=k[0] {
            for i1 in 0..=k[1] {
                for i2 in 0..=k[2] {
                    let c = s[k[0]][i0] * s[k[1]][i1] * s[k[2]][i2];
                    if c == 0.0 {
                        continue;
                    }
                    let m = raw
                        .get(&[i0, i1, i2])
                        .ok_or_else(|| Error::Data(format!("raw moment {:?} missing", [i0, i1, i2])))?;
                    v += c * m;
                }
            }
        }
        t.entries.insert(k, v);
    }
    Ok(t)
}

fn falling(n: u32, k: usize) -> f64 {
    (0..k).map(|i| n as f64 - i as f64).product()
}

/// Factorial moments of the counts themselves.
pub fn factorial_moments(hist: &PhotocountHistogram, order: usize) -> Result<MomentTable> {
    if hist.is_empty() {
        return Err(Error::Data("empty histogram".into()));
    }
    let total = hist.total() as f64;
    factorial_moments_weighted(hist.iter().map(|(c, n)| (c, n as f64 / total)), order)
}

pub(crate) fn factorial_moments_weighted(
    cells: impl Iterator<Item = ([u32; 3], f64)>,
    order: usize,
) -> Result<MomentTable> {
    if order > MAX_ORDER {
        return Err(Error::Config(format!("moment order {order} above {MAX_ORDER}")));
    }
    let idx = indices(order);
    let mut acc = vec![0.0; idx.len()];
    let mut f = [[0.0; MAX_ORDER + 1]; 3];
    for (c, w) in cells {
        for j in 0..3 {
            for (k, v) in f[j].iter_mut().enumerate().take(order + 1) {
                *v = falling(c[j], k);
            }
        }
        for (a, k) in acc.iter_mut().zip(&idx) {
            *a += w * f[0][k[0]] * f[1][k[1]] * f[2][k[2]];
        }
    }
    let mut t = MomentTable::new(order, MomentScope::PerBeam);
    for (k, v) in idx.into_iter().zip(acc) {
        t.entries.insert(k, v);
    }
    t.entries.insert([0, 0, 0], 1.0);
    Ok(t)
}

/// Photon factorial moments from count factorial moments:
/// G_n(s) = G_c(s/η) exp(−Σ d_j s_j/η_j).
pub fn correct_for_detection(counts: &MomentTable, specs: &[DetectorSpec; 3]) -> Result<MomentTable> {
    for s in specs {
        s.validate()?;
        if s.efficiency <= 0.0 {
            return Err(Error::Config("cannot invert a detector with zero efficiency".into()));
        }
    }
    counts.require_complete(counts.order)?;
    let order = counts.order;
    let inv_eta = [0, 1, 2].map(|j| 1.0 / specs[j].efficiency);
    let g = counts.to_series().scale_vars(inv_eta);
    let mut lin = Series3::zero(order);
    for j in 0..3 {
        let mut e = [0; 3];
        e[j] = 1;
        if order > 0 {
            lin.set(e, -specs[j].dark_rate * inv_eta[j]);
        }
    }
    Ok(MomentTable::from_series(&(&g * &lin.exp()), counts.scope))
}

fn unit(beam: usize, power: usize) -> Index3 {
    let mut k = [0; 3];
    k[beam] = power;
    k
}

/// F = 1 + (⟨W²⟩ − ⟨W⟩²)/⟨W⟩.
pub fn fano(t: &MomentTable, beam: usize) -> Result<f64> {
    let m1 = t.require(unit(beam, 1))?;
    let m2 = t.require(unit(beam, 2))?;
    if m1 <= 0.0 {
        return Err(Error::domain("Fano factor of a beam with zero mean", m1));
    }
    Ok(1.0 + (m2 - m1 * m1) / m1)
}

/// R_ij = 1 + ⟨[Δ(W_i − W_j)]²⟩/(⟨W_i⟩ + ⟨W_j⟩).
pub fn noise_reduction(t: &MomentTable, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Config("noise reduction needs two distinct beams".into()));
    }
    let (mi, mj) = (t.require(unit(i, 1))?, t.require(unit(j, 1))?);
    let (mii, mjj) = (t.require(unit(i, 2))?, t.require(unit(j, 2))?);
    let mut k = [0; 3];
    k[i] = 1;
    k[j] = 1;
    let mij = t.require(k)?;
    let den = mi + mj;
    if den <= 0.0 {
        return Err(Error::domain("noise reduction with zero mean intensities", den));
    }
    let var = (mii - mi * mi) + (mjj - mj * mj) - 2.0 * (mij - mi * mj);
    Ok(1.0 + var / den)
}

/// One-beam purity [1 + 4⟨w⟩ + 12⟨w⟩² − 4⟨w²⟩]^{−1/2} from per-mode moments of `beam`.
pub fn mu1_from_moments(t: &MomentTable, beam: usize) -> Result<f64> {
    let w = t.require(unit(beam, 1))?;
    let w2 = t.require(unit(beam, 2))?;
    let bracket = 1.0 + 4.0 * w + 12.0 * w * w - 4.0 * w2;
    if bracket <= 0.0 {
        return Err(Error::domain("non-positive one-beam purity bracket", bracket));
    }
    Ok(bracket.powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poisson_distribution(lambda: f64, cut: usize) -> PhotonNumberDistribution {
        let mut p = PhotonNumberDistribution::zeros([cut, 0, 0]);
        let mut v = (-lambda).exp();
        for n in 0..=cut {
            if n > 0 {
                v *= lambda / n as f64;
            }
            p.set([n, 0, 0], v);
        }
        p
    }

    #[test]
    fn stirling_values() {
        let s = stirling_first(6);
        assert_eq!(s[3][1], 2.0);
        assert_eq!(s[3][2], -3.0);
        assert_eq!(s[6][3], -225.0);
        assert_eq!(s[6][6], 1.0);
    }

    #[test]
    fn poisson_factorial_moments() {
        let (raw, warnings) = photon_moments(&poisson_distribution(1.7, 80), 6).unwrap();
        assert!(warnings.is_empty());
        assert_relative_eq!(raw[&[2, 0, 0]], 1.7 * 1.7 + 1.7, max_relative = 1e-12);
        let t = intensity_moments(&raw, 6).unwrap();
        for k in 1..=6 {
            assert_relative_eq!(t.get([k, 0, 0]).unwrap(), 1.7f64.powi(k as i32), max_relative = 1e-10);
        }
        assert_relative_eq!(fano(&t, 0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn delta_distribution() {
        let mut p = PhotonNumberDistribution::zeros([2, 1, 1]);
        p.set([1, 0, 0], 1.0);
        let (raw, _) = photon_moments(&p, 4).unwrap();
        assert_eq!(raw[&[1, 0, 0]], 1.0);
        assert_eq!(raw[&[2, 0, 0]], 1.0);
        assert_eq!(raw[&[0, 1, 0]], 0.0);
    }

    #[test]
    fn json_uses_string_keys() {
        let mut t = MomentTable::new(2, MomentScope::PerMode);
        t.set([1, 0, 1], 0.25);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"1_0_1\":0.25"), "{s}");
        let back: MomentTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<MomentTable>(&s.replace("1_0_1", "1_0")).is_err());
    }

    #[test]
    fn thermal_fano_and_purity() {
        let n = 0.7;
        let mut t = MomentTable::new(2, MomentScope::PerMode);
        t.set([1, 0, 0], n);
        t.set([2, 0, 0], 2.0 * n * n);
        assert_relative_eq!(fano(&t, 0).unwrap(), 1.0 + n, epsilon = 1e-14);
        assert_relative_eq!(mu1_from_moments(&t, 0).unwrap(), 1.0 / (1.0 + 2.0 * n), epsilon = 1e-14);
        assert_eq!(mu1_from_moments(&MomentTable::new(2, MomentScope::PerMode), 0).is_err(), true);
    }

    #[test]
    fn independent_beams_not_below_shot_noise() {
        let mut t = MomentTable::new(2, MomentScope::PerBeam);
        t.set([1, 0, 0], 2.0);
        t.set([0, 1, 0], 2.0);
        t.set([2, 0, 0], 4.0);
        t.set([0, 2, 0], 4.0);
        t.set([1, 1, 0], 4.0);
        assert_relative_eq!(noise_reduction(&t, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn detection_inversion_of_thinned_poisson() {
        // thinned Poisson(λ) plus dark counts is Poisson(ηλ + d)
        let (eta, d, lambda): (f64, f64, f64) = (0.3, 0.01, 2.0);
        let mu = eta * lambda + d;
        let mut c = MomentTable::new(4, MomentScope::PerBeam);
        for k in indices(4) {
            c.set(k, mu.powi(k.iter().sum::<usize>() as i32));
        }
        let n = correct_for_detection(&c, &[DetectorSpec::new(eta, d); 3]).unwrap();
        for k in indices(4) {
            assert_relative_eq!(n.get(k).unwrap(), lambda.powi(k.iter().sum::<usize>() as i32), max_relative = 1e-12);
        }
    }
}
