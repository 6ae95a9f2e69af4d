//! Truncated power series in three variables.

use std::ops::{Add, Mul, Sub};

/// Multi-index (k₁, k₂, k₃).
pub type Index3 = [usize; 3];

/// All multi-indices with total degree ≤ `order`, ordered by total degree then
/// lexicographically descending in the first beam.
pub fn indices(order: usize) -> Vec<Index3> {
    let mut out = Vec::new();
    for total in 0..=order {
        for k1 in (0..=total).rev() {
            for k2 in (0..=total - k1).rev() {
                out.push([k1, k2, total - k1 - k2]);
            }
        }
    }
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Product k₁!k₂!k₃!.
pub fn multi_factorial(k: Index3) -> f64 {
    factorial(k[0]) * factorial(k[1]) * factorial(k[2])
}

/// Dense series Σ c_k t₁^{k₁}t₂^{k₂}t₃^{k₃} truncated at total degree `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series3 {
    order: usize,
    coef: Vec<f64>,
}

impl Series3 {
    pub fn zero(order: usize) -> Self {
        let n = order + 1;
        Series3 {
            order,
            coef: vec![0.0; n * n * n],
        }
    }

    pub fn constant(order: usize, c: f64) -> Self {
        let mut s = Series3::zero(order);
        s.coef[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Series3::constant(order, 1.0)
    }

    /// The variable t_j.
    pub fn var(order: usize, j: usize) -> Self {
        let mut s = Series3::zero(order);
        let mut k = [0; 3];
        k[j] = 1;
        s.set(k, 1.0);
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn idx(&self, k: Index3) -> usize {
        let n = self.order + 1;
        (k[0] * n + k[1]) * n + k[2]
    }

    pub fn get(&self, k: Index3) -> f64 {
        if k.iter().sum::<usize>() > self.order {
            0.0
        } else {
            self.coef[self.idx(k)]
        }
    }

    pub fn set(&mut self, k: Index3, v: f64) {
        assert!(k.iter().sum::<usize>() <= self.order, "index {k:?} beyond order {}", self.order);
        let i = self.idx(k);
        self.coef[i] = v;
    }

    pub fn constant_term(&self) -> f64 {
        self.coef[0]
    }

    fn terms(&self) -> impl Iterator<Item = (Index3, f64)> + '_ {
        indices(self.order).into_iter().map(|k| (k, self.get(k)))
    }

    pub fn scale(&self, c: f64) -> Self {
        Series3 {
            order: self.order,
            coef: self.coef.iter().map(|v| v * c).collect(),
        }
    }

    /// Substitutes t_j → s_j t_j.
    pub fn scale_vars(&self, s: [f64; 3]) -> Self {
        let mut out = Series3::zero(self.order);
        for (k, v) in self.terms() {
            out.set(k, v * s[0].powi(k[0] as i32) * s[1].powi(k[1] as i32) * s[2].powi(k[2] as i32));
        }
        out
    }

    /// Multiplies by c·t_j.
    pub fn mul_var(&self, j: usize, c: f64) -> Self {
        let mut out = Series3::zero(self.order);
        if c == 0.0 {
            return out;
        }
        for (k, v) in self.terms() {
            if v == 0.0 || k.iter().sum::<usize>() == self.order {
                continue;
            }
            let mut kk = k;
            kk[j] += 1;
            out.set(kk, v * c);
        }
        out
    }

    /// Drops every term containing a variable outside `keep`.
    pub fn restrict(&self, keep: [bool; 3]) -> Self {
        let mut out = Series3::zero(self.order);
        for (k, v) in self.terms() {
            if (0..3).all(|j| keep[j] || k[j] == 0) {
                out.set(k, v);
            }
        }
        out
    }

    /// Sum of the terms with every k_j ≤ `max_per_var`, evaluated at `t`.
    pub fn eval_capped(&self, t: [f64; 3], max_per_var: usize) -> f64 {
        self.terms()
            .filter(|(k, _)| k.iter().all(|&x| x <= max_per_var))
            .map(|(k, v)| v * t[0].powi(k[0] as i32) * t[1].powi(k[1] as i32) * t[2].powi(k[2] as i32))
            .sum()
    }

    pub fn eval(&self, t: [f64; 3]) -> f64 {
        self.eval_capped(t, self.order)
    }

    /// exp of the series.
    pub fn exp(&self) -> Self {
        let c = self.constant_term();
        let mut g = self.clone();
        g.coef[0] = 0.0;
        let mut out = Series3::one(self.order);
        let mut term = Series3::one(self.order);
        for n in 1..=self.order {
            term = &(&term * &g) * (1.0 / n as f64);
            out = &out + &term;
        }
        out.scale(c.exp())
    }

    /// Natural log; the constant term must be positive.
    pub fn ln(&self) -> Self {
        let c = self.constant_term();
        assert!(c > 0.0, "log of a series with constant term {c}");
        let mut h = self.scale(1.0 / c);
        h.coef[0] = 0.0;
        let mut out = Series3::constant(self.order, c.ln());
        let mut term = Series3::one(self.order);
        for n in 1..=self.order {
            term = &term * &h;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            out = &out + &term.scale(sign / n as f64);
        }
        out
    }

    pub fn powf(&self, p: f64) -> Self {
        (&self.ln() * p).exp()
    }
}

impl Add for &Series3 {
    type Output = Series3;
    fn add(self, o: &Series3) -> Series3 {
        assert_eq!(self.order, o.order);
        Series3 {
            order: self.order,
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Series3 {
    type Output = Series3;
    fn sub(self, o: &Series3) -> Series3 {
        assert_eq!(self.order, o.order);
        Series3 {
            order: self.order,
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Series3 {
    type Output = Series3;
    fn mul(self, o: &Series3) -> Series3 {
        assert_eq!(self.order, o.order);
        let order = self.order;
        let mut out = Series3::zero(order);
        let lhs: Vec<(Index3, f64)> = self.terms().filter(|t| t.1 != 0.0).collect();
        let rhs: Vec<(Index3, f64)> = o.terms().filter(|t| t.1 != 0.0).collect();
        for (ka, va) in &lhs {
            let da: usize = ka.iter().sum();
            for (kb, vb) in &rhs {
                if da + kb.iter().sum::<usize>() > order {
                    continue;
                }
                let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                let i = out.idx(k);
                out.coef[i] += va * vb;
            }
        }
        out
    }
}

impl Mul<f64> for &Series3 {
    type Output = Series3;
    fn mul(self, c: f64) -> Series3 {
        self.scale(c)
    }
}
