//! Cumulant/moment algebra and Appell polynomial families.
//!
//! The Appell family `Q_0, Q_1, ...` of a random variable `eta` is defined by
//! the generating identity
//!
//! ```text
//! exp(u x) / E[exp(u eta)] = sum_k u^k / k! * Q_k(x)
//! ```
//!
//! We build it from the cumulants: the constants `Q_j(0)` are the Taylor
//! coefficients of `exp(-K(u))` where `K` is the cumulant generating
//! function, and `Q_m(x) = sum_k C(m, k) x^k Q_{m-k}(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{binomial, factorial, Polynomial};

/// Highest cumulant/moment order the crate works with.
pub const MAX_ORDER: usize = 20;

/// `kappa[0..=N]` with `kappa[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSequence {
    kappa: Vec<f64>,
}

/// `mu[0..=N]` with `mu[0] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    mu: Vec<f64>,
}

fn check_order(len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::InvalidParameter("sequence must reach order 1".into()));
    }
    if len - 1 > MAX_ORDER {
        return Err(Error::OrderCap { requested: len - 1, cap: MAX_ORDER });
    }
    Ok(())
}

impl CumulantSequence {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        check_order(kappa.len())?;
        if kappa[0] != 0.0 {
            return Err(Error::InvalidParameter("kappa_0 must be 0".into()));
        }
        Ok(Self { kappa })
    }

    /// Build from `kappa_1..kappa_N`.
    pub fn from_orders(tail: &[f64]) -> Result<Self> {
        let mut kappa = Vec::with_capacity(tail.len() + 1);
        kappa.push(0.0);
        kappa.extend_from_slice(tail);
        Self::new(kappa)
    }

    fn from_fn(order: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..=order).map(|k| if k == 0 { 0.0 } else { f(k) }).collect())
    }

    pub fn normal(mean: f64, var: f64, order: usize) -> Result<Self> {
        Self::from_fn(order, |k| match k {
            1 => mean,
            2 => var,
            _ => 0.0,
        })
    }

    /// Exp(rate) on `(0, inf)`: `kappa_k = (k-1)! / rate^k`.
    pub fn exponential(rate: f64, order: usize) -> Result<Self> {
        if rate <= 0.0 {
            return Err(Error::InvalidParameter(format!("exponential rate {rate} must be positive")));
        }
        Self::from_fn(order, |k| factorial(k - 1) / rate.powi(k as i32))
    }

    /// Law of `-E` with `E ~ Exp(rate)`.
    pub fn neg_exponential(rate: f64, order: usize) -> Result<Self> {
        let mut s = Self::exponential(rate, order)?;
        for (k, c) in s.kappa.iter_mut().enumerate() {
            if k % 2 == 1 {
                *c = -*c;
            }
        }
        Ok(s)
    }

    pub fn point_mass(c: f64, order: usize) -> Result<Self> {
        Self::from_fn(order, |k| if k == 1 { c } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.kappa.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }

    pub fn get(&self, k: usize) -> f64 {
        self.kappa[k]
    }

    /// Keep orders `0..=order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::OrderInsufficient { requested: order, available: self.order() });
        }
        Self::new(self.kappa[..=order].to_vec())
    }

    /// Cumulants of an independent sum, up to the common order.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.kappa.len().min(other.kappa.len());
        Self { kappa: (0..n).map(|k| self.kappa[k] + other.kappa[k]).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.kappa.len().min(other.kappa.len());
        Self { kappa: (0..n).map(|k| self.kappa[k] - other.kappa[k]).collect() }
    }

    /// `Q_0(0), ..., Q_N(0)`: Taylor coefficients (times `k!`) of `exp(-K(u))`.
    pub fn appell_constants(&self) -> Vec<f64> {
        // F = exp(h) with h = -K satisfies F' = h' F.
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        for m in 1..=n {
            c[m] = (1..=m)
                .map(|k| binomial(m - 1, k - 1) * (-self.kappa[k]) * c[m - k])
                .sum();
        }
        c
    }
}

impl MomentSequence {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        check_order(mu.len())?;
        if mu[0] != 1.0 {
            return Err(Error::InvalidParameter("mu_0 must be 1".into()));
        }
        Ok(Self { mu })
    }

    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn get(&self, k: usize) -> f64 {
        self.mu[k]
    }

    /// Whether the Hankel matrix `[mu_{i+j}]` of order `floor(N/2)` is
    /// positive semidefinite, up to a relative tolerance.
    pub fn is_hankel_psd(&self) -> bool {
        let m = self.order() / 2 + 1;
        let h = |i: usize, j: usize| self.mu[i + j];
        let scale = (0..m).map(|i| h(i, i).abs()).fold(1.0, f64::max);
        let tol = 1e-10 * scale;
        // Cholesky with pivots clamped at zero when within tolerance.
        let mut l = vec![vec![0.0; m]; m];
        for j in 0..m {
            let d = h(j, j) - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
            if d < -tol {
                return false;
            }
            let d = d.max(0.0).sqrt();
            l[j][j] = d;
            for i in j + 1..m {
                let s = h(i, j) - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if d > tol.sqrt() {
                    l[i][j] = s / d;
                } else if s.abs() > tol.sqrt() {
                    return false;
                }
            }
        }
        true
    }
}

/// Classical log-series recursion
/// `kappa_m = mu_m - sum_{k=1}^{m-1} C(m-1, k-1) kappa_k mu_{m-k}`.
pub fn moments_to_cumulants(mu: &MomentSequence) -> CumulantSequence {
    let n = mu.order();
    let m = &mu.mu;
    let mut kappa = vec![0.0; n + 1];
    for j in 1..=n {
        let s: f64 = (1..j).map(|k| binomial(j - 1, k - 1) * kappa[k] * m[j - k]).sum();
        kappa[j] = m[j] - s;
    }
    CumulantSequence { kappa }
}

/// Inverse of [`moments_to_cumulants`]:
/// `mu_m = sum_{k=1}^{m} C(m-1, k-1) kappa_k mu_{m-k}`.
pub fn cumulants_to_moments(kappa: &CumulantSequence) -> MomentSequence {
    let n = kappa.order();
    let k = &kappa.kappa;
    let mut mu = vec![0.0; n + 1];
    mu[0] = 1.0;
    for j in 1..=n {
        mu[j] = (1..=j).map(|i| binomial(j - 1, i - 1) * k[i] * mu[j - i]).sum();
    }
    MomentSequence { mu }
}

/// Appell polynomials `Q_0..Q_n` of the variable with cumulants `kappa`.
pub fn appell_from_cumulants(kappa: &CumulantSequence, n: usize) -> Result<Vec<Polynomial>> {
    if n > kappa.order() {
        return Err(Error::OrderInsufficient { requested: n, available: kappa.order() });
    }
    let c = kappa.appell_constants();
    Ok((0..=n)
        .map(|m| Polynomial::new((0..=m).map(|k| binomial(m, k) * c[m - k]).collect()))
        .collect())
}

/// `z -> Q_m^{(a + b)}(z)` for independent `a`, `b`, given their Appell
/// families: `sum_k C(m, k) Q_k^{(a)}(z) Q_{m-k}^{(b)}(0)`.
pub fn appell_convolve(qa: &[Polynomial], qb: &[Polynomial], m: usize) -> Result<Polynomial> {
    for q in [qa, qb] {
        if q.len() < m + 1 {
            return Err(Error::LengthMismatch { needed: m + 1, got: q.len() });
        }
        if let Some(k) = (0..=m).find(|&k| q[k].degree() != Some(k)) {
            return Err(Error::InvalidParameter(format!(
                "family member {k} does not have degree {k}"
            )));
        }
    }
    Ok((0..=m).fold(Polynomial::zero(), |acc, k| {
        &acc + &qa[k].scale(binomial(m, k) * qb[m - k].eval(0.0))
    }))
}
