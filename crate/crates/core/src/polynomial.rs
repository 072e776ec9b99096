//! Dense real polynomials in the monomial basis.
//!
//! Every Appell polynomial in the crate lives in a [`Polynomial`]; the
//! operations here are the small amount of algebra the solver needs
//! (evaluation, differentiation, products, shifted expectations) plus an
//! isolating real-root finder used for stopping thresholds.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coeffs[k]` multiplies `x^k`. Trailing zeros are trimmed on construction,
/// so the zero polynomial has no coefficients at all.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

/// Binomial coefficient as a float; exact for the orders used here (n <= 60).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(k: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Coefficients of `x -> p(x + shift)`.
    pub fn shift(&self, shift: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let mut pow = 1.0;
            for i in (0..=j).rev() {
                out[i] += c * binomial(j, i) * pow;
                pow *= shift;
            }
        }
        Self::new(out)
    }

    /// Given the raw moments `mu[0..]` of a random variable `eta`, return the
    /// polynomial `z -> E[p(eta + z)]`.
    ///
    /// Requires `mu.len() > deg p`.
    pub fn expectation_shifted(&self, mu: &[f64]) -> Result<Self> {
        let Some(deg) = self.degree() else {
            return Ok(Self::zero());
        };
        if mu.len() <= deg {
            return Err(Error::OrderInsufficient {
                requested: deg,
                available: mu.len().saturating_sub(1),
            });
        }
        let mut out = vec![0.0; deg + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            // (eta + z)^j = sum_i C(j, i) eta^(j-i) z^i
            for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
                *slot += c * binomial(j, i) * mu[j - i];
            }
        }
        Ok(Self::new(out))
    }

    /// Largest root in `[0, inf)`; `0.0` when the polynomial has no root
    /// there.
    ///
    /// Roots are isolated between consecutive critical points (found by
    /// recursing on the derivative), so even-multiplicity roots are found as
    /// well as sign changes. Each bracket is refined by bisection to machine
    /// precision.
    pub fn largest_nonneg_root(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::Degenerate("zero polynomial has no isolated roots"));
        }
        let lead = self.leading().abs();
        let sum: f64 = self.coeffs.iter().map(|c| c.abs()).sum();
        // Every root has modulus below 1 + max|c_k / lead| <= sum / lead.
        let upper = (2.0 * sum / lead).max(1.0);
        let roots = self.real_roots_in(0.0, upper);
        Ok(roots.last().copied().unwrap_or(0.0))
    }

    /// Real roots in `[lo, hi]`, sorted ascending, duplicates merged.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = match self.degree() {
            None | Some(0) => return Vec::new(),
            Some(1) => {
                let r = -self.coeffs[0] / self.coeffs[1];
                return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
            }
            Some(_) => {
                let crit = self.derivative().real_roots_in(lo, hi);
                let mut points = Vec::with_capacity(crit.len() + 2);
                points.push(lo);
                points.extend(crit.iter().copied().filter(|&c| c > lo && c < hi));
                points.push(hi);

                let mut roots = Vec::new();
                for w in points.windows(2) {
                    let (u, v) = (w[0], w[1]);
                    let (fu, fv) = (self.eval(u), self.eval(v));
                    if fu == 0.0 {
                        roots.push(u);
                    } else if fu.signum() != fv.signum() && fv != 0.0 {
                        roots.push(bisect_poly(self, u, v, fu));
                    }
                }
                if self.eval(hi) == 0.0 {
                    roots.push(hi);
                }
                // Critical points where the polynomial touches zero.
                for &c in &crit {
                    if self.eval(c).abs() <= 64.0 * f64::EPSILON * self.abs_eval(c) {
                        roots.push(c);
                    }
                }
                roots
            }
        };
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * b.abs().max(1.0));
        roots
    }

    /// `sum |c_k| |x|^k`, the scale of Horner roundoff at `x`.
    fn abs_eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }
}

fn bisect_poly(p: &Polynomial, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let lo_sign = flo.signum();
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "x")?,
                1 => write!(f, "{a}x")?,
                _ if a == 1.0 => write!(f, "x^{k}")?,
                _ => write!(f, "{a}x^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}
