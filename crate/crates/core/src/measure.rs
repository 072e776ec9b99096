//! Representing measure `sigma_n` of the value function,
//! `V(x) = int_{[x*, inf)} G_r(x, y) sigma_n(dy)`.
//!
//! In general only the Laplace transform is available:
//!
//! ```text
//! sigma_hat(g) = r q_hat(g) / E[exp(g I_T)],
//! q_hat(g)     = int_{x*}^inf exp(-g z) Q_n^{(M)}(z) dz.
//! ```
//!
//! For spectrally positive models `-I_T` is exponential and the measure has
//! the density `r Q_n^{(X)}` on `[x*, inf)`. No numerical Laplace inversion
//! is attempted for the other cases.

use crate::appell::appell_from_cumulants;
use crate::error::{Error, Result};
use crate::levy::{appell_of_factor, FactorDistribution, KilledSpec};
use crate::polynomial::{factorial, Polynomial};
use crate::quad::{gauss_laguerre, integrate};
use crate::solver::solve;

/// Distance from `Phi(r)` below which the spectrally negative transform
/// switches to its series form.
const SINGULARITY_BAND: f64 = 1e-6;

/// Evaluable `g -> sigma_hat_n(g)` for `g > 0`.
#[derive(Debug, Clone)]
pub struct SigmaTransform {
    spec: KilledSpec,
    n: usize,
    x_star: f64,
    /// `Q_k^{(M)}(x*)` for `k = 0..=n`, all nonnegative.
    q_at_star: Vec<f64>,
    inf_factor: FactorDistribution,
    sup_factor: FactorDistribution,
}

impl SigmaTransform {
    pub fn new(spec: &KilledSpec, n: usize) -> Result<Self> {
        let sol = solve(spec, n)?;
        let wh = spec.wiener_hopf_factors(n)?;
        let family = appell_of_factor(&wh.sup_factor, n)?;
        Ok(Self {
            spec: spec.clone(),
            n,
            x_star: sol.x_star,
            q_at_star: family.iter().map(|q| q.eval(sol.x_star)).collect(),
            inf_factor: wh.inf_factor,
            sup_factor: wh.sup_factor,
        })
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    /// `Q_0^{(M)}(x*), ..., Q_n^{(M)}(x*)`.
    pub fn sup_appell_at_threshold(&self) -> &[f64] {
        &self.q_at_star
    }

    /// `sum_{i=0}^n n!/(n-i)! exp(-g x*) / g^{i+1} Q_{n-i}^{(M)}(x*)`
    pub fn q_hat(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        let n = self.n;
        let e = (-gamma * self.x_star).exp();
        Ok((0..=n)
            .map(|i| factorial(n) / factorial(n - i) * e / gamma.powi(i as i32 + 1) * self.q_at_star[n - i])
            .sum())
    }

    /// `E[exp(g I_T)]`.
    pub fn inf_factor_mgf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        if let FactorDistribution::ExponentialMinus { rate } = self.inf_factor {
            return Ok(rate / (rate + gamma));
        }
        let FactorDistribution::ExponentialPlus { rate: phi } = self.sup_factor else {
            return Err(Error::UnsupportedFactorization);
        };
        let r = self.spec.r;
        let model = &self.spec.model;
        let d = gamma - phi;
        if d.abs() < SINGULARITY_BAND {
            // (Phi - g) / (r - psi(g)) = 1 / (psi'(Phi) + psi''(Phi) d / 2 + O(d^2))
            let slope = model.psi_derivative(phi, 1)? + 0.5 * model.psi_derivative(phi, 2)? * d;
            return Ok(r / (phi * slope));
        }
        Ok(r * (phi - gamma) / (phi * (r - model.psi(gamma)?)))
    }

    /// `r q_hat(g) / E[exp(g I_T)]`.
    pub fn sigma_hat(&self, gamma: f64) -> Result<f64> {
        Ok(self.spec.r * self.q_hat(gamma)? / self.inf_factor_mgf(gamma)?)
    }

    /// `r q_hat(g) sum_{k<=terms} g^k / k! Q_k^{(I)}(0)`: the series form,
    /// convergent for small `g`.
    pub fn sigma_hat_series(&self, gamma: f64, terms: usize) -> Result<f64> {
        let qi = appell_of_factor(&self.inf_factor_with_order(terms)?, terms)?;
        let series: f64 = qi
            .iter()
            .enumerate()
            .map(|(k, q)| gamma.powi(k as i32) / factorial(k) * q.eval(0.0))
            .sum();
        Ok(self.spec.r * self.q_hat(gamma)? * series)
    }

    fn inf_factor_with_order(&self, order: usize) -> Result<FactorDistribution> {
        match self.inf_factor {
            FactorDistribution::CumulantOnly(_) => {
                Ok(self.spec.wiener_hopf_factors(order)?.inf_factor)
            }
            ref f => Ok(f.clone()),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("transform argument gamma = {gamma} must be positive")))
    }
}

pub fn q_hat(spec: &KilledSpec, n: usize, gamma: f64) -> Result<f64> {
    SigmaTransform::new(spec, n)?.q_hat(gamma)
}

pub fn inf_factor_mgf(spec: &KilledSpec, gamma: f64) -> Result<f64> {
    SigmaTransform::new(spec, 1)?.inf_factor_mgf(gamma)
}

pub fn sigma_hat(spec: &KilledSpec, n: usize, gamma: f64) -> Result<f64> {
    SigmaTransform::new(spec, n)?.sigma_hat(gamma)
}

/// Density `r Q_n^{(X)}` of `sigma_n` for spectrally positive models
/// (continuous models included).
#[derive(Debug, Clone)]
pub struct SigmaDensity {
    r: f64,
    x_star: f64,
    hat_phi: f64,
    q_x: Polynomial,
}

impl SigmaDensity {
    pub fn new(spec: &KilledSpec, n: usize) -> Result<Self> {
        let hat_phi = spec.hat_phi_root()?;
        let sol = solve(spec, n)?;
        let q_x = appell_from_cumulants(&spec.xt_cumulants(n)?, n)?.swap_remove(n);
        Ok(Self { r: spec.r, x_star: sol.x_star, hat_phi, q_x })
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    /// `Q_n^{(X)}`
    pub fn xt_appell(&self) -> &Polynomial {
        &self.q_x
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if x < self.x_star {
            return Err(Error::OutOfSupport { x, x_star: self.x_star });
        }
        Ok(self.r * self.q_x.eval(x))
    }

    /// `H(z) = r^{-1} int_{x*}^z f_I(y - z) sigma(dy)` with
    /// `f_I(u) = Phi_hat exp(Phi_hat u)` on `u < 0`.
    pub fn h_function(&self, z: f64) -> Result<f64> {
        if z < self.x_star {
            return Err(Error::OutOfSupport { x: z, x_star: self.x_star });
        }
        let hp = self.hat_phi;
        let f = |y: f64| hp * (hp * (y - z)).exp() * self.q_x.eval(y);
        Ok(integrate(f, self.x_star, z, 1e-13, 1e-15).value)
    }
}

pub fn sigma_density_spectrally_positive(spec: &KilledSpec, n: usize, x: f64) -> Result<f64> {
    SigmaDensity::new(spec, n)?.density(x)
}

pub fn h_function(spec: &KilledSpec, n: usize, z: f64) -> Result<f64> {
    if !spec.model.is_spectrally_positive() {
        return Err(Error::UnsupportedEvaluation(
            "the density of I_T is only known in closed form for spectrally positive models",
        ));
    }
    SigmaDensity::new(spec, n)?.h_function(z)
}

/// `V(x) = E[Q_n^{(X)}(X_T + x) ; X_T + x >= x*]`.
///
/// Evaluated exactly for continuous models, where `X_T` has the two-sided
/// exponential density `Phi Phi_hat / (Phi + Phi_hat) * {exp(-Phi y), y >= 0;
/// exp(Phi_hat y), y < 0}`. Spectrally positive jump models need the Monte
/// Carlo estimator `mc::value_spectrally_positive_mc`.
pub fn value_spectrally_positive(spec: &KilledSpec, n: usize, x: f64) -> Result<f64> {
    if !spec.model.is_spectrally_positive() {
        return Err(Error::WrongSpectralSide { expected: "spectrally positive" });
    }
    if spec.model.has_jumps() || spec.model.gaussian_var == 0.0 {
        return Err(Error::UnsupportedEvaluation(
            "X_T density unavailable for jump models; use mc::value_spectrally_positive_mc",
        ));
    }
    let density = SigmaDensity::new(spec, n)?;
    let (phi, hat) = (spec.phi_root()?, density.hat_phi);
    let c = phi * hat / (phi + hat);
    let q = &density.q_x;
    let lower = density.x_star - x;

    let upper_start = lower.max(0.0);
    let (t, w) = gauss_laguerre(n / 2 + 2);
    let upper: f64 = t.iter().zip(&w).map(|(t, w)| w * q.eval(upper_start + x + t / phi)).sum::<f64>()
        * (-phi * upper_start).exp()
        / phi;
    let lower_part = if lower < 0.0 {
        integrate(|y: f64| q.eval(y + x) * (hat * y).exp(), lower, 0.0, 1e-13, 1e-15).value
    } else {
        0.0
    };
    Ok(c * (upper + lower_part))
}

/// `r int_{x*}^inf G_r(x, y) Q_n^{(X_T)}(y) dy` for standard Brownian motion,
/// with `G_r(x, y) = exp(-sqrt(2r) |x - y|) / sqrt(2r)` and
/// `Q_n^{(X_T)}(y) = (y^2 - n(n-1)/(2r)) y^{n-2}`.
pub fn brownian_resolvent_value(r: f64, n: usize, x: f64) -> Result<f64> {
    if !(r > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need r > 0 and n >= 1, got r = {r}, n = {n}")));
    }
    let rho = (2.0 * r).sqrt();
    let x_star = n as f64 / rho;
    let q = laplace_appell(r, n);
    let kernel = |y: f64| (-rho * (x - y).abs()).exp() / rho * q.eval(y);
    let upper = x_star.max(x) + 40.0 / rho;
    let value = if x > x_star {
        integrate(kernel, x_star, x, 1e-11, 1e-14).value + integrate(kernel, x, upper, 1e-11, 1e-14).value
    } else {
        integrate(kernel, x_star, upper, 1e-11, 1e-14).value
    };
    Ok(r * value)
}

/// Appell polynomial of `B_T`, `T ~ Exp(r)`: `(y^2 - n(n-1)/(2r)) y^{n-2}`.
pub fn laplace_appell(r: f64, n: usize) -> Polynomial {
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    if n >= 2 {
        c[n - 2] = -((n * (n - 1)) as f64) / (2.0 * r);
    }
    Polynomial::new(c)
}
