//! Finite-activity Lévy models killed at an independent exponential time.
//!
//! A [`LevyModel`] is a drift, a Gaussian variance and a finite list of
//! compound-Poisson jump components. Its Laplace exponent is
//!
//! ```text
//! psi(g) = a g + b^2 g^2 / 2 + sum_j rate_j (E[exp(g J_j)] - 1)
//! ```
//!
//! Note that `a` is the *uncompensated* drift: the small-jump compensator
//! `-g x 1{|x| <= 1}` of the general Lévy–Khinchine formula is folded into
//! it. For finite jump measures the two parameterizations describe the same
//! processes, but drift values are not interchangeable between them.
//!
//! [`KilledSpec`] adds the killing rate `r`; the Wiener–Hopf factors of
//! `X_T`, `T ~ Exp(r)`, are exponential on the side without jumps.

use serde::{Deserialize, Serialize};

use crate::appell::{
    appell_from_cumulants, moments_to_cumulants, CumulantSequence, MomentSequence, MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::polynomial::{binomial, factorial, Polynomial};

/// Jump-size distribution of one compound-Poisson component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JumpLaw {
    PointMass { size: f64 },
    /// `J ~ Exp(alpha)` on `(0, inf)`.
    ExponentialUp { alpha: f64 },
    /// `-J ~ Exp(alpha)`.
    ExponentialDown { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpComponent {
    pub rate: f64,
    pub law: JumpLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub drift: f64,
    pub gaussian_var: f64,
    pub jumps: Vec<JumpComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KilledSpec {
    pub model: LevyModel,
    pub r: f64,
}

impl JumpLaw {
    pub fn is_positive(&self) -> bool {
        match *self {
            JumpLaw::PointMass { size } => size > 0.0,
            JumpLaw::ExponentialUp { .. } => true,
            JumpLaw::ExponentialDown { .. } => false,
        }
    }

    /// `E[J^k]`
    pub fn raw_moment(&self, k: usize) -> f64 {
        match *self {
            JumpLaw::PointMass { size } => size.powi(k as i32),
            JumpLaw::ExponentialUp { alpha } => factorial(k) / alpha.powi(k as i32),
            JumpLaw::ExponentialDown { alpha } => {
                let m = factorial(k) / alpha.powi(k as i32);
                if k % 2 == 1 {
                    -m
                } else {
                    m
                }
            }
        }
    }

    /// `(lo, hi)`: the open interval where `E[exp(g J)]` is finite.
    pub fn mgf_domain(&self) -> (f64, f64) {
        match *self {
            JumpLaw::PointMass { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            JumpLaw::ExponentialUp { alpha } => (f64::NEG_INFINITY, alpha),
            JumpLaw::ExponentialDown { alpha } => (-alpha, f64::INFINITY),
        }
    }

    /// `d^k/dg^k E[exp(g J)]` for `k <= 2`; caller checks the domain.
    fn mgf_derivative(&self, g: f64, k: usize) -> f64 {
        match *self {
            JumpLaw::PointMass { size } => size.powi(k as i32) * (g * size).exp(),
            JumpLaw::ExponentialUp { alpha } => {
                factorial(k) * alpha / (alpha - g).powi(k as i32 + 1)
            }
            JumpLaw::ExponentialDown { alpha } => {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                sign * factorial(k) * alpha / (alpha + g).powi(k as i32 + 1)
            }
        }
    }

    fn reflected(&self) -> Self {
        match *self {
            JumpLaw::PointMass { size } => JumpLaw::PointMass { size: -size },
            JumpLaw::ExponentialUp { alpha } => JumpLaw::ExponentialDown { alpha },
            JumpLaw::ExponentialDown { alpha } => JumpLaw::ExponentialUp { alpha },
        }
    }
}

impl JumpComponent {
    pub fn new(rate: f64, law: JumpLaw) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("jump rate {rate} must be positive")));
        }
        match law {
            JumpLaw::PointMass { size } if size == 0.0 || !size.is_finite() => {
                Err(Error::InvalidParameter("point-mass jump size must be nonzero".into()))
            }
            JumpLaw::ExponentialUp { alpha } | JumpLaw::ExponentialDown { alpha }
                if !(alpha > 0.0 && alpha.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!("jump alpha {alpha} must be positive")))
            }
            _ => Ok(Self { rate, law }),
        }
    }
}

impl LevyModel {
    pub fn new(drift: f64, gaussian_var: f64, jumps: Vec<JumpComponent>) -> Result<Self> {
        if !drift.is_finite() || !(gaussian_var >= 0.0 && gaussian_var.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need finite drift and nonnegative Gaussian variance, got ({drift}, {gaussian_var})"
            )));
        }
        for j in &jumps {
            JumpComponent::new(j.rate, j.law)?;
        }
        Ok(Self { drift, gaussian_var, jumps })
    }

    /// Brownian motion `drift * t + sigma * B_t`.
    pub fn brownian(drift: f64, gaussian_var: f64) -> Result<Self> {
        Self::new(drift, gaussian_var, Vec::new())
    }

    pub fn has_jumps(&self) -> bool {
        !self.jumps.is_empty()
    }

    /// No upward jumps (continuous models qualify).
    pub fn is_spectrally_negative(&self) -> bool {
        self.jumps.iter().all(|j| !j.law.is_positive())
    }

    /// No downward jumps (continuous models qualify).
    pub fn is_spectrally_positive(&self) -> bool {
        self.jumps.iter().all(|j| j.law.is_positive())
    }

    /// The model of `-X`.
    pub fn reflected(&self) -> Self {
        Self {
            drift: -self.drift,
            gaussian_var: self.gaussian_var,
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpComponent { rate: j.rate, law: j.law.reflected() })
                .collect(),
        }
    }

    pub fn total_jump_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).sum()
    }

    pub fn exponent_domain(&self) -> (f64, f64) {
        self.jumps.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), j| {
            let (l, h) = j.law.mgf_domain();
            (lo.max(l), hi.min(h))
        })
    }

    fn check_domain(&self, gamma: f64) -> Result<()> {
        let (lo, hi) = self.exponent_domain();
        if gamma > lo && gamma < hi {
            Ok(())
        } else {
            Err(Error::ExponentDomain { gamma, lo, hi })
        }
    }

    /// Laplace exponent: `E[exp(g X_t)] = exp(t psi(g))`.
    pub fn psi(&self, gamma: f64) -> Result<f64> {
        self.check_domain(gamma)?;
        let jumps: f64 = self
            .jumps
            .iter()
            .map(|j| j.rate * (j.law.mgf_derivative(gamma, 0) - 1.0))
            .sum();
        Ok(self.drift * gamma + 0.5 * self.gaussian_var * gamma * gamma + jumps)
    }

    /// `psi'(g)` or `psi''(g)`.
    pub fn psi_derivative(&self, gamma: f64, k: usize) -> Result<f64> {
        self.check_domain(gamma)?;
        let jumps: f64 = self.jumps.iter().map(|j| j.rate * j.law.mgf_derivative(gamma, k)).sum();
        Ok(match k {
            1 => self.drift + self.gaussian_var * gamma + jumps,
            2 => self.gaussian_var + jumps,
            _ => return Err(Error::InvalidParameter(format!("psi derivative order {k} unsupported"))),
        })
    }

    /// Cumulants of `X_1`: the derivatives of `psi` at zero.
    pub fn x1_cumulants(&self, n: usize) -> Result<CumulantSequence> {
        let jump_moment = |k: usize| -> f64 {
            self.jumps.iter().map(|j| j.rate * j.law.raw_moment(k)).sum()
        };
        CumulantSequence::new(
            (0..=n)
                .map(|k| match k {
                    0 => 0.0,
                    1 => self.drift + jump_moment(1),
                    2 => self.gaussian_var + jump_moment(2),
                    _ => jump_moment(k),
                })
                .collect(),
        )
    }
}

/// Law of one Wiener–Hopf factor of `X_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FactorDistribution {
    /// `M_T ~ Exp(rate)` on `[0, inf)`.
    ExponentialPlus { rate: f64 },
    /// `-I_T ~ Exp(rate)`; the factor itself lives on `(-inf, 0]`.
    ExponentialMinus { rate: f64 },
    /// Only the cumulants are known.
    CumulantOnly(CumulantSequence),
}

impl FactorDistribution {
    pub fn cumulants(&self, order: usize) -> Result<CumulantSequence> {
        match self {
            FactorDistribution::ExponentialPlus { rate } => CumulantSequence::exponential(*rate, order),
            FactorDistribution::ExponentialMinus { rate } => {
                CumulantSequence::neg_exponential(*rate, order)
            }
            FactorDistribution::CumulantOnly(k) => k.truncate(order),
        }
    }

    /// Rate of the exponential law, if this factor is exponential.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            FactorDistribution::ExponentialPlus { rate }
            | FactorDistribution::ExponentialMinus { rate } => Some(rate),
            FactorDistribution::CumulantOnly(_) => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FactorDistribution::ExponentialPlus { rate } => 1.0 / rate,
            FactorDistribution::ExponentialMinus { rate } => -1.0 / rate,
            FactorDistribution::CumulantOnly(k) => k.get(1),
        }
    }

    /// Density of the factor at `x`, exponential kinds only.
    pub fn density(&self, x: f64) -> Result<f64> {
        match *self {
            FactorDistribution::ExponentialPlus { rate } => {
                Ok(if x >= 0.0 { rate * (-rate * x).exp() } else { 0.0 })
            }
            FactorDistribution::ExponentialMinus { rate } => {
                Ok(if x <= 0.0 { rate * (rate * x).exp() } else { 0.0 })
            }
            FactorDistribution::CumulantOnly(_) => {
                Err(Error::UnsupportedEvaluation("factor density is only known for exponential factors"))
            }
        }
    }

    /// `E[exp(g F)]`, exponential kinds only.
    pub fn mgf(&self, gamma: f64) -> Result<f64> {
        match *self {
            FactorDistribution::ExponentialPlus { rate } if gamma < rate => Ok(rate / (rate - gamma)),
            FactorDistribution::ExponentialMinus { rate } if gamma > -rate => Ok(rate / (rate + gamma)),
            FactorDistribution::ExponentialPlus { rate } => {
                Err(Error::ExponentDomain { gamma, lo: f64::NEG_INFINITY, hi: rate })
            }
            FactorDistribution::ExponentialMinus { rate } => {
                Err(Error::ExponentDomain { gamma, lo: -rate, hi: f64::INFINITY })
            }
            FactorDistribution::CumulantOnly(_) => {
                Err(Error::UnsupportedEvaluation("factor MGF is only known for exponential factors"))
            }
        }
    }
}

/// `M_T`, `I_T` and the cumulants of `X_T = M_T + I'_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerHopfFactors {
    pub sup_factor: FactorDistribution,
    pub inf_factor: FactorDistribution,
    pub xt_cumulants: CumulantSequence,
}

/// Appell family `Q_0..Q_n` of a factor.
///
/// Exponential factors use the closed forms `(x -+ k/rate) x^{k-1}`; a
/// cumulant-only factor goes through [`appell_from_cumulants`].
pub fn appell_of_factor(f: &FactorDistribution, n: usize) -> Result<Vec<Polynomial>> {
    let closed = |shift: f64| -> Vec<Polynomial> {
        (0..=n)
            .map(|k| {
                if k == 0 {
                    return Polynomial::constant(1.0);
                }
                let mut c = vec![0.0; k + 1];
                c[k] = 1.0;
                c[k - 1] = shift * k as f64;
                Polynomial::new(c)
            })
            .collect()
    };
    match f {
        FactorDistribution::ExponentialPlus { rate } => Ok(closed(-1.0 / rate)),
        FactorDistribution::ExponentialMinus { rate } => Ok(closed(1.0 / rate)),
        FactorDistribution::CumulantOnly(k) => appell_from_cumulants(k, n),
    }
}

/// Unique positive root of `f(l) = 0` where `f(0) < 0` and `f` is convex:
/// bracket by doubling, then bisect to machine precision.
fn convex_positive_root(f: impl Fn(f64) -> Result<f64>, cap: f64, r: f64) -> Result<f64> {
    let mut hi = 1.0_f64.min(cap);
    let mut tries = 0;
    while f(hi)? <= 0.0 {
        if hi >= cap || tries > 1100 {
            return Err(Error::NoRoot { r });
        }
        hi = (2.0 * hi).min(cap);
        tries += 1;
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint with the smaller residual.
    let (flo, fhi) = (f(lo)?.abs(), f(hi)?.abs());
    Ok(if flo < fhi { lo } else { hi })
}

impl KilledSpec {
    pub fn new(model: LevyModel, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("discount rate r = {r} must be positive")));
        }
        Ok(Self { model, r })
    }

    /// Sufficient condition for `E[exp(lambda |X_T|)] < inf`: both `+-lambda`
    /// lie in the exponent domain and `psi(+-lambda) < r`.
    pub fn validate_exponential_moments(&self, lambda: f64) -> bool {
        [lambda, -lambda]
            .iter()
            .all(|&g| matches!(self.model.psi(g), Ok(v) if v < self.r))
    }

    /// `Phi(r)`: the positive root of `psi(l) = r`, spectrally negative models.
    pub fn phi_root(&self) -> Result<f64> {
        if !self.model.is_spectrally_negative() {
            return Err(Error::WrongSpectralSide { expected: "spectrally negative" });
        }
        let (_, hi) = self.model.exponent_domain();
        let cap = if hi.is_finite() { hi - 1e-9 } else { f64::MAX };
        convex_positive_root(|l| Ok(self.model.psi(l)? - self.r), cap, self.r)
    }

    /// `Phi_hat(r)`: the positive root of `psi(-l) = r`, spectrally positive models.
    pub fn hat_phi_root(&self) -> Result<f64> {
        if !self.model.is_spectrally_positive() {
            return Err(Error::WrongSpectralSide { expected: "spectrally positive" });
        }
        KilledSpec { model: self.model.reflected(), r: self.r }.phi_root()
    }

    /// Raw moments of `X_T` from `G(u) (r - psi(u)) = r`:
    /// `mu_m = (1/r) sum_{k=1}^m C(m, k) c_k mu_{m-k}` with `c = x1_cumulants`.
    pub fn xt_moments(&self, n: usize) -> Result<MomentSequence> {
        let has_moments = (0..40).any(|i| self.validate_exponential_moments(0.5_f64.powi(i)));
        if !has_moments {
            return Err(Error::MomentDomain);
        }
        let c = self.model.x1_cumulants(n)?;
        let mut mu = vec![0.0; n + 1];
        mu[0] = 1.0;
        for m in 1..=n {
            mu[m] = (1..=m).map(|k| binomial(m, k) * c.get(k) * mu[m - k]).sum::<f64>() / self.r;
        }
        MomentSequence::new(mu)
    }

    pub fn xt_cumulants(&self, n: usize) -> Result<CumulantSequence> {
        Ok(moments_to_cumulants(&self.xt_moments(n)?))
    }

    /// Exact Wiener–Hopf factors, with cumulants up to `order`.
    ///
    /// The side without jumps is exponential; the other side is described by
    /// its cumulants `kappa(X_T) - kappa(exponential side)`. Continuous
    /// models with `b > 0` have two exponential factors.
    pub fn wiener_hopf_factors(&self, order: usize) -> Result<WienerHopfFactors> {
        if order > MAX_ORDER {
            return Err(Error::OrderCap { requested: order, cap: MAX_ORDER });
        }
        let order = order.max(1);
        let xt = self.xt_cumulants(order)?;

        if !self.model.has_jumps() && self.model.gaussian_var > 0.0 {
            return Ok(WienerHopfFactors {
                sup_factor: FactorDistribution::ExponentialPlus { rate: self.phi_root()? },
                inf_factor: FactorDistribution::ExponentialMinus { rate: self.hat_phi_root()? },
                xt_cumulants: xt,
            });
        }
        let mut last_err = Error::UnsupportedFactorization;
        if self.model.is_spectrally_negative() {
            match self.phi_root() {
                Ok(phi) => {
                    let sup = FactorDistribution::ExponentialPlus { rate: phi };
                    let inf = xt.sub(&sup.cumulants(order)?);
                    return Ok(WienerHopfFactors {
                        sup_factor: sup,
                        inf_factor: FactorDistribution::CumulantOnly(inf),
                        xt_cumulants: xt,
                    });
                }
                Err(e) => last_err = e,
            }
        }
        if self.model.is_spectrally_positive() {
            match self.hat_phi_root() {
                Ok(hat) => {
                    let inf = FactorDistribution::ExponentialMinus { rate: hat };
                    let sup = xt.sub(&inf.cumulants(order)?);
                    return Ok(WienerHopfFactors {
                        sup_factor: FactorDistribution::CumulantOnly(sup),
                        inf_factor: inf,
                        xt_cumulants: xt,
                    });
                }
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    /// `Q^{(M)}_0..Q^{(M)}_n` for a spectrally positive model, recovered from
    /// `Q^{(X)}_m = Q^{(M)}_m + (m / Phi_hat) Q^{(M)}_{m-1}`.
    pub fn recover_sup_appell_spectrally_positive(&self, n: usize) -> Result<Vec<Polynomial>> {
        let hat = self.hat_phi_root()?;
        let qx = appell_from_cumulants(&self.xt_cumulants(n.max(1))?, n)?;
        let mut qm: Vec<Polynomial> = Vec::with_capacity(n + 1);
        for (m, q) in qx.iter().enumerate() {
            let next = match m {
                0 => q.clone(),
                _ => q - &qm[m - 1].scale(m as f64 / hat),
            };
            qm.push(next);
        }
        Ok(qm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(r: f64) -> KilledSpec {
        KilledSpec::new(LevyModel::brownian(0.0, 1.0).unwrap(), r).unwrap()
    }

    fn down(alpha: f64, rate: f64) -> JumpComponent {
        JumpComponent::new(rate, JumpLaw::ExponentialDown { alpha }).unwrap()
    }

    fn up(alpha: f64, rate: f64) -> JumpComponent {
        JumpComponent::new(rate, JumpLaw::ExponentialUp { alpha }).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(LevyModel::brownian(0.0, 1.0).unwrap().psi(2.0).unwrap(), 2.0);
        assert_eq!(LevyModel::brownian(1.0, 0.0).unwrap().psi(3.0).unwrap(), 3.0);
        let m = LevyModel::new(0.0, 1.0, vec![down(2.0, 1.0)]).unwrap();
        // 1/2 + (2/3 - 1)
        assert!((m.psi(1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(matches!(m.psi(-2.0), Err(Error::ExponentDomain { .. })));
        assert!(LevyModel::new(0.0, 0.0, vec![up(1.5, 1.0)]).unwrap().psi(1.5).is_err());
    }

    #[test]
    fn psi_derivatives_match_differences() {
        let m = LevyModel::new(
            0.3,
            0.8,
            vec![
                down(2.0, 1.0),
                up(3.0, 0.5),
                JumpComponent::new(0.7, JumpLaw::PointMass { size: -0.4 }).unwrap(),
            ],
        )
        .unwrap();
        let h = 1e-5;
        for &g in &[-1.0, 0.0, 0.5, 1.2] {
            let d1 = (m.psi(g + h).unwrap() - m.psi(g - h).unwrap()) / (2.0 * h);
            let d2 = (m.psi(g + h).unwrap() - 2.0 * m.psi(g).unwrap() + m.psi(g - h).unwrap()) / (h * h);
            assert!((m.psi_derivative(g, 1).unwrap() - d1).abs() < 1e-8);
            assert!((m.psi_derivative(g, 2).unwrap() - d2).abs() < 1e-4);
        }
    }

    #[test]
    fn invalid_components() {
        assert!(JumpComponent::new(0.0, JumpLaw::PointMass { size: 1.0 }).is_err());
        assert!(JumpComponent::new(1.0, JumpLaw::PointMass { size: 0.0 }).is_err());
        assert!(JumpComponent::new(1.0, JumpLaw::ExponentialUp { alpha: -1.0 }).is_err());
        assert!(LevyModel::brownian(0.0, -1.0).is_err());
        assert!(KilledSpec::new(LevyModel::brownian(0.0, 1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn exponential_moment_validation() {
        assert!(bm(0.5).validate_exponential_moments(0.5));
        assert!(!bm(0.5).validate_exponential_moments(1.0));
        let drift = KilledSpec::new(LevyModel::brownian(1.0, 0.0).unwrap(), 1.0).unwrap();
        assert!(drift.validate_exponential_moments(0.5));
        let m = KilledSpec::new(LevyModel::new(0.0, 0.0, vec![up(1.0, 1.0)]).unwrap(), 5.0).unwrap();
        assert!(!m.validate_exponential_moments(1.0));
    }

    #[test]
    fn phi_examples() {
        assert!((bm(0.5).phi_root().unwrap() - 1.0).abs() < 1e-14);
        assert!((bm(2.0).phi_root().unwrap() - 2.0).abs() < 1e-14);
        let spec = KilledSpec::new(LevyModel::new(-0.5, 1.0, vec![down(3.0, 1.0)]).unwrap(), 1.0).unwrap();
        let phi = spec.phi_root().unwrap();
        // independent bracket oracle on the explicit exponent
        let f = |l: f64| -0.5 * l + 0.5 * l * l + (3.0 / (3.0 + l) - 1.0) - 1.0;
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((phi - lo).abs() < 1e-12);
        assert!((spec.model.psi(phi).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn phi_wrong_side_and_mirror() {
        let sp = KilledSpec::new(LevyModel::new(0.5, 1.0, vec![up(3.0, 1.0)]).unwrap(), 1.0).unwrap();
        assert!(matches!(sp.phi_root(), Err(Error::WrongSpectralSide { .. })));
        let sn = KilledSpec::new(sp.model.reflected(), 1.0).unwrap();
        assert!((sp.hat_phi_root().unwrap() - sn.phi_root().unwrap()).abs() < 1e-15);
        assert!((bm(0.5).hat_phi_root().unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(sn.hat_phi_root(), Err(Error::WrongSpectralSide { .. })));
        // A decreasing process never reaches a positive root.
        let dec = KilledSpec::new(LevyModel::new(-1.0, 0.0, vec![down(1.0, 1.0)]).unwrap(), 1.0).unwrap();
        assert!(matches!(dec.phi_root(), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn x1_cumulant_examples() {
        assert_eq!(LevyModel::brownian(0.0, 1.0).unwrap().x1_cumulants(4).unwrap().as_slice(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let lam = 1.7;
        let poisson = LevyModel::new(
            0.0,
            0.0,
            vec![JumpComponent::new(lam, JumpLaw::PointMass { size: 1.0 }).unwrap()],
        )
        .unwrap();
        assert!(poisson.x1_cumulants(6).unwrap().as_slice()[1..].iter().all(|&c| (c - lam).abs() < 1e-15));
        let alpha: f64 = 2.5;
        let cu = LevyModel::new(0.0, 0.0, vec![up(alpha, lam)]).unwrap().x1_cumulants(6).unwrap();
        for k in 1..=6 {
            let want = lam * factorial(k) / alpha.powi(k as i32);
            assert!((cu.get(k) - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn xt_moment_examples() {
        for r in [0.5, 2.0] {
            let mu = bm(r).xt_moments(4).unwrap();
            assert!((mu.get(2) - 1.0 / r).abs() < 1e-15);
            assert!((mu.get(4) - 6.0 / (r * r)).abs() < 1e-14);
            assert_eq!(mu.get(1), 0.0);
        }
        let s = KilledSpec::new(LevyModel::brownian(0.3, 1.0).unwrap(), 0.8).unwrap();
        assert!((s.xt_moments(2).unwrap().get(1) - 0.3 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn laplace_mgf_series() {
        // E exp(g B_T) = 2r / (2r - g^2) = sum_j (g^2 / 2r)^j, so
        // mu_{2j} = (2j)! / (2r)^j and odd moments vanish.
        let r = 0.7;
        let mu = bm(r).xt_moments(12).unwrap();
        for k in 0..=12 {
            let want = if k % 2 == 0 { factorial(k) / (2.0 * r).powi(k as i32 / 2) } else { 0.0 };
            assert!((mu.get(k) - want).abs() <= 1e-10 * want.max(1.0), "k={k}");
        }
    }

    #[test]
    fn factors_brownian() {
        let wh = bm(0.5).wiener_hopf_factors(4).unwrap();
        assert_eq!(wh.sup_factor, FactorDistribution::ExponentialPlus { rate: 1.0 });
        assert_eq!(wh.inf_factor, FactorDistribution::ExponentialMinus { rate: 1.0 });
    }

    #[test]
    fn factors_one_sided() {
        let sn = KilledSpec::new(LevyModel::new(0.0, 1.0, vec![down(2.0, 1.0)]).unwrap(), 1.0).unwrap();
        let wh = sn.wiener_hopf_factors(6).unwrap();
        assert_eq!(wh.sup_factor, FactorDistribution::ExponentialPlus { rate: sn.phi_root().unwrap() });

        let sp = KilledSpec::new(LevyModel::new(0.2, 1.0, vec![up(3.0, 1.0)]).unwrap(), 1.0).unwrap();
        let wh = sp.wiener_hopf_factors(6).unwrap();
        let hat = sp.hat_phi_root().unwrap();
        assert_eq!(wh.inf_factor, FactorDistribution::ExponentialMinus { rate: hat });
        let mu1 = sp.xt_moments(1).unwrap().get(1);
        assert!((wh.sup_factor.mean() - (mu1 + 1.0 / hat)).abs() < 1e-14);

        let two = KilledSpec::new(LevyModel::new(0.0, 1.0, vec![up(3.0, 1.0), down(2.0, 1.0)]).unwrap(), 1.0).unwrap();
        assert!(matches!(two.wiener_hopf_factors(4), Err(Error::UnsupportedFactorization)));
    }

    #[test]
    fn factors_pure_drift() {
        let s = KilledSpec::new(LevyModel::brownian(1.0, 0.0).unwrap(), 1.0).unwrap();
        let wh = s.wiener_hopf_factors(5).unwrap();
        assert_eq!(wh.sup_factor, FactorDistribution::ExponentialPlus { rate: 1.0 });
        let inf = wh.inf_factor.cumulants(5).unwrap();
        assert!(inf.as_slice().iter().all(|c| c.abs() < 1e-12));
        let s = KilledSpec::new(LevyModel::brownian(-2.0, 0.0).unwrap(), 1.0).unwrap();
        let wh = s.wiener_hopf_factors(5).unwrap();
        assert_eq!(wh.inf_factor, FactorDistribution::ExponentialMinus { rate: 0.5 });
    }

    #[test]
    fn appell_of_exponential_factors() {
        let phi = 1.3;
        let q = appell_of_factor(&FactorDistribution::ExponentialPlus { rate: phi }, 3).unwrap();
        assert_eq!(q[3].coeffs(), &[0.0, 0.0, -3.0 / phi, 1.0]);
        let q = appell_of_factor(&FactorDistribution::ExponentialMinus { rate: phi }, 2).unwrap();
        assert_eq!(q[2].coeffs(), &[0.0, 2.0 / phi, 1.0]);
        let q = appell_of_factor(
            &FactorDistribution::CumulantOnly(CumulantSequence::normal(0.0, 1.0, 2).unwrap()),
            2,
        )
        .unwrap();
        assert_eq!(q[2].coeffs(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn recover_sup_family() {
        let q = bm(0.5).recover_sup_appell_spectrally_positive(5).unwrap();
        let rho = 1.0;
        for (m, p) in q.iter().enumerate().skip(1) {
            let mut want = vec![0.0; m + 1];
            want[m] = 1.0;
            want[m - 1] = -(m as f64) / rho;
            for k in 0..=m {
                assert!((p.coeff(k) - want[k]).abs() < 1e-10, "m={m} k={k}");
            }
        }
        assert_eq!(bm(0.5).recover_sup_appell_spectrally_positive(0).unwrap(), vec![Polynomial::constant(1.0)]);

        let sp = KilledSpec::new(LevyModel::new(0.2, 1.0, vec![up(3.0, 1.0)]).unwrap(), 1.0).unwrap();
        let recovered = sp.recover_sup_appell_spectrally_positive(6).unwrap();
        let via_cumulants = appell_of_factor(&sp.wiener_hopf_factors(6).unwrap().sup_factor, 6).unwrap();
        for (a, b) in recovered.iter().zip(&via_cumulants) {
            for k in 0..=a.degree().unwrap() {
                assert!((a.coeff(k) - b.coeff(k)).abs() < 1e-8);
            }
        }
    }
}
