//! The perpetual stopping problem `V(x) = sup_tau E_x[exp(-r tau) (X_tau^+)^n]`.
//!
//! The optimal rule is a first passage above `x*_n`, the largest nonnegative
//! root of the Appell polynomial `Q_n^{(M)}` of the running supremum `M_T`,
//! and
//!
//! ```text
//! V(x) = E_0[Q_n^{(M)}(M_T + x) ; M_T + x > x*_n].
//! ```
//!
//! When `M_T ~ Exp(rho)` (no upward jumps) this collapses to
//! `V(x) = (x*)^n exp(-rho (x* - x))` below the threshold and `x^n` above it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{appell_of_factor, FactorDistribution, JumpLaw, KilledSpec};
use crate::polynomial::Polynomial;
use crate::quad::gauss_laguerre;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingSolution {
    pub n: usize,
    pub x_star: f64,
    /// `Q_n^{(M)}`
    pub q_sup: Polynomial,
    pub sup_factor: FactorDistribution,
    pub spec: KilledSpec,
}

/// `(x^+)^n`
pub fn reward(n: usize, x: f64) -> f64 {
    x.max(0.0).powi(n as i32)
}

/// Whether `int_{(1, inf)} x^n Pi(dx) < inf`, which makes `E[M_T^n]` finite.
///
/// Every supported jump law has moments of all orders.
pub fn moment_condition(spec: &KilledSpec, _n: usize) -> bool {
    spec.model.jumps.iter().all(|j| match j.law {
        JumpLaw::PointMass { .. } | JumpLaw::ExponentialUp { .. } | JumpLaw::ExponentialDown { .. } => true,
    })
}

/// `E[q(M + x) ; M + x > a]` for `M ~ Exp(rate)`, by Gauss–Laguerre
/// quadrature (exact for polynomial `q`).
pub fn truncated_sup_expectation(rate: f64, q: &Polynomial, x: f64, a: f64) -> f64 {
    let m0 = (a - x).max(0.0);
    let nodes = q.degree().unwrap_or(0) / 2 + 2;
    let (t, w) = gauss_laguerre(nodes);
    let s: f64 = t.iter().zip(&w).map(|(t, w)| w * q.eval(m0 + x + t / rate)).sum();
    (-rate * m0).exp() * s
}

pub fn solve(spec: &KilledSpec, n: usize) -> Result<StoppingSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("reward power n must be at least 1".into()));
    }
    if !moment_condition(spec, n) {
        return Err(Error::UnsupportedEvaluation("jump measure lacks the n-th moment"));
    }
    let wh = spec.wiener_hopf_factors(n)?;
    let q_sup = appell_of_factor(&wh.sup_factor, n)?.swap_remove(n);
    let x_star = q_sup.largest_nonneg_root()?;
    Ok(StoppingSolution { n, x_star, q_sup, sup_factor: wh.sup_factor, spec: spec.clone() })
}

pub fn threshold(spec: &KilledSpec, n: usize) -> Result<f64> {
    Ok(solve(spec, n)?.x_star)
}

pub fn value(spec: &KilledSpec, n: usize, x: f64) -> Result<f64> {
    solve(spec, n)?.value(x)
}

impl StoppingSolution {
    /// The same problem data with the stopping threshold moved to `a`; the
    /// value becomes the payoff of the (generally suboptimal) rule "stop on
    /// first passage above `a`".
    pub fn with_threshold(&self, a: f64) -> Self {
        Self { x_star: a, ..self.clone() }
    }

    pub fn sup_rate(&self) -> Option<f64> {
        match self.sup_factor {
            FactorDistribution::ExponentialPlus { rate } => Some(rate),
            _ => None,
        }
    }

    fn require_sup_rate(&self) -> Result<f64> {
        self.sup_rate().ok_or(Error::UnsupportedEvaluation(
            "value needs an exponential supremum factor; for spectrally positive models use \
             measure::value_spectrally_positive or the Monte Carlo estimator",
        ))
    }

    /// Closed-form value.
    pub fn value(&self, x: f64) -> Result<f64> {
        if x >= self.x_star {
            return Ok(reward(self.n, x));
        }
        let rho = self.require_sup_rate()?;
        Ok(reward(self.n, self.x_star) * (-rho * (self.x_star - x)).exp())
    }

    /// `E_0[Q_n^{(M)}(M_T + x) ; M_T + x > x*]` by quadrature over the law of
    /// `M_T`. Agrees with [`value`](Self::value) at the optimal threshold.
    pub fn value_by_quadrature(&self, x: f64) -> Result<f64> {
        let rho = self.require_sup_rate()?;
        Ok(truncated_sup_expectation(rho, &self.q_sup, x, self.x_star))
    }

    /// Right-hand side of the fluctuation identity,
    /// `E_0[Q_n^{(M)}(M_T + x) ; M_T + x > a]`.
    pub fn fluctuation_rhs(&self, x: f64, a: f64) -> Result<f64> {
        let rho = self.require_sup_rate()?;
        Ok(truncated_sup_expectation(rho, &self.q_sup, x, a))
    }
}

/// Pass/fail of one condition together with the worst observed violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub pass: bool,
    pub worst: f64,
    pub points: usize,
}

/// Grid check of the conditions under which `V` is the value function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    /// Largest step between neighbours versus a Lipschitz bound.
    pub continuity: Condition,
    /// `V(x) -> 0` as `x -> -inf`, probed at `-50 / rho`.
    pub decay: Condition,
    /// `V = g` on `[x*, inf)`.
    pub equality: Condition,
    /// `V >= g` below `x*`.
    pub majorization: Condition,
    pub smooth_fit: Condition,
}

impl RepresentationReport {
    pub fn all_pass(&self) -> bool {
        [self.continuity, self.decay, self.equality, self.majorization, self.smooth_fit]
            .iter()
            .all(|c| c.pass)
    }
}

const CONDITION_TOL: f64 = 1e-9;
const SMOOTH_FIT_STEP: f64 = 1e-5;
const SMOOTH_FIT_TOL: f64 = 1e-6;

pub fn verify_representation_conditions(sol: &StoppingSolution, grid: &[f64]) -> Result<RepresentationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid must be nonempty".into()));
    }
    let rho = sol.require_sup_rate()?;
    let n = sol.n;
    let mut xs = grid.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let vs = xs.iter().map(|&x| sol.value(x)).collect::<Result<Vec<_>>>()?;

    let x_hi = xs[xs.len() - 1].max(sol.x_star);
    let lipschitz = (rho * reward(n, sol.x_star)).max(n as f64 * x_hi.max(0.0).powi(n as i32 - 1));
    let mut continuity = Condition { pass: true, worst: 0.0, points: xs.len().saturating_sub(1) };
    for (w, v) in xs.windows(2).zip(vs.windows(2)) {
        let excess = (v[1] - v[0]).abs() - lipschitz * (w[1] - w[0]) * (1.0 + CONDITION_TOL);
        continuity.worst = continuity.worst.max(excess);
        if excess > 1e-12 {
            continuity.pass = false;
        }
    }

    let far_left = sol.value(-50.0 / rho)?;
    let decay = Condition {
        pass: far_left <= 1e-15 * reward(n, sol.x_star).max(1.0),
        worst: far_left,
        points: 1,
    };

    let mut equality = Condition { pass: true, worst: 0.0, points: 0 };
    let mut majorization = Condition { pass: true, worst: 0.0, points: 0 };
    for (&x, &v) in xs.iter().zip(&vs) {
        let g = reward(n, x);
        let scale = g.max(1.0);
        if x >= sol.x_star {
            equality.points += 1;
            let d = (v - g).abs();
            equality.worst = equality.worst.max(d);
            equality.pass &= d <= CONDITION_TOL * scale;
        } else {
            majorization.points += 1;
            let d = (g - v).max(0.0);
            majorization.worst = majorization.worst.max(d);
            majorization.pass &= d <= CONDITION_TOL * scale;
        }
    }

    let gap = smooth_fit_check(sol, SMOOTH_FIT_STEP)?;
    let smooth_fit = Condition { pass: gap <= SMOOTH_FIT_TOL, worst: gap, points: 1 };

    Ok(RepresentationReport { continuity, decay, equality, majorization, smooth_fit })
}

/// `|V'(x*-) - g'(x*)|`, with `V'(x*-)` from a left difference with one
/// Richardson step: `2 D(h/2) - D(h)`.
pub fn smooth_fit_check(sol: &StoppingSolution, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let d = |h: f64| -> Result<f64> { Ok((sol.value(sol.x_star)? - sol.value(sol.x_star - h)?) / h) };
    let refined = 2.0 * d(0.5 * h)? - d(h)?;
    Ok((refined - reward_slope(sol.n, sol.x_star)).abs())
}

/// Smooth-fit gap from the plain first-order left difference; the error
/// scales linearly in `h`.
pub fn left_difference_gap(sol: &StoppingSolution, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let d = (sol.value(sol.x_star)? - sol.value(sol.x_star - h)?) / h;
    Ok((d - reward_slope(sol.n, sol.x_star)).abs())
}

fn reward_slope(n: usize, x: f64) -> f64 {
    n as f64 * x.max(0.0).powi(n as i32 - 1)
}

/// `Q_n^{(M)} < 0` at `samples` equispaced interior points of `(0, x*)`.
pub fn negativity_property(spec: &KilledSpec, n: usize, samples: usize) -> Result<bool> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two sample points".into()));
    }
    let sol = solve(spec, n)?;
    let step = sol.x_star / (samples + 1) as f64;
    Ok((1..=samples).all(|i| sol.q_sup.eval(i as f64 * step) < 0.0))
}

/// Thresholds `x*_1, ..., x*_{n_max}`.
pub fn thresholds(spec: &KilledSpec, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let wh = spec.wiener_hopf_factors(n_max)?;
    appell_of_factor(&wh.sup_factor, n_max)?
        .iter()
        .skip(1)
        .map(|q| q.largest_nonneg_root())
        .collect()
}

/// `x*_1 <= x*_2 <= ... <= x*_{n_max}`.
pub fn root_monotonicity(spec: &KilledSpec, n_max: usize) -> Result<bool> {
    let t = thresholds(spec, n_max)?;
    Ok(t.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0)))
}
