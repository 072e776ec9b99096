//! Deterministic invariant suites, run by `levy-stop verify`.

use serde::Serialize;

use crate::appell::{
    appell_convolve, appell_from_cumulants, cumulants_to_moments, moments_to_cumulants, CumulantSequence,
};
use crate::error::Result;
use crate::levy::{appell_of_factor, FactorDistribution, JumpComponent, JumpLaw, KilledSpec, LevyModel};
use crate::measure::{brownian_resolvent_value, laplace_appell, SigmaDensity, SigmaTransform};
use crate::polynomial::{factorial, Polynomial};
use crate::quad::integrate_to_infinity;
use crate::solver::{
    root_monotonicity, smooth_fit_check, solve, thresholds, verify_representation_conditions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Appell,
    Wh,
    Stopping,
    Sigma,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Appell, Suite::Wh, Suite::Stopping, Suite::Sigma];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Appell => "appell",
            Suite::Wh => "wh",
            Suite::Stopping => "stopping",
            Suite::Sigma => "sigma",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        match s {
            "all" => Some(Self::ALL.to_vec()),
            _ => Self::ALL.iter().copied().find(|x| x.name() == s).map(|x| vec![x]),
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    /// Largest observed error, or the error message when the check could not run.
    pub detail: String,
}

struct Recorder {
    suite: Suite,
    out: Vec<CheckResult>,
}

impl Recorder {
    fn record(&mut self, name: impl Into<String>, outcome: Result<(f64, f64)>) {
        let name = name.into();
        let (pass, detail) = match outcome {
            Ok((err, tol)) => (err <= tol && err.is_finite(), format!("max error {err:.3e} (tol {tol:.0e})")),
            Err(e) => (false, e.to_string()),
        };
        self.out.push(CheckResult { suite: self.suite.name(), name, pass, detail });
    }

    fn flag(&mut self, name: impl Into<String>, outcome: Result<bool>) {
        let (pass, detail) = match outcome {
            Ok(b) => (b, String::from(if b { "holds" } else { "violated" })),
            Err(e) => (false, e.to_string()),
        };
        self.out.push(CheckResult { suite: self.suite.name(), name: name.into(), pass, detail });
    }
}

pub fn run(suites: &[Suite]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &suite in suites {
        let mut rec = Recorder { suite, out: Vec::new() };
        match suite {
            Suite::Appell => appell_suite(&mut rec),
            Suite::Wh => wh_suite(&mut rec),
            Suite::Stopping => stopping_suite(&mut rec),
            Suite::Sigma => sigma_suite(&mut rec),
        }
        out.extend(rec.out);
    }
    out
}

/// Reference models: Brownian motion and one jump model on each side.
pub fn reference_models() -> Vec<(&'static str, KilledSpec)> {
    let bm = KilledSpec::new(LevyModel::brownian(0.0, 1.0).expect("valid"), 0.5).expect("valid");
    let neg = KilledSpec::new(
        LevyModel::new(
            0.2,
            0.5,
            vec![JumpComponent::new(1.0, JumpLaw::ExponentialDown { alpha: 2.0 }).expect("valid")],
        )
        .expect("valid"),
        0.5,
    )
    .expect("valid");
    let pos = KilledSpec::new(
        LevyModel::new(
            -0.3,
            0.4,
            vec![JumpComponent::new(0.8, JumpLaw::ExponentialUp { alpha: 3.0 }).expect("valid")],
        )
        .expect("valid"),
        1.0,
    )
    .expect("valid");
    vec![("brownian", bm), ("negative-jumps", neg), ("positive-jumps", pos)]
}

fn max_coeff_gap(p: &Polynomial, q: &Polynomial) -> f64 {
    let len = p.coeffs().len().max(q.coeffs().len());
    (0..len).map(|k| (p.coeff(k) - q.coeff(k)).abs()).fold(0.0, f64::max)
}

fn hermite(m: usize) -> Polynomial {
    let mut c = vec![0.0; m + 1];
    for k in 0..=m / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[m - 2 * k] = sign * factorial(m) / (factorial(k) * factorial(m - 2 * k) * 2f64.powi(k as i32));
    }
    Polynomial::new(c)
}

fn appell_suite(rec: &mut Recorder) {
    rec.record(
        "normal(0,1) gives Hermite polynomials, m <= 10",
        (|| {
            let q = appell_from_cumulants(&CumulantSequence::normal(0.0, 1.0, 10)?, 10)?;
            Ok((q.iter().enumerate().map(|(m, p)| max_coeff_gap(p, &hermite(m))).fold(0.0, f64::max), 1e-10))
        })(),
    );
    rec.record(
        "Exp(lambda) gives (x - n/lambda) x^(n-1), n <= 8",
        (|| {
            let mut worst: f64 = 0.0;
            for lambda in [0.5, 1.0, std::f64::consts::SQRT_2, 3.0] {
                let q = appell_from_cumulants(&CumulantSequence::exponential(lambda, 8)?, 8)?;
                for (n, p) in q.iter().enumerate().skip(1) {
                    let want = &Polynomial::monomial(n, 1.0) - &Polynomial::monomial(n - 1, n as f64 / lambda);
                    worst = worst.max(max_coeff_gap(p, &want));
                }
            }
            Ok((worst, 1e-10))
        })(),
    );
    rec.record(
        "mean-value property E[Q_k(eta + z)] = z^k, k <= 8",
        (|| {
            let families = [
                CumulantSequence::normal(0.3, 1.0, 8)?,
                CumulantSequence::exponential(1.5, 8)?,
                CumulantSequence::neg_exponential(1.25, 8)?,
                CumulantSequence::point_mass(-0.4, 8)?,
            ];
            let mut worst: f64 = 0.0;
            for kappa in &families {
                let mu = cumulants_to_moments(kappa);
                for (k, q) in appell_from_cumulants(kappa, 8)?.iter().enumerate() {
                    let e = q.expectation_shifted(mu.as_slice())?;
                    worst = worst.max(max_coeff_gap(&e, &Polynomial::monomial(k, 1.0)));
                }
            }
            Ok((worst, 1e-10))
        })(),
    );
    rec.record(
        "derivative recursion Q_n' = n Q_(n-1)",
        (|| {
            let kappa = CumulantSequence::from_orders(&[0.4, 1.3, -0.2, 0.5, 0.1, -0.3])?;
            let q = appell_from_cumulants(&kappa, 6)?;
            let worst = (1..=6).map(|n| max_coeff_gap(&q[n].derivative(), &q[n - 1].scale(n as f64))).fold(0.0, f64::max);
            Ok((worst, 1e-12))
        })(),
    );
    rec.record(
        "moment-cumulant round trip",
        (|| {
            let kappa = CumulantSequence::from_orders(&[0.4, 1.3, -0.2, 0.5, 0.1, -0.3, 0.2, 0.05])?;
            let back = moments_to_cumulants(&cumulants_to_moments(&kappa));
            let worst = (1..=8).map(|k| (back.get(k) - kappa.get(k)).abs()).fold(0.0, f64::max);
            Ok((worst, 1e-10))
        })(),
    );
    rec.record(
        "Brownian X_T convolution (x^2 - n(n-1)/(2r)) x^(n-2), n <= 6",
        (|| {
            let mut worst: f64 = 0.0;
            for r in [0.5f64, 2.0] {
                let rho = (2.0 * r).sqrt();
                let up = appell_of_factor(&FactorDistribution::ExponentialPlus { rate: rho }, 6)?;
                let down = appell_of_factor(&FactorDistribution::ExponentialMinus { rate: rho }, 6)?;
                for n in 0..=6 {
                    worst = worst.max(max_coeff_gap(&appell_convolve(&up, &down, n)?, &laplace_appell(r, n)));
                }
            }
            Ok((worst, 1e-10))
        })(),
    );
}

fn wh_suite(rec: &mut Recorder) {
    for (name, spec) in reference_models() {
        rec.record(
            format!("{name}: cumulant additivity X_T = M_T + I_T, k <= 6"),
            (|| {
                let wh = spec.wiener_hopf_factors(6)?;
                let sum = wh.sup_factor.cumulants(6)?.add(&wh.inf_factor.cumulants(6)?);
                let xt = spec.xt_cumulants(6)?;
                let worst = (1..=6)
                    .map(|k| (sum.get(k) - xt.get(k)).abs() / xt.get(k).abs().max(1e-300))
                    .fold(0.0, f64::max);
                Ok((worst, 1e-8))
            })(),
        );
        rec.record(
            format!("{name}: exponent vanishes at 0 and equals r at the roots"),
            (|| {
                let m = &spec.model;
                let mut worst = m.psi(0.0)?.abs();
                if m.is_spectrally_negative() {
                    worst = worst.max((m.psi(spec.phi_root()?)? - spec.r).abs());
                }
                if m.is_spectrally_positive() {
                    worst = worst.max((m.psi(-spec.hat_phi_root()?)? - spec.r).abs());
                }
                Ok((worst, 1e-10))
            })(),
        );
        rec.record(
            format!("{name}: X_T moments from the exponent match convolution of factors"),
            (|| {
                let wh = spec.wiener_hopf_factors(6)?;
                let m = cumulants_to_moments(&wh.xt_cumulants);
                let direct = spec.xt_moments(6)?;
                let worst = (1..=6)
                    .map(|k| (m.get(k) - direct.get(k)).abs() / direct.get(k).abs().max(1.0))
                    .fold(0.0, f64::max);
                Ok((worst, 1e-9))
            })(),
        );
    }
    rec.flag(
        "two-sided model is rejected by the exact factorization",
        Ok({
            let two = KilledSpec::new(
                LevyModel::new(
                    0.0,
                    1.0,
                    vec![
                        JumpComponent::new(1.0, JumpLaw::ExponentialUp { alpha: 3.0 }).expect("valid"),
                        JumpComponent::new(1.0, JumpLaw::ExponentialDown { alpha: 2.0 }).expect("valid"),
                    ],
                )
                .expect("valid"),
                0.5,
            )
            .expect("valid");
            matches!(two.wiener_hopf_factors(4), Err(crate::Error::UnsupportedFactorization))
        }),
    );
}

fn stopping_suite(rec: &mut Recorder) {
    for (name, spec) in reference_models() {
        if spec.model.is_spectrally_negative() {
            rec.record(
                format!("{name}: x* = n / Phi and closed-form value, n <= 4"),
                (|| {
                    let phi = spec.phi_root()?;
                    let mut worst: f64 = 0.0;
                    for n in 1..=4 {
                        let sol = solve(&spec, n)?;
                        let nf = n as f64;
                        worst = worst.max((sol.x_star - nf / phi).abs());
                        for i in 0..=40 {
                            let x = -5.0 + (sol.x_star + 5.0) * i as f64 / 40.0;
                            let want = (nf / phi).powi(n as i32) * (-nf).exp() * (x * phi).exp();
                            worst = worst.max((sol.value(x)? - want).abs() / want);
                        }
                    }
                    Ok((worst, 1e-8))
                })(),
            );
            rec.record(
                format!("{name}: smooth fit at x*, n <= 4"),
                (|| {
                    let mut worst: f64 = 0.0;
                    for n in 1..=4 {
                        worst = worst.max(smooth_fit_check(&solve(&spec, n)?, 1e-5)?);
                    }
                    Ok((worst, 1e-6))
                })(),
            );
            rec.flag(
                format!("{name}: representation conditions on [-5, 2x*]"),
                (|| {
                    for n in 1..=4 {
                        let sol = solve(&spec, n)?;
                        let grid: Vec<f64> =
                            (0..=200).map(|i| -5.0 + (2.0 * sol.x_star + 5.0) * i as f64 / 200.0).collect();
                        if !verify_representation_conditions(&sol, &grid)?.all_pass() {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                })(),
            );
            rec.record(
                format!("{name}: quadrature value agrees with closed form"),
                (|| {
                    let sol = solve(&spec, 3)?;
                    let mut worst: f64 = 0.0;
                    for i in 0..=20 {
                        let x = -3.0 + 0.3 * i as f64;
                        worst = worst.max((sol.value_by_quadrature(x)? - sol.value(x)?).abs());
                    }
                    Ok((worst, 1e-9))
                })(),
            );
        }
        rec.flag(
            format!("{name}: Q_n^(M) < 0 on (0, x*), n <= 8"),
            (|| {
                for n in 1..=8 {
                    if !crate::solver::negativity_property(&spec, n, 100)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            })(),
        );
        rec.flag(format!("{name}: x*_1 <= ... <= x*_8"), root_monotonicity(&spec, 8));
        rec.flag(
            format!("{name}: x* positive for every n <= 8"),
            thresholds(&spec, 8).map(|t| t.iter().all(|&x| x > 0.0)),
        );
    }
    rec.record(
        "Brownian fluctuation identity a^n exp(-sqrt(2r)(a - x)), n <= 4",
        (|| {
            let spec = &reference_models()[0].1;
            let rho = (2.0 * spec.r).sqrt();
            let mut worst: f64 = 0.0;
            for n in 1..=4 {
                let sol = solve(spec, n)?;
                for (x, a) in [(0.0, 1.0), (-1.0, 2.0), (0.5, 3.0)] {
                    let want = f64::powi(a, n as i32) * (-rho * (a - x)).exp();
                    worst = worst.max((sol.fluctuation_rhs(x, a)? - want).abs());
                }
            }
            Ok((worst, 1e-8))
        })(),
    );
}

fn sigma_suite(rec: &mut Recorder) {
    for (name, spec) in reference_models() {
        rec.flag(
            format!("{name}: transform nonnegative on gamma grid"),
            (|| {
                for n in 1..=4 {
                    let t = SigmaTransform::new(&spec, n)?;
                    for g in [0.1, 0.5, 1.0, 2.0, 5.0] {
                        if t.sigma_hat(g)? < 0.0 {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            })(),
        );
        if !spec.model.is_spectrally_positive() {
            continue;
        }
        rec.record(
            format!("{name}: transform equals Laplace transform of r Q_n^(X) on [x*, inf)"),
            (|| {
                let mut worst: f64 = 0.0;
                for n in 1..=4 {
                    let t = SigmaTransform::new(&spec, n)?;
                    let d = SigmaDensity::new(&spec, n)?;
                    for g in [0.5, 1.0, 2.0, 5.0] {
                        let lt = integrate_to_infinity(
                            |y: f64| (-g * y).exp() * d.density(y).unwrap_or(0.0),
                            d.x_star(),
                            10.0,
                            1e-13,
                        )
                        .value;
                        worst = worst.max((t.sigma_hat(g)? - lt).abs());
                    }
                }
                Ok((worst, 1e-6))
            })(),
        );
        rec.record(
            format!("{name}: H(z) = Q_n^(M)(z) on 20 points of [x*, x* + 5), n <= 4"),
            (|| {
                let mut worst: f64 = 0.0;
                for n in 1..=4 {
                    let sol = solve(&spec, n)?;
                    let d = SigmaDensity::new(&spec, n)?;
                    for i in 0..20 {
                        let z = sol.x_star + 0.25 * i as f64;
                        worst = worst.max((d.h_function(z)? - sol.q_sup.eval(z)).abs());
                    }
                }
                Ok((worst, 1e-8))
            })(),
        );
    }
    rec.record(
        "Brownian resolvent integral equals closed-form value, n <= 4",
        (|| {
            let mut worst: f64 = 0.0;
            for r in [0.5, 2.0] {
                let spec = KilledSpec::new(LevyModel::brownian(0.0, 1.0)?, r)?;
                for n in 1..=4 {
                    let sol = solve(&spec, n)?;
                    for i in 0..=20 {
                        let x = -5.0 + 0.5 * i as f64;
                        worst = worst.max((brownian_resolvent_value(r, n, x)? - sol.value(x)?).abs());
                    }
                }
            }
            Ok((worst, 1e-6))
        })(),
    );
}
