//! Monte Carlo verification on simulated finite-activity Lévy paths.
//!
//! Every path draws from its own ChaCha8 stream selected by
//! `(seed, path_index)`, paths are mapped in parallel and reduced by pairwise
//! summation in index order, so results are bit-identical regardless of the
//! thread count.

pub mod kstat;
mod passage;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::appell::{appell_from_cumulants, CumulantSequence};
use crate::error::{Error, Result};
use crate::levy::{JumpLaw, KilledSpec, LevyModel};
use crate::solver::{reward, solve};
use passage::{run_rules, Crossing};

/// Simulation controls shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Paths still alive (or not yet stopped) at `t_cap` are truncated.
    pub t_cap: f64,
}

impl SimConfig {
    pub fn new(dt: f64, n_paths: usize, seed: u64, t_cap: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        if !(t_cap > 0.0 && t_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_cap must be positive, got {t_cap}")));
        }
        Ok(Self { dt, n_paths, seed, t_cap })
    }

    /// Config with the default horizon `max(20/r, 50)`.
    pub fn for_spec(spec: &KilledSpec, dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        Self::new(dt, n_paths, seed, Self::default_t_cap(spec.r))
    }

    pub fn default_t_cap(r: f64) -> f64 {
        (20.0 / r).max(50.0)
    }

    fn check_against(&self, spec: &KilledSpec) -> Result<()> {
        Self::new(self.dt, self.n_paths, self.seed, self.t_cap)?;
        if self.t_cap < 10.0 / spec.r {
            log::warn!(
                "t_cap = {} is below 10/r = {}; truncation bias may be visible",
                self.t_cap,
                10.0 / spec.r
            );
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, n_effective: 0 };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let std_error = if n > 1 {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / ((n - 1) as f64 * n as f64)).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, n_effective: n }
    }

    /// `(mean - target) / std_error`. A degenerate sample (error at rounding
    /// level) scores zero when it matches the target to relative `1e-8`.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = self.mean - target;
        let scale = target.abs().max(1.0);
        if self.std_error > 1e-12 * scale {
            gap / self.std_error
        } else if gap.abs() <= 1e-8 * scale {
            0.0
        } else {
            gap.signum() * f64::INFINITY
        }
    }
}

/// Pairwise (cascade) summation; the split points depend only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Generator for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn par_map<T: Send, F: Fn(u64) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n as u64).into_par_iter().map(f).collect()
}

/// A monitored point of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PathPoint {
    t: f64,
    x: f64,
    /// Diffusion time elapsed since the previous point (zero across a jump).
    elapsed: f64,
}

/// Walks a path on the `dt` grid, inserting a pre-jump and a post-jump point
/// at each compound-Poisson epoch.
struct PathStepper<'a> {
    model: &'a LevyModel,
    sigma: f64,
    jump_rate: f64,
    dt: f64,
    horizon: f64,
    t: f64,
    x: f64,
    step: u64,
    next_jump: f64,
    jump_pending: bool,
    jumps: usize,
    rng: ChaCha8Rng,
}

impl<'a> PathStepper<'a> {
    fn new(model: &'a LevyModel, x0: f64, dt: f64, horizon: f64, rng: ChaCha8Rng) -> Self {
        let jump_rate = model.total_jump_rate();
        let mut s = Self {
            model,
            sigma: model.gaussian_var.sqrt(),
            jump_rate,
            dt,
            horizon,
            t: 0.0,
            x: x0,
            step: 0,
            next_jump: f64::INFINITY,
            jump_pending: false,
            jumps: 0,
            rng,
        };
        if jump_rate > 0.0 {
            s.next_jump = s.exp(jump_rate);
        }
        s
    }

    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        e / rate
    }

    fn diffuse(&mut self, h: f64) {
        self.x += self.model.drift * h;
        if self.sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.x += self.sigma * h.sqrt() * z;
        }
    }

    fn advance(&mut self) -> Option<PathPoint> {
        if self.jump_pending {
            self.jump_pending = false;
            self.x += sample_jump(self.model, self.jump_rate, &mut self.rng);
            self.jumps += 1;
            self.next_jump = self.t + self.exp(self.jump_rate);
            return Some(PathPoint { t: self.t, x: self.x, elapsed: 0.0 });
        }
        if self.t >= self.horizon {
            return None;
        }
        let grid_end = ((self.step + 1) as f64 * self.dt).min(self.horizon);
        let start = self.t;
        if self.next_jump <= grid_end {
            self.diffuse(self.next_jump - start);
            self.t = self.next_jump;
            self.jump_pending = true;
        } else {
            self.diffuse(grid_end - start);
            self.t = grid_end;
            self.step += 1;
        }
        Some(PathPoint { t: self.t, x: self.x, elapsed: self.t - start })
    }
}

fn sample_jump(model: &LevyModel, total_rate: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut u = rng.random::<f64>() * total_rate;
    let mut chosen = &model.jumps[model.jumps.len() - 1];
    for c in &model.jumps {
        if u < c.rate {
            chosen = c;
            break;
        }
        u -= c.rate;
    }
    match chosen.law {
        JumpLaw::PointMass { size } => size,
        JumpLaw::ExponentialUp { alpha } => {
            let e: f64 = Exp1.sample(rng);
            e / alpha
        }
        JumpLaw::ExponentialDown { alpha } => {
            let e: f64 = Exp1.sample(rng);
            -e / alpha
        }
    }
}

/// Exact sample of the maximum (`upper = true`) or minimum of a Brownian
/// bridge from `x0` to `x1` over diffusion time `h` with variance `var`.
fn bridge_extreme(x0: f64, x1: f64, var: f64, h: f64, upper: bool, rng: &mut ChaCha8Rng) -> f64 {
    if var <= 0.0 || h <= 0.0 {
        return if upper { x0.max(x1) } else { x0.min(x1) };
    }
    // 1 - U lies in (0, 1], keeping the logarithm finite.
    let u = 1.0 - rng.random::<f64>();
    let d = x1 - x0;
    let root = (d * d - 2.0 * var * h * u.ln()).sqrt();
    if upper {
        0.5 * (x0 + x1 + root)
    } else {
        0.5 * (x0 + x1 - root)
    }
}

/// One killed path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    /// Sampled `T ~ Exp(r)`.
    pub kill_time: f64,
    /// `min(T, t_cap)`.
    pub horizon: f64,
    /// False when `t_cap` truncated the path before `T`.
    pub killed: bool,
    /// `X` at the horizon.
    pub terminal: f64,
    /// Supremum over `[0, horizon)` of the continuous-time path; the
    /// diffusion between monitored points is filled in by exact Brownian
    /// bridge sampling.
    pub sup: f64,
    pub inf: f64,
    /// Maximum and minimum over the monitored points only.
    pub grid_sup: f64,
    pub grid_inf: f64,
    pub jumps: usize,
}

/// Simulate `X` from `x0` up to `min(T, t_cap)` with `T ~ Exp(r)` drawn from
/// the path's own stream.
pub fn simulate_killed_path(spec: &KilledSpec, x0: f64, cfg: &SimConfig, path_index: u64) -> PathRecord {
    let mut rng = path_rng(cfg.seed, path_index);
    let e: f64 = Exp1.sample(&mut rng);
    let kill_time = e / spec.r;
    let horizon = kill_time.min(cfg.t_cap);
    let var = spec.model.gaussian_var;
    let mut stepper = PathStepper::new(&spec.model, x0, cfg.dt, horizon, rng);
    let (mut sup, mut inf, mut grid_sup, mut grid_inf) = (x0, x0, x0, x0);
    let mut prev = x0;
    while let Some(p) = stepper.advance() {
        if p.elapsed > 0.0 {
            let hi = bridge_extreme(prev, p.x, var, p.elapsed, true, &mut stepper.rng);
            let lo = bridge_extreme(prev, p.x, var, p.elapsed, false, &mut stepper.rng);
            sup = sup.max(hi);
            inf = inf.min(lo);
        }
        sup = sup.max(p.x);
        inf = inf.min(p.x);
        grid_sup = grid_sup.max(p.x);
        grid_inf = grid_inf.min(p.x);
        prev = p.x;
    }
    PathRecord {
        kill_time,
        horizon,
        killed: kill_time <= cfg.t_cap,
        terminal: stepper.x,
        sup,
        inf,
        grid_sup,
        grid_inf,
        jumps: stepper.jumps,
    }
}

/// Bound on the discounted payoff ignored by truncating at `t_cap`: the
/// open fraction times `exp(-r t_cap)` times the largest reward seen at a
/// crossing (at least the reward at the threshold).
fn tail_bound(spec: &KilledSpec, n: usize, cfg: &SimConfig, a: f64, open: usize, max_level: f64) -> f64 {
    if open == 0 {
        return 0.0;
    }
    let level = if max_level.is_finite() { max_level.max(a) } else { a };
    open as f64 / cfg.n_paths as f64 * (-spec.r * cfg.t_cap).exp() * reward(n, level).max(1.0)
}

/// MC estimate of `E_x[exp(-r tau_a) (X_{tau_a}^+)^n]` for a threshold rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPayoff {
    pub threshold: f64,
    pub estimate: McEstimate,
    /// Upper bound on the discounted payoff of paths still below the
    /// threshold at `t_cap`.
    pub tail_bias_bound: f64,
    /// Fraction of paths stopped before `t_cap`.
    pub crossed_fraction: f64,
    pub config: SimConfig,
}

/// Payoff of `tau_a = inf{grid t : X_t > a}`, with killing applied as the
/// discount `exp(-r tau_a)` on paths run up to `t_cap`.
pub fn threshold_payoff(spec: &KilledSpec, n: usize, x0: f64, a: f64, cfg: &SimConfig) -> Result<ThresholdPayoff> {
    cfg.check_against(spec)?;
    let runs = par_map(cfg.n_paths, |i| run_rules(spec, n, x0, &[a], Crossing::Strict, cfg, i));
    let payoffs: Vec<f64> = runs.iter().map(|r| r.payoffs[0]).collect();
    let open = runs.iter().filter(|r| r.levels[0].is_nan()).count();
    let max_level = runs.iter().map(|r| r.levels[0]).filter(|l| !l.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdPayoff {
        threshold: a,
        estimate: McEstimate::from_samples(&payoffs),
        tail_bias_bound: tail_bound(spec, n, cfg, a, open, max_level),
        crossed_fraction: 1.0 - open as f64 / cfg.n_paths as f64,
        config: *cfg,
    })
}

/// Monte Carlo against analytic side of the fluctuation identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationReport {
    pub x: f64,
    pub a: f64,
    pub n: usize,
    /// `E_x[exp(-r H_a) X_{H_a}^n]` by simulation.
    pub lhs: McEstimate,
    /// `E_0[Q_n(M_T + x) 1{M_T + x > a}]` by quadrature.
    pub rhs: f64,
    pub z_score: f64,
    pub tail_bias_bound: f64,
    pub pass: bool,
    pub config: SimConfig,
}

/// Compare the simulated first-passage payoff over `a` (first grid time with
/// `X >= a`) with its Appell-polynomial representation.
pub fn fluctuation_identity_check(
    spec: &KilledSpec,
    n: usize,
    x: f64,
    a: f64,
    cfg: &SimConfig,
) -> Result<FluctuationReport> {
    cfg.check_against(spec)?;
    if a < x {
        return Err(Error::InvalidParameter(format!("level a = {a} must not lie below x = {x}")));
    }
    let sol = solve(spec, n)?;
    let rhs = sol.fluctuation_rhs(x, a)?;
    let runs = par_map(cfg.n_paths, |i| run_rules(spec, n, x, &[a], Crossing::Weak, cfg, i));
    let payoffs: Vec<f64> = runs.iter().map(|r| r.payoffs[0]).collect();
    let open = runs.iter().filter(|r| r.levels[0].is_nan()).count();
    let max_level = runs.iter().map(|r| r.levels[0]).filter(|l| !l.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let lhs = McEstimate::from_samples(&payoffs);
    let z_score = lhs.z_score(rhs);
    Ok(FluctuationReport {
        x,
        a,
        n,
        lhs,
        rhs,
        z_score,
        tail_bias_bound: tail_bound(spec, n, cfg, a, open, max_level),
        pass: z_score.abs() <= 3.0,
        config: *cfg,
    })
}

/// One threshold of an optimality scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub threshold: f64,
    pub estimate: McEstimate,
    /// Paired difference `payoff(x*) - payoff(a)` on common paths.
    pub diff_vs_optimal: McEstimate,
    pub tail_bias_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub x0: f64,
    pub x_star: f64,
    pub entries: Vec<ScanEntry>,
    /// Threshold with the largest estimated payoff.
    pub best_threshold: f64,
    /// True iff `payoff(x*) >= payoff(a) - 3 SE_diff` for every scanned `a`.
    pub pass: bool,
    pub config: SimConfig,
}

/// Payoff of every threshold rule in `thresholds` on common random numbers.
/// The threshold nearest the computed `x*` is taken as the reference and
/// must lie within `1e-9 * max(1, x*)` of it.
pub fn optimality_scan(
    spec: &KilledSpec,
    n: usize,
    x0: f64,
    thresholds: &[f64],
    cfg: &SimConfig,
) -> Result<ScanReport> {
    cfg.check_against(spec)?;
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("threshold list is empty".into()));
    }
    let x_star = solve(spec, n)?.x_star;
    let reference = thresholds
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x_star).abs().total_cmp(&(b.1 - x_star).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if (thresholds[reference] - x_star).abs() > 1e-9 * x_star.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold list must contain x* = {x_star}"
        )));
    }
    let runs = par_map(cfg.n_paths, |i| run_rules(spec, n, x0, thresholds, Crossing::Strict, cfg, i));
    let mut entries = Vec::with_capacity(thresholds.len());
    let ref_payoffs: Vec<f64> = runs.iter().map(|r| r.payoffs[reference]).collect();
    let mut pass = true;
    for (j, &a) in thresholds.iter().enumerate() {
        let payoffs: Vec<f64> = runs.iter().map(|r| r.payoffs[j]).collect();
        let diffs: Vec<f64> = ref_payoffs.iter().zip(&payoffs).map(|(p, q)| p - q).collect();
        let open = runs.iter().filter(|r| r.levels[j].is_nan()).count();
        let max_level = runs.iter().map(|r| r.levels[j]).filter(|l| !l.is_nan()).fold(f64::NEG_INFINITY, f64::max);
        let diff = McEstimate::from_samples(&diffs);
        if diff.mean < -3.0 * diff.std_error {
            pass = false;
        }
        entries.push(ScanEntry {
            threshold: a,
            estimate: McEstimate::from_samples(&payoffs),
            diff_vs_optimal: diff,
            tail_bias_bound: tail_bound(spec, n, cfg, a, open, max_level),
        });
    }
    let best_threshold = entries
        .iter()
        .max_by(|a, b| a.estimate.mean.total_cmp(&b.estimate.mean))
        .map(|e| e.threshold)
        .unwrap_or(x_star);
    Ok(ScanReport { n, x0, x_star, entries, best_threshold, pass, config: *cfg })
}

/// Sample cumulants of `M_T` and `I_T` with jackknife standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorCumulantEstimate {
    pub sup_cumulants: CumulantSequence,
    pub inf_cumulants: CumulantSequence,
    /// `sup_std_errors[k-1]` belongs to `kappa_k(M_T)`.
    pub sup_std_errors: Vec<f64>,
    pub inf_std_errors: Vec<f64>,
    /// Standard errors of `kappa_k(M_T) + kappa_k(I_T)` from the paired samples.
    pub sum_std_errors: Vec<f64>,
    /// Paths cut by `t_cap` before the kill time.
    pub truncated_paths: usize,
    pub config: SimConfig,
}

/// k-statistics of the simulated running supremum and infimum from `0`.
pub fn empirical_factor_cumulants(spec: &KilledSpec, k_max: usize, cfg: &SimConfig) -> Result<FactorCumulantEstimate> {
    cfg.check_against(spec)?;
    if !(1..=kstat::MAX_KSTAT_ORDER).contains(&k_max) {
        return Err(Error::InvalidParameter(format!("k_max must be in 1..=6, got {k_max}")));
    }
    if cfg.n_paths <= k_max + 1 {
        return Err(Error::InvalidParameter(format!(
            "need more than {} paths for order {k_max} k-statistics",
            k_max + 1
        )));
    }
    let paths = par_map(cfg.n_paths, |i| simulate_killed_path(spec, 0.0, cfg, i));
    let sup: Vec<f64> = paths.iter().map(|p| p.sup).collect();
    let inf: Vec<f64> = paths.iter().map(|p| p.inf).collect();
    let truncated_paths = paths.iter().filter(|p| !p.killed).count();
    let jk = kstat::jackknife(&[&sup, &inf], k_max);
    Ok(FactorCumulantEstimate {
        sup_cumulants: CumulantSequence::from_orders(&jk.estimates[0])?,
        inf_cumulants: CumulantSequence::from_orders(&jk.estimates[1])?,
        sup_std_errors: jk.std_errors[0].clone(),
        inf_std_errors: jk.std_errors[1].clone(),
        sum_std_errors: jk.sum_std_errors,
        truncated_paths,
        config: *cfg,
    })
}

/// Exact sample of `X_T` started from 0, `T ~ Exp(r)`.
fn sample_xt(spec: &KilledSpec, rng: &mut ChaCha8Rng) -> f64 {
    let model = &spec.model;
    let e: f64 = Exp1.sample(rng);
    let t = e / spec.r;
    let mut x = model.drift * t;
    if model.gaussian_var > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        x += (model.gaussian_var * t).sqrt() * z;
    }
    let rate = model.total_jump_rate();
    if rate > 0.0 {
        let mut clock = {
            let e: f64 = Exp1.sample(rng);
            e / rate
        };
        while clock <= t {
            x += sample_jump(model, rate, rng);
            let e: f64 = Exp1.sample(rng);
            clock += e / rate;
        }
    }
    x
}

/// `V(x) = E[Q_n^{(X_T)}(X_T + x) 1{X_T + x >= x*}]` for spectrally positive
/// models, from exact samples of `X_T`.
pub fn value_spectrally_positive_mc(spec: &KilledSpec, n: usize, x: f64, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.check_against(spec)?;
    if !spec.model.is_spectrally_positive() {
        return Err(Error::WrongSpectralSide { expected: "spectrally positive" });
    }
    let x_star = solve(spec, n)?.x_star;
    let q = appell_from_cumulants(&spec.xt_cumulants(n)?, n)?.pop().expect("order n family");
    let samples = par_map(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let y = sample_xt(spec, &mut rng) + x;
        if y >= x_star {
            q.eval(y)
        } else {
            0.0
        }
    });
    Ok(McEstimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpComponent;

    fn bm(r: f64) -> KilledSpec {
        KilledSpec::new(LevyModel::brownian(0.0, 1.0).unwrap(), r).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 10, 1, 50.0).is_err());
        assert!(SimConfig::new(1e-3, 0, 1, 50.0).is_err());
        assert!(SimConfig::new(1e-3, 10, 1, -1.0).is_err());
        assert_eq!(SimConfig::default_t_cap(0.1), 200.0);
        assert_eq!(SimConfig::default_t_cap(2.0), 50.0);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pure_drift_path_is_exact() {
        let spec = KilledSpec::new(LevyModel::brownian(1.0, 0.0).unwrap(), 0.5).unwrap();
        let cfg = SimConfig::new(1e-2, 1, 3, 1e6).unwrap();
        for i in 0..20 {
            let p = simulate_killed_path(&spec, 0.25, &cfg, i);
            assert!((p.terminal - (0.25 + p.kill_time)).abs() < 1e-9);
            assert!((p.sup - (0.25 + p.kill_time)).abs() < 1e-9);
            assert_eq!(p.inf, 0.25);
            assert!(p.killed);
        }
    }

    #[test]
    fn paths_are_deterministic() {
        let spec = KilledSpec::new(
            LevyModel::new(0.1, 0.5, vec![JumpComponent::new(1.0, JumpLaw::ExponentialDown { alpha: 2.0 }).unwrap()])
                .unwrap(),
            0.5,
        )
        .unwrap();
        let cfg = SimConfig::new(1e-2, 1, 42, 50.0).unwrap();
        let a = simulate_killed_path(&spec, 0.0, &cfg, 17);
        let b = simulate_killed_path(&spec, 0.0, &cfg, 17);
        let c = simulate_killed_path(&spec, 0.0, &cfg, 18);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_jump_count() {
        // Given T the count is Poisson(T), so E[count] = E[T] = 1/r.
        let model = LevyModel::new(0.0, 0.0, vec![JumpComponent::new(1.0, JumpLaw::PointMass { size: 1.0 }).unwrap()])
            .unwrap();
        let spec = KilledSpec::new(model, 0.5).unwrap();
        let cfg = SimConfig::new(0.05, 20_000, 9, 200.0).unwrap();
        let paths = par_map(cfg.n_paths, |i| simulate_killed_path(&spec, 0.0, &cfg, i));
        let counts: Vec<f64> = paths.iter().map(|p| p.jumps as f64).collect();
        let gaps: Vec<f64> = paths.iter().map(|p| p.jumps as f64 - p.horizon).collect();
        assert!(McEstimate::from_samples(&counts).z_score(2.0).abs() <= 3.0);
        assert!(McEstimate::from_samples(&gaps).z_score(0.0).abs() <= 3.0);
        // Unit jumps and no drift: the terminal value is the count.
        assert!(paths.iter().all(|p| p.terminal == p.jumps as f64 && p.sup == p.terminal));
    }

    #[test]
    fn bm_sup_mean() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-2, 20_000, 5).unwrap();
        let sups: Vec<f64> = par_map(cfg.n_paths, |i| simulate_killed_path(&spec, 0.0, &cfg, i).sup);
        let est = McEstimate::from_samples(&sups);
        assert!(est.z_score(1.0).abs() <= 3.0, "{est:?}");
    }

    #[test]
    fn immediate_stop_at_boundary() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-3, 100, 1).unwrap();
        // x0 > a stops at once with reward x0^n.
        let p = threshold_payoff(&spec, 2, 1.5, 1.0, &cfg).unwrap();
        assert_eq!(p.estimate.mean, 2.25);
        assert_eq!(p.estimate.std_error, 0.0);
        assert_eq!(p.crossed_fraction, 1.0);
    }

    #[test]
    fn pure_drift_threshold_payoff() {
        let (drift, r, x0, a) = (0.5, 0.25, 0.2, 1.3004);
        let spec = KilledSpec::new(LevyModel::brownian(drift, 0.0).unwrap(), r).unwrap();
        let dt = 1e-3;
        let cfg = SimConfig::for_spec(&spec, dt, 8, 1).unwrap();
        let p = threshold_payoff(&spec, 2, x0, a, &cfg).unwrap();
        // First grid time past a.
        let k = ((a - x0) / drift / dt).floor() + 1.0;
        let t = k * dt;
        let want = (-r * t).exp() * (x0 + drift * t).powi(2);
        assert!((p.estimate.mean - want).abs() < 1e-9, "{} vs {want}", p.estimate.mean);
        // Continuous-monitoring oracle within the grid error.
        let exact = (-r * (a - x0) / drift).exp() * a * a;
        assert!((p.estimate.mean - exact).abs() < 5.0 * dt);
    }

    #[test]
    fn degenerate_fluctuation_level() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-3, 50, 2).unwrap();
        let rep = fluctuation_identity_check(&spec, 2, 0.7, 0.7, &cfg).unwrap();
        assert!((rep.lhs.mean - 0.49).abs() < 1e-12);
        assert!((rep.rhs - 0.49).abs() < 1e-8);
        assert!(rep.pass, "{rep:?}");
        assert!(fluctuation_identity_check(&spec, 2, 1.0, 0.5, &cfg).is_err());
    }

    #[test]
    fn single_threshold_scan_passes() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-2, 200, 2).unwrap();
        let rep = optimality_scan(&spec, 1, 0.0, &[1.0], &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.entries[0].diff_vs_optimal.mean, 0.0);
        assert!(optimality_scan(&spec, 1, 0.0, &[0.5, 2.0], &cfg).is_err());
    }

    #[test]
    fn drift_only_scan_peaks_at_optimum() {
        // Payoff exp(-r a / d) a^n peaks at a = n d / r.
        let (d, r) = (1.0, 0.5);
        let spec = KilledSpec::new(LevyModel::brownian(d, 0.0).unwrap(), r).unwrap();
        let cfg = SimConfig::for_spec(&spec, 1e-3, 4, 2).unwrap();
        let x_star = solve(&spec, 1).unwrap().x_star;
        assert!((x_star - 2.0).abs() < 1e-10);
        let rep = optimality_scan(&spec, 1, 0.0, &[1.0, 1.5, x_star, 2.5, 3.0], &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.best_threshold, x_star);
    }

    #[test]
    fn estimates_are_bit_identical() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-2, 500, 77).unwrap();
        let a = threshold_payoff(&spec, 1, 0.0, 1.0, &cfg).unwrap();
        let b = threshold_payoff(&spec, 1, 0.0, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = SimConfig { seed: 78, ..cfg };
        assert_ne!(a.estimate.mean, threshold_payoff(&spec, 1, 0.0, 1.0, &c).unwrap().estimate.mean);
    }

    #[test]
    fn factor_cumulants_reject_high_order() {
        let spec = bm(0.5);
        let cfg = SimConfig::for_spec(&spec, 1e-2, 100, 1).unwrap();
        assert!(empirical_factor_cumulants(&spec, 7, &cfg).is_err());
        assert!(empirical_factor_cumulants(&spec, 0, &cfg).is_err());
    }

    /// Plain Euler stepping of the same rule, as a reference for the
    /// bridge-refined walker.
    fn stepped_payoff(spec: &KilledSpec, n: usize, x0: f64, a: f64, cfg: &SimConfig, i: u64) -> f64 {
        let mut stepper = PathStepper::new(&spec.model, x0, cfg.dt, cfg.t_cap, path_rng(cfg.seed ^ 0xABCD, i));
        while let Some(p) = stepper.advance() {
            if p.x > a {
                return (-spec.r * p.t).exp() * reward(n, p.x);
            }
        }
        0.0
    }

    #[test]
    fn bridge_walker_matches_stepping() {
        let model = LevyModel::new(
            -0.1,
            0.8,
            vec![
                JumpComponent::new(0.7, JumpLaw::ExponentialDown { alpha: 2.0 }).unwrap(),
                JumpComponent::new(0.3, JumpLaw::ExponentialUp { alpha: 4.0 }).unwrap(),
            ],
        )
        .unwrap();
        let spec = KilledSpec::new(model, 0.5).unwrap();
        let cfg = SimConfig::new(0.02, 40_000, 11, 30.0).unwrap();
        for (n, a) in [(1, 0.8), (2, 1.6)] {
            let fast = threshold_payoff(&spec, n, 0.0, a, &cfg).unwrap().estimate;
            let slow: Vec<f64> = par_map(cfg.n_paths, |i| stepped_payoff(&spec, n, 0.0, a, &cfg, i));
            let slow = McEstimate::from_samples(&slow);
            let z = (fast.mean - slow.mean) / fast.std_error.hypot(slow.std_error);
            assert!(z.abs() <= 3.5, "n={n}: {fast:?} vs {slow:?}");
        }
    }

    #[test]
    fn coarser_grid_misses_crossings() {
        // Positive drift keeps paths short; payoff at a suboptimal level
        // rises as monitoring gets finer.
        let spec = KilledSpec::new(LevyModel::brownian(0.5, 1.0).unwrap(), 0.5).unwrap();
        let est: Vec<McEstimate> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&dt| {
                let cfg = SimConfig::for_spec(&spec, dt, 20_000, 4).unwrap();
                threshold_payoff(&spec, 1, 0.0, 3.0, &cfg).unwrap().estimate
            })
            .collect();
        for w in est.windows(2) {
            assert!(w[1].mean >= w[0].mean - 3.0 * w[0].std_error.hypot(w[1].std_error), "{est:?}");
        }
    }

    #[test]
    fn xt_sampler_moments() {
        // BM with r = 0.5: X_T is Laplace with variance 1/r = 2.
        let spec = bm(0.5);
        let xs: Vec<f64> = (0..40_000u64).map(|i| sample_xt(&spec, &mut path_rng(3, i))).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(McEstimate::from_samples(&xs).z_score(0.0).abs() <= 3.0);
        assert!(McEstimate::from_samples(&sq).z_score(2.0).abs() <= 3.0);
    }
}
