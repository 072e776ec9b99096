//! First grid crossings of threshold rules.
//!
//! The diffusion part `C_t = a t + b W_t` is sampled at block ends and jump
//! epochs, and the grid values in between are filled in by Brownian bridge
//! bisection only where a crossing is possible. A bridge whose continuous
//! maximum exceeds the level with probability below `exp(-SKIP_EXPONENT)`
//! is not refined; every other grid point is sampled exactly from its
//! conditional law, so the monitored path has the law of the `dt`-grid Euler
//! path with exact jump epochs.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{path_rng, sample_jump, SimConfig};
use crate::levy::KilledSpec;
use crate::solver::reward;

const SKIP_EXPONENT: f64 = 40.0;
/// Grid steps per top-level block.
const BLOCK_STEPS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum Crossing {
    /// First monitored time with `X > a`.
    Strict,
    /// First monitored time with `X >= a`.
    Weak,
}

impl Crossing {
    fn hit(self, x: f64, a: f64) -> bool {
        match self {
            Crossing::Strict => x > a,
            Crossing::Weak => x >= a,
        }
    }
}

/// Outcome of one path under a set of threshold rules.
pub(super) struct RulePayoffs {
    pub payoffs: Vec<f64>,
    /// `X` at stopping for stopped rules, NaN for rules still open at `t_cap`.
    pub levels: Vec<f64>,
}

enum Item {
    /// Bridge of `C` between two monitored times; interior grid points unknown.
    Bridge { u: f64, cu: f64, v: f64, cv: f64 },
    Point { t: f64, c: f64 },
}

struct Rules<'a> {
    spec: &'a KilledSpec,
    n: usize,
    thresholds: &'a [f64],
    crossing: Crossing,
    payoffs: Vec<f64>,
    levels: Vec<f64>,
    open: usize,
}

impl Rules<'_> {
    fn lowest_open(&self) -> f64 {
        self.thresholds
            .iter()
            .zip(&self.levels)
            .filter(|(_, l)| l.is_nan())
            .map(|(a, _)| *a)
            .fold(f64::INFINITY, f64::min)
    }

    fn visit(&mut self, t: f64, x: f64) {
        for i in 0..self.thresholds.len() {
            if self.levels[i].is_nan() && self.crossing.hit(x, self.thresholds[i]) {
                self.payoffs[i] = (-self.spec.r * t).exp() * reward(self.n, x);
                self.levels[i] = x;
                self.open -= 1;
            }
        }
    }
}

/// Run one undiscounted path to `t_cap`, stopping each rule at its first
/// monitored crossing and weighting its reward by `exp(-r t)`.
pub(super) fn run_rules(
    spec: &KilledSpec,
    n: usize,
    x0: f64,
    thresholds: &[f64],
    crossing: Crossing,
    cfg: &SimConfig,
    path_index: u64,
) -> RulePayoffs {
    let k = thresholds.len();
    let mut rules = Rules {
        spec,
        n,
        thresholds,
        crossing,
        payoffs: vec![0.0; k],
        levels: vec![f64::NAN; k],
        open: k,
    };
    rules.visit(0.0, x0);
    if rules.open == 0 {
        return RulePayoffs { payoffs: rules.payoffs, levels: rules.levels };
    }

    let model = &spec.model;
    let mut rng = path_rng(cfg.seed, path_index);
    let var = model.gaussian_var;
    let jump_rate = model.total_jump_rate();
    let dt = cfg.dt;
    let horizon = cfg.t_cap;
    let exp = |rng: &mut ChaCha8Rng, rate: f64| -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / rate
    };
    let mut next_jump = if jump_rate > 0.0 { exp(&mut rng, jump_rate) } else { f64::INFINITY };

    // X_t = x0 + C_t + J_t with J the compound-Poisson part.
    let (mut t, mut c, mut jumps) = (0.0, 0.0, 0.0);
    let mut block = 0u64;
    let mut stack: Vec<Item> = Vec::with_capacity(64);
    while t < horizon && rules.open > 0 {
        let block_end = ((block + 1) * BLOCK_STEPS) as f64 * dt;
        let block_end = block_end.min(horizon);
        let at_jump = next_jump <= block_end;
        let v = if at_jump { next_jump } else { block_end };
        let h = v - t;
        let mut cv = c + model.drift * h;
        if var > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            cv += (var * h).sqrt() * z;
        }
        stack.push(Item::Point { t: v, c: cv });
        stack.push(Item::Bridge { u: t, cu: c, v, cv });
        let shift = x0 + jumps;
        while let Some(item) = stack.pop() {
            match item {
                Item::Point { t, c } => {
                    rules.visit(t, shift + c);
                    if rules.open == 0 {
                        break;
                    }
                }
                Item::Bridge { u, cu, v, cv } => {
                    // Interior grid indices lo..=hi.
                    let lo = (u / dt).floor() as u64 + 1;
                    let hi = ((v / dt).ceil() as u64).saturating_sub(1);
                    let (lo, hi) = (
                        if (lo as f64) * dt <= u { lo + 1 } else { lo },
                        if (hi as f64) * dt >= v { hi.saturating_sub(1) } else { hi },
                    );
                    if lo > hi {
                        continue;
                    }
                    let level = rules.lowest_open() - shift;
                    if cu < level && cv < level {
                        let gap = 2.0 * (level - cu) * (level - cv);
                        if var == 0.0 || gap > SKIP_EXPONENT * var * (v - u) {
                            continue;
                        }
                    }
                    let m = lo + (hi - lo) / 2;
                    let tm = m as f64 * dt;
                    let w = (tm - u) / (v - u);
                    let mut cm = cu + w * (cv - cu);
                    if var > 0.0 {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        cm += (var * (tm - u) * (v - tm) / (v - u)).sqrt() * z;
                    }
                    stack.push(Item::Bridge { u: tm, cu: cm, v, cv });
                    stack.push(Item::Point { t: tm, c: cm });
                    stack.push(Item::Bridge { u, cu, v: tm, cv: cm });
                }
            }
        }
        stack.clear();
        t = v;
        c = cv;
        if at_jump {
            jumps += sample_jump(model, jump_rate, &mut rng);
            next_jump = t + exp(&mut rng, jump_rate);
            if rules.open > 0 {
                rules.visit(t, x0 + c + jumps);
            }
        } else {
            block += 1;
        }
    }
    RulePayoffs { payoffs: rules.payoffs, levels: rules.levels }
}
