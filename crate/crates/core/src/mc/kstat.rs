//! k-statistics (unbiased cumulant estimators) up to order six, with
//! delete-one jackknife standard errors computed from running power sums.

pub const MAX_KSTAT_ORDER: usize = 6;

/// Power sums of deviations from a fixed center.
#[derive(Debug, Clone, Copy)]
struct PowerSums {
    n: f64,
    center: f64,
    s: [f64; MAX_KSTAT_ORDER + 1],
}

impl PowerSums {
    fn new(sample: &[f64]) -> Self {
        let center = super::pairwise_sum(sample) / sample.len() as f64;
        let mut s = [0.0; MAX_KSTAT_ORDER + 1];
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(sample.len()); MAX_KSTAT_ORDER + 1];
        for &x in sample {
            let d = x - center;
            let mut p = 1.0;
            for col in cols.iter_mut() {
                col.push(p);
                p *= d;
            }
        }
        for (j, col) in cols.iter().enumerate() {
            s[j] = super::pairwise_sum(col);
        }
        Self { n: sample.len() as f64, center, s }
    }

    fn without(&self, x: f64) -> Self {
        let d = x - self.center;
        let mut s = self.s;
        let mut p = 1.0;
        for sj in s.iter_mut() {
            *sj -= p;
            p *= d;
        }
        Self { n: self.n - 1.0, center: self.center, s }
    }

    /// `[_, k1, ..., k6]`; entries the sample size cannot support are NaN.
    fn kstats(&self) -> [f64; MAX_KSTAT_ORDER + 1] {
        let n = self.n;
        let a: Vec<f64> = self.s.iter().map(|s| s / n).collect();
        let d = a[1];
        // central moments from moments about the center
        let mut m = [0.0; MAX_KSTAT_ORDER + 1];
        for (j, mj) in m.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, ai) in a.iter().enumerate().take(j + 1) {
                acc += crate::polynomial::binomial(j, i) * ai * (-d).powi((j - i) as i32);
            }
            *mj = acc;
        }
        let (m2, m3, m4, m5, m6) = (m[2], m[3], m[4], m[5], m[6]);
        let f = |k: f64| if n > k { 1.0 } else { f64::NAN };
        let mut k = [0.0; MAX_KSTAT_ORDER + 1];
        k[1] = self.center + d;
        k[2] = f(1.0) * n / (n - 1.0) * m2;
        k[3] = f(2.0) * n * n / ((n - 1.0) * (n - 2.0)) * m3;
        k[4] = f(3.0) * n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2)
            / ((n - 1.0) * (n - 2.0) * (n - 3.0));
        k[5] = f(4.0) * n * n * n * ((n + 5.0) * m5 - 10.0 * (n - 1.0) * m2 * m3)
            / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0));
        k[6] = f(5.0)
            * n
            * n
            * ((n + 1.0) * (n * n + 15.0 * n - 4.0) * m6
                - 15.0 * (n - 1.0) * (n - 1.0) * (n + 4.0) * m2 * m4
                - 10.0 * (n - 1.0) * (n * n - n + 4.0) * m3 * m3
                + 30.0 * n * (n - 1.0) * (n - 2.0) * m2 * m2 * m2)
            / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0) * (n - 5.0));
        k
    }
}

/// `k_1..k_{k_max}` of a sample.
pub fn k_statistics(sample: &[f64], k_max: usize) -> Vec<f64> {
    assert!((1..=MAX_KSTAT_ORDER).contains(&k_max), "k_max must be in 1..=6");
    PowerSums::new(sample).kstats()[1..=k_max].to_vec()
}

/// Jackknife estimates for one or more paired samples of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeKStats {
    /// `estimates[s][k-1]`: k-statistic of order `k` for sample `s`.
    pub estimates: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    /// Standard error of `sum_s k_k(sample s)`, accounting for the pairing.
    pub sum_std_errors: Vec<f64>,
}

pub fn jackknife(samples: &[&[f64]], k_max: usize) -> JackknifeKStats {
    assert!((1..=MAX_KSTAT_ORDER).contains(&k_max), "k_max must be in 1..=6");
    let len = samples[0].len();
    assert!(samples.iter().all(|s| s.len() == len), "paired samples must have equal length");
    let sums: Vec<PowerSums> = samples.iter().map(|s| PowerSums::new(s)).collect();
    let full: Vec<[f64; MAX_KSTAT_ORDER + 1]> = sums.iter().map(PowerSums::kstats).collect();

    // Leave-one-out replicates, per sample and for the paired sum.
    let mut loo = vec![vec![Vec::with_capacity(len); k_max]; samples.len()];
    let mut loo_sum = vec![Vec::with_capacity(len); k_max];
    for i in 0..len {
        let mut total = [0.0; MAX_KSTAT_ORDER + 1];
        for (s, ps) in sums.iter().enumerate() {
            let k = ps.without(samples[s][i]).kstats();
            for order in 1..=k_max {
                loo[s][order - 1].push(k[order]);
                total[order] += k[order];
            }
        }
        for order in 1..=k_max {
            loo_sum[order - 1].push(total[order]);
        }
    }

    let nf = len as f64;
    let jk_se = |reps: &[f64]| -> f64 {
        let mean = super::pairwise_sum(reps) / nf;
        let dev: Vec<f64> = reps.iter().map(|r| (r - mean) * (r - mean)).collect();
        ((nf - 1.0) / nf * super::pairwise_sum(&dev)).sqrt()
    };
    JackknifeKStats {
        estimates: full.iter().map(|k| k[1..=k_max].to_vec()).collect(),
        std_errors: loo.iter().map(|per| per.iter().map(|r| jk_se(r)).collect()).collect(),
        sum_std_errors: loo_sum.iter().map(|r| jk_se(r)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appell::{moments_to_cumulants, MomentSequence};

    /// Exact expectation of each k-statistic over all `n`-tuples drawn from
    /// a small discrete law; unbiasedness means it equals the cumulant.
    #[test]
    fn unbiased_by_enumeration() {
        let values = [0.0, 1.0, 3.0];
        let probs = [0.5, 0.3, 0.2];
        let n = 7;
        let mut expect = [0.0; 7];
        let total = 3usize.pow(n as u32);
        let mut sample = vec![0.0; n];
        for code in 0..total {
            let mut c = code;
            let mut p = 1.0;
            for s in sample.iter_mut() {
                let idx = c % 3;
                c /= 3;
                *s = values[idx];
                p *= probs[idx];
            }
            let k = k_statistics(&sample, 6);
            for j in 0..6 {
                expect[j + 1] += p * k[j];
            }
        }
        let mu: Vec<f64> = (0..=6)
            .map(|j| values.iter().zip(&probs).map(|(v, p)| p * v.powi(j)).sum())
            .collect();
        let kappa = moments_to_cumulants(&MomentSequence::new(mu).unwrap());
        for j in 1..=6 {
            assert!(
                (expect[j] - kappa.get(j)).abs() < 1e-9,
                "order {j}: E k = {} vs kappa = {}",
                expect[j],
                kappa.get(j)
            );
        }
    }

    #[test]
    fn loo_matches_direct() {
        let xs = [0.3, -1.2, 2.5, 0.0, 4.1, -0.7, 1.9, 0.8, 3.3];
        let ps = PowerSums::new(&xs);
        let mut rest = xs.to_vec();
        rest.remove(4);
        let direct = PowerSums::new(&rest).kstats();
        let loo = ps.without(xs[4]).kstats();
        for j in 1..=4 {
            assert!((direct[j] - loo[j]).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn jackknife_mean_se() {
        // For k1 the jackknife SE equals the usual s / sqrt(n).
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let jk = jackknife(&[&xs], 2);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let s2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((jk.std_errors[0][0] - (s2 / n).sqrt()).abs() < 1e-12);
        assert!((jk.estimates[0][1] - s2).abs() < 1e-12);
    }
}
