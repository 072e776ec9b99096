use levy_stop::levy::{appell_of_factor, JumpComponent, JumpLaw, KilledSpec, LevyModel};
use levy_stop::mc::{
    empirical_factor_cumulants, fluctuation_identity_check, simulate_killed_path, threshold_payoff,
    value_spectrally_positive_mc, McEstimate, SimConfig,
};
use levy_stop::measure::value_spectrally_positive;
use levy_stop::{appell_convolve, appell_from_cumulants, solve, Error, Polynomial};

fn bm(r: f64) -> KilledSpec {
    KilledSpec::new(LevyModel::brownian(0.0, 1.0).unwrap(), r).unwrap()
}

fn sn_jump() -> KilledSpec {
    let jumps = vec![JumpComponent::new(1.0, JumpLaw::ExponentialDown { alpha: 2.0 }).unwrap()];
    KilledSpec::new(LevyModel::new(0.2, 0.5, jumps).unwrap(), 0.5).unwrap()
}

#[test]
fn laplace_moments_of_brownian_xt() {
    // E exp(g B_T) = 2r / (2r - g^2) = sum_j (g^2 / 2r)^j, so mu_{2j} = (2j)! / (2r)^j.
    for r in [0.5, 2.0] {
        let mu = bm(r).xt_moments(10).unwrap();
        let mut fact = 1.0;
        for m in 0..=10usize {
            if m > 0 {
                fact *= m as f64;
            }
            let want = if m % 2 == 0 { fact / (2.0 * r).powi(m as i32 / 2) } else { 0.0 };
            assert!((mu.get(m) - want).abs() <= 1e-10 * want.max(1.0), "r={r} m={m}");
        }
    }
}

#[test]
fn factor_convolution_matches_xt_family() {
    for r in [0.5, 2.0] {
        let spec = bm(r);
        let wh = spec.wiener_hopf_factors(8).unwrap();
        let up = appell_of_factor(&wh.sup_factor, 8).unwrap();
        let down = appell_of_factor(&wh.inf_factor, 8).unwrap();
        let direct = appell_from_cumulants(&spec.xt_cumulants(8).unwrap(), 8).unwrap();
        for m in 0..=8 {
            let c = appell_convolve(&up, &down, m).unwrap();
            let d = &c - &direct[m];
            assert!(d.coeffs().iter().all(|x| x.abs() <= 1e-8), "r={r} m={m}: {c} vs {}", direct[m]);
        }
    }
}

#[test]
fn solve_on_brownian_and_jump_models() {
    let sol = solve(&bm(0.5), 1).unwrap();
    assert!((sol.x_star - 1.0).abs() < 1e-12);
    assert!((sol.value(0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    assert_eq!(sol.value(2.0).unwrap(), 2.0);

    let spec = sn_jump();
    let phi = spec.phi_root().unwrap();
    for n in 1..=4 {
        let s = solve(&spec, n).unwrap();
        assert!((s.x_star - n as f64 / phi).abs() < 1e-10);
    }
}

#[test]
fn two_sided_models_need_the_empirical_route() {
    let jumps = vec![
        JumpComponent::new(1.0, JumpLaw::ExponentialUp { alpha: 3.0 }).unwrap(),
        JumpComponent::new(1.0, JumpLaw::ExponentialDown { alpha: 3.0 }).unwrap(),
    ];
    let spec = KilledSpec::new(LevyModel::new(0.0, 1.0, jumps).unwrap(), 0.5).unwrap();
    let err = solve(&spec, 1).unwrap_err();
    assert_eq!(err, Error::UnsupportedFactorization);
    assert!(err.to_string().contains("empirical_factor_cumulants"));
}

#[test]
fn brownian_sup_is_exponential() {
    let spec = bm(0.5);
    let cfg = SimConfig::for_spec(&spec, 1e-3, 100_000, 21).unwrap();
    let sups: Vec<f64> = (0..cfg.n_paths as u64).map(|i| simulate_killed_path(&spec, 0.0, &cfg, i).sup).collect();
    let est = McEstimate::from_samples(&sups);
    assert!(est.z_score(1.0).abs() <= 3.0, "{est:?}");
}

#[test]
fn threshold_payoff_brownian() {
    let spec = bm(0.5);
    let cfg = SimConfig::for_spec(&spec, 1e-3, 200_000, 7).unwrap();
    let p = threshold_payoff(&spec, 1, 0.0, 1.0, &cfg).unwrap();
    assert!(p.estimate.z_score((-1.0f64).exp()).abs() <= 3.0, "{p:?}");
    assert!(p.tail_bias_bound > 0.0 && p.tail_bias_bound < 1e-9);
}

#[test]
fn fluctuation_identity_second_power() {
    let spec = bm(0.5);
    let cfg = SimConfig::for_spec(&spec, 1e-3, 200_000, 8).unwrap();
    let rep = fluctuation_identity_check(&spec, 2, 0.0, 2.0, &cfg).unwrap();
    assert!((rep.rhs - 4.0 * (-2.0f64).exp()).abs() < 1e-8);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn factor_cumulants_of_one_sided_models() {
    let spec = bm(0.5);
    let cfg = SimConfig::for_spec(&spec, 1e-3, 50_000, 3).unwrap();
    let est = empirical_factor_cumulants(&spec, 2, &cfg).unwrap();
    // M_T ~ Exp(1): kappa_1 = kappa_2 = 1.
    for k in 1..=2 {
        let z = (est.sup_cumulants.get(k) - 1.0) / est.sup_std_errors[k - 1];
        assert!(z.abs() <= 3.0, "k={k}: {est:?}");
    }

    let spec = sn_jump();
    let cfg = SimConfig::for_spec(&spec, 1e-3, 50_000, 4).unwrap();
    let est = empirical_factor_cumulants(&spec, 3, &cfg).unwrap();
    let z = (est.sup_cumulants.get(1) - 1.0 / spec.phi_root().unwrap()) / est.sup_std_errors[0];
    assert!(z.abs() <= 3.0, "{est:?}");
    let xt = spec.xt_cumulants(3).unwrap();
    for k in 1..=3 {
        let z = (est.sup_cumulants.get(k) + est.inf_cumulants.get(k) - xt.get(k)) / est.sum_std_errors[k - 1];
        assert!(z.abs() <= 3.0, "k={k}: {est:?}");
    }
}

#[test]
fn spectrally_positive_value_by_sampling() {
    // Continuous case: the exact integral is available as an oracle.
    let spec = KilledSpec::new(LevyModel::brownian(-0.2, 0.7).unwrap(), 0.8).unwrap();
    let cfg = SimConfig::for_spec(&spec, 1e-3, 200_000, 5).unwrap();
    for (n, x) in [(1, 0.0), (2, -0.5), (3, 1.0)] {
        let exact = value_spectrally_positive(&spec, n, x).unwrap();
        let mc = value_spectrally_positive_mc(&spec, n, x, &cfg).unwrap();
        assert!(mc.z_score(exact).abs() <= 3.0, "n={n} x={x}: {mc:?} vs {exact}");
    }
    // Above the threshold the value is the reward.
    let jumps = vec![JumpComponent::new(0.8, JumpLaw::ExponentialUp { alpha: 3.0 }).unwrap()];
    let spec = KilledSpec::new(LevyModel::new(-0.3, 0.4, jumps).unwrap(), 1.0).unwrap();
    let x_star = solve(&spec, 2).unwrap().x_star;
    let mc = value_spectrally_positive_mc(&spec, 2, x_star + 3.0, &cfg).unwrap();
    assert!(mc.z_score((x_star + 3.0).powi(2)).abs() <= 3.0, "{mc:?}");
    let below = value_spectrally_positive_mc(&spec, 2, 0.0, &cfg).unwrap();
    assert!(below.mean >= 0.0 && below.mean <= Polynomial::monomial(2, 1.0).eval(x_star));
}
