use levy_stop::levy::{JumpComponent, JumpLaw, KilledSpec, LevyModel};
use levy_stop::measure::{SigmaDensity, SigmaTransform};
use levy_stop::{
    appell_convolve, appell_from_cumulants, cumulants_to_moments, moments_to_cumulants, solve, CumulantSequence,
    Polynomial,
};
use proptest::prelude::*;

fn gap(p: &Polynomial, q: &Polynomial) -> f64 {
    let len = p.coeffs().len().max(q.coeffs().len());
    (0..len).map(|k| (p.coeff(k) - q.coeff(k)).abs()).fold(0.0, f64::max)
}

fn cumulants() -> impl Strategy<Value = CumulantSequence> {
    prop::collection::vec(-1.0f64..1.0, 2..=10).prop_map(|tail| CumulantSequence::from_orders(&tail).unwrap())
}

/// Spectrally negative: Brownian part plus downward exponential or point jumps.
fn negative_model() -> impl Strategy<Value = KilledSpec> {
    (
        -0.5f64..0.5,
        0.05f64..2.0,
        prop::option::of((0.1f64..2.0, 0.5f64..4.0, any::<bool>())),
        0.1f64..3.0,
    )
        .prop_map(|(drift, var, jump, r)| {
            let jumps = jump
                .map(|(rate, p, exp)| {
                    let law = if exp { JumpLaw::ExponentialDown { alpha: p } } else { JumpLaw::PointMass { size: -1.0 / p } };
                    vec![JumpComponent::new(rate, law).unwrap()]
                })
                .unwrap_or_default();
            KilledSpec::new(LevyModel::new(drift, var, jumps).unwrap(), r).unwrap()
        })
}

fn positive_model() -> impl Strategy<Value = KilledSpec> {
    negative_model().prop_map(|s| KilledSpec::new(s.model.reflected(), s.r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_cumulant_round_trip(kappa in cumulants()) {
        let back = moments_to_cumulants(&cumulants_to_moments(&kappa));
        for k in 1..=kappa.order() {
            prop_assert!((back.get(k) - kappa.get(k)).abs() <= 1e-10 * kappa.get(k).abs().max(1.0));
        }
    }

    #[test]
    fn appell_family_shape(kappa in cumulants()) {
        let n = kappa.order();
        let q = appell_from_cumulants(&kappa, n).unwrap();
        prop_assert_eq!(q[0].coeffs(), &[1.0][..]);
        for m in 1..=n {
            prop_assert_eq!(q[m].degree(), Some(m));
            prop_assert_eq!(q[m].leading(), 1.0);
            // Coefficients grow like m!, so the bound is relative to their size.
            let lower = q[m - 1].scale(m as f64);
            let scale = lower.coeffs().iter().fold(1.0f64, |s, c| s.max(c.abs()));
            prop_assert!(gap(&q[m].derivative(), &lower) <= 1e-12 * scale);
        }
    }

    #[test]
    fn mean_value_property(mean in -1.0f64..1.0, var in 0.1f64..1.5, rate in 1.0f64..3.0, k in 0usize..=8) {
        for kappa in [
            CumulantSequence::normal(mean, var, 8).unwrap(),
            CumulantSequence::exponential(rate, 8).unwrap(),
            CumulantSequence::neg_exponential(rate, 8).unwrap(),
        ] {
            let mu = cumulants_to_moments(&kappa);
            let q = appell_from_cumulants(&kappa, k).unwrap().pop().unwrap();
            let e = q.expectation_shifted(mu.as_slice()).unwrap();
            prop_assert!(gap(&e, &Polynomial::monomial(k, 1.0)) <= 1e-10);
        }
    }

    #[test]
    fn convolution_of_point_masses_is_binomial(m in 0usize..=12) {
        let zero = appell_from_cumulants(&CumulantSequence::point_mass(0.0, 12).unwrap(), 12).unwrap();
        let q = appell_convolve(&zero, &zero, m).unwrap();
        prop_assert!(gap(&q, &Polynomial::monomial(m, 1.0)) == 0.0);
    }

    #[test]
    fn phi_root_solves_exponent(spec in negative_model()) {
        let phi = spec.phi_root().unwrap();
        prop_assert!((spec.model.psi(phi).unwrap() - spec.r).abs() <= 1e-12 * spec.r.max(1.0));
        let bigger = KilledSpec::new(spec.model.clone(), spec.r * 1.5).unwrap();
        prop_assert!(bigger.phi_root().unwrap() > phi);
    }

    #[test]
    fn wiener_hopf_additivity(spec in prop_oneof![negative_model(), positive_model()]) {
        let wh = spec.wiener_hopf_factors(8).unwrap();
        let sum = wh.sup_factor.cumulants(8).unwrap().add(&wh.inf_factor.cumulants(8).unwrap());
        let xt = spec.xt_cumulants(8).unwrap();
        for k in 1..=8 {
            prop_assert!((sum.get(k) - xt.get(k)).abs() <= 1e-8 * xt.get(k).abs().max(1e-12), "k={}", k);
        }
    }

    #[test]
    fn value_is_monotone_and_convex(spec in negative_model(), n in 1usize..=4) {
        let sol = solve(&spec, n).unwrap();
        let h = (sol.x_star + 5.0) / 200.0;
        let v: Vec<f64> = (0..=300).map(|i| sol.value(-5.0 + h * i as f64).unwrap()).collect();
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for w in v.windows(3) {
            prop_assert!(w[1] >= w[0] - 1e-12 * scale);
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9 * scale);
        }
    }

    #[test]
    fn sup_appell_nonnegative_at_threshold(spec in prop_oneof![negative_model(), positive_model()], n in 1usize..=6) {
        let t = SigmaTransform::new(&spec, n).unwrap();
        // Q_n^M(x*) is zero up to the rounding of x* times the slope n Q_{n-1}^M(x*).
        let values = t.sup_appell_at_threshold();
        let scale = values.iter().fold(1.0f64, |s, q| s.max(q.abs()));
        for &q in values {
            prop_assert!(q >= -1e-10 * scale, "{:?}", values);
        }
    }

    #[test]
    fn h_identity(spec in positive_model(), n in 1usize..=4) {
        let sol = solve(&spec, n).unwrap();
        let d = SigmaDensity::new(&spec, n).unwrap();
        let hat = spec.hat_phi_root().unwrap();
        for i in 0..10 {
            let z = sol.x_star + i as f64 / hat;
            let want = sol.q_sup.eval(z);
            prop_assert!((d.h_function(z).unwrap() - want).abs() <= 1e-8 * want.abs().max(1.0));
        }
    }
}
