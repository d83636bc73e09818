use ncho_core::ep::{chiellini_check, ep_residual, EpFamily, EpSample, ExponentialFamily, RationalFamily};
use proptest::prelude::*;

fn fig1() -> EpFamily {
    EpFamily::Exponential(ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 2.0, 0.0).unwrap())
}

fn fig2() -> EpFamily {
    EpFamily::Rational(RationalFamily::new(1.0, 2.0, 1.0, 1.0, 1.0, 1, 1.0).unwrap())
}

fn assorted_families() -> Vec<EpFamily> {
    let mut out = vec![fig1(), fig2()];
    out.push(EpFamily::Exponential(
        ExponentialFamily::with_derived_kconst(0.8, 2.0, 1.1, 0.7, 3.0).unwrap(),
    ));
    out.push(EpFamily::Exponential(
        ExponentialFamily::with_derived_kconst(1.0, 1.1, 1.0, 1.0, 1.5).unwrap(),
    ));
    for k in 1..=5 {
        out.push(EpFamily::Rational(
            RationalFamily::with_derived_small_delta(1.2, 3.0, 0.9, 0.6, 1.4, k).unwrap(),
        ));
    }
    out.push(fig1().standard_bopp_counterpart().unwrap());
    out.push(fig2().standard_bopp_counterpart().unwrap());
    out
}

#[test]
fn residual_on_hundred_one_point_grid() {
    for family in assorted_families() {
        for j in 0..=100 {
            let t = 0.1 * j as f64;
            let r = ep_residual(&family.sample(t).unwrap(), 1.0);
            assert!(r.abs() < 1e-10, "{} at t = {t}: {r}", family.label());
        }
    }
}

#[test]
fn negative_kconst_family() {
    // 𝕜 < 0 with Γ² + 8𝕜 > 0
    let f = ExponentialFamily::with_derived_kconst(1.0, 1.1, 1.0, 1.0, 1.5).unwrap();
    assert!(f.kconst < 0.0);
    assert!(f.rate() > 0.0 && f.rate() < 1.0);
}

#[test]
fn chiellini_constants_match_closed_forms() {
    let fit = chiellini_check(&fig1()).unwrap();
    assert!((fit.q - 0.25).abs() < 1e-12 && (fit.lambda_q + 2.0).abs() < 1e-12);
    for k in 1..=5u32 {
        let kf = k as f64;
        let f = RationalFamily::with_derived_small_delta(1.0, 2.0, 1.0, 1.0, 1.0, k).unwrap();
        let fit = chiellini_check(&EpFamily::Rational(f)).unwrap();
        assert!(
            (fit.q - (kf + 1.0) / (kf + 2.0).powi(2)).abs() < 1e-12,
            "k={k} q={}",
            fit.q
        );
        assert!((fit.lambda_q + kf + 2.0).abs() < 1e-12, "k={k} lambda={}", fit.lambda_q);
        assert!((fit.minus_root() - fit.lambda_q).abs() < 1e-12);
        assert!(fit.max_residual < 1e-10);
    }
}

#[test]
fn chiellini_independent_of_free_parameters() {
    let f = ExponentialFamily::with_derived_kconst(0.8, 2.0, 1.1, 0.7, 3.0).unwrap();
    let fit = chiellini_check(&EpFamily::Exponential(f)).unwrap();
    assert!((fit.q - 0.25).abs() < 1e-12 && (fit.lambda_q + 2.0).abs() < 1e-12);
}

fn finite_difference_gaps(family: &EpFamily, t: f64) -> [f64; 4] {
    let h = 1e-5;
    let (s, fwd, back): (EpSample, EpSample, EpSample) = (
        family.sample(t).unwrap(),
        family.sample(t + h).unwrap(),
        family.sample(t - h).unwrap(),
    );
    let rate = |f: f64, b: f64| (f - b) / (2.0 * h);
    [
        (rate(fwd.a, back.a) - s.a_dot).abs() / s.a_dot.abs().max(1.0),
        (rate(fwd.d, back.d) - s.d_dot).abs() / s.d_dot.abs().max(1.0),
        (rate(fwd.rho, back.rho) - s.rho_dot).abs() / s.rho_dot.abs().max(1.0),
        (rate(fwd.rho_dot, back.rho_dot) - s.rho_ddot).abs() / s.rho_ddot.abs().max(1.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_derivatives_match_central_differences(t in 0.01f64..10.0, which in 0usize..11) {
        let family = &assorted_families()[which];
        for gap in finite_difference_gaps(family, t) {
            prop_assert!(gap < 1e-6, "{} at t = {t}: {gap}", family.label());
        }
    }

    #[test]
    fn reduced_d_agrees_pointwise(t in 0.0f64..10.0, cconst in 1.05f64..50.0, gamma in 0.2f64..3.0) {
        let delta = (gamma * gamma + 4.0) / 4.0;
        let f = ExponentialFamily::new(1.0, delta, 1.0, gamma, cconst, 0.0).unwrap();
        prop_assert!((f.sample(t).unwrap().d - f.reduced_d(t)).abs() < 1e-13);
    }

    #[test]
    fn perturbed_constraint_is_rejected(factor in 1.001f64..1.5) {
        prop_assert!(ExponentialFamily::new(1.0, 1.25 * factor, 1.0, 1.0, 2.0, 0.0).is_err());
        prop_assert!(RationalFamily::new(1.0, 2.0 * factor, 1.0, 1.0, 1.0, 1, 1.0).is_err());
    }
}
