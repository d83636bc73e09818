use nalgebra::DMatrix;
use ncho_core::ep::{EpFamily, ExponentialFamily, RationalFamily};
use ncho_core::model::NcParams;
use ncho_core::qstate::{
    energy_expectation, energy_from_components, expect_angular, expect_cross_bilinears, expect_p, expect_p_squared,
    expect_x, expect_x_squared, expect_xp_symmetric, gram_matrix, quadrature_moments, uncertainties_commutative,
    uncertainties_noncommutative, MomentSet, PhaseMode, QuantumNumbers, StateContext,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STATES: [(u32, u32); 4] = [(0, 0), (1, 1), (2, 1), (3, 2)];
const TIMES: [f64; 3] = [0.3, 1.1, 2.5];

fn fig1() -> EpFamily {
    EpFamily::Exponential(ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 2.0, 0.0).unwrap())
}

fn fig2() -> EpFamily {
    EpFamily::Rational(RationalFamily::new(1.0, 2.0, 1.0, 1.0, 1.0, 1, 1.0).unwrap())
}

fn random_family(rng: &mut ChaCha8Rng) -> EpFamily {
    if rng.random_bool(0.5) {
        let (sigma, mu, gamma): (f64, f64, f64) = (
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..1.5),
            rng.random_range(0.2..2.0),
        );
        let kconst = rng.random_range(-0.1..0.5) * gamma * gamma;
        let mu4 = mu.powi(4);
        let delta = (8.0 * mu4 * kconst + mu4 * gamma * gamma + 4.0 * sigma * sigma) / (4.0 * sigma * mu4);
        let cconst = rng.random_range(1.2..10.0);
        EpFamily::Exponential(ExponentialFamily::new(sigma, delta, mu, gamma, cconst, kconst).unwrap())
    } else {
        let k = rng.random_range(1..=5);
        let (sigma, mu, gamma, chi) = (
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..1.5),
            rng.random_range(0.2..2.0),
            rng.random_range(0.5..2.0),
        );
        let k2 = (k as f64 + 2.0).powi(2);
        let mu4: f64 = f64::powi(mu, 4);
        let floor = (sigma * sigma * k2 + mu4 * gamma * gamma) / (k2 * sigma * mu4);
        let delta = floor * rng.random_range(1.0..2.0);
        EpFamily::Rational(RationalFamily::with_derived_small_delta(sigma, delta, mu, gamma, chi, k).unwrap())
    }
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}

fn compare(label: &str, q: &MomentSet, ctx: &StateContext, t: f64) -> f64 {
    let x2 = expect_x_squared(ctx, t).unwrap();
    let p2 = expect_p_squared(ctx, t).unwrap();
    let xp = expect_xp_symmetric(ctx, t).unwrap();
    let ang = expect_angular(ctx, t).unwrap();
    let (xx, pp) = expect_cross_bilinears(ctx, t).unwrap();
    let (x, p) = (expect_x(ctx, t).unwrap(), expect_p(ctx, t).unwrap());
    let pairs = [
        (q.norm, 1.0),
        (q.x1, x),
        (q.x2, x),
        (q.p1, p),
        (q.p2, p),
        (q.x1_sq, x2),
        (q.x2_sq, x2),
        (q.p1_sq, p2),
        (q.p2_sq, p2),
        (q.x1p1_sym, xp),
        (q.x2p2_sym, xp),
        (q.x2p1, ang.x2p1),
        (q.x1p2, ang.p2x1),
        (q.x2p1 - q.x1p2, ang.whole),
        (q.x1x2, xx),
        (q.p1p2, pp),
    ];
    let mut worst = 0.0f64;
    for (k, (got, want)) in pairs.iter().enumerate() {
        let gap = (got - want).abs() / want.abs().max(1.0);
        assert!(gap < 1e-8, "{label}: entry {k} quadrature {got} closed form {want}");
        worst = worst.max(gap);
    }
    worst
}

#[test]
fn closed_forms_match_quadrature() {
    for (name, family) in [("exponential", fig1()), ("rational", fig2())] {
        for (n, m) in STATES {
            for t in TIMES {
                let ctx = StateContext::new(QuantumNumbers::new(n, m), family.clone());
                let q = quadrature_moments(&ctx, t, PhaseMode::Zero).unwrap();
                compare(&format!("{name} ({n},{m}) t={t}"), &q, &ctx, t);
            }
        }
    }
}

#[test]
fn closed_forms_match_quadrature_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let family = random_family(&mut rng);
        let t = rng.random_range(0.0..5.0);
        let (n, m) = STATES[rng.random_range(0..STATES.len())];
        let ctx = StateContext::new(QuantumNumbers::new(n, m), family.clone());
        let q = quadrature_moments(&ctx, t, PhaseMode::Zero).unwrap();
        compare(&format!("{} ({n},{m}) t={t}", family.label()), &q, &ctx, t);
    }
}

#[test]
fn gram_matrix_is_identity() {
    let states: Vec<QuantumNumbers> = STATES.iter().map(|&(n, m)| QuantumNumbers::new(n, m)).collect();
    for family in [fig1(), fig2()] {
        for t in TIMES {
            let gram = gram_matrix(&states, &family, t).unwrap();
            let dev = (gram - DMatrix::<Complex64>::identity(4, 4)).map(|c| c.norm()).max();
            assert!(dev < 1e-8, "{} t={t}: {dev}", family.label());
        }
    }
}

#[test]
fn energy_assembly_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let family = random_family(&mut rng);
        let c: f64 = rng.random_range(-1.0..1.0);
        let (n, m) = (rng.random_range(0..6), rng.random_range(0..6));
        let ctx = StateContext::new(QuantumNumbers::new(n, m), family).with_c(move |_| Ok(c));
        let t = rng.random_range(0.0..6.0);
        let e = energy_expectation(&ctx, t).unwrap();
        let assembled = energy_from_components(&ctx, t).unwrap();
        assert!(close(e, assembled, 1e-12), "{e} vs {assembled}");
    }
}

#[test]
fn lewis_phase_does_not_move_expectations() {
    for (n, m) in STATES {
        let ctx = StateContext::new(QuantumNumbers::new(n, m), fig1()).with_c(|t| Ok(0.3 * t.sin()));
        let with = quadrature_moments(&ctx, 1.7, PhaseMode::Lewis).unwrap();
        let without = quadrature_moments(&ctx, 1.7, PhaseMode::Zero).unwrap();
        let fields = |s: &MomentSet| {
            [
                s.norm, s.x1_sq, s.x2_sq, s.p1_sq, s.p2_sq, s.x1p1_sym, s.x2p2_sym, s.x1p2, s.x2p1, s.x1x2, s.p1p2,
            ]
        };
        for (a, b) in fields(&with).iter().zip(fields(&without)) {
            assert!(close(*a, b, 1e-14), "({n},{m}): {a} vs {b}");
        }
    }
}

#[test]
fn second_moments_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let ctx = StateContext::new(
            QuantumNumbers::new(rng.random_range(0..8), rng.random_range(0..8)),
            random_family(&mut rng),
        );
        let t = rng.random_range(0.0..10.0);
        assert!(expect_x_squared(&ctx, t).unwrap() > 0.0);
        assert!(expect_p_squared(&ctx, t).unwrap() > 0.0);
    }
}

#[test]
fn first_figure_energy_saturates() {
    let ctx = StateContext::new(QuantumNumbers::new(1, 1), fig1());
    let standard = StateContext::new(QuantumNumbers::new(1, 1), fig1().standard_bopp_counterpart().unwrap());
    let mut previous = f64::NEG_INFINITY;
    for j in 0..=600 {
        let t = 0.01 * j as f64;
        let e = energy_expectation(&ctx, t).unwrap();
        assert!(e >= previous);
        previous = e;
        assert!((energy_expectation(&standard, t).unwrap() - 3.75).abs() < 1e-12);
    }
    assert!((energy_expectation(&ctx, 0.0).unwrap() - 2.25).abs() < 1e-14);
    assert!((previous - 3.75).abs() < 0.01);
}

#[test]
fn second_figure_energy_decays_rationally() {
    let ctx = StateContext::new(QuantumNumbers::new(1, 1), fig2());
    let standard = StateContext::new(QuantumNumbers::new(1, 1), fig2().standard_bopp_counterpart().unwrap());
    let mut previous = f64::INFINITY;
    for j in 0..=100 {
        let t = 0.1 * j as f64;
        let e = energy_expectation(&ctx, t).unwrap();
        assert!(e < previous);
        previous = e;
        assert!((e * (t + 1.0) - 12.0).abs() < 1e-12);
        assert!((energy_expectation(&standard, t).unwrap() * (t + 1.0) - 10.0).abs() < 1e-12);
    }
}

#[test]
fn uncertainty_products_compose() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let ctx = StateContext::new(
            QuantumNumbers::new(rng.random_range(0..6), rng.random_range(0..6)),
            random_family(&mut rng),
        );
        let t = rng.random_range(0.0..6.0);
        let u = uncertainties_commutative(&ctx, t).unwrap();
        let dx = (expect_x_squared(&ctx, t).unwrap() - expect_x(&ctx, t).unwrap().powi(2)).sqrt();
        let dp = (expect_p_squared(&ctx, t).unwrap() - expect_p(&ctx, t).unwrap().powi(2)).sqrt();
        assert!(close(u.dx1, dx, 1e-12) && close(u.dp2, dp, 1e-12));
        assert!(close(u.dx_dp, dx * dp, 1e-12), "{} vs {}", u.dx_dp, dx * dp);
    }
}

/// ⟨X₁²⟩, ⟨X₂²⟩, ⟨P₁²⟩, ⟨P₂²⟩ expanded through the Bopp shift from moments
/// of the commutative operators.
fn bopp_expansion(q: &MomentSet, nc: NcParams) -> [f64; 4] {
    let (theta, omega) = (nc.theta, nc.omega_nc);
    let eps = nc.cross_term().unwrap() / 2.0;
    let x1 = q.x1_sq + theta * theta / 4.0 * q.p2_sq + eps * eps * q.x2_sq - theta * q.x1p2 + 2.0 * eps * q.x1x2
        - theta * eps / 2.0 * q.x2p2_sym;
    let x2 = q.x2_sq + theta * theta / 4.0 * q.p1_sq + eps * eps * q.x1_sq + theta * q.x2p1
        - 2.0 * eps * q.x1x2
        - theta * eps / 2.0 * q.x1p1_sym;
    let p1 = q.p1_sq
        + omega * omega / 4.0 * q.x2_sq
        + eps * eps * q.p2_sq
        + omega * q.x2p1
        + 2.0 * eps * q.p1p2
        + omega * eps / 2.0 * q.x2p2_sym;
    let p2 = q.p2_sq + omega * omega / 4.0 * q.x1_sq + eps * eps * q.p1_sq - omega * q.x1p2 - 2.0 * eps * q.p1p2
        + omega * eps / 2.0 * q.x1p1_sym;
    [x1, x2, p1, p2]
}

fn closed_form_moments(ctx: &StateContext, t: f64) -> MomentSet {
    let x2 = expect_x_squared(ctx, t).unwrap();
    let p2 = expect_p_squared(ctx, t).unwrap();
    let xp = expect_xp_symmetric(ctx, t).unwrap();
    let ang = expect_angular(ctx, t).unwrap();
    MomentSet {
        norm: 1.0,
        x1_sq: x2,
        x2_sq: x2,
        p1_sq: p2,
        p2_sq: p2,
        x1p1_sym: xp,
        x2p2_sym: xp,
        x1p2: ang.p2x1,
        x2p1: ang.x2p1,
        ..MomentSet::default()
    }
}

#[test]
fn noncommutative_moments_assemble_from_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let ctx = StateContext::new(
            QuantumNumbers::new(rng.random_range(0..6), rng.random_range(0..6)),
            random_family(&mut rng),
        );
        let t = rng.random_range(0.0..5.0);
        let theta: f64 = rng.random_range(-0.5..0.5);
        let nc = NcParams::new(theta, -theta.signum() * rng.random_range(0.0..0.5)).unwrap();
        let Ok(u) = uncertainties_noncommutative(&ctx, t, nc) else {
            continue;
        };
        let [x1, x2, p1, p2] = bopp_expansion(&closed_form_moments(&ctx, t), nc);
        for (got, want) in [(x1, u.x_sq), (x2, u.x_sq), (p1, u.p_sq), (p2, u.p_sq)] {
            assert!(close(got, want, 1e-12), "{got} vs {want}");
        }
        assert!(close(u.dx_dpx, (u.x_sq * u.p_sq).sqrt(), 1e-15));
    }
}

#[test]
fn noncommutative_moments_match_quadrature_per_component() {
    let nc = NcParams::new(0.3, -0.5).unwrap();
    for (n, m) in STATES {
        for family in [fig1(), fig2()] {
            let ctx = StateContext::new(QuantumNumbers::new(n, m), family);
            let q = quadrature_moments(&ctx, 0.9, PhaseMode::Zero).unwrap();
            let u = uncertainties_noncommutative(&ctx, 0.9, nc).unwrap();
            let [x1, x2, p1, p2] = bopp_expansion(&q, nc);
            for (got, want) in [(x1, u.x_sq), (x2, u.x_sq), (p1, u.p_sq), (p2, u.p_sq)] {
                assert!(close(got, want, 1e-8), "({n},{m}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn static_ground_state_minimal_uncertainty() {
    let ctx = StateContext::new(QuantumNumbers::new(0, 0), EpFamily::stationary(1.0, 1.0).unwrap());
    let u = uncertainties_commutative(&ctx, 0.0).unwrap();
    assert!((u.dx_dp - 0.5).abs() <= 1e-14);
}

#[test]
fn standard_limits_drop_the_extra_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..10 {
        let base = random_family(&mut rng);
        let standard = base.standard_bopp_counterpart().unwrap();
        let qn = QuantumNumbers::new(rng.random_range(0..5), rng.random_range(0..5));
        let ctx = StateContext::new(qn, standard.clone());
        let t = rng.random_range(0.0..4.0);
        let s = standard.sample(t).unwrap();
        assert_eq!(s.d, 0.0);
        let level = qn.level();
        // d = 0 forms
        let reduced_dp =
            (0.5 * level).sqrt() * (s.a * s.a + s.rho * s.rho * s.rho_dot * s.rho_dot).sqrt() / (s.a * s.rho);
        let reduced_product = level / (2.0 * s.a) * (s.a * s.a + s.rho * s.rho * s.rho_dot * s.rho_dot).sqrt();
        let u = uncertainties_commutative(&ctx, t).unwrap();
        assert!(close(u.dp1, reduced_dp, 1e-14) && close(u.dx_dp, reduced_product, 1e-14));
        let reduced_p2 = 0.5 * level * (1.0 / (s.rho * s.rho) + s.rho_dot * s.rho_dot / (s.a * s.a));
        assert!(close(expect_p_squared(&ctx, t).unwrap(), reduced_p2, 1e-14));
        // θΩ = 0 with d = 0
        let theta = 0.2;
        let nc = uncertainties_noncommutative(&ctx, t, NcParams::new(theta, 0.0).unwrap()).unwrap();
        let l = qn.m as f64 - qn.n as f64;
        let reduced_x2 = 0.5
            * level
            * (s.rho * s.rho + theta * theta / 4.0 * (1.0 / (s.rho * s.rho) + s.rho_dot * s.rho_dot / (s.a * s.a)))
            - l * theta / 2.0;
        assert!(close(nc.x_sq, reduced_x2, 1e-14));
        // Limit of the full formula as θΩ → 0⁻ and C → ∞ approaches the same value.
        let near = uncertainties_noncommutative(&ctx, t, NcParams::new(theta, -1e-12).unwrap()).unwrap();
        assert!(close(near.x_sq, reduced_x2, 1e-6));
    }
    let exp = ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 1e12, 0.0).unwrap();
    let ctx = StateContext::new(QuantumNumbers::new(1, 1), EpFamily::Exponential(exp));
    let s = exp.sample(0.5).unwrap();
    let reduced = 1.5 / s.a * (s.a * s.a + s.rho * s.rho * s.rho_dot * s.rho_dot).sqrt();
    assert!(close(
        uncertainties_commutative(&ctx, 0.5).unwrap().dx_dp,
        reduced,
        1e-10
    ));
}

#[test]
fn noncommutative_reduces_to_commutative() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let ctx = StateContext::new(
            QuantumNumbers::new(rng.random_range(0..5), rng.random_range(0..5)),
            random_family(&mut rng),
        );
        let t = rng.random_range(0.0..4.0);
        let c = uncertainties_commutative(&ctx, t).unwrap();
        let nc = uncertainties_noncommutative(&ctx, t, NcParams::COMMUTATIVE).unwrap();
        assert!((nc.dx_dy - c.dx1 * c.dx2).abs() <= 1e-14 * c.dx1 * c.dx2);
        assert!((nc.dpx_dpy - c.dp1 * c.dp2).abs() <= 1e-14 * c.dp1 * c.dp2);
        assert!((nc.dx_dpx - c.dx_dp).abs() <= 1e-14 * c.dx_dp);
    }
}
