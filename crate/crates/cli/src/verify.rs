use nalgebra::DMatrix;
use ncho_core::ep::{chiellini_check, ep_residual, EpFamily, ExponentialFamily, RationalFamily};
use ncho_core::invariant::{invariance_residual_with, InvariantKind, OscillatorAlgebra};
use ncho_core::model::{coefficients_from_nc, recover_nc_parameters, CoefficientSet, NcParams, OscillatorConstants};
use ncho_core::qstate::{
    energy_expectation, energy_from_components, expect_angular, expect_cross_bilinears, expect_p, expect_p_squared,
    expect_x, expect_x_squared, expect_xp_symmetric, gram_matrix, quadrature_moments, PhaseMode, QuantumNumbers,
    StateContext,
};
use ncho_core::specfun::{appendix_identity_residual, laguerre_eval, orthonormality_check, LaguerreIndex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::Suite;
use crate::config::{Failure, RunConfig};
use crate::emit::{col, number, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// value < tolerance
    Below,
    /// value > tolerance (negative controls)
    Above,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.tolerance,
            Bound::Above => self.value > self.tolerance,
        }
    }

    pub fn line(&self) -> String {
        let (status, rel) = match (self.passed(), self.bound) {
            (true, Bound::Below) => ("PASS", "<"),
            (true, Bound::Above) => ("PASS", ">"),
            (false, Bound::Below) => ("FAIL", "<"),
            (false, Bound::Above) => ("FAIL", ">"),
        };
        format!(
            "{status} {:<15} {:<22} {} (required {rel} {})",
            self.suite,
            self.name,
            number(self.value),
            number(self.tolerance)
        )
    }
}

type Res<T> = Result<T, Failure>;

fn run_err(suite: &str) -> impl Fn(ncho_core::Error) -> Failure + '_ {
    move |e| Failure::Run(format!("suite {suite}: {e}"))
}

pub fn fig1() -> EpFamily {
    EpFamily::Exponential(ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 2.0, 0.0).expect("valid preset"))
}

pub fn fig2() -> EpFamily {
    EpFamily::Rational(RationalFamily::new(1.0, 2.0, 1.0, 1.0, 1.0, 1, 1.0).expect("valid preset"))
}

const STATES: [(u32, u32); 4] = [(0, 0), (1, 1), (2, 1), (3, 2)];
const STATE_TIMES: [f64; 3] = [0.3, 1.1, 2.5];
pub const INVARIANCE_TIMES: [f64; 3] = [1.0, 1.25, 1.5];

fn ep_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let err = run_err("ep");
    let mut families = vec![fig1(), fig2()];
    families.push(fig1().standard_bopp_counterpart().map_err(&err)?);
    families.push(fig2().standard_bopp_counterpart().map_err(&err)?);
    if let Some(eps) = cfg.perturb {
        families = families.iter().map(|f| f.with_scaled_b(1.0 + eps)).collect();
    }
    let mut worst = 0.0f64;
    for family in &families {
        for j in 0..=100 {
            let s = family.sample(0.1 * j as f64).map_err(&err)?;
            worst = worst.max(ep_residual(&s, 1.0).abs());
        }
    }
    Ok(vec![Check {
        suite: "ep",
        name: "ep-residual",
        value: worst,
        tolerance: cfg.tol("ep"),
        bound: Bound::Below,
    }])
}

fn chiellini_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let err = run_err("chiellini");
    let fit = chiellini_check(&fig1()).map_err(&err)?;
    let mut constants = (fit.q - 0.25).abs().max((fit.lambda_q + 2.0).abs());
    let mut fit_residual = fit.max_residual;
    let mut root = 0.0f64;
    for k in 1..=5u32 {
        let family = RationalFamily::with_derived_small_delta(1.0, 2.0, 1.0, 1.0, 1.0, k).map_err(&err)?;
        let fit = chiellini_check(&EpFamily::Rational(family)).map_err(&err)?;
        let kf = k as f64;
        constants = constants
            .max((fit.q - (kf + 1.0) / ((kf + 2.0) * (kf + 2.0))).abs())
            .max((fit.lambda_q + kf + 2.0).abs());
        fit_residual = fit_residual.max(fit.max_residual);
        root = root.max((fit.minus_root() - fit.lambda_q).abs());
    }
    let tol = cfg.tol("chiellini");
    Ok(vec![
        Check {
            suite: "chiellini",
            name: "constants",
            value: constants,
            tolerance: tol,
            bound: Bound::Below,
        },
        Check {
            suite: "chiellini",
            name: "fit-residual",
            value: fit_residual,
            tolerance: tol,
            bound: Bound::Below,
        },
        Check {
            suite: "chiellini",
            name: "minus-root",
            value: root,
            tolerance: tol,
            bound: Bound::Below,
        },
    ])
}

fn appendix_check(tolerance: f64, suite: &'static str) -> Res<Check> {
    let mut worst = 0.0f64;
    for n in 2..=12u32 {
        for m in 2..=n {
            worst = worst.max(appendix_identity_residual(n, m).map_err(run_err(suite))?);
        }
    }
    Ok(Check {
        suite,
        name: "appendix-a",
        value: worst,
        tolerance,
        bound: Bound::Below,
    })
}

fn laguerre_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let tol = cfg.tol("laguerre");
    let mut gram = 0.0f64;
    for n in 0..=12u32 {
        for m in 0..=n {
            gram = gram.max(orthonormality_check(n, m).map_err(run_err("laguerre"))?);
        }
    }
    // L^α_m = L^{α+1}_m − L^{α+1}_{m−1}
    let mut lowering = 0.0f64;
    for m in 1..=12u32 {
        for alpha in -3..=6i32 {
            for &z in &[0.1, 0.7, 2.5, 6.0, 11.0] {
                let lhs = laguerre_eval(LaguerreIndex::new(m, alpha), z);
                let rhs = laguerre_eval(LaguerreIndex::new(m, alpha + 1), z)
                    - laguerre_eval(LaguerreIndex::new(m - 1, alpha + 1), z);
                lowering = lowering.max((lhs - rhs).abs() / lhs.abs().max(1.0));
            }
        }
    }
    Ok(vec![
        Check {
            suite: "laguerre",
            name: "orthonormality",
            value: gram,
            tolerance: tol,
            bound: Bound::Below,
        },
        Check {
            suite: "laguerre",
            name: "order-lowering",
            value: lowering,
            tolerance: tol,
            bound: Bound::Below,
        },
        appendix_check(tol, "laguerre")?,
    ])
}

fn orthonormality_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let states: Vec<QuantumNumbers> = STATES.iter().map(|&(n, m)| QuantumNumbers::new(n, m)).collect();
    let mut worst = 0.0f64;
    for family in [fig1(), fig2()] {
        for t in STATE_TIMES {
            let gram = gram_matrix(&states, &family, t).map_err(run_err("orthonormality"))?;
            let dev = (gram - DMatrix::<Complex64>::identity(states.len(), states.len()))
                .map(|c| c.norm())
                .max();
            worst = worst.max(dev);
        }
    }
    Ok(vec![Check {
        suite: "orthonormality",
        name: "gram-identity",
        value: worst,
        tolerance: cfg.tol("orthonormality"),
        bound: Bound::Below,
    }])
}

/// Worst relative gap between quadrature moments and the closed forms.
pub fn expectation_gap(ctx: &StateContext, t: f64) -> ncho_core::Result<f64> {
    let q = quadrature_moments(ctx, t, PhaseMode::Zero)?;
    let x2 = expect_x_squared(ctx, t)?;
    let p2 = expect_p_squared(ctx, t)?;
    let xp = expect_xp_symmetric(ctx, t)?;
    let ang = expect_angular(ctx, t)?;
    let (xx, pp) = expect_cross_bilinears(ctx, t)?;
    let (x, p) = (expect_x(ctx, t)?, expect_p(ctx, t)?);
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
    Ok(pairs
        .iter()
        .map(|(g, w)| (g - w).abs() / w.abs().max(1.0))
        .fold(0.0, f64::max))
}

fn expectation_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let err = run_err("expectation");
    let mut gap = 0.0f64;
    let mut assembly = 0.0f64;
    for family in [fig1(), fig2()] {
        for (n, m) in STATES {
            for t in STATE_TIMES {
                let ctx = StateContext::new(QuantumNumbers::new(n, m), family.clone()).with_c(|t| Ok(0.25 * t.cos()));
                gap = gap.max(expectation_gap(&ctx, t).map_err(&err)?);
                let e = energy_expectation(&ctx, t).map_err(&err)?;
                let parts = energy_from_components(&ctx, t).map_err(&err)?;
                assembly = assembly.max((e - parts).abs() / e.abs().max(1.0));
            }
        }
    }
    Ok(vec![
        Check {
            suite: "expectation",
            name: "closed-vs-quadrature",
            value: gap,
            tolerance: cfg.tol("expectation"),
            bound: Bound::Below,
        },
        Check {
            suite: "expectation",
            name: "energy-assembly",
            value: assembly,
            tolerance: cfg.tol("energy-assembly"),
            bound: Bound::Below,
        },
    ])
}

fn invariance_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let err = run_err("invariance");
    let h = 1e-4;
    let ops = OscillatorAlgebra::new(cfg.basis).map_err(&err)?;
    let mut worst = 0.0f64;
    let mut control = f64::INFINITY;
    for family in [fig1(), fig2()] {
        for t in INVARIANCE_TIMES {
            for kind in [InvariantKind::Lewis, InvariantKind::Alternative] {
                worst = worst.max(invariance_residual_with(&ops, &family, t, h, kind, 0.0).map_err(&err)?);
            }
        }
        let perturbed = family.with_scaled_b(1.1);
        control =
            control.min(invariance_residual_with(&ops, &perturbed, 1.0, h, InvariantKind::Lewis, 0.0).map_err(&err)?);
    }
    Ok(vec![
        Check {
            suite: "invariance",
            name: "residual",
            value: worst,
            tolerance: cfg.tol("invariance"),
            bound: Bound::Below,
        },
        Check {
            suite: "invariance",
            name: "perturbed-control",
            value: control,
            tolerance: cfg.tol("control"),
            bound: Bound::Above,
        },
    ])
}

fn relative(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Worst relative error over 100 seeded admissible (θ, Ω, M, ω).
pub fn nc_roundtrip_worst(seed: u64) -> ncho_core::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta: f64 = rng.random_range(-1.0..1.0);
        let omega = -theta.signum() * rng.random_range(0.0..1.0);
        let osc = OscillatorConstants::new(rng.random_range(0.5..2.0), rng.random_range(0.5..2.0))?;
        let nc = NcParams::new(theta, omega)?;
        let rec = recover_nc_parameters(coefficients_from_nc(nc, osc)?, osc, None)?;
        worst = worst
            .max(relative(rec.params.theta, theta))
            .max(relative(rec.params.omega_nc, omega));
    }
    Ok(worst)
}

fn nc_suite(cfg: &RunConfig) -> Res<Vec<Check>> {
    let err = run_err("nc-roundtrip");
    let worst = nc_roundtrip_worst(0x5eed).map_err(&err)?;
    let unit = OscillatorConstants::new(1.0, 1.0).map_err(&err)?;
    let fixed = recover_nc_parameters(
        CoefficientSet {
            a: 1.0,
            b: 1.0,
            c: 0.0,
            d: 0.0,
        },
        unit,
        None,
    )
    .map_err(&err)?;
    let fixed_gap = fixed.params.theta.abs().max(fixed.params.omega_nc.abs());
    Ok(vec![
        Check {
            suite: "nc-roundtrip",
            name: "relative-error",
            value: worst,
            tolerance: cfg.tol("nc-roundtrip"),
            bound: Bound::Below,
        },
        Check {
            suite: "nc-roundtrip",
            name: "fixed-point",
            value: fixed_gap,
            tolerance: cfg.tol("fixed-point"),
            bound: Bound::Below,
        },
    ])
}

pub const ALL_SUITES: [Suite; 8] = [
    Suite::Ep,
    Suite::Chiellini,
    Suite::Laguerre,
    Suite::AppendixA,
    Suite::Orthonormality,
    Suite::Expectation,
    Suite::Invariance,
    Suite::NcRoundtrip,
];

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Res<Vec<Check>> {
    match suite {
        Suite::Ep => ep_suite(cfg),
        Suite::Chiellini => chiellini_suite(cfg),
        Suite::Laguerre => laguerre_suite(cfg),
        Suite::AppendixA => Ok(vec![appendix_check(cfg.tol("appendix-a"), "appendix-a")?]),
        Suite::Orthonormality => orthonormality_suite(cfg),
        Suite::Expectation => expectation_suite(cfg),
        Suite::Invariance => invariance_suite(cfg),
        Suite::NcRoundtrip => nc_suite(cfg),
    }
}

pub fn report_table(checks: &[Check]) -> Table {
    let mut table = Table::new(vec![
        col("suite", ""),
        col("check", ""),
        col("value", "1"),
        col("tolerance", "1"),
        col("bound", ""),
        col("pass", ""),
    ]);
    for c in checks {
        table.push(vec![
            Cell::Text(c.suite.into()),
            Cell::Text(c.name.into()),
            c.value.into(),
            c.tolerance.into(),
            Cell::Text(match c.bound {
                Bound::Below => "below".into(),
                Bound::Above => "above".into(),
            }),
            Cell::Flag(c.passed()),
        ]);
    }
    table
}
