//! Hamiltonian eigenstates built on the Lewis invariant: wavefunctions,
//! phases, closed-form moments, energies and uncertainty products.

mod quadrature;

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::ep::{EpFamily, EpSample};
use crate::error::{domain, Error, Result};
use crate::model::{coefficients_from_nc, recover_nc_parameters, CoefficientSet, NcParams, OscillatorConstants};
use crate::specfun::{factorial, laguerre_eval, LaguerreIndex, LegendreRule};

pub use quadrature::{gram_matrix, quadrature_moments, quadrature_overlap, MomentSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantumNumbers {
    pub n: u32,
    pub m: u32,
}

impl QuantumNumbers {
    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }

    /// Angular index l = m − n.
    pub fn l(&self) -> i64 {
        self.m as i64 - self.n as i64
    }

    /// n + m + 1
    pub fn level(&self) -> f64 {
        (self.n + self.m + 1) as f64
    }
}

pub type CoefficientFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

#[derive(Clone)]
pub struct StateContext {
    pub qn: QuantumNumbers,
    pub family: EpFamily,
    pub c_supplier: Option<Arc<CoefficientFn>>,
}

impl fmt::Debug for StateContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateContext")
            .field("qn", &self.qn)
            .field("family", &self.family)
            .field("c_supplier", &self.c_supplier.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl StateContext {
    pub fn new(qn: QuantumNumbers, family: EpFamily) -> Self {
        Self {
            qn,
            family,
            c_supplier: None,
        }
    }

    pub fn with_c(mut self, c: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.c_supplier = Some(Arc::new(c));
        self
    }

    /// c(t) from the (θ, Ω) that reproduce the family's a(t) and d(t).
    pub fn with_nc_derived_c(self, osc: OscillatorConstants) -> Self {
        let family = self.family.clone();
        self.with_c(move |t| derived_c(&family, osc, t))
    }

    pub fn c(&self, t: f64) -> Result<f64> {
        match &self.c_supplier {
            Some(c) => c(t),
            None => Err(Error::MissingCoefficient(format!(
                "no c(t) supplier for (n, m) = ({}, {})",
                self.qn.n, self.qn.m
            ))),
        }
    }

    pub fn sample(&self, t: f64) -> Result<EpSample> {
        self.family.sample(t)
    }
}

/// c(t) implied by a family through NC-parameter recovery.
pub fn derived_c(family: &EpFamily, osc: OscillatorConstants, t: f64) -> Result<f64> {
    let s = family.sample(t)?;
    let target = CoefficientSet {
        a: s.a,
        b: s.b,
        c: 0.0,
        d: s.d,
    };
    let rec = recover_nc_parameters(target, osc, None)?;
    Ok(coefficients_from_nc(rec.params, osc)?.c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Include the Lewis phase e^{iΘ(t)}.
    Lewis,
    /// Set Θ = 0.
    Zero,
}

const PHASE_PANELS: usize = 32;

/// Θ(t) = m ∫₀ᵗ [c(τ) − a(τ)/ρ²(τ)] dτ by composite 16-point Gauss-Legendre.
pub fn lewis_phase(ctx: &StateContext, t: f64) -> Result<f64> {
    if ctx.qn.m == 0 || t == 0.0 {
        return Ok(0.0);
    }
    ctx.c(0.0)?;
    let rule = LegendreRule::new(16)?;
    let failure = RefCell::new(None);
    let integral = rule.integrate_composite(0.0, t, PHASE_PANELS, |tau| {
        let value = ctx.sample(tau).and_then(|s| Ok(ctx.c(tau)? - s.a / (s.rho * s.rho)));
        match value {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    });
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(ctx.qn.m as f64 * integral),
    }
}

/// Radial-angular pieces of ψ shared by the closed form and the quadrature oracle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StateShape {
    pub rho: f64,
    /// Chirp coefficient in e^{iβr²}, β = γ/(2ρ) with γ = (ρ̇ − 2ρd)/a.
    pub beta: f64,
    /// i^{−m}√(m!)ρ^{m−n−1}/√(n!π) · e^{iΘ}
    pub prefactor: Complex64,
    pub power: u32,
    pub l: i64,
    pub laguerre: LaguerreIndex,
}

pub(crate) fn state_shape(ctx: &StateContext, t: f64, mode: PhaseMode) -> Result<StateShape> {
    let QuantumNumbers { n, m } = ctx.qn;
    if n < m {
        return Err(domain(
            "wavefunction",
            format!("n >= m required (got n = {n}, m = {m}); the negative radial power branch is unsupported"),
        ));
    }
    let s = ctx.sample(t)?;
    let gamma = s.shear() / s.a;
    let phase = match mode {
        PhaseMode::Lewis => lewis_phase(ctx, t)?,
        PhaseMode::Zero => 0.0,
    };
    let magnitude =
        (factorial(m as usize)? / (factorial(n as usize)? * PI)).sqrt() * s.rho.powi(m as i32 - n as i32 - 1);
    let quarter_turns = match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    Ok(StateShape {
        rho: s.rho,
        beta: gamma / (2.0 * s.rho),
        prefactor: quarter_turns * Complex64::from_polar(magnitude, phase),
        power: n - m,
        l: ctx.qn.l(),
        laguerre: LaguerreIndex::new(m, (n - m) as i32),
    })
}

/// ψ_{n,m−n}(r, θ, t) = i^{−m}√(m!)ρ^{m−n−1}/√(n!π) e^{iΘ} r^{n−m} e^{i(m−n)θ − f r²/2} L^{n−m}_m(r²/ρ²)
/// with f = (a − iρ(ρ̇−2ρd))/(aρ²).
pub fn wavefunction(ctx: &StateContext, r: f64, theta: f64, t: f64, mode: PhaseMode) -> Result<Complex64> {
    if !(r >= 0.0) {
        return Err(domain("wavefunction", format!("r = {r} must be >= 0")));
    }
    let shape = state_shape(ctx, t, mode)?;
    let z = r * r / (shape.rho * shape.rho);
    let radial = r.powi(shape.power as i32) * (-0.5 * z).exp() * laguerre_eval(shape.laguerre, z);
    let phase = Complex64::from_polar(1.0, shape.l as f64 * theta + shape.beta * r * r);
    Ok(shape.prefactor * phase * radial)
}

/// ⟨x_i⟩ = 0
pub fn expect_x(_ctx: &StateContext, _t: f64) -> Result<f64> {
    Ok(0.0)
}

/// ⟨p_i⟩ = 0
pub fn expect_p(_ctx: &StateContext, _t: f64) -> Result<f64> {
    Ok(0.0)
}

/// ⟨x_i²⟩ = (n+m+1)ρ²/2
pub fn expect_x_squared(ctx: &StateContext, t: f64) -> Result<f64> {
    let s = ctx.sample(t)?;
    Ok(0.5 * ctx.qn.level() * s.rho * s.rho)
}

/// ⟨p_i²⟩ = (n+m+1)/2 · [1/ρ² + (ρ̇−2ρd)²/a²]
pub fn expect_p_squared(ctx: &StateContext, t: f64) -> Result<f64> {
    let s = ctx.sample(t)?;
    let gamma = s.shear() / s.a;
    Ok(0.5 * ctx.qn.level() * (1.0 / (s.rho * s.rho) + gamma * gamma))
}

/// ⟨x_i p_i + p_i x_i⟩ = (n+m+1)ρ(ρ̇−2ρd)/a
pub fn expect_xp_symmetric(ctx: &StateContext, t: f64) -> Result<f64> {
    let s = ctx.sample(t)?;
    Ok(ctx.qn.level() * s.rho * s.shear() / s.a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularParts {
    /// ⟨x₂p₁ − p₂x₁⟩ = n − m
    pub whole: f64,
    /// ⟨x₂p₁⟩ = (n − m)/2
    pub x2p1: f64,
    /// ⟨p₂x₁⟩ = ⟨x₁p₂⟩ = (m − n)/2
    pub p2x1: f64,
}

pub fn expect_angular(ctx: &StateContext, _t: f64) -> Result<AngularParts> {
    let half = -0.5 * ctx.qn.l() as f64;
    Ok(AngularParts {
        whole: 2.0 * half,
        x2p1: half,
        p2x1: -half,
    })
}

/// (⟨x₁x₂⟩, ⟨p₁p₂⟩) = (0, 0)
pub fn expect_cross_bilinears(_ctx: &StateContext, _t: f64) -> Result<(f64, f64)> {
    Ok((0.0, 0.0))
}

/// ½(n+m+1)[bρ² + a/ρ² + (ρ̇² − 4ρ²d²)/a] + c(n − m)
pub fn energy_expectation(ctx: &StateContext, t: f64) -> Result<f64> {
    let s = ctx.sample(t)?;
    let base = 0.5
        * ctx.qn.level()
        * (s.b * s.rho * s.rho
            + s.a / (s.rho * s.rho)
            + (s.rho_dot * s.rho_dot - 4.0 * s.rho * s.rho * s.d * s.d) / s.a);
    if ctx.qn.n == ctx.qn.m {
        return Ok(base);
    }
    Ok(base + ctx.c(t)? * (ctx.qn.n as f64 - ctx.qn.m as f64))
}

/// a/2·Σ⟨p_i²⟩ + b/2·Σ⟨x_i²⟩ + c⟨p₁x₂ − p₂x₁⟩ + d·Σ⟨x_ip_i + p_ix_i⟩ from the component moments.
pub fn energy_from_components(ctx: &StateContext, t: f64) -> Result<f64> {
    let s = ctx.sample(t)?;
    let (x2, p2, xp) = (
        expect_x_squared(ctx, t)?,
        expect_p_squared(ctx, t)?,
        expect_xp_symmetric(ctx, t)?,
    );
    let angular = expect_angular(ctx, t)?.whole;
    let c_term = if angular == 0.0 { 0.0 } else { ctx.c(t)? * angular };
    Ok(s.a * p2 + s.b * x2 + c_term + 2.0 * s.d * xp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutativeUncertainty {
    pub dx1: f64,
    pub dx2: f64,
    pub dp1: f64,
    pub dp2: f64,
    pub dx_dp: f64,
}

/// Δx_i = √((n+m+1)/2)ρ, Δp_i = √((n+m+1)/2)√(a²+ρ²(ρ̇−2ρd)²)/(aρ),
/// Δx_iΔp_i = (n+m+1)/(2a)·√(a²+ρ²(ρ̇−2ρd)²).
pub fn uncertainties_commutative(ctx: &StateContext, t: f64) -> Result<CommutativeUncertainty> {
    let s = ctx.sample(t)?;
    let level = ctx.qn.level();
    let root = (s.a * s.a + s.rho * s.rho * s.shear() * s.shear()).sqrt();
    let scale = (0.5 * level).sqrt();
    let dx = scale * s.rho;
    let dp = scale * root / (s.a * s.rho);
    Ok(CommutativeUncertainty {
        dx1: dx,
        dx2: dx,
        dp1: dp,
        dp2: dp,
        dx_dp: level / (2.0 * s.a) * root,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcUncertainty {
    /// ⟨X²⟩ (the two components coincide)
    pub x_sq: f64,
    /// ⟨P²⟩
    pub p_sq: f64,
    /// ΔX₁ΔX₂
    pub dx_dy: f64,
    /// ΔP₁ΔP₂
    pub dpx_dpy: f64,
    /// ΔX_iΔP_i
    pub dx_dpx: f64,
}

/// Products for the NC operators with
/// ⟨X_i²⟩ = N/2[ρ²(1−θΩ/4) + θ²/4·(1/ρ² + γ²) − θ√(−θΩ)ργ/2] − (m−n)θ/2 and
/// ⟨P_i²⟩ = N/2[(1−θΩ/4)(1/ρ² + γ²) + Ω²ρ²/4 + Ω√(−θΩ)ργ/2] − (m−n)Ω/2,
/// where N = n+m+1 and γ = (ρ̇−2ρd)/a.
pub fn uncertainties_noncommutative(ctx: &StateContext, t: f64, nc: NcParams) -> Result<NcUncertainty> {
    let root = nc.cross_term()?;
    let s = ctx.sample(t)?;
    let (theta, omega) = (nc.theta, nc.omega_nc);
    let half_level = 0.5 * ctx.qn.level();
    let gamma = s.shear() / s.a;
    let momentum = 1.0 / (s.rho * s.rho) + gamma * gamma;
    let squeeze = 1.0 - theta * omega / 4.0;
    let l = ctx.qn.l() as f64;
    let x_sq = half_level
        * (s.rho * s.rho * squeeze + theta * theta / 4.0 * momentum - theta * root * s.rho * gamma / 2.0)
        - l * theta / 2.0;
    let p_sq = half_level
        * (squeeze * momentum + omega * omega * s.rho * s.rho / 4.0 + omega * root * s.rho * gamma / 2.0)
        - l * omega / 2.0;
    if x_sq < 0.0 {
        return Err(Error::NegativeRadicand {
            quantity: "X_i^2",
            value: x_sq,
        });
    }
    if p_sq < 0.0 {
        return Err(Error::NegativeRadicand {
            quantity: "P_i^2",
            value: p_sq,
        });
    }
    Ok(NcUncertainty {
        x_sq,
        p_sq,
        dx_dy: x_sq,
        dpx_dpy: p_sq,
        dx_dpx: (x_sq * p_sq).sqrt(),
    })
}
