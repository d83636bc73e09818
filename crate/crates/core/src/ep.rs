//! Ermakov-Pinney solution families, residuals and the Chiellini check.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::specfun::LegendreRule;

/// EP functions and their derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpSample {
    pub t: f64,
    pub a: f64,
    pub a_dot: f64,
    pub b: f64,
    pub d: f64,
    pub d_dot: f64,
    pub rho: f64,
    pub rho_dot: f64,
    pub rho_ddot: f64,
}

impl EpSample {
    /// ρ̇ − 2ρd
    pub fn shear(&self) -> f64 {
        self.rho_dot - 2.0 * self.rho * self.d
    }
}

/// ρ̈ − (ȧ/a)ρ̇ + ρ(ab − 2ḋ − 4d² + 2(ȧ/a)d) − ξ²a²/ρ³
pub fn ep_residual(s: &EpSample, xi: f64) -> f64 {
    let log_rate = s.a_dot / s.a;
    s.rho_ddot - log_rate * s.rho_dot + s.rho * (s.a * s.b - 2.0 * s.d_dot - 4.0 * s.d * s.d + 2.0 * log_rate * s.d)
        - xi * xi * s.a * s.a / s.rho.powi(3)
}

const CONSTRAINT_TOLERANCE: f64 = 1e-12;

fn check_positive(operation: &'static str, values: &[(&str, f64)]) -> Result<()> {
    for (name, value) in values {
        if !(*value > 0.0 && value.is_finite()) {
            return Err(domain(
                operation,
                format!("{name} = {value} must be positive and finite"),
            ));
        }
    }
    Ok(())
}

fn check_relation(relation: &'static str, lhs: f64, rhs: f64, scale: f64) -> Result<()> {
    let residual = (lhs - rhs).abs() / scale.max(1.0);
    if !(residual <= CONSTRAINT_TOLERANCE) {
        return Err(Error::Constraint {
            relation: relation.to_string(),
            residual,
        });
    }
    Ok(())
}

const EXPONENTIAL_RELATION: &str = "4*sigma*Delta*mu^4 - mu^4*Gamma^2 - 4*sigma^2 = 8*mu^4*kconst";
const RATIONAL_RELATION: &str =
    "4*k^2*mu^4*delta*(delta + Gamma/k) = (k+2)^2*(sigma*Delta*mu^4 - sigma^2) - mu^4*Gamma^2";

/// a = σe^{−Γt}, b = Δe^{Γt}, ρ = μe^{−Γt/2} and the general d(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFamily {
    pub sigma: f64,
    pub delta: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Integration constant C; `f64::INFINITY` selects the standard-Bopp limit.
    pub cconst: f64,
    pub kconst: f64,
}

impl ExponentialFamily {
    pub fn new(sigma: f64, delta: f64, mu: f64, gamma: f64, cconst: f64, kconst: f64) -> Result<Self> {
        check_positive(
            "ExponentialFamily",
            &[("sigma", sigma), ("Delta", delta), ("mu", mu), ("Gamma", gamma)],
        )?;
        if !(cconst > 1.0) {
            return Err(domain("ExponentialFamily", format!("C = {cconst} must exceed 1")));
        }
        if !kconst.is_finite() {
            return Err(domain("ExponentialFamily", format!("kconst = {kconst} must be finite")));
        }
        let mu4 = mu.powi(4);
        let lhs = 4.0 * sigma * delta * mu4 - mu4 * gamma * gamma - 4.0 * sigma * sigma;
        let rhs = 8.0 * mu4 * kconst;
        let scale = 4.0 * sigma * delta * mu4 + mu4 * gamma * gamma + 4.0 * sigma * sigma;
        check_relation(EXPONENTIAL_RELATION, lhs, rhs, scale)?;
        let family = Self {
            sigma,
            delta,
            mu,
            gamma,
            cconst,
            kconst,
        };
        let s2 = family.rate_squared();
        if !(s2 > 0.0) {
            return Err(Error::NegativeRadicand {
                quantity: "Gamma^2 + 8*kconst",
                value: s2,
            });
        }
        Ok(family)
    }

    /// Solves the constraint for 𝕜.
    pub fn with_derived_kconst(sigma: f64, delta: f64, mu: f64, gamma: f64, cconst: f64) -> Result<Self> {
        let mu4 = mu.powi(4);
        let kconst = (4.0 * sigma * delta * mu4 - mu4 * gamma * gamma - 4.0 * sigma * sigma) / (8.0 * mu4);
        Self::new(sigma, delta, mu, gamma, cconst, kconst)
    }

    /// 𝕜 = 0, C → ∞, with Δ fixed by the reduced constraint.
    pub fn standard(sigma: f64, mu: f64, gamma: f64) -> Result<Self> {
        check_positive("ExponentialFamily", &[("sigma", sigma), ("mu", mu), ("Gamma", gamma)])?;
        let mu4 = mu.powi(4);
        let delta = (mu4 * gamma * gamma + 4.0 * sigma * sigma) / (4.0 * sigma * mu4);
        Self::new(sigma, delta, mu, gamma, f64::INFINITY, 0.0)
    }

    fn rate_squared(&self) -> f64 {
        self.gamma * self.gamma + 8.0 * self.kconst
    }

    /// √(Γ² + 8𝕜)
    pub fn rate(&self) -> f64 {
        self.rate_squared().sqrt()
    }

    /// t₀ = −ln C / √(Γ² + 8𝕜)
    pub fn critical_time(&self) -> f64 {
        -self.cconst.ln() / self.rate()
    }

    /// d(t) and ḋ(t).
    fn d_pair(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.rate();
        // s − Γ without cancellation
        let offset = 8.0 * self.kconst / (s + self.gamma);
        let w = if self.cconst.is_infinite() {
            0.0
        } else {
            (-s * t).exp() / self.cconst
        };
        if !(w < 1.0) {
            return Err(Error::Pole {
                t,
                detail: format!("d(t) diverges at or before the critical time {}", self.critical_time()),
            });
        }
        let gap = 1.0 - w;
        let d = 0.25 * (offset + 2.0 * s * w / gap);
        let d_dot = -s * s * w / (2.0 * gap * gap);
        Ok((d, d_dot))
    }

    /// d(t) = Γ/(2(Ce^{Γt} − 1)), valid for 𝕜 = 0.
    pub fn reduced_d(&self, t: f64) -> f64 {
        self.gamma / (2.0 * (self.cconst * (self.gamma * t).exp() - 1.0))
    }

    pub fn sample(&self, t: f64) -> Result<EpSample> {
        let (d, d_dot) = self.d_pair(t)?;
        let a = self.sigma * (-self.gamma * t).exp();
        let rho = self.mu * (-0.5 * self.gamma * t).exp();
        Ok(EpSample {
            t,
            a,
            a_dot: -self.gamma * a,
            b: self.delta * (self.gamma * t).exp(),
            d,
            d_dot,
            rho,
            rho_dot: -0.5 * self.gamma * rho,
            rho_ddot: 0.25 * self.gamma * self.gamma * rho,
        })
    }

    fn time_of_rho(&self, rho: f64) -> f64 {
        -2.0 * (rho / self.mu).ln() / self.gamma
    }
}

/// Rational family in τ = Γt + χ with order k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalFamily {
    pub sigma: f64,
    pub delta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub chi: f64,
    pub k: u32,
    pub small_delta: f64,
}

impl RationalFamily {
    pub fn new(sigma: f64, delta: f64, mu: f64, gamma: f64, chi: f64, k: u32, small_delta: f64) -> Result<Self> {
        check_positive(
            "RationalFamily",
            &[
                ("sigma", sigma),
                ("Delta", delta),
                ("mu", mu),
                ("Gamma", gamma),
                ("chi", chi),
            ],
        )?;
        if k == 0 {
            return Err(domain("RationalFamily", "order k must be a positive integer"));
        }
        if !(small_delta >= 0.0 && small_delta.is_finite()) {
            return Err(domain("RationalFamily", format!("delta = {small_delta} must be >= 0")));
        }
        let kf = k as f64;
        let mu4 = mu.powi(4);
        let lhs = 4.0 * kf * kf * mu4 * small_delta * (small_delta + gamma / kf);
        let k2 = (kf + 2.0) * (kf + 2.0);
        let rhs = k2 * (sigma * delta * mu4 - sigma * sigma) - mu4 * gamma * gamma;
        let scale = lhs.abs() + k2 * (sigma * delta * mu4 + sigma * sigma) + mu4 * gamma * gamma;
        check_relation(RATIONAL_RELATION, lhs, rhs, scale)?;
        Ok(Self {
            sigma,
            delta,
            mu,
            gamma,
            chi,
            k,
            small_delta,
        })
    }

    /// Non-negative root of the constraint for δ.
    pub fn with_derived_small_delta(sigma: f64, delta: f64, mu: f64, gamma: f64, chi: f64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(domain("RationalFamily", "order k must be a positive integer"));
        }
        let kf = k as f64;
        let mu4 = mu.powi(4);
        let rhs = (kf + 2.0).powi(2) * (sigma * delta * mu4 - sigma * sigma) - mu4 * gamma * gamma;
        if rhs < 0.0 {
            return Err(Error::NegativeRadicand {
                quantity: "(k+2)^2*(sigma*Delta*mu^4 - sigma^2) - mu^4*Gamma^2",
                value: rhs,
            });
        }
        let small_delta = (-gamma + (gamma * gamma + rhs / mu4).sqrt()) / (2.0 * kf);
        Self::new(sigma, delta, mu, gamma, chi, k, small_delta.max(0.0))
    }

    /// δ = 0 with Δ = (σ²(k+2)² + μ⁴Γ²)/((k+2)²σμ⁴).
    pub fn standard(sigma: f64, mu: f64, gamma: f64, chi: f64, k: u32) -> Result<Self> {
        check_positive("RationalFamily", &[("sigma", sigma), ("mu", mu), ("Gamma", gamma)])?;
        let k2 = (k as f64 + 2.0).powi(2);
        let mu4 = mu.powi(4);
        let delta = (sigma * sigma * k2 + mu4 * gamma * gamma) / (k2 * sigma * mu4);
        Self::new(sigma, delta, mu, gamma, chi, k, 0.0)
    }

    /// (k + 2)/k
    fn ratio(&self) -> f64 {
        (self.k as f64 + 2.0) / self.k as f64
    }

    pub fn sample(&self, t: f64) -> Result<EpSample> {
        let tau = self.gamma * t + self.chi;
        if !(tau > 0.0) {
            return Err(Error::Pole {
                t,
                detail: format!("Gamma*t + chi = {tau} must be positive"),
            });
        }
        let kf = self.k as f64;
        let big_k = self.ratio();
        let scaled = big_k / tau;
        let a = self.sigma * scaled.powf(big_k);
        let b = if self.k == 2 {
            self.delta
        } else {
            self.delta * big_k.powf((kf - 2.0) / kf) * tau.powf((2.0 - kf) / kf)
        };
        let rho = self.mu * scaled.powf(1.0 / kf);
        Ok(EpSample {
            t,
            a,
            a_dot: -self.gamma * big_k * a / tau,
            b,
            d: self.small_delta / tau,
            d_dot: -self.small_delta * self.gamma / (tau * tau),
            rho,
            rho_dot: -(self.gamma / kf) * rho / tau,
            rho_ddot: self.gamma * self.gamma * (kf + 1.0) / (kf * kf) * rho / (tau * tau),
        })
    }

    fn time_of_rho(&self, rho: f64) -> f64 {
        let tau = self.mu.powi(self.k as i32) * self.ratio() / rho.powi(self.k as i32);
        (tau - self.chi) / self.gamma
    }
}

pub type SampleFn = dyn Fn(f64) -> Result<EpSample> + Send + Sync;

/// Caller-supplied evaluator.
#[derive(Clone)]
pub struct CustomFamily {
    pub label: String,
    evaluator: Arc<SampleFn>,
}

impl CustomFamily {
    pub fn new(label: impl Into<String>, evaluator: Arc<SampleFn>) -> Self {
        Self {
            label: label.into(),
            evaluator,
        }
    }

    pub fn sample(&self, t: f64) -> Result<EpSample> {
        (self.evaluator)(t)
    }
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum EpFamily {
    Exponential(ExponentialFamily),
    Rational(RationalFamily),
    Custom(CustomFamily),
}

impl EpFamily {
    pub fn sample(&self, t: f64) -> Result<EpSample> {
        let s = match self {
            EpFamily::Exponential(f) => f.sample(t)?,
            EpFamily::Rational(f) => f.sample(t)?,
            EpFamily::Custom(f) => f.sample(t)?,
        };
        if !(s.a > 0.0) || !(s.rho > 0.0) {
            return Err(domain(
                "EpFamily::sample",
                format!("a = {} and rho = {} must be positive", s.a, s.rho),
            ));
        }
        Ok(s)
    }

    /// Time-independent a, b with d = 0 and ρ = (a/b)^{1/4}.
    pub fn stationary(a: f64, b: f64) -> Result<Self> {
        check_positive("EpFamily::stationary", &[("a", a), ("b", b)])?;
        let rho = (a / b).powf(0.25);
        let evaluator = move |t: f64| {
            Ok(EpSample {
                t,
                a,
                a_dot: 0.0,
                b,
                d: 0.0,
                d_dot: 0.0,
                rho,
                rho_dot: 0.0,
                rho_ddot: 0.0,
            })
        };
        Ok(EpFamily::Custom(CustomFamily::new("stationary", Arc::new(evaluator))))
    }

    /// Same samples with b multiplied by `factor`, bypassing the constraint.
    pub fn with_scaled_b(&self, factor: f64) -> Self {
        let inner = self.clone();
        let evaluator = move |t: f64| {
            let mut s = inner.sample(t)?;
            s.b *= factor;
            Ok(s)
        };
        EpFamily::Custom(CustomFamily::new(format!("scaled-b({factor})"), Arc::new(evaluator)))
    }

    /// The comparison family with d ≡ 0: C → ∞ and 𝕜 = 0 (exponential), or
    /// δ = 0 (rational), with Δ re-solved from the reduced constraint.
    pub fn standard_bopp_counterpart(&self) -> Result<Self> {
        match self {
            EpFamily::Exponential(f) => Ok(EpFamily::Exponential(ExponentialFamily::standard(
                f.sigma, f.mu, f.gamma,
            )?)),
            EpFamily::Rational(f) => Ok(EpFamily::Rational(RationalFamily::standard(
                f.sigma, f.mu, f.gamma, f.chi, f.k,
            )?)),
            EpFamily::Custom(_) => Err(domain(
                "standard_bopp_counterpart",
                "custom families have no standard limit",
            )),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            EpFamily::Exponential(_) => "exponential",
            EpFamily::Rational(_) => "rational",
            EpFamily::Custom(f) => &f.label,
        }
    }
}

/// −ln C/√(Γ² + 8𝕜); negative whenever C > 1.
pub fn critical_time(family: &ExponentialFamily) -> f64 {
    family.critical_time()
}

/// Fitted Chiellini constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChielliniFit {
    pub q: f64,
    pub lambda_q: f64,
    /// Worst of: local spread of q, relative misfit of η = λ_q h/g, and
    /// |qλ_q² + λ_q + 1| (the quadratic whose roots are (−1 ± √(1−4q))/(2q)).
    pub max_residual: f64,
}

impl ChielliniFit {
    /// (−1 − √(1−4q))/(2q), discriminant clamped at zero.
    pub fn minus_root(&self) -> f64 {
        (-1.0 - (1.0 - 4.0 * self.q).max(0.0).sqrt()) / (2.0 * self.q)
    }
}

const CHIELLINI_POINTS: usize = 64;
const CHIELLINI_WINDOW: f64 = 10.0;
const CHIELLINI_TOLERANCE: f64 = 1e-8;

/// Fits q in d/dρ(h/g) = q·g and λ_q in η = λ_q·h/g over 64 log-spaced ρ
/// points covering ρ([0, 10]), with η = ρ̇, g = −ȧ/a and
/// h = ρ(ab − 2ḋ − 4d² + 2(ȧ/a)d) − a²/ρ³.
///
/// The derivative condition is tested in integrated form between adjacent
/// grid points, with the integral of g taken by 16-point Gauss-Legendre.
pub fn chiellini_check(family: &EpFamily) -> Result<ChielliniFit> {
    let time_of_rho: Box<dyn Fn(f64) -> f64> = match family {
        EpFamily::Exponential(f) => {
            let f = *f;
            Box::new(move |rho| f.time_of_rho(rho))
        }
        EpFamily::Rational(f) => {
            let f = *f;
            Box::new(move |rho| f.time_of_rho(rho))
        }
        EpFamily::Custom(_) => {
            return Err(domain("chiellini_check", "requires an exponential or rational family"));
        }
    };
    let rho_start = family.sample(0.0)?.rho;
    let rho_end = family.sample(CHIELLINI_WINDOW)?.rho;
    let (lo, hi) = (rho_start.min(rho_end).ln(), rho_start.max(rho_end).ln());
    let grid: Vec<f64> = (0..CHIELLINI_POINTS)
        .map(|j| (lo + (hi - lo) * j as f64 / (CHIELLINI_POINTS - 1) as f64).exp())
        .collect();

    // (η, g, h) at ρ, sampled at t(ρ).
    let components = |rho: f64| -> Result<(f64, f64, f64)> {
        let s = family.sample(time_of_rho(rho))?;
        let log_rate = s.a_dot / s.a;
        let h =
            s.rho * (s.a * s.b - 2.0 * s.d_dot - 4.0 * s.d * s.d + 2.0 * log_rate * s.d) - s.a * s.a / s.rho.powi(3);
        Ok((s.rho_dot, -log_rate, h))
    };
    let rule = LegendreRule::new(16)?;
    let mut ratios = Vec::with_capacity(CHIELLINI_POINTS);
    let mut etas = Vec::with_capacity(CHIELLINI_POINTS);
    for &rho in &grid {
        let (eta, g, h) = components(rho)?;
        ratios.push(h / g);
        etas.push(eta);
    }
    let mut steps = Vec::with_capacity(CHIELLINI_POINTS - 1);
    for j in 0..CHIELLINI_POINTS - 1 {
        let integral = rule.integrate(grid[j], grid[j + 1], |rho| {
            components(rho).map(|(_, g, _)| g).unwrap_or(f64::NAN)
        });
        if !integral.is_finite() {
            return Err(domain(
                "chiellini_check",
                format!("g is not finite on [{}, {}]", grid[j], grid[j + 1]),
            ));
        }
        steps.push((ratios[j + 1] - ratios[j], integral));
    }

    let q = steps.iter().map(|(dh, g)| dh * g).sum::<f64>() / steps.iter().map(|(_, g)| g * g).sum::<f64>();
    let spread = steps.iter().map(|(dh, g)| (dh / g - q).abs()).fold(0.0, f64::max);
    let lambda_q =
        etas.iter().zip(&ratios).map(|(e, r)| e * r).sum::<f64>() / ratios.iter().map(|r| r * r).sum::<f64>();
    let misfit = etas
        .iter()
        .zip(&ratios)
        .map(|(e, r)| (e - lambda_q * r).abs() / e.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let quadratic = (q * lambda_q * lambda_q + lambda_q + 1.0).abs();
    if !(spread <= CHIELLINI_TOLERANCE) {
        return Err(Error::NotIntegrable { deviation: spread });
    }
    Ok(ChielliniFit {
        q,
        lambda_q,
        max_residual: spread.max(misfit).max(quadratic),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DPoint {
    pub t: f64,
    pub d: f64,
}

const ODE_STEP: f64 = 1e-3;
const ODE_MIN_STEP: f64 = 1e-12;
const ODE_LOCAL_TOLERANCE: f64 = 1e-13;

/// Integrates ḋ = 𝕜 − 2d² − Γd from d(0) = d0 with classical RK4 at step
/// 1e−3; each step is checked against two half steps (Richardson estimate
/// |y_{h/2} − y_h|/15) and halved while the estimate exceeds 1e−13.
pub fn d_ode_solve(family: &ExponentialFamily, d0: f64, t_end: f64) -> Result<Vec<DPoint>> {
    if !d0.is_finite() {
        return Err(domain("d_ode_solve", format!("d0 = {d0} must be finite")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(domain("d_ode_solve", format!("t_end = {t_end} must be positive")));
    }
    let (k, gamma) = (family.kconst, family.gamma);
    let rhs = |d: f64| k - 2.0 * d * d - gamma * d;
    let rk4 = |d: f64, h: f64| {
        let k1 = rhs(d);
        let k2 = rhs(d + 0.5 * h * k1);
        let k3 = rhs(d + 0.5 * h * k2);
        let k4 = rhs(d + h * k3);
        d + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut points = vec![DPoint { t: 0.0, d: d0 }];
    let (mut t, mut d) = (0.0f64, d0);
    while t_end - t > 1e-14 * t_end {
        let mut h = ODE_STEP.min(t_end - t);
        loop {
            let full = rk4(d, h);
            let half = rk4(rk4(d, 0.5 * h), 0.5 * h);
            let estimate = (half - full).abs() / 15.0;
            if estimate <= ODE_LOCAL_TOLERANCE * d.abs().max(1.0) && half.is_finite() {
                d = half;
                t += h;
                break;
            }
            h *= 0.5;
            if h < ODE_MIN_STEP {
                return Err(Error::StepUnderflow { t, step: h });
            }
        }
        points.push(DPoint { t, d });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig1() -> ExponentialFamily {
        ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 2.0, 0.0).unwrap()
    }

    fn fig2() -> RationalFamily {
        RationalFamily::new(1.0, 2.0, 1.0, 1.0, 1.0, 1, 1.0).unwrap()
    }

    #[test]
    fn static_residual_vanishes() {
        let s = EpSample {
            t: 0.0,
            a: 1.0,
            a_dot: 0.0,
            b: 1.0,
            d: 0.0,
            d_dot: 0.0,
            rho: 1.0,
            rho_dot: 0.0,
            rho_ddot: 0.0,
        };
        assert_eq!(ep_residual(&s, 1.0), 0.0);
    }

    #[test]
    fn exponential_initial_values() {
        let s = fig1().sample(0.0).unwrap();
        assert_abs_diff_eq!(s.d, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.b, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn large_constant_suppresses_d() {
        let f = ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 1e12, 0.0).unwrap();
        assert!(f.sample(0.0).unwrap().d < 1e-11);
    }

    #[test]
    fn residuals_on_hundred_point_grid() {
        for t in [0.0, 0.5, 1.0, 2.0, 5.0] {
            assert!(ep_residual(&fig1().sample(t).unwrap(), 1.0).abs() < 1e-10);
            assert!(ep_residual(&fig2().sample(t).unwrap(), 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn d_dot_matches_finite_difference() {
        let f = fig1();
        let h = 1e-5;
        let fd = (f.sample(0.7 + h).unwrap().d - f.sample(0.7 - h).unwrap().d) / (2.0 * h);
        assert!((fd - f.sample(0.7).unwrap().d_dot).abs() < 1e-7);
    }

    #[test]
    fn reduced_d_agrees() {
        let f = fig1();
        for t in [0.0, 0.3, 1.0, 4.0, 9.0] {
            assert!((f.sample(t).unwrap().d - f.reduced_d(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn critical_times() {
        let f = fig1();
        assert_abs_diff_eq!(critical_time(&f), -(2.0f64.ln()), epsilon = 1e-15);
        let e = ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, std::f64::consts::E, 0.0).unwrap();
        assert_abs_diff_eq!(e.critical_time(), -1.0, epsilon = 1e-15);
        let g = ExponentialFamily::with_derived_kconst(1.0, 3.25 + 2.0, 1.0, 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(g.kconst, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.critical_time(), -(2.0f64.ln()) / 17.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn guard_before_critical_time() {
        let f = fig1();
        assert!(matches!(f.sample(f.critical_time()), Err(Error::Pole { .. })));
        assert!(f.sample(f.critical_time() + 1e-3).is_ok());
    }

    #[test]
    fn constraint_violation_rejected() {
        assert!(matches!(
            ExponentialFamily::new(1.0, 1.3, 1.0, 1.0, 2.0, 0.0),
            Err(Error::Constraint { .. })
        ));
        assert!(matches!(
            RationalFamily::new(1.0, 2.2, 1.0, 1.0, 1.0, 1, 1.0),
            Err(Error::Constraint { .. })
        ));
        assert!(ExponentialFamily::new(1.0, 1.25, 1.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn rational_initial_values() {
        let s = fig2().sample(0.0).unwrap();
        assert_abs_diff_eq!(s.a, 27.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.b, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.d, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rational_pole() {
        assert!(matches!(fig2().sample(-1.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn rational_k2_constant_b() {
        let f = RationalFamily::with_derived_small_delta(1.0, 2.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(f.sample(0.0).unwrap().b, f.sample(3.0).unwrap().b);
        assert!(ep_residual(&f.sample(1.5).unwrap(), 1.0).abs() < 1e-10);
    }

    #[test]
    fn standard_counterparts() {
        let std1 = EpFamily::Exponential(fig1()).standard_bopp_counterpart().unwrap();
        let s = std1.sample(1.0).unwrap();
        assert_eq!(s.d, 0.0);
        assert!(ep_residual(&s, 1.0).abs() < 1e-12);
        let std2 = EpFamily::Rational(fig2()).standard_bopp_counterpart().unwrap();
        match std2 {
            EpFamily::Rational(r) => {
                assert_abs_diff_eq!(r.delta, 10.0 / 9.0, epsilon = 1e-15);
                assert_eq!(r.small_delta, 0.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn derived_small_delta_matches_fig2() {
        let f = RationalFamily::with_derived_small_delta(1.0, 2.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(f.small_delta, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn chiellini_exponential() {
        let fit = chiellini_check(&EpFamily::Exponential(fig1())).unwrap();
        assert_abs_diff_eq!(fit.q, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.lambda_q, -2.0, epsilon = 1e-12);
        assert!(fit.max_residual < 1e-10);
    }

    #[test]
    fn chiellini_rational_orders() {
        for k in 1..=5u32 {
            let f = RationalFamily::with_derived_small_delta(1.0, 2.0, 1.0, 1.0, 1.0, k).unwrap();
            let fit = chiellini_check(&EpFamily::Rational(f)).unwrap();
            let kf = k as f64;
            assert_abs_diff_eq!(fit.q, (kf + 1.0) / (kf + 2.0).powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(fit.lambda_q, -(kf + 2.0), epsilon = 1e-12);
            assert_abs_diff_eq!(fit.minus_root(), fit.lambda_q, epsilon = 1e-12);
        }
    }

    #[test]
    fn chiellini_rejects_custom() {
        assert!(chiellini_check(&EpFamily::stationary(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn ode_tracks_closed_form() {
        let f = fig1();
        let pts = d_ode_solve(&f, 0.5, 5.0).unwrap();
        let worst = pts.iter().map(|p| (p.d - f.reduced_d(p.t)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert_abs_diff_eq!(pts.last().unwrap().t, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn ode_fixed_points() {
        let f = fig1();
        assert!(d_ode_solve(&f, 0.0, 2.0).unwrap().iter().all(|p| p.d == 0.0));
        assert!(d_ode_solve(&f, -0.5, 2.0)
            .unwrap()
            .iter()
            .all(|p| (p.d + 0.5).abs() < 1e-15));
    }

    #[test]
    fn stationary_family() {
        let f = EpFamily::stationary(1.0, 4.0).unwrap();
        let s = f.sample(3.0).unwrap();
        assert_abs_diff_eq!(s.rho, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(ep_residual(&s, 1.0).abs() < 1e-14);
        assert!(ep_residual(&f.with_scaled_b(1.1).sample(0.0).unwrap(), 1.0).abs() > 1e-2);
    }
}
