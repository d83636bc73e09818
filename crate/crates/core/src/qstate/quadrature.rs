//! Independent moments of the explicit wavefunction: Gauss-Laguerre in
//! z = r²/ρ² times a 256-point azimuthal trapezoid, with derivatives of ψ
//! taken analytically.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{state_shape, PhaseMode, QuantumNumbers, StateContext, StateShape};
use crate::ep::EpFamily;
use crate::error::{domain, Result};
use crate::specfun::{cached_gauss_laguerre, exact_order, laguerre_derivative, laguerre_eval};

const ANGULAR_POINTS: usize = 256;

/// Expectation values computed by quadrature. Products of non-commuting
/// pairs are reported in their Hermitian (real-part) form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentSet {
    pub norm: f64,
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
    pub x1_sq: f64,
    pub x2_sq: f64,
    pub p1_sq: f64,
    pub p2_sq: f64,
    /// ⟨x₁p₁ + p₁x₁⟩
    pub x1p1_sym: f64,
    /// ⟨x₂p₂ + p₂x₂⟩
    pub x2p2_sym: f64,
    pub x1p2: f64,
    pub x2p1: f64,
    pub x1x2: f64,
    pub p1p2: f64,
}

/// ψ e^{z/2} and ∂_r(ψ) e^{z/2} at r, before the e^{ilθ} factor.
fn radial_parts(shape: &StateShape, r: f64) -> (Complex64, Complex64) {
    let rho2 = shape.rho * shape.rho;
    let z = r * r / rho2;
    let base = shape.prefactor * Complex64::from_polar(r.powi(shape.power as i32), shape.beta * r * r);
    let value = base * laguerre_eval(shape.laguerre, z);
    let log_slope = Complex64::new(shape.power as f64 / r - r / rho2, 2.0 * shape.beta * r);
    let slope = value * log_slope + base * (laguerre_derivative(shape.laguerre, z) * 2.0 * r / rho2);
    (value, slope)
}

fn angular_grid() -> impl Iterator<Item = f64> {
    (0..ANGULAR_POINTS).map(|j| 2.0 * PI * j as f64 / ANGULAR_POINTS as f64)
}

pub fn quadrature_moments(ctx: &StateContext, t: f64, mode: PhaseMode) -> Result<MomentSet> {
    let shape = state_shape(ctx, t, mode)?;
    let degree = shape.power as usize + 2 * ctx.qn.m as usize + 2;
    let rule = cached_gauss_laguerre(exact_order(degree), 0.0)?;
    let angular_weight = 2.0 * PI / ANGULAR_POINTS as f64;
    let l = shape.l as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let mut acc = MomentSet::default();
    let (mut p1, mut p2, mut x1p1, mut x2p2, mut x1p2, mut x2p1, mut p1p2) = (
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
    );
    for (z, wz) in rule.pairs() {
        let r = shape.rho * z.sqrt();
        let (value, slope) = radial_parts(&shape, r);
        let weight = 0.5 * shape.rho * shape.rho * wz * angular_weight;
        for theta in angular_grid() {
            let (sin, cos) = theta.sin_cos();
            let turn = Complex64::from_polar(1.0, l * theta);
            let psi = value * turn;
            let d_r = slope * turn;
            let d_theta = psi * Complex64::new(0.0, l);
            let d_x = d_r * cos - d_theta * (sin / r);
            let d_y = d_r * sin + d_theta * (cos / r);
            let (x, y) = (r * cos, r * sin);
            let density = psi.norm_sqr();
            let bra = psi.conj() * weight;
            acc.norm += weight * density;
            acc.x1 += weight * x * density;
            acc.x2 += weight * y * density;
            acc.x1_sq += weight * x * x * density;
            acc.x2_sq += weight * y * y * density;
            acc.x1x2 += weight * x * y * density;
            acc.p1_sq += weight * d_x.norm_sqr();
            acc.p2_sq += weight * d_y.norm_sqr();
            p1 += bra * minus_i * d_x;
            p2 += bra * minus_i * d_y;
            x1p1 += bra * x * minus_i * d_x;
            x2p2 += bra * y * minus_i * d_y;
            x1p2 += bra * x * minus_i * d_y;
            x2p1 += bra * y * minus_i * d_x;
            p1p2 += d_x.conj() * d_y * weight;
        }
    }
    acc.p1 = p1.re;
    acc.p2 = p2.re;
    acc.x1p1_sym = 2.0 * x1p1.re;
    acc.x2p2_sym = 2.0 * x2p2.re;
    acc.x1p2 = x1p2.re;
    acc.x2p1 = x2p1.re;
    acc.p1p2 = p1p2.re;
    Ok(acc)
}

/// ⟨ψ_a|ψ_b⟩ at time t; both states must share ρ(t).
pub fn quadrature_overlap(a: &StateContext, b: &StateContext, t: f64, mode: PhaseMode) -> Result<Complex64> {
    let (sa, sb) = (state_shape(a, t, mode)?, state_shape(b, t, mode)?);
    if (sa.rho - sb.rho).abs() > 1e-14 * sa.rho {
        return Err(domain(
            "quadrature_overlap",
            format!("rho differs between states: {} vs {}", sa.rho, sb.rho),
        ));
    }
    let degree = (sa.power + sb.power).div_ceil(2) as usize + (a.qn.m + b.qn.m) as usize;
    let rule = cached_gauss_laguerre(exact_order(degree), 0.0)?;
    let angular_weight = 2.0 * PI / ANGULAR_POINTS as f64;
    let mut radial = Complex64::default();
    for (z, wz) in rule.pairs() {
        let r = sa.rho * z.sqrt();
        radial += radial_parts(&sa, r).0.conj() * radial_parts(&sb, r).0 * (0.5 * sa.rho * sa.rho * wz);
    }
    let mut angular = Complex64::default();
    for theta in angular_grid() {
        angular += Complex64::from_polar(angular_weight, (sb.l - sa.l) as f64 * theta);
    }
    Ok(radial * angular)
}

/// Gram matrix of the given states under one family at time t.
pub fn gram_matrix(states: &[QuantumNumbers], family: &EpFamily, t: f64) -> Result<DMatrix<Complex64>> {
    let contexts: Vec<StateContext> = states.iter().map(|&qn| StateContext::new(qn, family.clone())).collect();
    let mut gram = DMatrix::zeros(states.len(), states.len());
    for i in 0..states.len() {
        for j in 0..states.len() {
            gram[(i, j)] = quadrature_overlap(&contexts[i], &contexts[j], t, PhaseMode::Zero)?;
        }
    }
    Ok(gram)
}
