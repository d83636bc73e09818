//! Truncated-basis operator algebra for the Hamiltonian and its invariants.
//!
//! Identities are asserted on the interior block (both occupations ≤ N − 3),
//! where products of two bilinear operators are unaffected by truncation.

mod operator;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use operator::{hermitian_spectrum, interior_indices, shell_indices, OperatorMatrix};

use crate::ep::{EpFamily, EpSample};
use crate::error::{domain, Result};
use crate::model::CoefficientSet;

/// Canonical position and momentum operators of the two modes.
#[derive(Debug, Clone)]
pub struct CanonicalOps {
    pub x1: OperatorMatrix,
    pub x2: OperatorMatrix,
    pub p1: OperatorMatrix,
    pub p2: OperatorMatrix,
}

impl CanonicalOps {
    pub fn dim(&self) -> usize {
        self.x1.dim()
    }
}

fn single_mode(dim: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let mut lower = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 1..dim {
        lower[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&lower + &raise) * Complex64::new(s, 0.0);
    let p = (&raise - &lower) * Complex64::new(0.0, s);
    (x, p)
}

/// x = (a + a†)/√2 and p = i(a† − a)/√2 on N levels per mode, tensored into two modes.
pub fn build_canonical(n: usize) -> Result<CanonicalOps> {
    if n < 4 {
        return Err(domain("build_canonical", format!("basis size {n} per mode is below 4")));
    }
    let (x, p) = single_mode(n);
    let id = DMatrix::<Complex64>::identity(n, n);
    Ok(CanonicalOps {
        x1: OperatorMatrix::kron(&x, &id, true),
        x2: OperatorMatrix::kron(&id, &x, true),
        p1: OperatorMatrix::kron(&p, &id, true),
        p2: OperatorMatrix::kron(&id, &p, true),
    })
}

/// Canonical operators together with the rotation-invariant bilinears the
/// Hamiltonian and invariants are built from.
#[derive(Debug, Clone)]
pub struct OscillatorAlgebra {
    pub canonical: CanonicalOps,
    /// p₁² + p₂²
    pub p_sq: OperatorMatrix,
    /// x₁² + x₂²
    pub x_sq: OperatorMatrix,
    /// x₁p₁ + p₁x₁ + x₂p₂ + p₂x₂
    pub dilation: OperatorMatrix,
    /// x₁p₂ − x₂p₁, the Cartesian p_θ
    pub angular: OperatorMatrix,
}

impl OscillatorAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        let canonical = build_canonical(n)?;
        let (x, p) = single_mode(n);
        let id = DMatrix::<Complex64>::identity(n, n);
        let sum_modes = |single: &DMatrix<Complex64>| {
            let mut op = OperatorMatrix::kron(single, &id, true);
            op.add_scaled(1.0, &OperatorMatrix::kron(&id, single, true));
            op
        };
        let p_sq = sum_modes(&(&p * &p));
        let x_sq = sum_modes(&(&x * &x));
        let dilation = sum_modes(&(&x * &p + &p * &x));
        let mut angular = OperatorMatrix::kron(&x, &p, true);
        angular.add_scaled(-1.0, &OperatorMatrix::kron(&p, &x, true));
        Ok(Self {
            canonical,
            p_sq,
            x_sq,
            dilation,
            angular,
        })
    }

    pub fn dim(&self) -> usize {
        self.canonical.dim()
    }

    /// α p² + β x² + κ D + λ L
    fn combine(&self, p_sq: f64, x_sq: f64, dilation: f64, angular: f64) -> OperatorMatrix {
        let mut op = self.p_sq.scale(p_sq);
        op.add_scaled(x_sq, &self.x_sq);
        op.add_scaled(dilation, &self.dilation);
        if angular != 0.0 {
            op.add_scaled(angular, &self.angular);
        }
        op
    }
}

/// H = (a/2)(p₁²+p₂²) + (b/2)(x₁²+x₂²) + c(p₁x₂ − p₂x₁) + d(x₁p₁+p₁x₁+x₂p₂+p₂x₂).
pub fn hamiltonian_matrix(coeffs: &CoefficientSet, ops: &OscillatorAlgebra) -> OperatorMatrix {
    // p₁x₂ − p₂x₁ = −(x₁p₂ − x₂p₁)
    ops.combine(0.5 * coeffs.a, 0.5 * coeffs.b, coeffs.d, -coeffs.c)
}

/// Scalar coefficients (ρ², (ρ̇−2ρd)²/a² + 1/ρ², −ρ(ρ̇−2ρd)/a) of the Lewis invariant.
fn lewis_coefficients(s: &EpSample) -> (f64, f64, f64) {
    let shear = (s.rho_dot - 2.0 * s.rho * s.d) / s.a;
    (s.rho * s.rho, shear * shear + 1.0 / (s.rho * s.rho), -s.rho * shear)
}

/// I = ρ²(p₁²+p₂²) + [(ρ̇−2ρd)²/a² + 1/ρ²](x₁²+x₂²) − (ρ/a)(ρ̇−2ρd)(x₁p₁+p₁x₁+x₂p₂+p₂x₂)
pub fn lewis_invariant_matrix(s: &EpSample, ops: &OscillatorAlgebra) -> OperatorMatrix {
    let (p_sq, x_sq, dil) = lewis_coefficients(s);
    ops.combine(p_sq, x_sq, dil, 0.0)
}

/// I′ = I/4 − p_θ/2 with p_θ = x₁p₂ − x₂p₁.
pub fn alternative_invariant_matrix(s: &EpSample, ops: &OscillatorAlgebra) -> OperatorMatrix {
    let (p_sq, x_sq, dil) = lewis_coefficients(s);
    ops.combine(0.25 * p_sq, 0.25 * x_sq, 0.25 * dil, -0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    Lewis,
    Alternative,
}

/// ∂ₜI + (1/i)[I, H] with a caller-chosen invariant and Hamiltonian
/// coefficient c. ∂ₜI comes from central differences of the invariant's
/// scalar coefficients at t ± h.
pub fn invariance_operator(
    ops: &OscillatorAlgebra,
    family: &EpFamily,
    t: f64,
    h: f64,
    kind: InvariantKind,
    c: f64,
) -> Result<OperatorMatrix> {
    if !(h > 0.0) {
        return Err(domain("invariance_residual", format!("step h = {h} must be positive")));
    }
    let scale = match kind {
        InvariantKind::Lewis => 1.0,
        InvariantKind::Alternative => 0.25,
    };
    let now = family.sample(t)?;
    let ahead = lewis_coefficients(&family.sample(t + h)?);
    let behind = lewis_coefficients(&family.sample(t - h)?);
    let rate = |fwd: f64, back: f64| scale * (fwd - back) / (2.0 * h);
    let d_invariant = ops.combine(
        rate(ahead.0, behind.0),
        rate(ahead.1, behind.1),
        rate(ahead.2, behind.2),
        0.0,
    );
    let invariant = match kind {
        InvariantKind::Lewis => lewis_invariant_matrix(&now, ops),
        InvariantKind::Alternative => alternative_invariant_matrix(&now, ops),
    };
    let coeffs = CoefficientSet {
        a: now.a,
        b: now.b,
        c,
        d: now.d,
    };
    let hamiltonian = hamiltonian_matrix(&coeffs, ops);
    let commutator = invariant.commutator(&hamiltonian);
    let mut total = d_invariant;
    // (1/i)[I, H] = −i[I, H]
    total.add_scaled(1.0, &commutator.scale_complex(Complex64::new(0.0, -1.0)));
    Ok(total)
}

/// Interior max-norm of [`invariance_operator`].
pub fn invariance_residual_with(
    ops: &OscillatorAlgebra,
    family: &EpFamily,
    t: f64,
    h: f64,
    kind: InvariantKind,
    c: f64,
) -> Result<f64> {
    Ok(invariance_operator(ops, family, t, h, kind, c)?.interior_max_norm())
}

/// Interior max-norm of dI/dt for the Lewis invariant, with c = 0.
pub fn invariance_residual(family: &EpFamily, t: f64, n: usize, h: f64) -> Result<f64> {
    let ops = OscillatorAlgebra::new(n)?;
    invariance_residual_with(&ops, family, t, h, InvariantKind::Lewis, 0.0)
}
