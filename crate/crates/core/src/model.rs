//! Noncommutative parameters, the modified Bopp-shift map and the
//! commutative Hamiltonian coefficients.

use crate::error::{domain, Error, Result};
use crate::invariant::{CanonicalOps, OperatorMatrix};

/// Constant mass and angular frequency (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorConstants {
    mass: f64,
    omega: f64,
}

impl OscillatorConstants {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
            return Err(domain(
                "OscillatorConstants",
                format!("mass {mass} and omega {omega} must be positive and finite"),
            ));
        }
        Ok(Self { mass, omega })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Mω²
    fn stiffness(&self) -> f64 {
        self.mass * self.omega * self.omega
    }
}

/// Space (θ) and momentum (Ω) noncommutativity at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcParams {
    pub theta: f64,
    pub omega_nc: f64,
}

impl NcParams {
    pub const COMMUTATIVE: NcParams = NcParams {
        theta: 0.0,
        omega_nc: 0.0,
    };

    pub fn new(theta: f64, omega_nc: f64) -> Result<Self> {
        let nc = Self { theta, omega_nc };
        nc.cross_term()?;
        Ok(nc)
    }

    /// √(−θΩ); requires θΩ ≤ 0.
    pub fn cross_term(&self) -> Result<f64> {
        let product = self.theta * self.omega_nc;
        if !product.is_finite() || product > 0.0 {
            return Err(domain("NcParams", format!("theta * omega_nc = {product} must be <= 0")));
        }
        Ok((-product).sqrt())
    }
}

/// Instantaneous coefficients of the commutative Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn coefficients_from_nc(nc: NcParams, osc: OscillatorConstants) -> Result<CoefficientSet> {
    let root = nc.cross_term()?;
    let (m, k) = (osc.mass, osc.stiffness());
    let (theta, omega) = (nc.theta, nc.omega_nc);
    let squeeze = 1.0 - theta * omega / 4.0;
    Ok(CoefficientSet {
        a: squeeze / m + k * theta * theta / 4.0,
        b: k * squeeze + omega * omega / (4.0 * m),
        c: omega / (2.0 * m) + k * theta / 2.0,
        d: root / 4.0 * (omega / (2.0 * m) - k * theta / 2.0),
    })
}

/// Modified Bopp shift expressing (X₁, X₂, P₁, P₂) in canonical operators.
pub fn bopp_forward(ops: &CanonicalOps, nc: NcParams) -> Result<CanonicalOps> {
    let dim = ops.x1.dim();
    for op in [&ops.x2, &ops.p1, &ops.p2] {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.dim(),
            });
        }
    }
    let half_root = nc.cross_term()? / 2.0;
    let (half_theta, half_omega) = (nc.theta / 2.0, nc.omega_nc / 2.0);
    let combine = |base: &OperatorMatrix, terms: [(f64, &OperatorMatrix); 2]| {
        let mut out = base.clone();
        for (factor, op) in terms {
            if factor != 0.0 {
                out.add_scaled(factor, op);
            }
        }
        out
    };
    Ok(CanonicalOps {
        x1: combine(&ops.x1, [(-half_theta, &ops.p2), (half_root, &ops.x2)]),
        x2: combine(&ops.x2, [(half_theta, &ops.p1), (-half_root, &ops.x1)]),
        p1: combine(&ops.p1, [(half_omega, &ops.x2), (half_root, &ops.p2)]),
        p2: combine(&ops.p2, [(-half_omega, &ops.x1), (-half_root, &ops.p1)]),
    })
}

/// Result of inverting the coefficient map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcRecovery {
    pub params: NcParams,
    pub iterations: usize,
    /// Relative mismatch of each reproduced coefficient.
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_c: f64,
    pub residual_d: f64,
}

impl NcRecovery {
    pub fn max_fitted_residual(&self) -> f64 {
        self.residual_a.max(self.residual_b).max(self.residual_d)
    }
}

const MAX_ITERATIONS: usize = 100;

fn relative_gap(value: f64, target: f64) -> f64 {
    let gap = (value - target).abs();
    if target == 0.0 {
        gap
    } else {
        gap / target.abs()
    }
}

/// Recovers (θ, Ω) from a coefficient set.
///
/// With k = Mω², X = √(Mk)|θ|/2 and Y = |Ω|/(2√(Mk)) the coefficients obey
/// Ma − 1 = X(X+Y) and b/k − 1 = Y(X+Y), which fixes |θ| and |Ω| in closed
/// form; the sign of d picks the branch (θ ≥ 0 when d < 0). That point,
/// or `guess` when given, seeds a damped Gauss-Newton polish on the
/// relative residuals of (a, b, d) in the variables p = √|θ|, q = √|Ω|.
/// c is reported, not fitted. When d = 0 one parameter vanishes; θ ≥ 0 is
/// taken, and on the θ = 0 axis the sign of Ω comes from c.
pub fn recover_nc_parameters(
    coeffs: CoefficientSet,
    osc: OscillatorConstants,
    guess: Option<NcParams>,
) -> Result<NcRecovery> {
    let (m, k) = (osc.mass, osc.stiffness());
    let CoefficientSet {
        a: a_target,
        b: b_target,
        c: c_target,
        d: d_target,
    } = coeffs;
    if !(a_target.is_finite() && b_target.is_finite() && c_target.is_finite() && d_target.is_finite()) {
        return Err(domain("recover_nc_parameters", "coefficients must be finite"));
    }
    let a_excess = m * a_target - 1.0;
    let b_excess = b_target / k - 1.0;
    for (name, excess, floor) in [("a", a_excess, 1.0 / m), ("b", b_excess, k)] {
        if excess < -1e-14 {
            return Err(domain(
                "recover_nc_parameters",
                format!("{name} is below its commutative value {floor}: no admissible (theta, omega)"),
            ));
        }
    }
    let (x, y) = {
        let total = (a_excess.max(0.0) + b_excess.max(0.0)).sqrt();
        if total == 0.0 {
            (0.0, 0.0)
        } else {
            (a_excess.max(0.0) / total, b_excess.max(0.0) / total)
        }
    };
    let root_mk = (m * k).sqrt();
    let (theta_abs, omega_abs) = (2.0 * x / root_mk, 2.0 * y * root_mk);

    let finish = |params: NcParams, iterations: usize| -> Result<NcRecovery> {
        let got = coefficients_from_nc(params, osc)?;
        Ok(NcRecovery {
            params,
            iterations,
            residual_a: relative_gap(got.a, coeffs.a),
            residual_b: relative_gap(got.b, coeffs.b),
            residual_c: relative_gap(got.c, coeffs.c),
            residual_d: relative_gap(got.d, coeffs.d),
        })
    };

    if d_target == 0.0 {
        let params = if a_excess <= 0.0 {
            // θ = 0: c = Ω/(2M)
            let sign = if c_target < 0.0 { -1.0 } else { 1.0 };
            NcParams::new(0.0, sign * omega_abs)?
        } else {
            // Ω = 0: Ma − 1 = Mkθ²/4 fixes θ from a alone
            NcParams::new(2.0 * a_excess.sqrt() / root_mk, 0.0)?
        };
        return finish(params, 0);
    }

    // θ = s p², Ω = −s q²
    let s = if d_target < 0.0 { 1.0 } else { -1.0 };
    let problem = Branch {
        m,
        k,
        s,
        a: a_target,
        b: b_target,
        d: d_target,
    };
    let seed = match guess {
        Some(g) => (g.theta.abs().sqrt(), g.omega_nc.abs().sqrt()),
        None => (theta_abs.sqrt(), omega_abs.sqrt()),
    };
    // A zero coordinate makes the d row vanish identically.
    let seed = (seed.0.max(1e-8), seed.1.max(1e-8));
    let (mut p, mut q, mut iterations) = problem.polish(&[0, 1, 2], seed);
    if problem.worst(&[0, 1, 2], p, q) > 1e-13 {
        // (a, b, d) inconsistent: solve {a, d} exactly and report b.
        let start = problem.bracket_a_d().unwrap_or((p, q));
        let (np, nq, more) = problem.polish(&[0, 2], start);
        (p, q, iterations) = (np, nq, iterations + more);
    }
    let residual = problem.worst(&[0, 2], p, q);
    if residual <= 1e-13 {
        return finish(NcParams::new(s * p * p, -s * q * q)?, iterations);
    }
    Err(Error::Convergence {
        operation: "recover_nc_parameters",
        iterations,
        residual,
    })
}

/// Targets on one sign branch, in the variables p = √|θ|, q = √|Ω|.
struct Branch {
    m: f64,
    k: f64,
    s: f64,
    a: f64,
    b: f64,
    d: f64,
}

impl Branch {
    /// Relative residuals of (a, b, d).
    fn residuals(&self, p: f64, q: f64) -> [f64; 3] {
        let (m, k, s) = (self.m, self.k, self.s);
        let (p2, q2) = (p * p, q * q);
        let squeeze = 1.0 + p2 * q2 / 4.0;
        let a = squeeze / m + k * p2 * p2 / 4.0;
        let b = k * squeeze + q2 * q2 / (4.0 * m);
        let d = -s / 8.0 * (p * q * q2 / m + k * p2 * p * q);
        [
            (a - self.a) / self.a,
            (b - self.b) / self.b,
            (d - self.d) / self.d.abs(),
        ]
    }

    /// Rows ∂r/∂p, ∂r/∂q.
    fn jacobian(&self, p: f64, q: f64) -> [[f64; 2]; 3] {
        let (m, k, s) = (self.m, self.k, self.s);
        let (p2, q2) = (p * p, q * q);
        [
            [
                (p * q2 / (2.0 * m) + k * p2 * p) / self.a,
                (p2 * q / (2.0 * m)) / self.a,
            ],
            [(k * p * q2 / 2.0) / self.b, (k * p2 * q / 2.0 + q2 * q / m) / self.b],
            [
                -s / 8.0 * (q2 * q / m + 3.0 * k * p2 * q) / self.d.abs(),
                -s / 8.0 * (3.0 * p * q2 / m + k * p2 * p) / self.d.abs(),
            ],
        ]
    }

    fn worst(&self, rows: &[usize], p: f64, q: f64) -> f64 {
        let r = self.residuals(p, q);
        rows.iter().fold(0.0f64, |acc, &i| acc.max(r[i].abs()))
    }

    fn merit(&self, rows: &[usize], p: f64, q: f64) -> f64 {
        let r = self.residuals(p, q);
        rows.iter().map(|&i| r[i] * r[i]).sum()
    }

    /// Damped Gauss-Newton on the selected rows; stops at the rounding floor.
    fn polish(&self, rows: &[usize], (mut p, mut q): (f64, f64)) -> (f64, f64, usize) {
        let mut current = self.merit(rows, p, q);
        for iteration in 0..MAX_ITERATIONS {
            if self.worst(rows, p, q) <= 2e-16 {
                return (p, q, iteration);
            }
            let (jac, r) = (self.jacobian(p, q), self.residuals(p, q));
            let mut normal = [[0.0f64; 2]; 2];
            let mut rhs = [0.0f64; 2];
            for &row in rows {
                for i in 0..2 {
                    rhs[i] -= jac[row][i] * r[row];
                    for j in 0..2 {
                        normal[i][j] += jac[row][i] * jac[row][j];
                    }
                }
            }
            let det = normal[0][0] * normal[1][1] - normal[0][1] * normal[1][0];
            let (dp, dq) = if det.abs() > 1e-300 {
                (
                    (normal[1][1] * rhs[0] - normal[0][1] * rhs[1]) / det,
                    (normal[0][0] * rhs[1] - normal[1][0] * rhs[0]) / det,
                )
            } else {
                (rhs[0], rhs[1])
            };
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let (np, nq) = (p + lambda * dp, q + lambda * dq);
                if np >= 0.0 && nq >= 0.0 {
                    let trial = self.merit(rows, np, nq);
                    if trial < current {
                        (p, q, current) = (np, nq, trial);
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return (p, q, iteration);
            }
        }
        (p, q, MAX_ITERATIONS)
    }

    /// Roots of d along the a-constraint curve: with u = |θ|,
    /// |Ω| = (4(Ma − 1) − Mk u²)/u, scanned for sign changes of
    /// 8|d(u)| − 8|d*| on (0, u_max) and bisected. The root with the
    /// smallest b mismatch wins.
    fn bracket_a_d(&self) -> Option<(f64, f64)> {
        let (m, k) = (self.m, self.k);
        let excess = 4.0 * (m * self.a - 1.0);
        if !(excess > 0.0) {
            return None;
        }
        let u_max = (excess / (m * k)).sqrt();
        let coords = |u: f64| (u.sqrt(), ((excess - m * k * u * u) / u).max(0.0).sqrt());
        let gap = |u: f64| {
            let (p, q) = coords(u);
            let (p2, q2) = (p * p, q * q);
            (p * q * q2 / m + k * p2 * p * q) / 8.0 - self.d.abs()
        };
        const SCAN: usize = 400;
        let points: Vec<f64> = (1..=SCAN)
            .map(|j| u_max * (1e-12f64).powf(1.0 - j as f64 / SCAN as f64))
            .collect();
        let mut best: Option<(f64, f64, f64)> = None;
        for w in points.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (g_lo, g_hi) = (gap(lo), gap(hi));
            if g_lo == 0.0 || g_lo.signum() == g_hi.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if gap(mid).signum() == g_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (p, q) = coords(0.5 * (lo + hi));
            let b_gap = self.residuals(p, q)[1].abs();
            if best.is_none_or(|(_, _, g)| b_gap < g) {
                best = Some((p, q, b_gap));
            }
        }
        best.map(|(p, q, _)| (p, q))
    }
}
