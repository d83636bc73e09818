//! Gaussian quadrature rules.
//!
//! Generalized Gauss-Laguerre rules integrate z^α e^{−z} P(z) over (0, ∞)
//! exactly for polynomials P of degree ≤ 2q − 1. Nodes are seeded from the
//! eigenvalues of the Jacobi matrix and polished by Newton iteration on
//! L^α_q; weights come from the closed form in L^α_{q−1}, which keeps the
//! tiny weights at large nodes relatively accurate.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};

use super::gamma::laguerre_norm;
use super::laguerre::laguerre_sequence;

/// Extra nodes added on top of the exact order by [`exact_order`].
pub const DEFAULT_QUADRATURE_MARGIN: usize = 2;

static MARGIN: AtomicUsize = AtomicUsize::new(DEFAULT_QUADRATURE_MARGIN);

pub fn quadrature_margin() -> usize {
    MARGIN.load(Ordering::Relaxed)
}

pub fn set_quadrature_margin(margin: usize) {
    MARGIN.store(margin, Ordering::Relaxed);
}

/// Number of nodes that integrates a polynomial of the given degree exactly,
/// plus the configured margin.
pub fn exact_order(degree: usize) -> usize {
    (degree + 1).div_ceil(2) + quadrature_margin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
    weight_exponent: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_exponent
    }

    /// Σ w_i f(z_i) ≈ ∫₀^∞ z^α e^{−z} f(z) dz
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

fn jacobi_eigenvalues(order: usize, alpha: f64) -> Vec<f64> {
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for i in 0..order {
        jac[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
        if i + 1 < order {
            let off = ((i as f64 + 1.0) * (i as f64 + 1.0 + alpha)).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Generalized Gauss-Laguerre rule of `order` nodes for weight z^α e^{−z}.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(domain("gauss_laguerre", "order must be at least 1"));
    }
    if !(alpha >= 0.0) {
        return Err(domain("gauss_laguerre", format!("alpha = {alpha} must be >= 0")));
    }
    let q = order as f64;
    let mass_ratio = laguerre_norm(order, alpha)?;
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for guess in jacobi_eigenvalues(order, alpha) {
        let mut z = guess;
        let mut last_step = f64::INFINITY;
        for _ in 0..100 {
            let seq = laguerre_sequence(order, alpha, z);
            let (value, prev) = (seq[order], seq[order - 1]);
            let slope = (q * value - (q + alpha) * prev) / z;
            let step = value / slope;
            if !(step.abs() < last_step) && last_step <= 1e-12 * z {
                // Rounding floor reached.
                break;
            }
            z -= step;
            last_step = step.abs();
            if !z.is_finite() || z <= 0.0 || last_step <= 4.0 * f64::EPSILON * z {
                break;
            }
        }
        if !(z.is_finite() && z > 0.0 && last_step <= 1e-12 * z) {
            return Err(Error::QuadratureNodes { order });
        }
        let prev = laguerre_sequence(order - 1, alpha, z)[order - 1];
        nodes.push(z);
        weights.push(mass_ratio * z / ((q + alpha) * (q + alpha) * prev * prev));
    }
    let increasing = nodes.windows(2).all(|w| w[0] < w[1]);
    if !increasing || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::QuadratureNodes { order });
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
        weight_exponent: alpha,
    })
}

/// Shared Gauss-Laguerre rule; built once per (order, α).
pub fn cached_gauss_laguerre(order: usize, alpha: f64) -> Result<Arc<QuadratureRule>> {
    type Cache = RwLock<HashMap<(usize, u64), Arc<QuadratureRule>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (order, alpha.to_bits());
    if let Some(rule) = cache.read().expect("quadrature cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_laguerre(order, alpha)?);
    let mut writer = cache.write().expect("quadrature cache poisoned");
    Ok(Arc::clone(writer.entry(key).or_insert(rule)))
}

/// Gauss-Legendre rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LegendreRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(domain("gauss_legendre", "order must be at least 1"));
        }
        let n = order as f64;
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut slope = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let value = if order == 1 { x } else { p1 };
                let below = if order == 1 { 1.0 } else { p0 };
                slope = n * (x * value - below) / (x * x - 1.0);
                let step = value / slope;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * slope * slope);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// ∫_lo^hi f
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite(&self, lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let width = (hi - lo) / panels as f64;
        (0..panels)
            .map(|j| {
                let a = lo + width * j as f64;
                self.integrate(a, a + width, &f)
            })
            .sum()
    }
}
