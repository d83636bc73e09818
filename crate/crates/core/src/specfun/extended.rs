//! Double-double Gauss-Laguerre integration of Laguerre products.
//!
//! The integrals in the identity checks cancel to zero from terms of size
//! Γ(α+m+1), so f64 rounding alone would exceed an absolute 1e−10 once α
//! reaches 7 or so. Nodes are polished, and weights and integrands
//! evaluated, in ~106-bit arithmetic.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

use super::laguerre::LaguerreIndex;
use super::quadrature::gauss_laguerre;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    Dd { hi: s, lo: e }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub(crate) fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let s = two_sum(self.hi, rhs.hi);
        let t = two_sum(self.lo, rhs.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let p = self.hi * rhs.hi;
        let e = self.hi.mul_add(rhs.hi, -p);
        quick_two_sum(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::new(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::new(q2);
        let q3 = r.hi / rhs.hi;
        quick_two_sum(q1, q2) + Dd::new(q3)
    }
}

/// L^α_0 … L^α_q at z for α ≥ 0 by the degree recurrence.
fn sequence(max_degree: usize, alpha: u32, z: Dd) -> Vec<Dd> {
    let a = Dd::new(alpha as f64);
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(Dd::new(1.0));
    if max_degree >= 1 {
        out.push(Dd::new(1.0 + alpha as f64) - z);
    }
    for k in 1..max_degree {
        let kf = Dd::new(k as f64);
        let next = ((Dd::new(2.0 * k as f64 + 1.0) + a - z) * out[k] - (kf + a) * out[k - 1]) / Dd::new(k as f64 + 1.0);
        out.push(next);
    }
    out
}

/// L^{order}_{degree}(z); negative orders lowered through L^α_m = L^{α+1}_m − L^{α+1}_{m−1}.
fn laguerre(idx: LaguerreIndex, z: Dd) -> Dd {
    if idx.order >= 0 {
        return sequence(idx.degree as usize, idx.order as u32, z)[idx.degree as usize];
    }
    let raised = LaguerreIndex::new(idx.degree, idx.order + 1);
    if idx.degree == 0 {
        return laguerre(raised, z);
    }
    laguerre(raised, z) - laguerre(LaguerreIndex::new(idx.degree - 1, idx.order + 1), z)
}

pub(crate) struct DdRule {
    pairs: Vec<(Dd, Dd)>,
}

fn build_rule(order: usize, alpha: u32) -> Result<DdRule> {
    let seed = gauss_laguerre(order, alpha as f64)?;
    let q = Dd::new(order as f64);
    let qa = Dd::new((order as u32 + alpha) as f64);
    // Γ(q+α+1)/q! = α! Π_{j=1..q} (j+α)/j
    let mut ratio = Dd::new(1.0);
    for j in 1..=alpha {
        ratio = ratio * Dd::new(j as f64);
    }
    for j in 1..=order {
        ratio = ratio * Dd::new((j as u32 + alpha) as f64) / Dd::new(j as f64);
    }
    let mut pairs = Vec::with_capacity(order);
    for &guess in seed.nodes() {
        let mut z = Dd::new(guess);
        let mut converged = false;
        for _ in 0..8 {
            let seq = sequence(order, alpha, z);
            let slope = (q * seq[order] - qa * seq[order - 1]) / z;
            let step = seq[order] / slope;
            z = z - step;
            if step.abs().hi <= 1e-30 * z.hi {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNodes { order });
        }
        let prev = sequence(order - 1, alpha, z)[order - 1];
        let weight = ratio * z / (qa * qa * prev * prev);
        pairs.push((z, weight));
    }
    Ok(DdRule { pairs })
}

fn cached_rule(order: usize, alpha: u32) -> Result<Arc<DdRule>> {
    type Cache = RwLock<HashMap<(usize, u32), Arc<DdRule>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&(order, alpha)) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(order, alpha)?);
    cache
        .write()
        .expect("rule cache poisoned")
        .insert((order, alpha), Arc::clone(&rule));
    Ok(rule)
}

/// ∫₀^∞ z^α e^{−z} L_a(z) L_b(z) dz with an `order`-node rule in double-double.
pub(crate) fn product_integral(order: usize, alpha: u32, a: LaguerreIndex, b: LaguerreIndex) -> Result<f64> {
    let rule = cached_rule(order, alpha)?;
    let mut sum = Dd::default();
    for &(z, w) in &rule.pairs {
        sum = sum + w * laguerre(a, z) * laguerre(b, z);
    }
    Ok(sum.to_f64())
}
