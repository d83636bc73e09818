//! Laguerre integrals evaluated with exact-degree Gauss-Laguerre rules.
//!
//! The rules run in double-double arithmetic, see `extended`.

use crate::error::{domain, Result};

use super::extended::product_integral;
use super::gamma::laguerre_norm;
use super::laguerre::LaguerreIndex;
use super::quadrature::exact_order;

/// ∫₀^∞ z^α e^{−z} L_a(z) L_b(z) dz with a rule exact for deg(L_a) + deg(L_b).
pub fn laguerre_product_integral(alpha: u32, a: LaguerreIndex, b: LaguerreIndex) -> Result<f64> {
    let degree = (a.degree + b.degree) as usize;
    product_integral(exact_order(degree), alpha, a, b)
}

/// Worst deviation of the same-order Gram matrix of {L^{n−m}_m, L^{n−m}_n}
/// from its diagonal Γ(i+n−m+1)/i!, each entry scaled by √(N_i N_j).
pub fn orthonormality_check(n: u32, m: u32) -> Result<f64> {
    if n < m {
        return Err(domain(
            "orthonormality_check",
            format!("requires n >= m, got n = {n}, m = {m}"),
        ));
    }
    let alpha = n - m;
    let order = alpha as i32;
    let mut worst = 0.0f64;
    for &i in &[m, n] {
        for &j in &[m, n] {
            let integral =
                laguerre_product_integral(alpha, LaguerreIndex::new(i, order), LaguerreIndex::new(j, order))?;
            let ni = laguerre_norm(i as usize, alpha as f64)?;
            let nj = laguerre_norm(j as usize, alpha as f64)?;
            let target = if i == j { ni } else { 0.0 };
            worst = worst.max((integral - target).abs() / (ni * nj).sqrt());
        }
    }
    Ok(worst)
}

/// |(n−m+1)∫z^{n−m}e^{−z}L^{n−m}_m L^{n−m+1}_{m−1} − ∫z^{n−m+1}e^{−z}L^{n−m}_m L^{n−m+2}_{m−2}|.
///
/// For m < 2 the second integral is taken as zero, and for m = 0 the first
/// one as well (its integrand does not exist).
pub fn appendix_identity_residual(n: u32, m: u32) -> Result<f64> {
    if n < m {
        return Err(domain(
            "appendix_identity_residual",
            format!("requires n >= m, got n = {n}, m = {m}"),
        ));
    }
    let alpha = n - m;
    let order = alpha as i32;
    let base = LaguerreIndex::new(m, order);
    let first = if m >= 1 {
        laguerre_product_integral(alpha, base, LaguerreIndex::new(m - 1, order + 1))?
    } else {
        0.0
    };
    let second = if m >= 2 {
        laguerre_product_integral(alpha + 1, base, LaguerreIndex::new(m - 2, order + 2))?
    } else {
        0.0
    };
    Ok(((alpha + 1) as f64 * first - second).abs())
}
