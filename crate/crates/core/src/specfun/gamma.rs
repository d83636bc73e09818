//! Gamma function at integer and half-integer arguments.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Largest argument served by the tables.
pub const GAMMA_TABLE_LIMIT: usize = 64;

struct Tables {
    /// `factorial[k] = k!`
    factorial: [f64; GAMMA_TABLE_LIMIT + 1],
    /// `half[k] = Γ(k + 1/2)`
    half: [f64; GAMMA_TABLE_LIMIT + 1],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut factorial = [1.0; GAMMA_TABLE_LIMIT + 1];
        let mut half = [PI.sqrt(); GAMMA_TABLE_LIMIT + 1];
        for k in 1..=GAMMA_TABLE_LIMIT {
            factorial[k] = factorial[k - 1] * k as f64;
            // Γ(k + 1/2) = (k - 1/2) Γ(k - 1/2)
            half[k] = half[k - 1] * (k as f64 - 0.5);
        }
        Tables { factorial, half }
    })
}

/// `k!` for `k <= 64`.
pub fn factorial(k: usize) -> Result<f64> {
    if k > GAMMA_TABLE_LIMIT {
        return Err(domain(
            "factorial",
            format!("{k}! exceeds the table limit {GAMMA_TABLE_LIMIT}"),
        ));
    }
    Ok(tables().factorial[k])
}

/// Γ(x) for x a positive integer or half-integer with x ≤ 64.
pub fn gamma(x: f64) -> Result<f64> {
    let twice = 2.0 * x;
    if !(x > 0.0) || twice.fract() != 0.0 || x > GAMMA_TABLE_LIMIT as f64 {
        return Err(domain(
            "gamma",
            format!("argument {x} is not a half-integer in (0, {GAMMA_TABLE_LIMIT}]"),
        ));
    }
    let twice = twice as usize;
    if twice.is_multiple_of(2) {
        Ok(tables().factorial[twice / 2 - 1])
    } else {
        Ok(tables().half[twice / 2])
    }
}

/// Γ(degree + α + 1) / degree!, the squared norm of L^α_degree under z^α e^{-z}.
pub fn laguerre_norm(degree: usize, alpha: f64) -> Result<f64> {
    let mut ratio = gamma(alpha + 1.0)?;
    for j in 1..=degree {
        ratio *= (j as f64 + alpha) / j as f64;
    }
    Ok(ratio)
}
