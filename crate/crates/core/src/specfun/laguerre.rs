//! Associated Laguerre polynomials L^α_m(z) and the Tricomi function at
//! negative-integer first argument.

use crate::error::{domain, Result};

use super::gamma::factorial;

/// Index pair of an associated Laguerre polynomial: subscript `degree`,
/// superscript `order` (which may be negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaguerreIndex {
    pub degree: u32,
    pub order: i32,
}

impl LaguerreIndex {
    pub fn new(degree: u32, order: i32) -> Self {
        Self { degree, order }
    }
}

/// L^α_0..=L^α_{max_degree} at `z` for a real order, by the forward
/// three-term recurrence in the degree.
pub fn laguerre_sequence(max_degree: usize, alpha: f64, z: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(max_degree + 1);
    values.push(1.0);
    if max_degree == 0 {
        return values;
    }
    values.push(1.0 + alpha - z);
    for k in 1..max_degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * values[k] - (kf + alpha) * values[k - 1]) / (kf + 1.0);
        values.push(next);
    }
    values
}

/// L^α_degree(z) for a real order by the three-term recurrence.
pub fn laguerre_real(degree: usize, alpha: f64, z: f64) -> f64 {
    let mut prev = 1.0;
    if degree == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - z;
    for k in 1..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// L^{order}_{degree}(z).
///
/// Non-negative orders use the degree recurrence directly. Negative orders
/// start from order 0 and lower the superscript one step at a time with
/// L^α_j = L^{α+1}_j − L^{α+1}_{j−1}, applied to the whole degree sequence.
pub fn laguerre_eval(idx: LaguerreIndex, z: f64) -> f64 {
    let degree = idx.degree as usize;
    if idx.order >= 0 {
        return laguerre_real(degree, idx.order as f64, z);
    }
    let mut values = laguerre_sequence(degree, 0.0, z);
    for _ in 0..idx.order.unsigned_abs() {
        for j in (1..=degree).rev() {
            values[j] -= values[j - 1];
        }
    }
    values[degree]
}

/// ∂_z L^{order}_{degree}(z) = −L^{order+1}_{degree−1}(z), and 0 for degree 0.
pub fn laguerre_derivative(idx: LaguerreIndex, z: f64) -> f64 {
    if idx.degree == 0 {
        return 0.0;
    }
    -laguerre_eval(LaguerreIndex::new(idx.degree - 1, idx.order + 1), z)
}

/// U(−m, 1−m+n, z) = m!/(−1)^m · L^{n−m}_m(z), valid on the regular branch n ≥ m.
pub fn tricomi_u_terminating(m: u32, n: u32, z: f64) -> Result<f64> {
    if n < m {
        return Err(domain(
            "tricomi_u_terminating",
            format!("n = {n} < m = {m}: the n < m branch (negative Laguerre order) is not supported"),
        ));
    }
    let order = n as i32 - m as i32;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * factorial(m as usize)? * laguerre_eval(LaguerreIndex::new(m, order), z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Explicit series Σ_j (−1)^j C(m+α, m−j) z^j / j!, only used as an
    /// independent check at small degree.
    fn series(m: u32, alpha: i32, z: f64) -> f64 {
        let binom = |top: f64, k: u32| -> f64 { (0..k).fold(1.0, |acc, i| acc * (top - i as f64) / (i as f64 + 1.0)) };
        let mut total = 0.0;
        let mut zpow = 1.0;
        let mut jfact = 1.0;
        for j in 0..=m {
            if j > 0 {
                zpow *= z;
                jfact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * binom(m as f64 + alpha as f64, m - j) * zpow / jfact;
        }
        total
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(laguerre_eval(LaguerreIndex::new(0, 0), 3.7), 1.0);
        assert_abs_diff_eq!(laguerre_eval(LaguerreIndex::new(1, 1), 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(laguerre_eval(LaguerreIndex::new(2, 0), 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn agrees_with_series_including_negative_order() {
        for m in 0..=7 {
            for alpha in -4..=5 {
                for &z in &[0.0, 0.3, 1.7, 4.2] {
                    let got = laguerre_eval(LaguerreIndex::new(m, alpha), z);
                    assert_abs_diff_eq!(got, series(m, alpha, z), epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn negative_order_matches_direct_recurrence() {
        // The degree recurrence is itself valid for negative α.
        for m in 0..=10 {
            for alpha in -3..0 {
                let z = 2.3;
                let lowered = laguerre_eval(LaguerreIndex::new(m, alpha), z);
                let direct = laguerre_real(m as usize, alpha as f64, z);
                assert_abs_diff_eq!(lowered, direct, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn derivative_rule() {
        assert_eq!(laguerre_derivative(LaguerreIndex::new(0, 4), 5.0), 0.0);
        assert_abs_diff_eq!(
            laguerre_derivative(LaguerreIndex::new(1, 0), 2.0),
            -1.0,
            epsilon = 1e-15
        );
        let idx = LaguerreIndex::new(2, 0);
        let z = 1.3;
        let h = 1e-5;
        let fd = (laguerre_eval(idx, z + h) - laguerre_eval(idx, z - h)) / (2.0 * h);
        assert!((laguerre_derivative(idx, z) - fd).abs() < 1e-7);
    }

    #[test]
    fn tricomi_values() {
        assert_eq!(tricomi_u_terminating(0, 0, 0.9).unwrap(), 1.0);
        assert_abs_diff_eq!(tricomi_u_terminating(1, 1, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tricomi_u_terminating(2, 2, 0.0).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn tricomi_rejects_irregular_branch() {
        let err = tricomi_u_terminating(3, 1, 0.5).unwrap_err();
        assert!(err.to_string().contains("n < m"));
    }
}
