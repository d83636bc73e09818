//! Special functions and quadrature.

mod extended;
mod gamma;
mod identities;
mod laguerre;
mod quadrature;

pub use gamma::{factorial, gamma, laguerre_norm, GAMMA_TABLE_LIMIT};
pub use identities::{appendix_identity_residual, laguerre_product_integral, orthonormality_check};
pub use laguerre::{
    laguerre_derivative, laguerre_eval, laguerre_real, laguerre_sequence, tricomi_u_terminating, LaguerreIndex,
};
pub use quadrature::{
    cached_gauss_laguerre, exact_order, gauss_laguerre, quadrature_margin, set_quadrature_margin, LegendreRule,
    QuadratureRule, DEFAULT_QUADRATURE_MARGIN,
};
