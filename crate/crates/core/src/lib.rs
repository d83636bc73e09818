//! Time-dependent oscillator in a noncommutative plane: coefficient maps,
//! Ermakov-Pinney families, invariant eigenstates and their moments, with
//! quadrature and truncated-matrix oracles for each closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ep;
pub mod error;
pub mod invariant;
pub mod model;
pub mod qstate;
pub mod specfun;

pub use error::{Error, Result};
