//! Dense operators on a truncated two-mode number basis |n₁, n₂⟩.
//!
//! Basis index of |n₁, n₂⟩ is `n₁ * N + n₂`. Storage is dense; products skip
//! zero entries of the right factor, which keeps the banded oscillator
//! operators cheap to multiply.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: DMatrix<Complex64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: DMatrix::zeros(dim * dim, dim * dim),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            data: DMatrix::identity(dim * dim, dim * dim),
            hermitian: true,
        }
    }

    /// Wraps an N²×N² matrix; `hermitian` is the caller's claim, see
    /// [`OperatorMatrix::hermiticity_defect`].
    pub fn from_data(dim: usize, data: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        let size = dim * dim;
        if data.nrows() != size || data.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { dim, data, hermitian })
    }

    /// `first ⊗ second` for single-mode N×N factors.
    pub fn kron(first: &DMatrix<Complex64>, second: &DMatrix<Complex64>, hermitian: bool) -> Self {
        Self {
            dim: first.nrows(),
            data: first.kronecker(second),
            hermitian,
        }
    }

    /// Basis size per mode.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// max |A − A†|
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.data.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = self.data[(i, j)] - self.data[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: &self.data * Complex64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: &self.data * factor,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// `self + factor * other`, in place.
    pub fn add_scaled(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        let f = Complex64::new(factor, 0.0);
        for (lhs, rhs) in self.data.iter_mut().zip(other.data.iter()) {
            *lhs += f * rhs;
        }
        self.hermitian &= other.hermitian;
    }

    /// Matrix product.
    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.data.nrows();
        // Nonzero pattern of each column of the left factor.
        let columns: Vec<Vec<(usize, Complex64)>> = (0..n)
            .map(|k| {
                self.data
                    .column(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                    .map(|(i, v)| (i, *v))
                    .collect()
            })
            .collect();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            for (k, column) in columns.iter().enumerate() {
                let b = other.data[(k, j)];
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for &(i, a) in column {
                    out[(i, j)] += a * b;
                }
            }
        }
        Self {
            dim: self.dim,
            data: out,
            hermitian: false,
        }
    }

    /// [A, B] = AB − BA
    pub fn commutator(&self, other: &Self) -> Self {
        let mut out = self.product(other);
        out.add_scaled(-1.0, &other.product(self));
        out.hermitian = false;
        out
    }

    /// AB + BA
    pub fn anticommutator(&self, other: &Self) -> Self {
        let mut out = self.product(other);
        out.add_scaled(1.0, &other.product(self));
        out.hermitian = self.hermitian && other.hermitian;
        out
    }

    /// Basis indices whose mode occupations are both ≤ N − 3.
    pub fn interior_indices(&self) -> Vec<usize> {
        interior_indices(self.dim)
    }

    /// Sub-matrix on the given basis indices.
    pub fn project(&self, indices: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(indices.len(), indices.len(), |i, j| self.data[(indices[i], indices[j])])
    }

    pub fn interior_block(&self) -> DMatrix<Complex64> {
        self.project(&self.interior_indices())
    }

    /// max |A_ij| over the interior block.
    pub fn interior_max_norm(&self) -> f64 {
        let idx = self.interior_indices();
        let mut worst = 0.0f64;
        for &j in &idx {
            for &i in &idx {
                worst = worst.max(self.data[(i, j)].norm());
            }
        }
        worst
    }

    /// max |A_ij − value δ_ij| over the interior block.
    pub fn interior_deviation_from_identity(&self, value: Complex64) -> f64 {
        let idx = self.interior_indices();
        let mut worst = 0.0f64;
        for &j in &idx {
            for &i in &idx {
                let target = if i == j { value } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((self.data[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Sorted eigenvalues of the Hermitian part of the projection onto `indices`.
    pub fn projected_spectrum(&self, indices: &[usize]) -> Vec<f64> {
        hermitian_spectrum(self.project(indices))
    }
}

/// Basis indices n₁·N + n₂ with n₁, n₂ ≤ N − 3.
pub fn interior_indices(dim: usize) -> Vec<usize> {
    let edge = dim.saturating_sub(2);
    (0..edge)
        .flat_map(|n1| (0..edge).map(move |n2| n1 * dim + n2))
        .collect()
}

/// Basis indices with n₁ + n₂ ≤ `max_total` (number shells).
pub fn shell_indices(dim: usize, max_total: usize) -> Vec<usize> {
    (0..dim)
        .flat_map(|n1| (0..dim).map(move |n2| (n1, n2)))
        .filter(|(n1, n2)| n1 + n2 <= max_total)
        .map(|(n1, n2)| n1 * dim + n2)
        .collect()
}

/// Sorted eigenvalues of (A + A†)/2.
pub fn hermitian_spectrum(matrix: DMatrix<Complex64>) -> Vec<f64> {
    let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.product(rhs)
    }
}
