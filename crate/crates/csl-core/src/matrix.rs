//! Small dense complex matrices, enough for Hamiltonians and density
//! matrices over a handful of basis states.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    /// Builds a matrix from rows; every row must have the same length as
    /// the number of rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    /// `out = self * x`.
    pub(crate) fn matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (i, out_i) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let mut acc = Complex64::ZERO;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *out_i = acc;
        }
    }

    /// Largest entry of |A - A^dagger|.
    pub fn hermitian_residual(&self) -> f64 {
        let mut max = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..=i {
                let d = self.get(i, j) - self.get(j, i).conj();
                let mag2 = d.norm_sqr();
                if mag2 > max {
                    max = mag2;
                }
            }
        }
        crate::fp::sqrt(max)
    }

    /// Errors unless the matrix is Hermitian within `tol` per entry.
    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let r = self.hermitian_residual();
        if r > tol {
            return Err(Error::NonHermitianHamiltonian { max_residual: r });
        }
        Ok(())
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }
}
