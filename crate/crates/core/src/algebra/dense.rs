//! Dense complex operators and state vectors with explicit dimension checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<Complex64>);

impl Operator {
    /// Wraps a matrix, rejecting non-square or non-finite input.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be >= 1".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Operator(matrix))
    }

    /// Wraps a matrix produced internally; callers guarantee squareness.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Operator(matrix)
    }

    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Operator(DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 * &other.0))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 - &other.0))
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator(&self.0 * factor)
    }

    /// Kronecker product `self ⊗ other`; row index is `i_self * dim_other + i_other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.dim() != ket.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: ket.dim(),
            });
        }
        Ok(Ket(&self.0 * &ket.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus restricted to rows and columns where `mask` is true.
    pub fn max_abs_masked(&self, mask: &[bool]) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for r in (0..n).filter(|&r| mask[r]) {
            for c in (0..n).filter(|&c| mask[c]) {
                best = best.max(self.0[(r, c)].norm());
            }
        }
        best
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).map(|d| d.max_abs() <= tol).unwrap_or(false)
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|r| (0..n).all(|c| r == c || self.0[(r, c)] == ZERO))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        self.0
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `xy − yx`.
pub fn commutator(x: &Operator, y: &Operator) -> Result<Operator> {
    x.matmul(y)?.sub(&y.matmul(x)?)
}

/// A dense complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket(DVector<Complex64>);

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("ket dimension must be >= 1".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Ket(DVector::from_vec(amplitudes)))
    }

    pub(crate) fn from_vector_unchecked(v: DVector<Complex64>) -> Self {
        Ket(v)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ket(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn get(&self, index: usize) -> Complex64 {
        self.0[index]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// Returns the unit vector along `self`; fails on the zero vector.
    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Ket(&self.0 / Complex64::new(n, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Ket {
        Ket(&self.0 * factor)
    }

    pub fn sub(&self, other: &Ket) -> Result<Ket> {
        self.check_same_dim(other)?;
        Ok(Ket(&self.0 - &other.0))
    }

    fn check_same_dim(&self, other: &Ket) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self.0.dotc(&other.0))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Ket) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Tensor product with index `i_self * dim_other + i_other`.
    pub fn kron(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    /// Multiplies by a global phase so that the first amplitude with modulus
    /// above `threshold` is real and positive. Returns the phase applied.
    pub fn fix_gauge(&mut self, threshold: f64) -> Complex64 {
        let Some(pivot) = self.0.iter().find(|z| z.norm() > threshold).copied() else {
            return ONE;
        };
        let phase = pivot.conj() / pivot.norm();
        self.0 *= phase;
        phase
    }
}
