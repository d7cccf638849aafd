use std::ops::{Add, Mul, Sub};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigen, hermitize, is_diagonal, max_abs, spectral_function, CMatrix, CVector, C64, I};

/// Dense Hermitian matrix in units with ħ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Per-element tolerance on `A - A†`.
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        let residual = max_abs(&(&matrix - matrix.adjoint()));
        if residual > Self::TOLERANCE {
            return Err(Error::InvalidArgument(format!("matrix is not Hermitian (max |A - A†| = {residual:e})")));
        }
        Ok(Self { matrix })
    }

    /// Projects a nearly Hermitian matrix (e.g. one accumulated from
    /// products) onto its Hermitian part.
    pub(crate) fn from_hermitian_part(matrix: &CMatrix) -> Self {
        Self { matrix: hermitize(matrix) }
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let d = CVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::new(x, 0.0)));
        Self { matrix: CMatrix::from_diagonal(&d) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * C64::new(factor, 0.0) }
    }

    /// `[A, B] = AB - BA` (anti-Hermitian).
    pub fn commutator(&self, other: &Self) -> Result<CMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    pub fn is_diagonal(&self) -> bool {
        is_diagonal(&self.matrix)
    }

    /// Eigenvalues ascending, eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.matrix)
    }

    /// `exp(-i t A)` built from the spectral decomposition.
    pub fn unitary(&self, t: f64) -> CMatrix {
        if self.is_diagonal() {
            let d =
                CVector::from_iterator(self.dim(), (0..self.dim()).map(|k| (-I * self.matrix[(k, k)].re * t).exp()));
            return CMatrix::from_diagonal(&d);
        }
        let (values, vectors) = self.eigen();
        spectral_function(&values, &vectors, |lambda| (-I * lambda * t).exp())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scaled(rhs)
    }
}
