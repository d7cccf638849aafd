use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigen, max_abs, CMatrix, CVector, C64};
use crate::operator::HermitianOperator;

/// A pure state vector or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector),
    Mixed(CMatrix),
}

impl QuantumState {
    pub const NORM_TOLERANCE: f64 = 1e-12;
    pub const EIGENVALUE_FLOOR: f64 = -1e-10;

    pub fn pure(vector: CVector) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("state vector norm is {norm}, expected 1")));
        }
        Ok(Self::Pure(vector))
    }

    /// Normalizes `vector` before wrapping it.
    pub fn pure_normalized(vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if vector.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self::Pure(vector / C64::new(norm, 0.0)))
    }

    pub fn mixed(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("density matrix must be square and nonempty".into()));
        }
        let residual = max_abs(&(&matrix - matrix.adjoint()));
        if residual > Self::NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix is not Hermitian ({residual:e})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > Self::NORM_TOLERANCE || trace.im.abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix trace is {trace}, expected 1")));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if let Some(&lowest) = values.first() {
            if lowest < Self::EIGENVALUE_FLOOR {
                return Err(Error::InvalidArgument(format!("density matrix has negative eigenvalue {lowest:e}")));
            }
        }
        Ok(Self::Mixed(matrix))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::Mixed(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    /// Basis vector `e_index` of the computational basis.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::Pure(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed(m) => m.nrows(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure(_))
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            Self::Pure(v) => v * v.adjoint(),
            Self::Mixed(m) => m.clone(),
        }
    }

    /// Decomposition `ρ = Σ λ_i |e_i⟩⟨e_i|` restricted to strictly positive
    /// weights. A pure state yields a single unit-weight component.
    pub fn ensemble(&self) -> Vec<(f64, CVector)> {
        match self {
            Self::Pure(v) => vec![(1.0, v.clone())],
            Self::Mixed(m) => {
                let (values, vectors) = hermitian_eigen(m);
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(k, &w)| (w, vectors.column(k).into_owned()))
                    .collect()
            }
        }
    }

    /// Real part of `Tr(ρ A)`.
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        check_dim(self.dim(), op.dim())?;
        Ok(self.expectation_matrix(op.matrix()).re)
    }

    /// `Tr(ρ A)` for an arbitrary square matrix.
    pub fn expectation_matrix(&self, a: &CMatrix) -> C64 {
        match self {
            Self::Pure(v) => v.dotc(&(a * v)),
            Self::Mixed(m) => (m * a).trace(),
        }
    }

    /// `Tr(ρ (A − ⟨A⟩)²)`, evaluated in centered form so that eigenstates
    /// give exactly zero.
    pub fn variance(&self, op: &HermitianOperator) -> Result<f64> {
        check_dim(self.dim(), op.dim())?;
        let mean = self.expectation_matrix(op.matrix()).re;
        let centered = |v: &CVector| (op.apply(v) - v * C64::new(mean, 0.0)).norm_squared();
        Ok(match self {
            Self::Pure(v) => centered(v),
            Self::Mixed(_) => self.ensemble().iter().map(|(w, e)| w * centered(e)).sum(),
        })
    }

    pub fn purity(&self) -> f64 {
        match self {
            Self::Pure(_) => 1.0,
            Self::Mixed(m) => (m * m).trace().re,
        }
    }

    /// `U ρ U†` for a unitary `u`.
    pub fn transformed(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        Ok(match self {
            Self::Pure(v) => Self::Pure(u * v),
            Self::Mixed(m) => Self::Mixed(u * m * u.adjoint()),
        })
    }

    /// Spectrum of the density matrix, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        match self {
            Self::Pure(_) => {
                let mut s = vec![0.0; self.dim()];
                *s.last_mut().expect("nonempty") = 1.0;
                s
            }
            Self::Mixed(m) => hermitian_eigen(m).0,
        }
    }
}
