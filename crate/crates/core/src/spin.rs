//! Collective spin algebra in the `(2j+1)`-dimensional symmetric subspace.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis::{unit, ProjectiveBasis};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{fix_phase, CMatrix, CVector, C64, I};
use crate::operator::HermitianOperator;
use crate::state::QuantumState;

/// Half-integer spin length `j`, stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct SpinLength(u32);

impl SpinLength {
    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::InvalidArgument("spin length must be positive".into()));
        }
        Ok(Self(twice_j))
    }

    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice <= 0.0 || (twice - twice.round()).abs() > 1e-9 || twice > u32::MAX as f64 {
            return Err(Error::InvalidArgument(format!("spin length {j} is not a positive half-integer")));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    /// Particle number `N = 2j`.
    pub fn particles(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Magnetic quantum number of J_z basis index `k` (ordering `j, j-1, …, -j`).
    pub fn m_of_index(self, k: usize) -> f64 {
        self.value() - k as f64
    }
}

impl fmt::Display for SpinLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl From<SpinLength> for f64 {
    fn from(j: SpinLength) -> f64 {
        j.value()
    }
}

impl TryFrom<f64> for SpinLength {
    type Error = Error;

    fn try_from(j: f64) -> Result<Self> {
        Self::new(j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Collective spin operators together with the cached J_y eigenbasis.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    j: SpinLength,
    jx: HermitianOperator,
    jy: HermitianOperator,
    jz: HermitianOperator,
    jy_basis: ProjectiveBasis,
}

impl SpinSystem {
    pub fn new(j: SpinLength) -> Self {
        let dim = j.dim();
        let jv = j.value();
        let mut raise = CMatrix::zeros(dim, dim);
        for k in 1..dim {
            let m = j.m_of_index(k);
            raise[(k - 1, k)] = C64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let lower = raise.adjoint();
        let jx = HermitianOperator::from_hermitian_part(&((&raise + &lower) * C64::new(0.5, 0.0)));
        let jy = HermitianOperator::from_hermitian_part(&((&raise - &lower) * (-I * 0.5)));
        let jz_diag: Vec<f64> = (0..dim).map(|k| j.m_of_index(k)).collect();
        let jz = HermitianOperator::from_real_diagonal(&jz_diag);
        let jy_basis = build_jy_basis(j, &jy);
        Self { j, jx, jy, jz, jy_basis }
    }

    pub fn j(&self) -> SpinLength {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn jx(&self) -> &HermitianOperator {
        &self.jx
    }

    pub fn jy(&self) -> &HermitianOperator {
        &self.jy
    }

    pub fn jz(&self) -> &HermitianOperator {
        &self.jz
    }

    pub fn component(&self, axis: Axis) -> &HermitianOperator {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    /// `n_x J_x + n_y J_y + n_z J_z`.
    pub fn along(&self, n: [f64; 3]) -> HermitianOperator {
        &(&(&self.jx * n[0]) + &(&self.jy * n[1])) + &(&self.jz * n[2])
    }

    /// Projectors onto the J_y eigenstates, labeled `m_y = -j, …, j`.
    pub fn jy_basis(&self) -> &ProjectiveBasis {
        &self.jy_basis
    }

    /// Highest-weight J_z eigenstate `|j, j⟩_z`.
    pub fn coherent_state_z(&self) -> QuantumState {
        QuantumState::Pure(unit(self.dim(), 0))
    }

    /// One-axis-twisted state `exp(-i J_y² τ) |j, j⟩_z`, applied exactly in
    /// the J_y eigenbasis.
    pub fn oat_state(&self, tau: f64) -> Result<QuantumState> {
        if !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("twisting time {tau} is not finite")));
        }
        if tau == 0.0 {
            return Ok(self.coherent_state_z());
        }
        let v = self.jy_basis.vectors();
        // ⟨m_y | j, j⟩_z is the first row of V†, i.e. conj of the first row of V.
        let coeffs = CVector::from_iterator(
            self.dim(),
            self.jy_basis.labels().iter().enumerate().map(|(k, &m)| v[(0, k)].conj() * (-I * m * m * tau).exp()),
        );
        Ok(QuantumState::Pure(v * coeffs))
    }

    /// `exp(-i J_axis · angle) ρ exp(i J_axis · angle)`.
    pub fn rotate(&self, state: &QuantumState, axis: Axis, angle: f64) -> Result<QuantumState> {
        check_dim(self.dim(), state.dim())?;
        if angle == 0.0 {
            return Ok(state.clone());
        }
        let u = match axis {
            Axis::Y => {
                let v = self.jy_basis.vectors();
                let phases =
                    CVector::from_iterator(self.dim(), self.jy_basis.labels().iter().map(|&m| (-I * m * angle).exp()));
                v * CMatrix::from_diagonal(&phases) * v.adjoint()
            }
            _ => self.component(axis).unitary(angle),
        };
        state.transformed(&u)
    }
}

fn build_jy_basis(j: SpinLength, jy: &HermitianOperator) -> ProjectiveBasis {
    let (_, mut vectors) = jy.eigen();
    for k in 0..vectors.ncols() {
        let mut v = vectors.column(k).into_owned();
        fix_phase(&mut v);
        vectors.set_column(k, &v);
    }
    // Ascending eigenvalues are exactly -j, …, j; label with the exact values.
    let labels = (0..j.dim()).map(|k| k as f64 - j.value()).collect();
    ProjectiveBasis::rank_one(vectors, labels).expect("Hermitian eigenvectors are orthonormal")
}

pub fn make_spin_operators(j: f64) -> Result<SpinSystem> {
    Ok(SpinSystem::new(SpinLength::new(j)?))
}

pub fn coherent_state_z(j: f64) -> Result<QuantumState> {
    let j = SpinLength::new(j)?;
    Ok(QuantumState::Pure(unit(j.dim(), 0)))
}

pub fn oat_state(j: f64, tau: f64) -> Result<QuantumState> {
    make_spin_operators(j)?.oat_state(tau)
}

pub fn jy_basis(j: f64) -> Result<ProjectiveBasis> {
    Ok(make_spin_operators(j)?.jy_basis().clone())
}

/// `exp(-i H θ) ρ exp(i H θ)`.
pub fn phase_evolve(state: &QuantumState, generator: &HermitianOperator, theta: f64) -> Result<QuantumState> {
    check_dim(state.dim(), generator.dim())?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("phase {theta} is not finite")));
    }
    if theta == 0.0 {
        return Ok(state.clone());
    }
    state.transformed(&generator.unitary(theta))
}
