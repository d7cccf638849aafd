//! Seeded random problem instances: Haar-random states, GUE generators and
//! randomly rotated computational bases.
//!
//! Every instance is drawn from its own ChaCha stream keyed by `(seed, index)`,
//! so instance `k` does not depend on how many instances were drawn before it
//! or on which thread draws it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::basis::ProjectiveBasis;
use crate::error::Result;
use crate::linalg::{hermitize, CMatrix, CVector, C64};
use crate::operator::HermitianOperator;
use crate::state::QuantumState;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

pub fn haar_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<QuantumState> {
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    QuantumState::pure_normalized(v)
}

/// `G G† / tr(G G†)` for a Ginibre matrix `G` of the given rank.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<QuantumState> {
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| complex_normal(rng));
    let rho = &g * g.adjoint();
    let trace = rho.trace().re;
    QuantumState::mixed(hermitize(&(rho / C64::new(trace, 0.0))))
}

/// `(G + G†)/2` for a Ginibre matrix `G`.
pub fn gue_generator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(&ginibre(rng, dim))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<ProjectiveBasis> {
    let labels = (0..dim).map(|k| k as f64).collect();
    ProjectiveBasis::rank_one(haar_unitary(rng, dim), labels)
}

/// Flat-Dirichlet probability vector of length `r`.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..r).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub index: u64,
    pub state: QuantumState,
    pub generator: HermitianOperator,
    pub basis: ProjectiveBasis,
    pub theta: f64,
}

impl RandomInstance {
    /// Pure Haar state, GUE generator, Haar-rotated basis, dimension in
    /// `[MIN_DIM, MAX_DIM]` and θ uniform in `[0, 2π)`.
    pub fn draw(seed: u64, index: u64) -> Result<Self> {
        let mut rng = instance_rng(seed, index);
        let dim = rng.random_range(MIN_DIM..=MAX_DIM);
        let state = haar_pure_state(&mut rng, dim)?;
        Self::complete(rng, index, state)
    }

    /// Like [`RandomInstance::draw`] with a random-rank mixed state.
    pub fn draw_mixed(seed: u64, index: u64) -> Result<Self> {
        let mut rng = instance_rng(seed, index);
        let dim = rng.random_range(MIN_DIM..=MAX_DIM);
        let rank = rng.random_range(1..=dim);
        let state = random_mixed_state(&mut rng, dim, rank)?;
        Self::complete(rng, index, state)
    }

    fn complete(mut rng: ChaCha8Rng, index: u64, state: QuantumState) -> Result<Self> {
        let dim = state.dim();
        let generator = gue_generator(&mut rng, dim);
        let basis = random_basis(&mut rng, dim)?;
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        Ok(Self { index, state, generator, basis, theta })
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = instance_rng(7, 0);
        for dim in 1..=8 {
            let u = haar_unitary(&mut rng, dim);
            assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(dim, dim))) < 1e-12);
        }
    }

    #[test]
    fn instances_are_reproducible_and_independent_of_order() {
        let a = RandomInstance::draw(42, 5).unwrap();
        let _ = RandomInstance::draw(42, 4).unwrap();
        let b = RandomInstance::draw(42, 5).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.generator, b.generator);
        assert_eq!(a.theta, b.theta);
        let c = RandomInstance::draw(43, 5).unwrap();
        assert_ne!(a.theta, c.theta);
    }

    #[test]
    fn dirichlet_sums_to_one() {
        let mut rng = instance_rng(1, 1);
        let p = random_probabilities(&mut rng, 12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn mixed_state_has_requested_rank() {
        let mut rng = instance_rng(3, 0);
        let rho = random_mixed_state(&mut rng, 6, 2).unwrap();
        let positive = rho.spectrum().iter().filter(|&&l| l > 1e-10).count();
        assert_eq!(positive, 2);
    }
}
