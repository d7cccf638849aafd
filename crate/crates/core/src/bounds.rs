//! Scalar sensitivity limits: method-of-moments χ², classical and quantum
//! Fisher information, the generator-knowledge enhancement, spin squeezing
//! and the metrological entanglement witness.

use serde::Serialize;

use crate::basis::ProjectiveBasis;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigen, max_abs, relative_difference, symmetric_eigen, CMatrix};
use crate::moments::{max_moment_sensitivity, moment_data, reduced_projector_stats, OperatorFamily, ReducedStats};
use crate::operator::HermitianOperator;
use crate::spin::{phase_evolve, SpinSystem};
use crate::state::QuantumState;

/// Commutator expectations at or below this magnitude make χ² infinite.
pub const INSENSITIVE_THRESHOLD: f64 = 1e-14;

/// Negative enhancements in `[-ENHANCEMENT_CLAMP, 0)` are rounded to zero.
pub const ENHANCEMENT_CLAMP: f64 = 1e-9;

/// Relative agreement required between the closed-form and moment-matrix
/// routes to `F + E`.
pub const TWO_PATH_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChiDiagnostic {
    /// `⟨[X, H]⟩` vanishes: the observable does not respond to θ.
    InsensitiveObservable,
    /// `X` is a multiple of the identity.
    IdentityObservable,
}

/// Method-of-moments figure of merit `(ΔX)² / |⟨[X, H]⟩|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquared {
    /// `+∞` when the observable is insensitive.
    pub value: f64,
    pub variance: f64,
    /// `−i⟨[X, H]⟩`.
    pub gradient: f64,
    pub diagnostic: Option<ChiDiagnostic>,
}

impl ChiSquared {
    /// `χ⁻²`, zero for insensitive observables.
    pub fn inverse(&self) -> f64 {
        if self.value.is_infinite() {
            0.0
        } else {
            self.value.recip()
        }
    }

    pub fn is_insensitive(&self) -> bool {
        self.diagnostic.is_some()
    }
}

pub fn chi_squared(
    state_theta: &QuantumState,
    generator: &HermitianOperator,
    x: &HermitianOperator,
) -> Result<ChiSquared> {
    check_dim(state_theta.dim(), generator.dim())?;
    check_dim(state_theta.dim(), x.dim())?;
    let variance = state_theta.variance(x)?;
    // −i⟨[X, H]⟩ = 2 Im ⟨Xψ|Hψ⟩ per ensemble component.
    let gradient: f64 =
        state_theta.ensemble().iter().map(|(w, e)| w * 2.0 * x.apply(e).dotc(&generator.apply(e)).im).sum();
    let offset = x.matrix()[(0, 0)].re;
    let shifted = x.matrix() - CMatrix::identity(x.dim(), x.dim()) * crate::linalg::C64::new(offset, 0.0);
    let is_identity = max_abs(&shifted) <= INSENSITIVE_THRESHOLD * offset.abs().max(1.0);
    if is_identity {
        return Ok(ChiSquared {
            value: f64::INFINITY,
            variance,
            gradient,
            diagnostic: Some(ChiDiagnostic::IdentityObservable),
        });
    }
    if gradient.abs() <= INSENSITIVE_THRESHOLD {
        return Ok(ChiSquared {
            value: f64::INFINITY,
            variance,
            gradient,
            diagnostic: Some(ChiDiagnostic::InsensitiveObservable),
        });
    }
    Ok(ChiSquared { value: variance / (gradient * gradient), variance, gradient, diagnostic: None })
}

/// Classical Fisher information `Σ_x (∂_θ p_x)² / p_x` from the analytic
/// derivatives.
pub fn classical_fisher(
    state_theta: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
) -> Result<f64> {
    Ok(reduced_projector_stats(state_theta, generator, basis)?.fisher())
}

/// `E = a b²`.
pub fn enhancement(stats: &ReducedStats) -> Result<f64> {
    let e = stats.a * stats.b * stats.b;
    if e >= 0.0 {
        Ok(e)
    } else if e >= -ENHANCEMENT_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NumericalConsistency(format!("negative enhancement {e:e}")))
    }
}

/// Quantum Fisher information of `ρ` for the generator `H`.
pub fn quantum_fisher(state: &QuantumState, generator: &HermitianOperator) -> Result<f64> {
    check_dim(state.dim(), generator.dim())?;
    match state {
        QuantumState::Pure(_) => Ok(4.0 * state.variance(generator)?),
        QuantumState::Mixed(rho) => {
            let (lambda, v) = hermitian_eigen(rho);
            let h = v.adjoint() * generator.matrix() * &v;
            let n = lambda.len();
            let mut fq = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let s = lambda[k] + lambda[l];
                    if s > 1e-12 {
                        let diff = lambda[k] - lambda[l];
                        fq += 2.0 * diff * diff / s * h[(k, l)].norm_sqr();
                    }
                }
            }
            Ok(fq)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingSensitivity {
    /// `max_n χ⁻²` over collective generators `J_n` and observables in
    /// `span(J_x, J_y, J_z)`.
    pub value: f64,
    /// Optimal unit direction `n`.
    pub direction: [f64; 3],
}

pub fn spin_squeezing_sensitivity(state: &QuantumState, spin: &SpinSystem) -> Result<SqueezingSensitivity> {
    check_dim(spin.dim(), state.dim())?;
    let family = OperatorFamily::from_operators(vec![spin.jx().clone(), spin.jy().clone(), spin.jz().clone()])?;
    let md = moment_data(state, &family)?;
    let (values, vectors) = symmetric_eigen(&md.moment);
    let mut direction = [vectors[(0, 2)], vectors[(1, 2)], vectors[(2, 2)]];
    if let Some(&first) = direction.iter().find(|c| c.abs() > 1e-12) {
        if first < 0.0 {
            direction.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(SqueezingSensitivity { value: values[2].max(0.0), direction })
}

/// Largest integer `k` with `χ⁻² / N > k`, or zero.
pub fn entanglement_witness(chi_inv2: f64, particles: u32) -> Result<u32> {
    if !(chi_inv2 >= 0.0) || !chi_inv2.is_finite() {
        return Err(Error::InvalidArgument(format!("sensitivity {chi_inv2} must be finite and nonnegative")));
    }
    if particles == 0 {
        return Err(Error::InvalidArgument("particle number must be positive".into()));
    }
    let ratio = chi_inv2 / f64::from(particles);
    Ok((ratio.ceil() - 1.0).max(0.0) as u32)
}

/// All sensitivity limits for one `(state, H, basis, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityBreakdown {
    /// Classical Fisher information of the basis.
    pub fisher: f64,
    pub enhancement: f64,
    pub enhanced: f64,
    pub quantum_fisher: f64,
    pub squeezing: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub repetitions: Option<u64>,
    pub estimator_variance: Option<f64>,
    pub divergent_outcomes: Vec<usize>,
}

impl SensitivityBreakdown {
    /// `F − tol·F_Q ≤ F + E ≤ F_Q + tol·F_Q`.
    pub fn satisfies_hierarchy(&self, tol: f64) -> bool {
        let slack = tol * self.quantum_fisher.abs();
        self.fisher - slack <= self.enhanced && self.enhanced <= self.quantum_fisher + slack
    }

    /// Attaches `μ` and the method-of-moments estimator variance `χ²/μ`.
    pub fn with_repetitions(mut self, repetitions: u64) -> Self {
        self.repetitions = Some(repetitions);
        self.estimator_variance = Some(self.enhanced.recip() / repetitions as f64);
        self
    }

    /// Classical Cramér–Rao variance `1/(μ F)` of the bare basis.
    pub fn cramer_rao_variance(&self, repetitions: u64) -> f64 {
        (repetitions as f64 * self.fisher).recip()
    }

    /// Quantum Cramér–Rao variance `1/(μ F_Q)`.
    pub fn quantum_cramer_rao_variance(&self, repetitions: u64) -> f64 {
        (repetitions as f64 * self.quantum_fisher).recip()
    }
}

/// Evaluates `F`, `E`, `F + E` and `F_Q` at phase θ. `F + E` is cross-checked
/// against the moment-matrix route over `(H, Π_x)`.
pub fn enhanced_sensitivity(
    state: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    theta: f64,
) -> Result<SensitivityBreakdown> {
    let evolved = phase_evolve(state, generator, theta)?;
    let stats = reduced_projector_stats(&evolved, generator, basis)?;
    let breakdown = breakdown_from_stats(&stats, quantum_fisher(state, generator)?)?;
    let moment_route = moment_route_sensitivity(&evolved, generator, basis, &stats)?;
    check_two_paths(breakdown.enhanced, moment_route)?;
    Ok(breakdown)
}

pub(crate) fn breakdown_from_stats(stats: &ReducedStats, quantum_fisher: f64) -> Result<SensitivityBreakdown> {
    let fisher = stats.fisher();
    let enhancement = enhancement(stats)?;
    Ok(SensitivityBreakdown {
        fisher,
        enhancement,
        enhanced: fisher + enhancement,
        quantum_fisher,
        squeezing: None,
        a: stats.a,
        b: stats.b,
        repetitions: None,
        estimator_variance: None,
        divergent_outcomes: stats.divergent.clone(),
    })
}

/// `e₁ᵀ M e₁` over the family `(H, Π_x)` of reduced outcomes.
pub fn moment_route_sensitivity(
    state_theta: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    stats: &ReducedStats,
) -> Result<f64> {
    let family = OperatorFamily::generator_with_projectors(generator, basis, &stats.reduced_outcomes())?;
    let md = moment_data(state_theta, &family)?;
    let mut n = vec![0.0; family.len()];
    n[0] = 1.0;
    max_moment_sensitivity(&md, &n)
}

pub(crate) fn check_two_paths(closed_form: f64, moment_route: f64) -> Result<()> {
    let diff = (closed_form - moment_route).abs();
    if diff > 1e-12 && relative_difference(closed_form, moment_route) > TWO_PATH_TOLERANCE {
        return Err(Error::NumericalConsistency(format!(
            "closed-form F+E = {closed_form} disagrees with moment-matrix route {moment_route}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, C64};
    use crate::spin::make_spin_operators;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus_state() -> QuantumState {
        QuantumState::pure_normalized(CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)])).unwrap()
    }

    fn sz() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[0.5, -0.5])
    }

    fn sy() -> HermitianOperator {
        HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -0.5), C64::new(0.0, 0.5), C64::new(0.0, 0.0)],
        ))
        .unwrap()
    }

    fn sigma_x_basis() -> ProjectiveBasis {
        let s = FRAC_1_SQRT_2;
        let u =
            CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)]);
        ProjectiveBasis::rank_one(u, vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn chi_of_generator_and_identity_is_infinite() {
        let psi = plus_state();
        let c = chi_squared(&psi, &sz(), &sz()).unwrap();
        assert!(c.value.is_infinite());
        assert_eq!(c.diagnostic, Some(ChiDiagnostic::InsensitiveObservable));
        assert_eq!(c.inverse(), 0.0);
        let c = chi_squared(&psi, &sz(), &HermitianOperator::identity(2)).unwrap();
        assert!(c.value.is_infinite());
        assert_eq!(c.diagnostic, Some(ChiDiagnostic::IdentityObservable));
    }

    #[test]
    fn chi_of_sigma_y_on_plus() {
        let c = chi_squared(&plus_state(), &sz(), &sy()).unwrap();
        assert!((c.inverse() - 1.0).abs() < 1e-14);
        assert!((c.variance - 0.25).abs() < 1e-15);
        assert!((c.gradient.abs() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qubit_fisher_is_one() {
        for k in 0..=29 {
            let theta = 0.1 + 0.1 * k as f64;
            let state = phase_evolve(&plus_state(), &sz(), theta).unwrap();
            let f = classical_fisher(&state, &sz(), &sigma_x_basis()).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "θ = {theta}: F = {f}");
        }
    }

    #[test]
    fn commuting_basis_has_zero_fisher() {
        let f = classical_fisher(&plus_state(), &sz(), &ProjectiveBasis::computational(2)).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn coherent_clock_state_has_zero_fisher() {
        let s = make_spin_operators(25.0).unwrap();
        let f = classical_fisher(&s.coherent_state_z(), s.jz(), s.jy_basis()).unwrap();
        assert!(f.abs() < 1e-20);
        assert_eq!(quantum_fisher(&s.coherent_state_z(), s.jz()).unwrap(), 0.0);
    }

    #[test]
    fn maximally_mixed_has_zero_qfi() {
        let rho = QuantumState::maximally_mixed(4);
        let h = HermitianOperator::from_real_diagonal(&[1.0, 2.0, -3.0, 0.5]);
        assert_eq!(quantum_fisher(&rho, &h).unwrap(), 0.0);
    }

    #[test]
    fn mixed_qfi_of_pure_density_matches_variance_formula() {
        let psi = plus_state();
        let rho = QuantumState::mixed(psi.density_matrix()).unwrap();
        let a = quantum_fisher(&psi, &sz()).unwrap();
        let b = quantum_fisher(&rho, &sz()).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enhancement_zero_when_generator_diagonal() {
        let stats = reduced_projector_stats(&plus_state(), &sz(), &ProjectiveBasis::computational(2)).unwrap();
        assert_eq!(enhancement(&stats).unwrap(), 0.0);
    }

    #[test]
    fn enhancement_clamps_tiny_negatives_only() {
        let mut stats = reduced_projector_stats(&plus_state(), &sz(), &sigma_x_basis()).unwrap();
        stats.a = -1e-10;
        stats.b = 1.0;
        assert_eq!(enhancement(&stats).unwrap(), 0.0);
        stats.a = -1.0;
        assert!(matches!(enhancement(&stats), Err(Error::NumericalConsistency(_))));
    }

    #[test]
    fn optimal_qubit_basis_saturates_qfi() {
        // For |+⟩ under σ_z/2 the σ_y eigenbasis is optimal at θ = 0.
        let basis = ProjectiveBasis::eigenbasis(&sy()).unwrap();
        let b = enhanced_sensitivity(&plus_state(), &sz(), &basis, 0.0).unwrap();
        assert!((b.fisher - b.quantum_fisher).abs() < 1e-6 * b.quantum_fisher);
        assert!((b.enhanced - b.quantum_fisher).abs() < 1e-6 * b.quantum_fisher);
    }

    #[test]
    fn witness_examples() {
        assert_eq!(entanglement_witness(50.0, 50).unwrap(), 0);
        assert_eq!(entanglement_witness(4.5 * 50.0, 50).unwrap(), 4);
        assert_eq!(entanglement_witness(0.0, 50).unwrap(), 0);
        assert_eq!(entanglement_witness(50.0001, 50).unwrap(), 1);
        assert!(matches!(entanglement_witness(-1.0, 50), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn coherent_state_squeezing_is_shot_noise() {
        for j in [0.5, 2.0, 25.0] {
            let s = make_spin_operators(j).unwrap();
            let sq = spin_squeezing_sensitivity(&s.coherent_state_z(), &s).unwrap();
            assert!((sq.value - 2.0 * j).abs() < 1e-10 * j, "j = {j}: {}", sq.value);
            assert!(sq.direction[2].abs() < 1e-12);
        }
    }

    #[test]
    fn repetitions_convert_to_variances() {
        let basis = ProjectiveBasis::eigenbasis(&sy()).unwrap();
        let b = enhanced_sensitivity(&plus_state(), &sz(), &basis, 0.0).unwrap().with_repetitions(100);
        assert!((b.estimator_variance.unwrap() - 0.01).abs() < 1e-12);
        assert!((b.cramer_rao_variance(100) - 0.01).abs() < 1e-12);
        assert!((b.quantum_cramer_rao_variance(100) - 0.01).abs() < 1e-12);
    }
}
