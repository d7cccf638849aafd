//! Optimal measurement observables built from the basis projectors and the
//! generator, their coefficient representation and the generator-free
//! ablation.

use serde::Serialize;

use crate::basis::ProjectiveBasis;
use crate::bounds::chi_squared;
use crate::error::{check_dim, Error, Result};
use crate::linalg::C64;
use crate::moments::{reduced_projector_stats, ReducedStats};
use crate::operator::HermitianOperator;
use crate::spin::phase_evolve;
use crate::state::QuantumState;

/// `X = c_H H + Σ_x c_x Π_x + offset·1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableCoefficients {
    pub c_h: f64,
    pub c_x: Vec<f64>,
    pub normalized: bool,
    /// Additive identity constant; irrelevant for the sensitivity.
    pub offset: f64,
}

impl ObservableCoefficients {
    pub fn norm(&self) -> f64 {
        (self.c_h * self.c_h + self.c_x.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    pub fn assemble(&self, generator: &HermitianOperator, basis: &ProjectiveBasis) -> Result<HermitianOperator> {
        check_dim(basis.dim(), generator.dim())?;
        let projector_part = basis.diagonal_operator(&self.c_x)?;
        let mut m = projector_part.into_matrix() + generator.matrix() * C64::new(self.c_h, 0.0);
        if self.offset != 0.0 {
            for k in 0..m.nrows() {
                m[(k, k)] += C64::new(self.offset, 0.0);
            }
        }
        Ok(HermitianOperator::from_hermitian_part(&m))
    }

    /// `⟨X⟩ = Σ c_x p_x + c_H ⟨H⟩ + offset`.
    pub fn expectation(&self, p: &[f64], mean_h: f64) -> Result<f64> {
        check_dim(self.c_x.len(), p.len())?;
        Ok(self.c_x.iter().zip(p).map(|(c, px)| c * px).sum::<f64>() + self.c_h * mean_h + self.offset)
    }
}

/// Rescales to `|c_H|² + Σ|c_x|² = 1` with the largest-magnitude
/// coefficient positive. The offset is scaled along.
pub fn normalize_coefficients(raw: &ObservableCoefficients) -> Result<ObservableCoefficients> {
    let norm = raw.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidArgument("cannot normalize an all-zero coefficient vector".into()));
    }
    let largest = std::iter::once(raw.c_h).chain(raw.c_x.iter().copied()).fold(0.0_f64, |best, c| {
        if c.abs() > best.abs() {
            c
        } else {
            best
        }
    });
    let scale = norm.recip().copysign(largest);
    Ok(ObservableCoefficients {
        c_h: raw.c_h * scale,
        c_x: raw.c_x.iter().map(|c| c * scale).collect(),
        normalized: true,
        offset: raw.offset * scale,
    })
}

#[derive(Debug, Clone)]
pub struct OptimalObservable {
    pub operator: HermitianOperator,
    pub raw: ObservableCoefficients,
    /// `None` when every coefficient vanishes.
    pub normalized: Option<ObservableCoefficients>,
}

fn build(
    raw: ObservableCoefficients,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
) -> Result<OptimalObservable> {
    let operator = raw.assemble(generator, basis)?;
    let normalized = normalize_coefficients(&raw).ok();
    Ok(OptimalObservable { operator, raw, normalized })
}

/// Coefficients of `X_opt,0 = Σ_x (∂_θ log p_x) Π_x`; masked outcomes get 0.
pub fn x_opt0_coefficients(stats: &ReducedStats) -> ObservableCoefficients {
    let c_x = (0..stats.len()).map(|x| if stats.kept[x] { stats.d[x] / stats.p[x] } else { 0.0 }).collect();
    ObservableCoefficients { c_h: 0.0, c_x, normalized: false, offset: 0.0 }
}

/// Coefficients of `X_opt = X_opt,0 + a b (Σ_x γ_x/p_x Π_x − H)`.
pub fn x_opt_coefficients(stats: &ReducedStats) -> ObservableCoefficients {
    let ab = stats.a * stats.b;
    let c_x = (0..stats.len())
        .map(|x| if stats.kept[x] { (stats.d[x] + ab * stats.gamma[x]) / stats.p[x] } else { 0.0 })
        .collect();
    ObservableCoefficients { c_h: -ab, c_x, normalized: false, offset: 0.0 }
}

pub fn x_opt(
    state: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    theta: f64,
) -> Result<OptimalObservable> {
    let stats = stats_at(state, generator, basis, theta)?;
    build(x_opt_coefficients(&stats), generator, basis)
}

pub fn x_opt0(
    state: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    theta: f64,
) -> Result<OptimalObservable> {
    let stats = stats_at(state, generator, basis, theta)?;
    build(x_opt0_coefficients(&stats), generator, basis)
}

#[derive(Debug, Clone)]
pub struct AblatedObservable {
    /// `X_opt + a b H`.
    pub operator: HermitianOperator,
    pub coefficients: ObservableCoefficients,
    pub chi_inv2: f64,
}

/// Drops the generator contribution from `X_opt` and evaluates the
/// resulting sensitivity.
pub fn ablated_observable(
    state: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    theta: f64,
) -> Result<AblatedObservable> {
    let evolved = phase_evolve(state, generator, theta)?;
    let stats = reduced_projector_stats(&evolved, generator, basis)?;
    let mut coefficients = x_opt_coefficients(&stats);
    coefficients.c_h = 0.0;
    let operator = coefficients.assemble(generator, basis)?;
    let chi_inv2 = chi_squared(&evolved, generator, &operator)?.inverse();
    Ok(AblatedObservable { operator, coefficients, chi_inv2 })
}

fn stats_at(
    state: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    theta: f64,
) -> Result<ReducedStats> {
    let evolved = phase_evolve(state, generator, theta)?;
    reduced_projector_stats(&evolved, generator, basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_three_four() {
        let raw = ObservableCoefficients { c_h: 0.0, c_x: vec![3.0, 4.0], normalized: false, offset: 0.0 };
        let n = normalize_coefficients(&raw).unwrap();
        assert!((n.c_x[0] - 0.6).abs() < 1e-15 && (n.c_x[1] - 0.8).abs() < 1e-15);
        assert_eq!(n.c_h, 0.0);
        assert!(n.normalized);
        let twice = normalize_coefficients(&n).unwrap();
        assert_eq!(twice, n);
    }

    #[test]
    fn normalize_flips_sign_to_positive_pivot() {
        let raw = ObservableCoefficients { c_h: 1.0, c_x: vec![-3.0, 2.0], normalized: false, offset: 0.0 };
        let n = normalize_coefficients(&raw).unwrap();
        assert!(n.c_x[0] > 0.0 && n.c_h < 0.0);
        assert!((n.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_zero() {
        let raw = ObservableCoefficients { c_h: 0.0, c_x: vec![0.0; 3], normalized: false, offset: 1.0 };
        assert!(matches!(normalize_coefficients(&raw), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn commuting_basis_gives_zero_x_opt0() {
        let plus = QuantumState::pure_normalized(crate::linalg::CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
        ]))
        .unwrap();
        let h = HermitianOperator::from_real_diagonal(&[0.5, -0.5]);
        let basis = ProjectiveBasis::computational(2);
        let obs = x_opt0(&plus, &h, &basis, 0.3).unwrap();
        assert!(obs.raw.c_x.iter().all(|&c| c == 0.0));
        assert!(obs.normalized.is_none());
        let evolved = phase_evolve(&plus, &h, 0.3).unwrap();
        assert!(chi_squared(&evolved, &h, &obs.operator).unwrap().is_insensitive());
    }
}
