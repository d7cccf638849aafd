//! Covariance/commutator moment matrices over operator families and the
//! closed-form statistics of a projective basis augmented by the generator.

use crate::basis::ProjectiveBasis;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{symmetric_pseudo_inverse, symmetrize, CMatrix, CVector, RMatrix};
use crate::operator::HermitianOperator;
use crate::state::QuantumState;

/// Outcomes with probability below this are excluded from every sum.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// A masked outcome whose derivative exceeds this is reported as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-8;

/// Tolerance on the imaginary part of quantities that must be real.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Relative roundoff level below which `∂_θ p_x` is treated as exactly zero.
pub const DERIVATIVE_NOISE: f64 = 1e-14;

/// One accessible operator. Projectors are kept in factored form `V V†`.
#[derive(Debug, Clone)]
pub enum FamilyMember {
    Operator(HermitianOperator),
    Projector(CMatrix),
}

impl FamilyMember {
    pub fn dim(&self) -> usize {
        match self {
            Self::Operator(op) => op.dim(),
            Self::Projector(v) => v.nrows(),
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        match self {
            Self::Operator(op) => op.apply(v),
            Self::Projector(b) => b * (b.adjoint() * v),
        }
    }

    pub fn to_operator(&self) -> HermitianOperator {
        match self {
            Self::Operator(op) => op.clone(),
            Self::Projector(b) => HermitianOperator::from_hermitian_part(&(b * b.adjoint())),
        }
    }
}

/// Ordered family `(H_1, …, H_L)` of operators sharing one dimension.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    dim: usize,
    members: Vec<FamilyMember>,
}

impl OperatorFamily {
    pub fn new(members: Vec<FamilyMember>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidArgument("operator family is empty".into()));
        };
        let dim = first.dim();
        for m in &members {
            check_dim(dim, m.dim())?;
        }
        Ok(Self { dim, members })
    }

    pub fn from_operators(ops: Vec<HermitianOperator>) -> Result<Self> {
        Self::new(ops.into_iter().map(FamilyMember::Operator).collect())
    }

    /// `(Π_x)` for the listed outcomes.
    pub fn projectors(basis: &ProjectiveBasis, outcomes: &[usize]) -> Result<Self> {
        Self::new(outcomes.iter().map(|&x| FamilyMember::Projector(basis.block_vectors(x))).collect())
    }

    /// `(H, Π_x, …)` for the listed outcomes.
    pub fn generator_with_projectors(
        generator: &HermitianOperator,
        basis: &ProjectiveBasis,
        outcomes: &[usize],
    ) -> Result<Self> {
        check_dim(basis.dim(), generator.dim())?;
        let mut members = Vec::with_capacity(outcomes.len() + 1);
        members.push(FamilyMember::Operator(generator.clone()));
        members.extend(outcomes.iter().map(|&x| FamilyMember::Projector(basis.block_vectors(x))));
        Self::new(members)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// `Σ_k c_k H_k`.
    pub fn combination(&self, coefficients: &[f64]) -> Result<HermitianOperator> {
        check_dim(self.len(), coefficients.len())?;
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (m, &c) in self.members.iter().zip(coefficients) {
            if c != 0.0 {
                acc += m.to_operator().matrix() * crate::linalg::C64::new(c, 0.0);
            }
        }
        Ok(HermitianOperator::from_hermitian_part(&acc))
    }
}

/// Pseudo-inverse policy for the covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPolicy {
    /// Eigenvalues of the (diagonally equilibrated) covariance matrix at or
    /// below `rank_cutoff · λ_max` are discarded.
    pub rank_cutoff: f64,
    /// Members whose variance is below `zero_variance · max variance` are
    /// treated as constants on the state.
    pub zero_variance: f64,
}

impl Default for MomentPolicy {
    fn default() -> Self {
        Self { rank_cutoff: 1e-10, zero_variance: 1e-14 }
    }
}

#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: RMatrix,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Covariance, commutator and moment matrices of a state over a family.
#[derive(Debug, Clone)]
pub struct MomentData {
    /// Symmetrized covariances `½⟨H_k H_l + H_l H_k⟩ − ⟨H_k⟩⟨H_l⟩`.
    pub gamma: RMatrix,
    /// `−i⟨[H_k, H_l]⟩`.
    pub commutator: RMatrix,
    pub means: Vec<f64>,
    pub moment: RMatrix,
    pub rank: usize,
    pub rank_deficient: bool,
}

pub fn moment_data(state: &QuantumState, family: &OperatorFamily) -> Result<MomentData> {
    moment_data_with(state, family, MomentPolicy::default())
}

pub fn moment_data_with(state: &QuantumState, family: &OperatorFamily, policy: MomentPolicy) -> Result<MomentData> {
    check_dim(family.dim(), state.dim())?;
    let l = family.len();
    let mut gram = CMatrix::zeros(l, l);
    let mut means = vec![0.0; l];
    for (weight, e) in state.ensemble() {
        let images: Vec<CVector> = family.members.iter().map(|m| m.apply(&e)).collect();
        for k in 0..l {
            let mean = e.dotc(&images[k]);
            let scale = mean.re.abs().max(1.0);
            if mean.im.abs() > IMAGINARY_TOLERANCE * scale {
                return Err(Error::NumericalConsistency(format!(
                    "expectation of family member {k} has imaginary part {:e}",
                    mean.im
                )));
            }
            means[k] += weight * mean.re;
            for m in k..l {
                gram[(k, m)] += images[k].dotc(&images[m]) * weight;
            }
        }
    }
    let mut gamma = RMatrix::zeros(l, l);
    let mut commutator = RMatrix::zeros(l, l);
    for k in 0..l {
        for m in k..l {
            let g = gram[(k, m)];
            let cov = g.re - means[k] * means[m];
            gamma[(k, m)] = cov;
            gamma[(m, k)] = cov;
            if m != k {
                commutator[(k, m)] = 2.0 * g.im;
                commutator[(m, k)] = -2.0 * g.im;
            }
        }
    }
    // A member counts as constant when its variance is negligible against its
    // own second moment, so rare projectors are never confused with constants.
    let active: Vec<usize> =
        (0..l).filter(|&k| gamma[(k, k)] > policy.zero_variance * gram[(k, k)].re && gamma[(k, k)] > 0.0).collect();
    let mm = equilibrated_moment_matrix(&gamma, &commutator, &active, policy)?;
    Ok(MomentData { gamma, commutator, means, moment: mm.matrix, rank: mm.rank, rank_deficient: mm.rank_deficient })
}

pub fn moment_matrix(gamma: &RMatrix, commutator: &RMatrix) -> Result<MomentMatrix> {
    moment_matrix_with(gamma, commutator, MomentPolicy::default())
}

/// `M = Cᵀ Γ⁺ C`.
///
/// `Γ` is first equilibrated to unit diagonal, so the rank cutoff acts on
/// correlations rather than on raw variances; the resulting generalized
/// inverse gives the same `M` as the Moore–Penrose one whenever the columns
/// of `C` lie in the range of `Γ`, which holds for every physical state.
pub fn moment_matrix_with(gamma: &RMatrix, commutator: &RMatrix, policy: MomentPolicy) -> Result<MomentMatrix> {
    let l = gamma.nrows();
    if gamma.ncols() != l || commutator.nrows() != l || commutator.ncols() != l {
        return Err(Error::InvalidArgument("moment matrices must be square of equal size".into()));
    }
    let max_var = gamma.diagonal().iter().fold(0.0_f64, |acc, &v| acc.max(v));
    let active: Vec<usize> =
        (0..l).filter(|&k| max_var > 0.0 && gamma[(k, k)] > policy.zero_variance * max_var).collect();
    equilibrated_moment_matrix(gamma, commutator, &active, policy)
}

fn equilibrated_moment_matrix(
    gamma: &RMatrix,
    commutator: &RMatrix,
    active: &[usize],
    policy: MomentPolicy,
) -> Result<MomentMatrix> {
    let l = gamma.nrows();
    let mut pinv = RMatrix::zeros(l, l);
    let mut rank = 0;
    if !active.is_empty() {
        let scale: Vec<f64> = active.iter().map(|&k| gamma[(k, k)].sqrt().recip()).collect();
        let n = active.len();
        let equilibrated = RMatrix::from_fn(n, n, |a, b| gamma[(active[a], active[b])] * scale[a] * scale[b]);
        let inv = symmetric_pseudo_inverse(&symmetrize(&equilibrated), policy.rank_cutoff);
        rank = inv.rank;
        for a in 0..n {
            for b in 0..n {
                pinv[(active[a], active[b])] = inv.inverse[(a, b)] * scale[a] * scale[b];
            }
        }
    }
    let matrix = symmetrize(&(commutator.transpose() * pinv * commutator));
    Ok(MomentMatrix { matrix, rank, rank_deficient: rank < l })
}

/// `nᵀ M n`: the maximal inverse method-of-moments variance over the span of
/// the family for the generator `H = Σ n_k H_k`.
pub fn max_moment_sensitivity(md: &MomentData, n: &[f64]) -> Result<f64> {
    check_dim(md.moment.nrows(), n.len())?;
    let v = nalgebra::DVector::from_column_slice(n);
    Ok((v.transpose() * &md.moment * &v)[(0, 0)])
}

/// Closed-form reduced statistics of `ρ(θ)` in a basis, with the generator.
#[derive(Debug, Clone)]
pub struct ReducedStats {
    /// `p(x|θ)` for every outcome.
    pub p: Vec<f64>,
    /// `∂p(x|θ)/∂θ = −i⟨[Π_x, H]⟩`.
    pub d: Vec<f64>,
    /// `Cov(H, Π_x)`.
    pub gamma: Vec<f64>,
    pub mean_h: f64,
    pub variance_h: f64,
    pub a: f64,
    pub b: f64,
    /// `w_x` for each entry of [`ReducedStats::reduced_outcomes`].
    pub w: Vec<f64>,
    pub removed_index: usize,
    pub kept: Vec<bool>,
    /// `H` lies (numerically) in the span of the kept projectors, so `a`
    /// is undefined and set to zero.
    pub generator_in_span: bool,
    /// Masked outcomes with non-negligible derivative.
    pub divergent: Vec<usize>,
}

impl ReducedStats {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn kept_outcomes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.kept[x]).collect()
    }

    /// Kept outcomes other than the removed one, in basis order.
    pub fn reduced_outcomes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.kept[x] && x != self.removed_index).collect()
    }

    /// `Σ_x d_x² / p_x` over kept outcomes.
    pub fn fisher(&self) -> f64 {
        self.kept_outcomes().iter().map(|&x| self.d[x] * self.d[x] / self.p[x]).sum()
    }
}

pub fn reduced_projector_stats(
    state_theta: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
) -> Result<ReducedStats> {
    check_dim(basis.dim(), state_theta.dim())?;
    check_dim(basis.dim(), generator.dim())?;
    let r = basis.len();
    let u_adj = basis.vectors().adjoint();
    let mut p = vec![0.0; r];
    let mut z = vec![crate::linalg::C64::new(0.0, 0.0); r];
    let mut mean_h = 0.0;
    let mut second_h = 0.0;
    for (weight, e) in state_theta.ensemble() {
        let he = generator.apply(&e);
        let mean = e.dotc(&he);
        if mean.im.abs() > IMAGINARY_TOLERANCE * mean.re.abs().max(1.0) {
            return Err(Error::NumericalConsistency(format!("⟨H⟩ has imaginary part {:e}", mean.im)));
        }
        mean_h += weight * mean.re;
        second_h += weight * he.norm_squared();
        let c = &u_adj * &e;
        let h = &u_adj * &he;
        for x in 0..r {
            for k in basis.block(x) {
                p[x] += weight * c[k].norm_sqr();
                z[x] += c[k].conj() * h[k] * weight;
            }
        }
    }
    // ⟨Π_x H⟩ = z_x, so Cov(H, Π_x) = Re z_x − ⟨H⟩ p_x and −i⟨[Π_x, H]⟩ = 2 Im z_x.
    let gamma: Vec<f64> = (0..r).map(|x| z[x].re - mean_h * p[x]).collect();
    // |⟨Π_x H⟩| ≤ √(p_x ⟨H²⟩); derivatives below roundoff of that bound are zero.
    let d: Vec<f64> = (0..r)
        .map(|x| {
            let d = 2.0 * z[x].im;
            if d.abs() <= DERIVATIVE_NOISE * (p[x] * second_h).sqrt() {
                0.0
            } else {
                d
            }
        })
        .collect();
    let variance_h = (second_h - mean_h * mean_h).max(0.0);

    let kept: Vec<bool> = p.iter().map(|&px| px >= PROBABILITY_FLOOR).collect();
    let divergent: Vec<usize> = (0..r).filter(|&x| !kept[x] && d[x].abs() > DIVERGENCE_THRESHOLD).collect();
    let removed_index = (0..r)
        .filter(|&x| kept[x])
        .max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a)))
        .ok_or_else(|| Error::Internal("every outcome probability is below the floor".into()))?;

    let explained: f64 = (0..r).filter(|&x| kept[x]).map(|x| gamma[x] * gamma[x] / p[x]).sum();
    let a_inv = variance_h - explained;
    let generator_in_span = variance_h <= 1e-14 * second_h || a_inv <= 1e-12 * variance_h;
    let a = if generator_in_span { 0.0 } else { a_inv.recip() };
    let b = if generator_in_span { 0.0 } else { (0..r).filter(|&x| kept[x]).map(|x| gamma[x] * d[x] / p[x]).sum() };
    let pr = p[removed_index];
    let gr = gamma[removed_index];
    let w = (0..r).filter(|&x| kept[x] && x != removed_index).map(|x| gamma[x] / p[x] - gr / pr).collect();
    Ok(ReducedStats { p, d, gamma, mean_h, variance_h, a, b, w, removed_index, kept, generator_in_span, divergent })
}

/// Inverse of the reduced projector covariance `P − p pᵀ` (outcome
/// `removed` dropped): `P⁻¹ + e eᵀ / p_removed`.
pub fn structured_inverse(p: &[f64], removed: usize) -> Result<RMatrix> {
    if removed >= p.len() {
        return Err(Error::InvalidArgument(format!("removed index {removed} out of range")));
    }
    if let Some(x) = p.iter().position(|&px| !(px > 0.0)) {
        return Err(Error::InvalidArgument(format!("outcome {x} has nonpositive probability {}", p[x])));
    }
    let reduced: Vec<f64> = p.iter().enumerate().filter(|&(x, _)| x != removed).map(|(_, &px)| px).collect();
    let n = reduced.len();
    let tail = p[removed].recip();
    Ok(RMatrix::from_fn(n, n, |i, j| if i == j { reduced[i].recip() + tail } else { tail }))
}

/// Inverse of the full covariance matrix of `(H, Π_x for reduced outcomes)`
/// assembled from `a`, `w` and [`structured_inverse`].
pub fn block_inverse(stats: &ReducedStats) -> Result<RMatrix> {
    if stats.generator_in_span {
        return Err(Error::InvalidArgument("covariance is singular: generator lies in the projector span".into()));
    }
    let kept = stats.kept_outcomes();
    let removed_pos = kept
        .iter()
        .position(|&x| x == stats.removed_index)
        .ok_or_else(|| Error::Internal("removed outcome is not kept".into()))?;
    let kept_p: Vec<f64> = kept.iter().map(|&x| stats.p[x]).collect();
    let proj_inv = structured_inverse(&kept_p, removed_pos)?;
    let n = proj_inv.nrows();
    let a = stats.a;
    let w = &stats.w;
    Ok(RMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => a,
        (0, j) => -a * w[j - 1],
        (i, 0) => -a * w[i - 1],
        (i, j) => proj_inv[(i - 1, j - 1)] + a * w[i - 1] * w[j - 1],
    }))
}
