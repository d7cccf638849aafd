use std::ops::Range;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{max_abs, CMatrix, CVector, C64};
use crate::operator::HermitianOperator;
use crate::state::QuantumState;

/// Complete set of mutually orthogonal projectors `Π_1, …, Π_r`.
///
/// Stored as a unitary whose columns are partitioned into contiguous blocks;
/// block `x` spans the range of `Π_x`. This keeps the memory footprint at one
/// `d×d` matrix regardless of the number of outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    vectors: CMatrix,
    blocks: Vec<Range<usize>>,
    labels: Vec<f64>,
}

impl ProjectiveBasis {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn from_unitary(vectors: CMatrix, blocks: Vec<Range<usize>>, labels: Vec<f64>) -> Result<Self> {
        let dim = vectors.nrows();
        if dim == 0 || vectors.ncols() != dim {
            return Err(Error::InvalidArgument("basis vectors must form a square nonempty matrix".into()));
        }
        if blocks.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("{} projectors but {} labels", blocks.len(), labels.len())));
        }
        let mut next = 0;
        for block in &blocks {
            if block.start != next || block.end <= block.start {
                return Err(Error::InvalidArgument("projector blocks must partition the columns".into()));
            }
            next = block.end;
        }
        if next != dim {
            return Err(Error::InvalidArgument("projector blocks do not cover the space".into()));
        }
        let residual = max_abs(&(vectors.adjoint() * &vectors - CMatrix::identity(dim, dim)));
        if residual > Self::TOLERANCE {
            return Err(Error::InvalidArgument(format!("basis vectors are not orthonormal (residual {residual:e})")));
        }
        Ok(Self { vectors, blocks, labels })
    }

    /// One rank-1 projector per column.
    pub fn rank_one(vectors: CMatrix, labels: Vec<f64>) -> Result<Self> {
        let blocks = (0..vectors.ncols()).map(|k| k..k + 1).collect();
        Self::from_unitary(vectors, blocks, labels)
    }

    pub fn computational(dim: usize) -> Self {
        let labels = (0..dim).map(|k| k as f64).collect();
        Self::rank_one(CMatrix::identity(dim, dim), labels).expect("identity is unitary")
    }

    /// Builds a basis from explicit projector matrices after checking
    /// idempotence, mutual orthogonality and completeness.
    pub fn from_projectors(projectors: &[HermitianOperator], labels: Vec<f64>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidArgument("empty projector list".into()));
        };
        let dim = first.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for (x, p) in projectors.iter().enumerate() {
            check_dim(dim, p.dim())?;
            let m = p.matrix();
            if max_abs(&(m * m - m)) > Self::TOLERANCE {
                return Err(Error::InvalidArgument(format!("projector {x} is not idempotent")));
            }
            for q in &projectors[x + 1..] {
                if max_abs(&(m * q.matrix())) > Self::TOLERANCE {
                    return Err(Error::InvalidArgument(format!("projector {x} is not orthogonal to the rest")));
                }
            }
            sum += m;
        }
        if max_abs(&(sum - CMatrix::identity(dim, dim))) > Self::TOLERANCE {
            return Err(Error::InvalidArgument("projectors do not resolve the identity".into()));
        }
        let mut vectors = CMatrix::zeros(dim, dim);
        let mut blocks = Vec::with_capacity(projectors.len());
        let mut col = 0;
        for p in projectors {
            let (values, vecs) = p.eigen();
            let start = col;
            for (k, &v) in values.iter().enumerate() {
                if v > 0.5 {
                    if col >= dim {
                        return Err(Error::InvalidArgument("projector ranks exceed dimension".into()));
                    }
                    vectors.set_column(col, &vecs.column(k));
                    col += 1;
                }
            }
            if col == start {
                return Err(Error::InvalidArgument("zero projector in basis".into()));
            }
            blocks.push(start..col);
        }
        Self::from_unitary(vectors, blocks, labels)
    }

    /// Rank-1 eigenbasis of `op`, labeled by eigenvalue in ascending order,
    /// with each eigenvector's largest component made real and positive.
    pub fn eigenbasis(op: &HermitianOperator) -> Result<Self> {
        let (values, mut vectors) = op.eigen();
        for k in 0..vectors.ncols() {
            let mut v = vectors.column(k).into_owned();
            crate::linalg::fix_phase(&mut v);
            vectors.set_column(k, &v);
        }
        Self::rank_one(vectors, values)
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Number of outcomes `r`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn block(&self, outcome: usize) -> Range<usize> {
        self.blocks[outcome].clone()
    }

    /// Orthonormal columns spanning the range of `Π_outcome`.
    pub fn block_vectors(&self, outcome: usize) -> CMatrix {
        let b = &self.blocks[outcome];
        self.vectors.columns(b.start, b.len()).into_owned()
    }

    pub fn projector(&self, outcome: usize) -> HermitianOperator {
        let v = self.block_vectors(outcome);
        HermitianOperator::from_hermitian_part(&(&v * v.adjoint()))
    }

    pub fn projectors(&self) -> Vec<HermitianOperator> {
        (0..self.len()).map(|x| self.projector(x)).collect()
    }

    /// `Σ_x c_x Π_x`.
    pub fn diagonal_operator(&self, coefficients: &[f64]) -> Result<HermitianOperator> {
        check_dim(self.len(), coefficients.len())?;
        let mut scaled = self.vectors.clone();
        for (x, block) in self.blocks.iter().enumerate() {
            for col in block.clone() {
                for z in scaled.column_mut(col).iter_mut() {
                    *z *= coefficients[x];
                }
            }
        }
        Ok(HermitianOperator::from_hermitian_part(&(scaled * self.vectors.adjoint())))
    }

    /// Outcome probabilities `p(x) = Tr(ρ Π_x)`.
    pub fn probabilities(&self, state: &QuantumState) -> Result<Vec<f64>> {
        check_dim(self.dim(), state.dim())?;
        let mut p = vec![0.0; self.len()];
        for (weight, e) in state.ensemble() {
            let c = self.vectors.adjoint() * e;
            for (x, block) in self.blocks.iter().enumerate() {
                p[x] += weight * block.clone().map(|k| c[k].norm_sqr()).sum::<f64>();
            }
        }
        Ok(p)
    }

    /// Applies `Π_outcome` to a vector.
    pub fn project(&self, outcome: usize, v: &CVector) -> CVector {
        let b = self.block_vectors(outcome);
        &b * (b.adjoint() * v)
    }

    /// Same basis with outcomes reordered: new outcome `k` is old outcome
    /// `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.len()];
        for &o in order {
            if o >= self.len() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let dim = self.dim();
        let mut vectors = CMatrix::zeros(dim, dim);
        let mut blocks = Vec::with_capacity(self.len());
        let mut labels = Vec::with_capacity(self.len());
        let mut col = 0;
        for &o in order {
            let start = col;
            for k in self.blocks[o].clone() {
                vectors.set_column(col, &self.vectors.column(k));
                col += 1;
            }
            blocks.push(start..col);
            labels.push(self.labels[o]);
        }
        Self::from_unitary(vectors, blocks, labels)
    }
}

pub(crate) fn unit(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}
