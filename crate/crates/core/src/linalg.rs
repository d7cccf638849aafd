//! Dense linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c && m[(r, c)] != C64::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// ascending and eigenvectors stored column-wise in the same order.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if is_diagonal(m) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let values = order.iter().map(|&k| m[(k, k)].re).collect();
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            vecs[(k, col)] = C64::new(1.0, 0.0);
        }
        return (values, vecs);
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vecs)
}

/// Real symmetric eigen-decomposition, eigenvalues ascending.
pub fn symmetric_eigen(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vecs)
}

/// `V diag(f(λ)) V†` for a Hermitian spectral decomposition.
pub fn spectral_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (col, &lambda) in values.iter().enumerate() {
        let factor = f(lambda);
        for z in scaled.column_mut(col).iter_mut() {
            *z *= factor;
        }
    }
    &scaled * vectors.adjoint()
}

/// Rotates `v` by a global phase so that its largest-magnitude component is
/// real and positive. Ties are broken by the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).expect("nonempty vector has a maximal entry");
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Result of a cutoff pseudo-inverse of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub inverse: RMatrix,
    pub rank: usize,
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix: eigenvalues at or
/// below `rel_cutoff * λ_max` are treated as zero.
pub fn symmetric_pseudo_inverse(m: &RMatrix, rel_cutoff: f64) -> PseudoInverse {
    let n = m.nrows();
    if n == 0 {
        return PseudoInverse { inverse: RMatrix::zeros(0, 0), rank: 0 };
    }
    let (values, vectors) = symmetric_eigen(m);
    let lambda_max = values.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    let mut inverse = RMatrix::zeros(n, n);
    let mut rank = 0;
    if lambda_max <= 0.0 {
        return PseudoInverse { inverse, rank };
    }
    let cutoff = rel_cutoff * lambda_max;
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > cutoff {
            rank += 1;
            let v = vectors.column(k);
            inverse += (v * v.transpose()) / lambda;
        }
    }
    PseudoInverse { inverse, rank }
}

pub fn symmetrize(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
