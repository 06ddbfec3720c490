//! Small dense linear-algebra helpers shared across modules.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;

use crate::{CMatrix, DMatrix, Error, Result, C64};

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Largest entry modulus.
pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M - M^†|` over all entries.
pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M^†) / 2`.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `max |U^† U - I|` over all entries.
pub(crate) fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let gram = u.ad_mul(u);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// `Re Tr(A B)` without forming the product.
pub(crate) fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// `Σ |M_ij|^2`.
pub(crate) fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first;
/// eigenvalues come back in ascending order with matching eigenvector columns.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let sym = hermitian_part(m);
    let eig =
        SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::EigenFailure)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub(crate) fn symmetric_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eig =
        SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenphases (principal branch, `(-π, π]`) and eigenvectors of a unitary.
///
/// `U` is normal, so `(U + U^†)/2` and `(U - U^†)/2i` are commuting Hermitian
/// matrices sharing its eigenvectors. The first separates eigenphases by
/// `cos θ`; clusters of equal cosine (`±θ` pairs or true degeneracies) are
/// split by diagonalizing the second inside the cluster subspace.
pub(crate) fn unitary_eigen(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    const CLUSTER_GAP: f64 = 1e-6;
    let n = u.nrows();
    let adj = u.adjoint();
    let cosine = (u + &adj) * C64::new(0.5, 0.0);
    let sine = (u - &adj) * C64::new(0.0, -0.5);
    let (values, mut vectors) = hermitian_eigen(&cosine)?;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let restricted = block.ad_mul(&(&sine * &block));
            let (_, rotation) = hermitian_eigen(&restricted)?;
            vectors
                .columns_mut(start, end - start)
                .copy_from(&(block * rotation));
        }
        start = end;
    }

    let phases = (0..n)
        .map(|k| {
            let v = vectors.column(k);
            let z = v.dotc(&(u * v));
            let theta = libm::atan2(z.im, z.re);
            if theta <= -core::f64::consts::PI {
                core::f64::consts::PI
            } else {
                theta
            }
        })
        .collect();
    Ok((phases, vectors))
}

/// `V diag(f) V^†`.
pub(crate) fn reassemble(vectors: &CMatrix, diag: &[C64]) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &f) in diag.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    scaled * vectors.adjoint()
}

/// Euclidean projection of `values` onto the probability simplex
/// `{x : x_i >= 0, Σ x_i = 1}`.
pub(crate) fn project_to_simplex(values: &mut [f64]) {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k as f64 + 1.0);
        if v - candidate > 0.0 {
            threshold = candidate;
        }
    }
    for v in values.iter_mut() {
        *v = (*v - threshold).max(0.0);
    }
}


#[cfg(test)]
mod unitary_eigen_tests {
    use super::*;
    use crate::spin::{haar_random_unitary, SpinParams};

    fn rebuild(u: &CMatrix) -> f64 {
        let (phases, v) = unitary_eigen(u).unwrap();
        let diag: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        max_abs(&(reassemble(&v, &diag) - u))
    }

    #[test]
    fn reconstructs_haar_and_degenerate_unitaries() {
        let p = SpinParams::new(10.0).unwrap();
        for seed in 0..20 {
            let u = haar_random_unitary(p, seed);
            assert!(rebuild(u.matrix()) < 1e-12, "seed {seed}");
        }
        assert!(rebuild(&CMatrix::identity(21, 21)) < 1e-14);
        assert!(rebuild(&-CMatrix::identity(5, 5)) < 1e-14);
        // ±θ pairs share a cosine.
        let pm = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
            C64::from_polar(1.0, 0.4),
            C64::from_polar(1.0, -0.4),
            C64::from_polar(1.0, 0.4),
        ]));
        let v = haar_random_unitary(SpinParams::new(1.0).unwrap(), 2);
        let conj = v.matrix() * pm * v.matrix().adjoint();
        assert!(rebuild(&conj) < 1e-13);
    }
}
