use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::spin::{BlochVector, HermitianBasis, Observable};
use crate::{Error, Result};

/// `Õ_kα = Tr(O_k E_α)`, one row per measured step, plus the identity
/// offsets `Tr(O_k)/d` that do not depend on the state.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    offsets: Vec<f64>,
}

/// Design matrix of `ops` in `basis`.
pub fn design_matrix(ops: &[Observable], basis: &HermitianBasis) -> Result<DesignMatrix> {
    let m = basis.len();
    let d = basis.dim() as f64;
    let mut matrix = DMatrix::zeros(ops.len(), m);
    let mut offsets = Vec::with_capacity(ops.len());
    for (k, o) in ops.iter().enumerate() {
        if o.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: o.dim(),
            });
        }
        let row = basis.coefficients(o.matrix());
        matrix.row_mut(k).copy_from(&row.transpose());
        offsets.push(o.trace() / d);
    }
    Ok(DesignMatrix { matrix, offsets })
}

impl DesignMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let offsets = alloc::vec![0.0; matrix.nrows()];
        Self { matrix, offsets }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// The first `n` rows.
    pub fn prefix(&self, n: usize) -> DesignMatrix {
        let n = n.min(self.rows());
        DesignMatrix {
            matrix: self.matrix.rows(0, n).into_owned(),
            offsets: self.offsets[..n].to_vec(),
        }
    }
}

/// Pseudoinverse `C = (ÕᵀÕ)^+`, held in factored form `V diag(1/λ) Vᵀ` over
/// the retained eigenpairs `(λ, v)` of `ÕᵀÕ`.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    dim: usize,
    /// Retained eigenvectors of `ÕᵀÕ` as columns.
    vectors: DMatrix<f64>,
    /// Retained eigenvalues of `ÕᵀÕ`, descending.
    gram_values: Vec<f64>,
}

/// Covariance of the least-squares estimator for `design`. Eigenvalues of
/// `ÕᵀÕ` at or below `rcond · λ_max` are discarded.
pub fn covariance(design: &DesignMatrix, rcond: f64) -> Result<CovarianceMatrix> {
    if !(rcond.is_finite() && rcond >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "rcond",
            reason: "must be finite and non-negative",
        });
    }
    let a = &design.matrix;
    let (n, m) = a.shape();
    let empty = CovarianceMatrix {
        dim: m,
        vectors: DMatrix::zeros(m, 0),
        gram_values: Vec::new(),
    };
    if n == 0 {
        return Ok(empty);
    }
    // The nonzero spectrum of ÕᵀÕ is that of the smaller ÕÕᵀ; with
    // ÕÕᵀ w = λ w the matching unit eigenvector is v = Õᵀ w / √λ.
    let wide = n < m;
    let gram = if wide {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    let (values, vectors) = linalg::symmetric_eigen(gram)?;
    let lambda_max = values.last().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return Ok(empty);
    }
    let cutoff = rcond * lambda_max;
    let kept: Vec<usize> = (0..values.len())
        .rev()
        .filter(|&k| values[k] > cutoff)
        .collect();
    let mut v = DMatrix::zeros(m, kept.len());
    let mut gram_values = Vec::with_capacity(kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let lambda = values[k];
        if wide {
            let column = a.tr_mul(&vectors.column(k)) / libm::sqrt(lambda);
            v.column_mut(col).copy_from(&column);
        } else {
            v.column_mut(col).copy_from(&vectors.column(k));
        }
        gram_values.push(lambda);
    }
    Ok(CovarianceMatrix {
        dim: m,
        vectors: v,
        gram_values,
    })
}

impl CovarianceMatrix {
    /// Number of retained eigenpairs, i.e. the numerical rank of `Õ`.
    pub fn rank(&self) -> usize {
        self.gram_values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest eigenvalue of `ÕᵀÕ`, zero when nothing is retained.
    pub fn max_gram_eigenvalue(&self) -> f64 {
        self.gram_values.first().copied().unwrap_or(0.0)
    }

    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_values
    }

    /// Dense `C`.
    pub fn entries(&self) -> DMatrix<f64> {
        let scaled = self.scaled_columns(|l| 1.0 / l);
        scaled * self.vectors.transpose()
    }

    /// Dense `C^+`, the projected `ÕᵀÕ`.
    pub fn inverse_entries(&self) -> DMatrix<f64> {
        let scaled = self.scaled_columns(|l| l);
        scaled * self.vectors.transpose()
    }

    /// `C x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply_spectral(x, |l| 1.0 / l)
    }

    /// `C^+ x`.
    pub fn apply_inverse(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply_spectral(x, |l| l)
    }

    /// Orthogonal projection onto the measured subspace, the range of `C`.
    pub fn project_range(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply_spectral(x, |_| 1.0)
    }

    /// `C^+ X`.
    pub fn apply_inverse_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut coords = self.vectors.tr_mul(x);
        for (k, &l) in self.gram_values.iter().enumerate() {
            coords.row_mut(k).scale_mut(l);
        }
        &self.vectors * coords
    }

    fn apply_spectral(&self, x: &DVector<f64>, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut coords = self.vectors.tr_mul(x);
        for (c, &l) in coords.iter_mut().zip(&self.gram_values) {
            *c *= f(l);
        }
        &self.vectors * coords
    }

    fn scaled_columns(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.gram_values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(l));
        }
        scaled
    }
}

/// Least-squares Bloch vector `C Õᵀ (M - offsets)` from the first
/// `design.rows()` samples of `values`.
pub fn ml_estimate(
    cov: &CovarianceMatrix,
    design: &DesignMatrix,
    values: &[f64],
) -> Result<BlochVector> {
    let n = design.rows();
    if values.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: values.len(),
        });
    }
    if cov.dim() != design.cols() {
        return Err(Error::DimensionMismatch {
            expected: design.cols(),
            found: cov.dim(),
        });
    }
    let y = DVector::from_iterator(
        n,
        values[..n].iter().zip(&design.offsets).map(|(m, c)| m - c),
    );
    let rhs = design.matrix.tr_mul(&y);
    Ok(BlochVector(cov.apply(&rhs)))
}
