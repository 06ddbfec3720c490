use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::spin::{BlochVector, Observable, SpinParams, UnitaryMatrix};
use crate::{linalg, CMatrix, Error, Result, C64};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Ordered orthonormal basis `{E_α}` of traceless Hermitian `d×d` matrices,
/// `Tr(E_α E_β) = δ_αβ`.
///
/// The canonical basis is the generalized Gell-Mann set: the symmetric
/// elements `(|a⟩⟨b| + |b⟩⟨a|)/√2` for `a < b` in lexicographic order, then
/// the antisymmetric elements `(-i|a⟩⟨b| + i|b⟩⟨a|)/√2` in the same order,
/// then the diagonal elements
/// `(Σ_{k<l} |k⟩⟨k| - l|l⟩⟨l|)/√(l(l+1))` for `l = 1 … d-1`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<Observable>,
    layout: Layout,
}

#[derive(Debug, Clone)]
enum Layout {
    /// Closed-form coefficient maps for the canonical ordering.
    GellMann { pairs: Vec<(usize, usize)> },
    /// Row `α` holds `(Re E_α, Im E_α)` flattened; `r = A · vec(M)`.
    Dense { analysis: DMatrix<f64> },
}

/// Generalized Gell-Mann basis for the spin's Hilbert space.
pub fn hermitian_basis(p: SpinParams) -> HermitianBasis {
    HermitianBasis::gell_mann(p.dim())
}

impl HermitianBasis {
    /// Canonical basis for dimension `dim >= 2`.
    pub fn gell_mann(dim: usize) -> Self {
        assert!(dim >= 2, "basis dimension must be at least 2");
        let pairs: Vec<(usize, usize)> = (0..dim)
            .flat_map(|a| (a + 1..dim).map(move |b| (a, b)))
            .collect();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(dim * dim - 1);
        for &(a, b) in &pairs {
            let mut m = CMatrix::zeros(dim, dim);
            m[(a, b)] = C64::new(s, 0.0);
            m[(b, a)] = C64::new(s, 0.0);
            elements.push(Observable(m));
        }
        for &(a, b) in &pairs {
            let mut m = CMatrix::zeros(dim, dim);
            m[(a, b)] = C64::new(0.0, -s);
            m[(b, a)] = C64::new(0.0, s);
            elements.push(Observable(m));
        }
        for l in 1..dim {
            let norm = libm::sqrt((l * (l + 1)) as f64);
            let mut m = CMatrix::zeros(dim, dim);
            for k in 0..l {
                m[(k, k)] = C64::new(1.0 / norm, 0.0);
            }
            m[(l, l)] = C64::new(-(l as f64) / norm, 0.0);
            elements.push(Observable(m));
        }
        Self {
            dim,
            elements,
            layout: Layout::GellMann { pairs },
        }
    }

    /// Arbitrary basis; validates count, tracelessness and orthonormality.
    pub fn from_elements(dim: usize, elements: Vec<Observable>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "basis dimension must be at least 2",
            });
        }
        if elements.len() != dim * dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                found: elements.len(),
            });
        }
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let analysis = analysis_matrix(dim, &elements);
        let gram = &analysis * analysis.transpose();
        let mut defect = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - target).abs());
            }
        }
        for e in &elements {
            defect = defect.max(e.trace().abs());
        }
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self {
            dim,
            elements,
            layout: Layout::Dense { analysis },
        })
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `d^2 - 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Observable] {
        &self.elements
    }

    pub fn is_gell_mann(&self) -> bool {
        matches!(self.layout, Layout::GellMann { .. })
    }

    /// Reorders elements: the new `k`-th element is the old `perm[k]`-th.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let mut seen = alloc::vec![false; n];
        for &p in perm {
            if p >= n || core::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter {
                    name: "perm",
                    reason: "not a permutation of the basis indices",
                });
            }
        }
        let elements: Vec<Observable> = perm.iter().map(|&p| self.elements[p].clone()).collect();
        let analysis = analysis_matrix(self.dim, &elements);
        Ok(Self {
            dim: self.dim,
            elements,
            layout: Layout::Dense { analysis },
        })
    }

    /// Basis `{U E_α U^†}`; conjugation preserves orthonormality.
    pub fn conjugated(&self, u: &UnitaryMatrix) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.dim(),
            });
        }
        let elements: Vec<Observable> = self.elements.iter().map(|e| e.rotated(u)).collect();
        let analysis = analysis_matrix(self.dim, &elements);
        Ok(Self {
            dim: self.dim,
            elements,
            layout: Layout::Dense { analysis },
        })
    }

    /// `c_α = Re Tr(M E_α)` for a square matrix of the basis dimension.
    pub fn coefficients(&self, m: &CMatrix) -> DVector<f64> {
        debug_assert_eq!(m.nrows(), self.dim);
        let d = self.dim;
        match &self.layout {
            Layout::GellMann { pairs } => {
                let s = core::f64::consts::FRAC_1_SQRT_2;
                let np = pairs.len();
                let mut out = DVector::zeros(d * d - 1);
                for (p, &(a, b)) in pairs.iter().enumerate() {
                    let (ab, ba) = (m[(a, b)], m[(b, a)]);
                    out[p] = (ab.re + ba.re) * s;
                    out[np + p] = (ba.im - ab.im) * s;
                }
                let mut prefix = 0.0;
                for l in 1..d {
                    prefix += m[(l - 1, l - 1)].re;
                    let norm = libm::sqrt((l * (l + 1)) as f64);
                    out[2 * np + l - 1] = (prefix - l as f64 * m[(l, l)].re) / norm;
                }
                out
            }
            Layout::Dense { analysis } => analysis * flatten(m),
        }
    }

    /// `Σ_α c_α E_α`.
    pub fn synthesize(&self, coeffs: &[f64]) -> CMatrix {
        debug_assert_eq!(coeffs.len(), self.len());
        let d = self.dim;
        match &self.layout {
            Layout::GellMann { pairs } => {
                let s = core::f64::consts::FRAC_1_SQRT_2;
                let np = pairs.len();
                let mut m = CMatrix::zeros(d, d);
                for (p, &(a, b)) in pairs.iter().enumerate() {
                    let z = C64::new(coeffs[p] * s, -coeffs[np + p] * s);
                    m[(a, b)] = z;
                    m[(b, a)] = z.conj();
                }
                // Diagonal entry k collects +c_l/√(l(l+1)) from every l > k and
                // -k c_k/√(k(k+1)) from its own element.
                let mut suffix = 0.0;
                for k in (0..d).rev() {
                    let own = if k >= 1 {
                        let norm = libm::sqrt((k * (k + 1)) as f64);
                        -(k as f64) * coeffs[2 * np + k - 1] / norm
                    } else {
                        0.0
                    };
                    m[(k, k)] = C64::new(suffix + own, 0.0);
                    if k >= 1 {
                        let norm = libm::sqrt((k * (k + 1)) as f64);
                        suffix += coeffs[2 * np + k - 1] / norm;
                    }
                }
                m
            }
            Layout::Dense { analysis } => {
                let flat = analysis.tr_mul(&DVector::from_column_slice(coeffs));
                unflatten(d, &flat)
            }
        }
    }
}

fn flatten(m: &CMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut v = DVector::zeros(2 * d * d);
    for a in 0..d {
        for b in 0..d {
            let z = m[(a, b)];
            v[2 * (a * d + b)] = z.re;
            v[2 * (a * d + b) + 1] = z.im;
        }
    }
    v
}

fn unflatten(d: usize, v: &DVector<f64>) -> CMatrix {
    CMatrix::from_fn(d, d, |a, b| {
        C64::new(v[2 * (a * d + b)], v[2 * (a * d + b) + 1])
    })
}

fn analysis_matrix(dim: usize, elements: &[Observable]) -> DMatrix<f64> {
    let mut analysis = DMatrix::zeros(elements.len(), 2 * dim * dim);
    for (row, e) in elements.iter().enumerate() {
        let flat = flatten(e.matrix());
        analysis.row_mut(row).copy_from(&flat.transpose());
    }
    analysis
}

/// Bloch coordinates `r_α = Tr(ρ E_α)`.
pub fn to_bloch(rho: &Observable, basis: &HermitianBasis) -> Result<BlochVector> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    Ok(BlochVector(basis.coefficients(rho.matrix())))
}

/// `I/d + Σ r_α E_α`. The result need not be positive.
pub fn from_bloch(r: &BlochVector, basis: &HermitianBasis) -> Result<Observable> {
    if r.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: r.len(),
        });
    }
    let d = basis.dim();
    let mut m = basis.synthesize(r.as_slice());
    let shift = 1.0 / d as f64;
    for k in 0..d {
        m[(k, k)].re += shift;
    }
    Ok(Observable(linalg::hermitian_part(&m)))
}
