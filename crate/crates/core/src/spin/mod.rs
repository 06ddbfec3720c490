//! Spin-j operator algebra: value types, the Hermitian operator basis and
//! Bloch coordinates, Haar sampling and spectral matrix functions.

mod basis;
mod functions;
mod haar;
mod operators;

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::linalg;
use crate::{CMatrix, Error, Result, C64};

pub use basis::{from_bloch, hermitian_basis, to_bloch, HermitianBasis};
pub use functions::{
    frobenius_distance_to_identity, spectral_function, unitary_eigenphases,
    unitary_fractional_power,
};
pub use haar::{
    haar_random_state, haar_random_state_with, haar_random_unitary, haar_random_unitary_with,
    seeded_rng, SimRng,
};
pub use operators::{angular_momentum_ops, AngularMomentum};

/// Tolerance on `max |O - O^†|` accepted by [`Observable::new`], relative to
/// the largest entry (or absolute below unit scale).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `max |U^† U - I|` accepted by [`UnitaryMatrix::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Spin quantum number `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinParams {
    twice_j: u32,
}

impl SpinParams {
    /// Accepts any positive `j` with `2j` integral.
    pub fn new(j: f64) -> Result<Self> {
        if !j.is_finite() || j <= 0.0 {
            return Err(Error::InvalidSpin(j));
        }
        let twice = 2.0 * j;
        let rounded = libm::round(twice);
        if (twice - rounded).abs() > 1e-9 || rounded > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self {
            twice_j: rounded as u32,
        })
    }

    pub fn from_twice_j(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self { twice_j })
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    /// Hilbert-space dimension `2j + 1`.
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Number of generalized Bloch components, `d^2 - 1`.
    pub fn bloch_dim(&self) -> usize {
        let d = self.dim();
        d * d - 1
    }

    /// Magnetic quantum numbers in basis order, `j, j-1, …, -j`.
    pub fn magnetic_numbers(&self) -> impl Iterator<Item = f64> {
        let j = self.j();
        (0..self.dim()).map(move |k| j - k as f64)
    }
}

/// Hermitian operator on the `d`-dimensional spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(pub(crate) CMatrix);

impl Observable {
    /// Validates Hermiticity and stores the exactly symmetrized matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let scale = linalg::max_abs(&matrix).max(1.0);
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(linalg::hermitian_part(&matrix)))
    }

    /// Takes the Hermitian part `(M + M^†)/2` without checking how far `M` was
    /// from Hermitian. Used after products that are Hermitian up to roundoff.
    pub fn hermitize(matrix: &CMatrix) -> Result<Self> {
        check_square(matrix)?;
        Ok(Self(linalg::hermitian_part(matrix)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.0[(k, k)].re).sum()
    }

    /// `Tr(O^2)`, the squared Hilbert–Schmidt norm.
    pub fn hs_norm_sq(&self) -> f64 {
        linalg::frobenius_sq(&self.0)
    }

    /// `Re Tr(self · other)`; for Hermitian arguments the trace is real.
    pub fn trace_product(&self, other: &Observable) -> f64 {
        linalg::trace_product_re(&self.0, &other.0)
    }

    /// Heisenberg step `U^† O U`.
    pub fn heisenberg(&self, u: &UnitaryMatrix) -> Observable {
        Observable(linalg::hermitian_part(&u.0.ad_mul(&(&self.0 * &u.0))))
    }

    /// Similarity `V O V^†`.
    pub fn rotated(&self, v: &UnitaryMatrix) -> Observable {
        Observable(linalg::hermitian_part(&(&v.0 * &self.0 * v.0.adjoint())))
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, psi: &PureState) -> f64 {
        psi.0.dotc(&(&self.0 * &psi.0)).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(&self.0)?.0)
    }
}

/// Real generalized Bloch vector of length `d^2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector(pub DVector<f64>);

impl BlochVector {
    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn from_vec(components: Vec<f64>) -> Self {
        Self(DVector::from_vec(components))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.dot(&other.0)
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(DVector<C64>);

impl PureState {
    /// Normalizes `amplitudes`; the zero vector is rejected.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm.is_nan() || norm <= 0.0 || norm.is_infinite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self(amplitudes.unscale(norm)))
    }

    /// Basis state `|m_index⟩` in the `J_z` eigenbasis ordering.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> Observable {
        Observable(linalg::hermitian_part(&(&self.0 * self.0.adjoint())))
    }

    /// `|⟨φ|ψ⟩|^2`.
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.0.dotc(&other.0).norm_sqr()
    }
}

/// Unitary matrix on the spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Validates `U^† U = I` to [`UNITARY_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = linalg::unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(matrix))
    }

    /// Wraps a product of unitaries without re-checking.
    pub(crate) fn from_product(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self(self.0.adjoint())
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        Self(&self.0 * &rhs.0)
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, n: usize) -> UnitaryMatrix {
        let mut acc = UnitaryMatrix::identity(self.dim());
        for _ in 0..n {
            acc = acc.compose(self);
        }
        acc
    }

    /// `max |U^† U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.0)
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_params_accept_half_integers_only() {
        assert_eq!(SpinParams::new(10.0).unwrap().dim(), 21);
        assert_eq!(SpinParams::new(0.5).unwrap().dim(), 2);
        assert_eq!(SpinParams::new(10.0).unwrap().bloch_dim(), 440);
        assert!(matches!(SpinParams::new(10.3), Err(Error::InvalidSpin(_))));
        assert!(SpinParams::new(0.0).is_err());
        assert!(SpinParams::new(-1.0).is_err());
        assert!(SpinParams::new(f64::NAN).is_err());
    }

    #[test]
    fn observable_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(Observable::new(m), Err(Error::NotHermitian(_))));
        assert!(matches!(
            Observable::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn unitary_rejects_non_unitary() {
        let m = CMatrix::identity(3, 3) * C64::new(1.1, 0.0);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn pure_state_is_normalized() {
        let v = DVector::from_vec(alloc::vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        let psi = PureState::new(v).unwrap();
        assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-15);
        assert!(PureState::new(DVector::zeros(3)).is_err());
    }
}
