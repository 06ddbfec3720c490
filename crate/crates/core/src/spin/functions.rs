use alloc::vec::Vec;

use crate::spin::{Observable, UnitaryMatrix, UNITARY_TOL};
use crate::{linalg, CMatrix, Error, Result, C64};

/// `V f(D) V^†` for the eigendecomposition `H = V D V^†` of the Hermitian part
/// of `h`.
pub fn spectral_function<F>(h: &Observable, f: F) -> Result<CMatrix>
where
    F: Fn(f64) -> C64,
{
    let (values, vectors) = linalg::hermitian_eigen(h.matrix())?;
    let mapped: Vec<C64> = values.into_iter().map(f).collect();
    Ok(linalg::reassemble(&vectors, &mapped))
}

/// Eigenphases of a unitary on the principal branch `(-π, π]`.
pub fn unitary_eigenphases(u: &UnitaryMatrix) -> Result<Vec<f64>> {
    Ok(linalg::unitary_eigen(u.matrix())?.0)
}

/// `U^η`: every eigenphase `θ ∈ (-π, π]` is mapped to `ηθ`.
pub fn unitary_fractional_power(u: &UnitaryMatrix, eta: f64) -> Result<UnitaryMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: "fractional power must lie in [0, 1]",
        });
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let (phases, vectors) = linalg::unitary_eigen(u.matrix())?;
    let mapped: Vec<C64> = phases
        .iter()
        .map(|&theta| C64::from_polar(1.0, eta * theta))
        .collect();
    Ok(UnitaryMatrix::from_product(linalg::reassemble(
        &vectors, &mapped,
    )))
}

/// `‖U - I‖_F = sqrt(Σ_k 4 sin²(θ_k / 2))` over the eigenphases of `U`.
pub fn frobenius_distance_to_identity(u: &UnitaryMatrix) -> Result<f64> {
    let phases = unitary_eigenphases(u)?;
    let sum: f64 = phases
        .iter()
        .map(|&theta| {
            let s = libm::sin(0.5 * theta);
            4.0 * s * s
        })
        .sum();
    Ok(libm::sqrt(sum))
}
