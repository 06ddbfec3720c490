//! State reconstruction from a continuous weak-measurement record.
//!
//! The measured signal at step `k` is `M_k = Tr(O_k ρ0) + noise`, where `O_k`
//! evolves under the true dynamics. The experimenter models the record with
//! its own (ideal) trajectory, forms the least-squares Bloch vector and then
//! projects it onto the set of density matrices in the metric of the inverse
//! covariance.

mod ensemble;
mod estimate;
mod projection;
mod record;

pub use ensemble::{
    ensemble_average_fidelity, ensemble_fidelity_curves, simulate_ensemble, EnsembleMember,
    FidelityCurves, ReconstructionSettings,
};
pub use estimate::{covariance, design_matrix, ml_estimate, CovarianceMatrix, DesignMatrix};
pub use projection::{
    project_to_density, psd_project, InverseCovariance, ProjectedEstimate, PsdProjector,
    QuadraticWeight,
};
pub use record::{simulate_record, simulate_record_with, MeasurementRecord};

use alloc::vec::Vec;

use crate::kicked_top::OperatorTrajectory;
use crate::spin::{BlochVector, HermitianBasis, Observable, PureState};
use crate::Result;

/// Relative eigenvalue cutoff of the covariance pseudoinverse.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Output of a full reconstruction.
#[derive(Debug, Clone)]
pub struct TomographyEstimate {
    /// Unconstrained least-squares Bloch vector.
    pub r_ml: BlochVector,
    /// Bloch vector of the physical estimate.
    pub r_bar: BlochVector,
    pub rho_bar: Observable,
    /// Rank of the design matrix.
    pub rank: usize,
    /// Projection iterations; zero when `r_ml` was already physical.
    pub iterations: usize,
}

impl TomographyEstimate {
    pub fn fidelity(&self, psi: &PureState) -> f64 {
        fidelity(psi, &self.rho_bar)
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity(psi: &PureState, rho: &Observable) -> f64 {
    rho.expectation(psi).clamp(0.0, 1.0)
}

/// Reconstructs `ρ0` from `record`, modelling it with the measured steps of
/// `model` (steps `1..=n`).
///
/// Fails with [`crate::Error::NotConverged`] if the projection does not
/// converge; the error carries the best iterate.
pub fn reconstruct(
    record: &MeasurementRecord,
    model: &OperatorTrajectory,
    basis: &HermitianBasis,
    rcond: f64,
    projector: &PsdProjector,
) -> Result<TomographyEstimate> {
    let design = design_matrix(model.measured(), basis)?;
    let cov = covariance(&design, rcond)?;
    let r_ml = ml_estimate(&cov, &design, record.values())?;
    let proj = projector.project(&r_ml, &InverseCovariance::new(&cov), basis, None)?;
    if !proj.converged {
        return Err(crate::Error::NotConverged {
            iterations: proj.iterations,
            best: proj.r_bar,
        });
    }
    Ok(TomographyEstimate {
        r_ml,
        r_bar: proj.r_bar,
        rho_bar: proj.rho_bar,
        rank: cov.rank(),
        iterations: proj.iterations,
    })
}

/// Fidelity after each prefix `1..=n` of the record, each prefix reconstructed
/// independently from scratch.
pub fn fidelity_curve(
    psi: &PureState,
    record: &MeasurementRecord,
    model: &OperatorTrajectory,
    basis: &HermitianBasis,
    settings: &ReconstructionSettings,
) -> Result<Vec<f64>> {
    let member = EnsembleMember {
        state: psi.clone(),
        record: record.clone(),
    };
    let curves = ensemble_fidelity_curves(core::slice::from_ref(&member), model, basis, settings)?;
    Ok(curves.per_member.into_iter().next().unwrap_or_default())
}
