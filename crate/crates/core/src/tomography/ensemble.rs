use alloc::vec::Vec;

use super::estimate::{covariance, design_matrix, ml_estimate};
use super::projection::{InverseCovariance, PsdProjector};
use super::record::{simulate_record, MeasurementRecord};
use super::{fidelity, DEFAULT_RCOND};
use crate::kicked_top::OperatorTrajectory;
use crate::seed::{derive_seed, Stream};
use crate::series::{MetricKind, MetricSeries};
use crate::spin::{haar_random_state_with, seeded_rng, BlochVector, HermitianBasis, PureState};
use crate::{Error, Result};

/// One initial state together with its measurement record.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub state: PureState,
    pub record: MeasurementRecord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionSettings {
    pub rcond: f64,
    pub projector: PsdProjector,
    /// Start each step's projection from the previous step's estimate.
    pub warm_start: bool,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        Self {
            rcond: DEFAULT_RCOND,
            projector: PsdProjector::default(),
            warm_start: true,
        }
    }
}

/// Per-member fidelity after each measured step.
#[derive(Debug, Clone)]
pub struct FidelityCurves {
    /// Measured steps `1..=n`.
    pub times: Vec<usize>,
    pub per_member: Vec<Vec<f64>>,
    /// Projections that hit the iteration cap; their best iterate was used.
    pub unconverged: usize,
}

impl EnsembleMember {
    /// Member `index` of the ensemble keyed by `master_seed`: a Haar-random
    /// state and its record against `truth`, each from its own derived seed.
    pub fn draw(
        master_seed: u64,
        index: u64,
        truth: &OperatorTrajectory,
        sigma: f64,
    ) -> Result<Self> {
        let mut rng = seeded_rng(derive_seed(master_seed, Stream::State, index));
        let state = haar_random_state_with(truth.dim(), &mut rng);
        let record = simulate_record(
            &state.density(),
            truth,
            sigma,
            derive_seed(master_seed, Stream::Noise, index),
        )?;
        Ok(Self { state, record })
    }
}

/// Members `0..n_states` of the ensemble keyed by `master_seed`.
///
/// Member `i` does not depend on `n_states`, so growing the ensemble keeps
/// the existing members.
pub fn simulate_ensemble(
    master_seed: u64,
    n_states: usize,
    truth: &OperatorTrajectory,
    sigma: f64,
) -> Result<Vec<EnsembleMember>> {
    (0..n_states as u64)
        .map(|i| EnsembleMember::draw(master_seed, i, truth, sigma))
        .collect()
}

/// Reconstructs every member after each prefix of its record, modelling the
/// records with the measured steps of `model`.
pub fn ensemble_fidelity_curves(
    members: &[EnsembleMember],
    model: &OperatorTrajectory,
    basis: &HermitianBasis,
    settings: &ReconstructionSettings,
) -> Result<FidelityCurves> {
    let n = model.n_steps();
    for m in members {
        if m.record.len() < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.record.len(),
            });
        }
        if m.state.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: m.state.dim(),
            });
        }
    }
    let design = design_matrix(model.measured(), basis)?;
    let mut curves: Vec<Vec<f64>> = members.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut previous: Vec<Option<BlochVector>> = alloc::vec![None; members.len()];
    let mut unconverged = 0;

    for step in 1..=n {
        let prefix = design.prefix(step);
        let cov = covariance(&prefix, settings.rcond)?;
        let r_mls = members
            .iter()
            .map(|m| ml_estimate(&cov, &prefix, m.record.values()))
            .collect::<Result<Vec<_>>>()?;
        if !settings.warm_start {
            previous.iter_mut().for_each(|p| *p = None);
        }
        let estimates = settings.projector.project_many(
            &r_mls,
            &InverseCovariance::new(&cov),
            basis,
            &previous,
        )?;
        for (k, est) in estimates.into_iter().enumerate() {
            if !est.converged {
                unconverged += 1;
            }
            curves[k].push(fidelity(&members[k].state, &est.rho_bar));
            previous[k] = Some(est.r_bar);
        }
    }

    Ok(FidelityCurves {
        times: (1..=n).collect(),
        per_member: curves,
        unconverged,
    })
}

/// Mean fidelity and its standard error over the ensemble, per measured step.
pub fn ensemble_average_fidelity(
    members: &[EnsembleMember],
    model: &OperatorTrajectory,
    basis: &HermitianBasis,
    settings: &ReconstructionSettings,
) -> Result<MetricSeries> {
    let curves = ensemble_fidelity_curves(members, model, basis, settings)?;
    MetricSeries::from_samples(MetricKind::Fidelity, curves.times, &curves.per_member)
}
