use alloc::vec::Vec;

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::kicked_top::OperatorTrajectory;
use crate::spin::{seeded_rng, Observable};
use crate::{Error, Result};

/// Noisy expectation values `M_1 … M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    values: Vec<f64>,
    noise_sigma: f64,
}

impl MeasurementRecord {
    pub fn new(values: Vec<f64>, noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise_sigma",
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self {
            values,
            noise_sigma,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` samples.
    pub fn prefix(&self, n: usize) -> &[f64] {
        &self.values[..n.min(self.values.len())]
    }
}

/// Record of `Tr(O_k ρ0) + N(0, σ²)` over the measured steps of `truth`.
pub fn simulate_record(
    rho0: &Observable,
    truth: &OperatorTrajectory,
    sigma: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    simulate_record_with(rho0, truth, sigma, &mut seeded_rng(seed))
}

/// As [`simulate_record`], drawing noise from `rng` one sample per step in
/// order, so a shorter record is a prefix of a longer one.
pub fn simulate_record_with<R: RngCore + ?Sized>(
    rho0: &Observable,
    truth: &OperatorTrajectory,
    sigma: f64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    if rho0.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            found: rho0.dim(),
        });
    }
    let mut record = MeasurementRecord::new(Vec::new(), sigma)?;
    record.values = truth
        .measured()
        .iter()
        .map(|o| {
            let z: f64 = StandardNormal.sample(rng);
            o.trace_product(rho0) + sigma * z
        })
        .collect();
    Ok(record)
}
