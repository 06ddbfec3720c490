//! Noise-free ordered measurement of Bloch components through a perturbed
//! operator basis.
//!
//! The components `r_α = Tr(ρ0 E_α)` are learned one at a time in order of
//! decreasing `|r_α|`, but each is read through the perturbed element
//! `E'_α = W E_α W†` with `W = U_r^η`. With the unmeasured components guessed
//! as zero, the fidelity after `k` components is
//! `F(k) = 1/d + Σ_{i≤k} r'_{π(i)} r_{π(i)}`.

use alloc::vec::Vec;

use crate::series::{MetricKind, MetricSeries};
use crate::spin::{to_bloch, unitary_fractional_power, HermitianBasis, Observable, UnitaryMatrix};
use crate::{Error, Result};

const PURITY_TOL: f64 = 1e-9;

/// `{U_r^η E_α U_r^{-η}}`.
pub fn perturbed_basis(
    basis: &HermitianBasis,
    ur: &UnitaryMatrix,
    eta: f64,
) -> Result<HermitianBasis> {
    let w = unitary_fractional_power(ur, eta)?;
    basis.conjugated(&w)
}

/// Measurement order and the true and perturbed components of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedMeasurementPlan {
    /// Basis indices by decreasing `|r_α|`, ties by index.
    pub permutation: Vec<usize>,
    pub true_components: Vec<f64>,
    pub perturbed_components: Vec<f64>,
}

impl OrderedMeasurementPlan {
    pub fn new(
        rho0: &Observable,
        basis: &HermitianBasis,
        perturbed: &HermitianBasis,
    ) -> Result<Self> {
        if basis.dim() != perturbed.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: perturbed.dim(),
            });
        }
        let r = to_bloch(rho0, basis)?.0;
        let r_pert = to_bloch(rho0, perturbed)?.0;
        let mut permutation: Vec<usize> = (0..r.len()).collect();
        permutation.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()).then(a.cmp(&b)));
        Ok(Self {
            permutation,
            true_components: r.iter().copied().collect(),
            perturbed_components: r_pert.iter().copied().collect(),
        })
    }

    /// `F(k)` for `k = 0 … d²-1`.
    pub fn fidelities(&self, dim: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.permutation.len() + 1);
        let mut f = 1.0 / dim as f64;
        out.push(f);
        for &alpha in &self.permutation {
            f += self.perturbed_components[alpha] * self.true_components[alpha];
            out.push(f);
        }
        out
    }
}

/// Fidelity against the number of measured components for a pure `rho0`.
pub fn ideal_fidelity_curve(
    rho0: &Observable,
    basis: &HermitianBasis,
    perturbed: &HermitianBasis,
) -> Result<MetricSeries> {
    let purity = rho0.hs_norm_sq();
    if (purity - 1.0).abs() > PURITY_TOL || (rho0.trace() - 1.0).abs() > PURITY_TOL {
        return Err(Error::NotPure(purity));
    }
    let plan = OrderedMeasurementPlan::new(rho0, basis, perturbed)?;
    let values = plan.fidelities(basis.dim());
    MetricSeries::new(MetricKind::Fidelity, (0..values.len()).collect(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{haar_random_state, haar_random_unitary, SpinParams};

    fn setup(seed: u64) -> (Observable, HermitianBasis, UnitaryMatrix) {
        let spin = SpinParams::new(10.0).unwrap();
        (
            haar_random_state(spin, seed).density(),
            HermitianBasis::gell_mann(21),
            haar_random_unitary(spin, seed + 100),
        )
    }

    #[test]
    fn unperturbed_curve_endpoints_and_monotonicity() {
        let (rho, basis, ur) = setup(1);
        let same = perturbed_basis(&basis, &ur, 0.0).unwrap();
        let curve = ideal_fidelity_curve(&rho, &basis, &same).unwrap();
        assert_eq!(curve.len(), 441);
        assert!((curve.values[0] - 1.0 / 21.0).abs() < 1e-15);
        assert!((curve.values[440] - 1.0).abs() < 1e-10);
        assert!(curve.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn perturbation_lowers_the_curve() {
        let (rho, basis, ur) = setup(2);
        let f0 = ideal_fidelity_curve(&rho, &basis, &perturbed_basis(&basis, &ur, 0.0).unwrap())
            .unwrap();
        let f3 = ideal_fidelity_curve(&rho, &basis, &perturbed_basis(&basis, &ur, 0.3).unwrap())
            .unwrap();
        assert!((50..=440).all(|k| f3.values[k] <= f0.values[k] + 1e-12));
        let small =
            ideal_fidelity_curve(&rho, &basis, &perturbed_basis(&basis, &ur, 1e-3).unwrap())
                .unwrap();
        let gap = f0
            .values
            .iter()
            .zip(&small.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-2);
    }

    #[test]
    fn plan_orders_by_magnitude() {
        let (rho, basis, _) = setup(3);
        let plan = OrderedMeasurementPlan::new(&rho, &basis, &basis).unwrap();
        let r = &plan.true_components;
        assert!(plan
            .permutation
            .windows(2)
            .all(|w| r[w[0]].abs() >= r[w[1]].abs()));
        let mut sorted = plan.permutation.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..440).collect::<Vec<_>>());
    }

    #[test]
    fn ties_break_by_index_and_mixed_states_are_rejected() {
        let basis = HermitianBasis::gell_mann(2);
        let mixed = Observable::identity(2);
        assert!(ideal_fidelity_curve(&mixed, &basis, &basis).is_err());
        let half = Observable::new(mixed.matrix() * crate::C64::new(0.5, 0.0)).unwrap();
        let plan = OrderedMeasurementPlan::new(&half, &basis, &basis).unwrap();
        assert_eq!(plan.permutation, alloc::vec![0, 1, 2]);
    }
}
