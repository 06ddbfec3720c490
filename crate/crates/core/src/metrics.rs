//! Operator-space comparisons between the ideal and the perturbed
//! Heisenberg trajectories.
//!
//! Series functions take `(truth, ideal)` trajectories sharing `O_0` and
//! return one value per stored step `0..=n`.

use alloc::vec::Vec;

use crate::kicked_top::{error_unitary, FloquetPair, OperatorTrajectory};
use crate::linalg;
use crate::series::{MetricKind, MetricSeries};
use crate::spin::Observable;
use crate::{CMatrix, Error, Result, C64};

/// Eigenvalue floor applied before taking logarithms in the relative entropy.
pub const DEFAULT_ENTROPY_FLOOR: f64 = 1e-12;

fn check_pair(truth: &OperatorTrajectory, ideal: &OperatorTrajectory) -> Result<()> {
    if truth.len() != ideal.len() {
        return Err(Error::DimensionMismatch {
            expected: ideal.len(),
            found: truth.len(),
        });
    }
    if truth.dim() != ideal.dim() {
        return Err(Error::DimensionMismatch {
            expected: ideal.dim(),
            found: truth.dim(),
        });
    }
    Ok(())
}

fn series_over<F>(metric: MetricKind, len: usize, f: F) -> Result<MetricSeries>
where
    F: FnMut(usize) -> Result<f64>,
{
    let values = (0..len).map(f).collect::<Result<Vec<f64>>>()?;
    MetricSeries::new(metric, (0..len).collect(), values)
}

/// Operator Loschmidt echo `F_O(n) = Tr(O_n O'_n) / Tr(O_0²)`.
pub fn loschmidt_echo(
    truth: &OperatorTrajectory,
    ideal: &OperatorTrajectory,
) -> Result<MetricSeries> {
    check_pair(truth, ideal)?;
    let norm = ideal.initial().hs_norm_sq();
    if norm <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    series_over(MetricKind::Loschmidt, ideal.len(), |k| {
        let (o, o_true) = (&ideal.steps()[k], &truth.steps()[k]);
        // Unitary evolution keeps Tr(O_n²) = Tr(O_0²).
        if o.matrix() == o_true.matrix() {
            return Ok(1.0);
        }
        Ok(o.trace_product(o_true) / norm)
    })
}

/// `V |D| V† / Tr|D|` for an observable `O = V D V†`: a density matrix with
/// the eigenvectors of `O`.
#[derive(Debug, Clone)]
pub struct RegularizedOperator {
    /// Eigenvalues, in the column order of `vectors`.
    weights: Vec<f64>,
    vectors: CMatrix,
}

/// Normalized absolute value of `o`. The zero operator is rejected.
pub fn regularize(o: &Observable) -> Result<RegularizedOperator> {
    let (values, vectors) = linalg::hermitian_eigen(o.matrix())?;
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    let scale = linalg::max_abs(o.matrix());
    if total <= 0.0 || total <= 1e-14 * scale {
        return Err(Error::ZeroNorm);
    }
    let weights = values.iter().map(|v| v.abs() / total).collect();
    Ok(RegularizedOperator { weights, vectors })
}

impl RegularizedOperator {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.weights
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// The operator as an [`Observable`].
    pub fn to_observable(&self) -> Observable {
        let diag: Vec<C64> = self.weights.iter().map(|&w| C64::new(w, 0.0)).collect();
        Observable(linalg::hermitian_part(&linalg::reassemble(
            &self.vectors,
            &diag,
        )))
    }

    fn floored(&self, floor: f64) -> Vec<f64> {
        let raised: Vec<f64> = self.weights.iter().map(|&w| w.max(floor)).collect();
        let total: f64 = raised.iter().sum();
        raised.into_iter().map(|w| w / total).collect()
    }
}

/// Quantum relative entropy `Tr a (ln a - ln b)` in nats, after raising both
/// spectra to at least `floor` and renormalizing.
pub fn relative_entropy(
    a: &RegularizedOperator,
    b: &RegularizedOperator,
    floor: f64,
) -> Result<f64> {
    if !(floor.is_finite() && floor > 0.0 && floor * (a.dim() as f64) < 1.0) {
        return Err(Error::InvalidParameter {
            name: "floor",
            reason: "must be positive and below 1/d",
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let p = a.floored(floor);
    let q = b.floored(floor);
    // Overlaps |⟨a_i|b_j⟩|² between the two eigenbases.
    let overlap = a.vectors.adjoint() * &b.vectors;
    let mut d = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        let cross: f64 = q
            .iter()
            .enumerate()
            .map(|(j, &qj)| overlap[(i, j)].norm_sqr() * libm::log(qj))
            .sum();
        d += pi * (libm::log(pi) - cross);
    }
    Ok(d)
}

/// `D_KL(ρ_{O_n} ‖ ρ_{O'_n})` along the trajectories, ideal operator first.
pub fn relative_entropy_series(
    truth: &OperatorTrajectory,
    ideal: &OperatorTrajectory,
    floor: f64,
) -> Result<MetricSeries> {
    check_pair(truth, ideal)?;
    series_over(MetricKind::RelEntropy, ideal.len(), |k| {
        let a = regularize(&ideal.steps()[k])?;
        let b = regularize(&truth.steps()[k])?;
        relative_entropy(&a, &b, floor)
    })
}

/// `‖[A, B]‖_F² / (2 j⁴)` with `j = (d - 1)/2`.
pub fn incompatibility(a: &Observable, b: &Observable) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim();
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "needs j > 0",
        });
    }
    // [A, B] = AB - (AB)† for Hermitian A and B.
    let ab = a.matrix() * b.matrix();
    let mut sq = 0.0;
    for r in 0..d {
        for c in 0..d {
            sq += (ab[(r, c)] - ab[(c, r)].conj()).norm_sqr();
        }
    }
    let j = (d - 1) as f64 / 2.0;
    Ok(sq / (2.0 * j * j * j * j))
}

/// Operator incompatibility `I_O(n)` of `O_n` and `O'_n`.
pub fn operator_incompatibility(
    truth: &OperatorTrajectory,
    ideal: &OperatorTrajectory,
) -> Result<MetricSeries> {
    check_pair(truth, ideal)?;
    series_over(MetricKind::Otoc, ideal.len(), |k| {
        incompatibility(&truth.steps()[k], &ideal.steps()[k])
    })
}

/// `I_O(n)` as an out-of-time-order correlator of the unevolved operator,
/// `‖[O, 𝒰_n† O 𝒰_n]‖_F² / (2 j⁴)` with the error unitary `𝒰_n`.
pub fn incompatibility_otoc_form(o: &Observable, pair: &FloquetPair, n: usize) -> Result<f64> {
    if o.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            found: o.dim(),
        });
    }
    let evolved = o.heisenberg(&error_unitary(pair, n));
    incompatibility(o, &evolved)
}
