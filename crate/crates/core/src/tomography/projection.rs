use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::estimate::CovarianceMatrix;
use crate::linalg;
use crate::spin::{from_bloch, BlochVector, HermitianBasis, Observable};
use crate::{Error, Result, C64};

/// Positive semidefinite weight `A` of the objective `(r - r0)ᵀ A (r - r0)`.
pub trait QuadraticWeight {
    fn dim(&self) -> usize;
    /// `A x`.
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `A X`, column by column unless overridden.
    fn apply_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for k in 0..x.ncols() {
            out.set_column(k, &self.apply(&x.column(k).into_owned()));
        }
        out
    }
    /// Largest eigenvalue of `A`.
    fn max_eigenvalue(&self) -> Result<f64>;
    /// Orthogonal projection onto the range of `A`, if available. Needed to
    /// choose between tied optima.
    fn project_range(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }
}

impl QuadraticWeight for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }

    fn apply_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }

    fn max_eigenvalue(&self) -> Result<f64> {
        let (values, _) = linalg::symmetric_eigen(self.clone())?;
        Ok(values.last().copied().unwrap_or(0.0).max(0.0))
    }
}

/// `C^+`, applied through the factored covariance.
#[derive(Debug, Clone, Copy)]
pub struct InverseCovariance<'a>(&'a CovarianceMatrix);

impl<'a> InverseCovariance<'a> {
    pub fn new(cov: &'a CovarianceMatrix) -> Self {
        Self(cov)
    }
}

impl QuadraticWeight for InverseCovariance<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.apply_inverse(x)
    }

    fn apply_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.0.apply_inverse_columns(x)
    }

    fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.0.max_gram_eigenvalue())
    }

    fn project_range(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.0.project_range(x))
    }
}

/// Physical estimate nearest to a least-squares Bloch vector.
#[derive(Debug, Clone)]
pub struct ProjectedEstimate {
    pub r_bar: BlochVector,
    pub rho_bar: Observable,
    /// Final objective value.
    pub objective: f64,
    /// Solver iterations, including any spent choosing between tied optima.
    pub iterations: usize,
    pub converged: bool,
}

/// Projected-gradient solver for
/// `min (r - r_ml)ᵀ A (r - r_ml)` over Bloch vectors of density matrices.
///
/// Each iteration takes a gradient step of length `1/λ_max(A)` and maps the
/// result back onto the density matrices by clipping its spectrum onto the
/// probability simplex. With `accelerated` set, the step is taken from a
/// Nesterov extrapolation of the last two iterates, and the momentum is reset
/// whenever the objective would increase. Iteration stops once the relative
/// objective decrease falls below `tol`. For data that a physical state fits
/// exactly the optimum is zero and the relative change never settles, so the
/// objective is floored at `tol` times its value at the maximally mixed
/// state.
///
/// A singular `A` leaves the objective flat along its null space, so when a
/// physical state fits the data exactly the optimum is a whole set of states.
/// With `nearest_to_start` set and a start point given, the solver then
/// returns the member of that set closest to the start (in Hilbert-Schmidt
/// distance) instead of whichever one the iteration happened to reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdProjector {
    pub tol: f64,
    pub max_iter: usize,
    pub accelerated: bool,
    pub nearest_to_start: bool,
}

impl Default for PsdProjector {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            accelerated: true,
            nearest_to_start: true,
        }
    }
}

/// Projects `r_ml` with the default solver settings and tolerance `tol`.
///
/// Non-convergence is an error carrying the best iterate.
pub fn psd_project<W: QuadraticWeight + ?Sized>(
    r_ml: &BlochVector,
    weight: &W,
    basis: &HermitianBasis,
    tol: f64,
) -> Result<ProjectedEstimate> {
    let projector = PsdProjector {
        tol,
        ..PsdProjector::default()
    };
    let out = projector.project(r_ml, weight, basis, None)?;
    if out.converged {
        Ok(out)
    } else {
        Err(Error::NotConverged {
            iterations: out.iterations,
            best: out.r_bar,
        })
    }
}

impl PsdProjector {
    /// Runs the solver from `start` (or the Euclidean projection of `r_ml`).
    /// Non-convergence is reported through [`ProjectedEstimate::converged`].
    pub fn project<W: QuadraticWeight + ?Sized>(
        &self,
        r_ml: &BlochVector,
        weight: &W,
        basis: &HermitianBasis,
        start: Option<&BlochVector>,
    ) -> Result<ProjectedEstimate> {
        let mut out = self.project_many(
            core::slice::from_ref(r_ml),
            weight,
            basis,
            &[start.cloned()],
        )?;
        Ok(out.pop().expect("one problem in, one estimate out"))
    }

    /// Solves several problems sharing one weight. The problems advance in
    /// lockstep so each iteration applies `A` to all unfinished iterates at
    /// once; the results equal those of separate [`PsdProjector::project`]
    /// calls.
    pub fn project_many<W: QuadraticWeight + ?Sized>(
        &self,
        r_mls: &[BlochVector],
        weight: &W,
        basis: &HermitianBasis,
        starts: &[Option<BlochVector>],
    ) -> Result<Vec<ProjectedEstimate>> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be finite and positive",
            });
        }
        if starts.len() != r_mls.len() {
            return Err(Error::DimensionMismatch {
                expected: r_mls.len(),
                found: starts.len(),
            });
        }
        let m = basis.len();
        let lens = r_mls
            .iter()
            .map(BlochVector::len)
            .chain(starts.iter().flatten().map(BlochVector::len))
            .chain([weight.dim()]);
        for len in lens {
            if len != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: len,
                });
            }
        }

        let mut results: Vec<Option<ProjectedEstimate>> = Vec::with_capacity(r_mls.len());
        let mut active: Vec<Problem<'_>> = Vec::new();
        let mut lambda_max = None;
        for (index, (r_ml, start)) in r_mls.iter().zip(starts).enumerate() {
            let (r0, rho0, moved) = project_to_density_inner(r_ml, basis)?;
            let lambda = match lambda_max {
                Some(l) => l,
                None if moved => *lambda_max.insert(weight.max_eigenvalue()?),
                None => 0.0,
            };
            if !moved || lambda <= 0.0 {
                // Physical already, or zero weight (every state is optimal).
                results.push(Some(ProjectedEstimate {
                    r_bar: r0,
                    rho_bar: rho0,
                    objective: 0.0,
                    iterations: 0,
                    converged: true,
                }));
                continue;
            }
            results.push(None);
            let problem = Problem::start(index, r_ml, r0, rho0, start.as_ref(), weight, basis)?;
            if problem.f <= 0.0 || problem.scale <= 0.0 {
                results[index] = Some(problem.finish(0, true));
            } else {
                active.push(problem);
            }
        }

        if let Some(lambda) = lambda_max {
            let step = 1.0 / lambda;
            let mut it = 0;
            while !active.is_empty() && it < self.max_iter {
                it += 1;
                let trials = map_problems(&active, |p| {
                    project_to_density_inner(&BlochVector(&p.y - &p.grad_y * step), basis)
                })?;
                let mut diffs = DMatrix::zeros(m, active.len());
                for (k, (p, (x_new, _, _))) in active.iter().zip(&trials).enumerate() {
                    diffs.set_column(k, &(&x_new.0 - p.target));
                }
                let grads = weight.apply_columns(&diffs);
                let mut still = Vec::with_capacity(active.len());
                for (k, (mut p, (x_new, rho_new, _))) in active.drain(..).zip(trials).enumerate() {
                    let grad_new = grads.column(k).into_owned();
                    let f_new = diffs.column(k).dot(&grad_new);
                    if p.step(self, x_new, rho_new, grad_new, f_new) {
                        let index = p.index;
                        results[index] = Some(p.finish(it, true));
                    } else {
                        still.push(p);
                    }
                }
                active = still;
            }
            for p in active {
                let index = p.index;
                results[index] = Some(p.finish(self.max_iter, false));
            }
        }
        let mut results: Vec<ProjectedEstimate> = results
            .into_iter()
            .map(|r| r.expect("every problem resolved"))
            .collect();
        if self.nearest_to_start {
            for (k, start) in starts.iter().enumerate() {
                let Some(start) = start else { continue };
                // Relative to the objective of the maximally mixed state.
                let target = &r_mls[k].0;
                let threshold = self.tol * target.dot(&weight.apply(target));
                if results[k].objective > threshold {
                    continue;
                }
                if let Some(tied) =
                    self.nearest_exact_fit(&start.0, &results[k], target, weight, basis)?
                {
                    if tied.objective <= threshold {
                        results[k] = tied;
                    }
                }
            }
        }
        Ok(results)
    }

    /// Euclidean projection of `start` onto the density matrices `x` with
    /// `P (x - fit) = 0`, `P` the projector onto the range of the weight.
    /// Solved by accelerated ascent on the multiplier of the linear
    /// constraint; `None` if the weight has no range projection or the
    /// iteration cap is hit first.
    fn nearest_exact_fit<W: QuadraticWeight + ?Sized>(
        &self,
        start: &DVector<f64>,
        fit: &ProjectedEstimate,
        target: &DVector<f64>,
        weight: &W,
        basis: &HermitianBasis,
    ) -> Result<Option<ProjectedEstimate>> {
        const GAP_TOL: f64 = 1e-11;
        let mut y = DVector::zeros(start.len());
        let mut w = y.clone();
        let mut t = 1.0;
        let mut last_gap = f64::INFINITY;
        for it in 1..=self.max_iter {
            let (x, rho, _) = project_to_density_inner(&BlochVector(start - &w), basis)?;
            let Some(g) = weight.project_range(&(&x.0 - &fit.r_bar.0)) else {
                return Ok(None);
            };
            let gap = g.norm();
            if gap <= GAP_TOL {
                let diff = &x.0 - target;
                let objective = diff.dot(&weight.apply(&diff)).max(0.0);
                return Ok(Some(ProjectedEstimate {
                    r_bar: x,
                    rho_bar: rho,
                    objective,
                    iterations: fit.iterations + it,
                    converged: fit.converged,
                }));
            }
            if gap > last_gap {
                t = 1.0;
            }
            last_gap = gap;
            let y_next = &w + g;
            let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
            w = &y_next + (&y_next - &y) * ((t - 1.0) / t_next);
            y = y_next;
            t = t_next;
        }
        Ok(None)
    }
}

/// Iteration state of one problem in a batch.
struct Problem<'a> {
    index: usize,
    target: &'a DVector<f64>,
    x: BlochVector,
    rho: Observable,
    grad: DVector<f64>,
    f: f64,
    /// Objective of the maximally mixed state.
    scale: f64,
    // Momentum state: the extrapolated point and the gradient there, which
    // is affine in the iterates and needs no extra weight application.
    y: DVector<f64>,
    grad_y: DVector<f64>,
    t: f64,
}

impl<'a> Problem<'a> {
    /// Starts from the best of the feasible candidates: the caller's point,
    /// the Euclidean projection of `r_ml` and the maximally mixed state.
    fn start<W: QuadraticWeight + ?Sized>(
        index: usize,
        r_ml: &'a BlochVector,
        r0: BlochVector,
        rho0: Observable,
        start: Option<&BlochVector>,
        weight: &W,
        basis: &HermitianBasis,
    ) -> Result<Self> {
        let target = &r_ml.0;
        let mut candidates = Vec::with_capacity(3);
        if let Some(s) = start {
            let (x, rho, _) = project_to_density_inner(s, basis)?;
            candidates.push((x, rho));
        }
        candidates.push((r0, rho0));
        let mixed = BlochVector::zeros(target.len());
        let mixed_rho = from_bloch(&mixed, basis)?;
        candidates.push((mixed, mixed_rho));
        let mut diffs = DMatrix::zeros(target.len(), candidates.len());
        for (k, (x, _)) in candidates.iter().enumerate() {
            diffs.set_column(k, &(&x.0 - target));
        }
        let grads = weight.apply_columns(&diffs);
        let objectives: Vec<f64> = (0..candidates.len())
            .map(|k| diffs.column(k).dot(&grads.column(k)))
            .collect();
        let scale = objectives[candidates.len() - 1];
        let mut best = 0;
        for (k, &f) in objectives.iter().enumerate() {
            if f < objectives[best] {
                best = k;
            }
        }
        let (x, rho) = candidates.swap_remove(best);
        let grad = grads.column(best).into_owned();
        Ok(Self {
            index,
            target,
            y: x.0.clone(),
            grad_y: grad.clone(),
            x,
            rho,
            grad,
            f: objectives[best],
            scale,
            t: 1.0,
        })
    }

    /// Takes one candidate iterate; returns whether the problem converged.
    fn step(
        &mut self,
        settings: &PsdProjector,
        x_new: BlochVector,
        rho_new: Observable,
        grad_new: DVector<f64>,
        f_new: f64,
    ) -> bool {
        if settings.accelerated && f_new > self.f {
            // Momentum overshot: drop it and retry from the current point.
            self.t = 1.0;
            self.y = self.x.0.clone();
            self.grad_y = self.grad.clone();
            return false;
        }
        let decrease = self.f - f_new;
        if settings.accelerated {
            let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * self.t * self.t));
            let beta = (self.t - 1.0) / t_next;
            self.y = &x_new.0 + (&x_new.0 - &self.x.0) * beta;
            self.grad_y = &grad_new + (&grad_new - &self.grad) * beta;
            self.t = t_next;
        } else {
            self.y = x_new.0.clone();
            self.grad_y = grad_new.clone();
        }
        self.x = x_new;
        self.rho = rho_new;
        self.grad = grad_new;
        self.f = f_new;
        decrease <= settings.tol * self.f.max(settings.tol * self.scale)
    }

    fn finish(self, iterations: usize, converged: bool) -> ProjectedEstimate {
        ProjectedEstimate {
            r_bar: self.x,
            rho_bar: self.rho,
            objective: self.f.max(0.0),
            iterations,
            converged,
        }
    }
}

#[cfg(feature = "parallel")]
fn map_problems<T, F>(problems: &[Problem<'_>], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Problem<'_>) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    problems.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_problems<T, F>(problems: &[Problem<'_>], f: F) -> Result<Vec<T>>
where
    F: Fn(&Problem<'_>) -> Result<T>,
{
    problems.iter().map(f).collect()
}

/// Frobenius-nearest density matrix to `I/d + Σ r_α E_α`.
pub fn project_to_density(
    r: &BlochVector,
    basis: &HermitianBasis,
) -> Result<(BlochVector, Observable)> {
    project_to_density_inner(r, basis).map(|(r, rho, _)| (r, rho))
}

/// Also reports whether the input was outside the state space.
fn project_to_density_inner(
    r: &BlochVector,
    basis: &HermitianBasis,
) -> Result<(BlochVector, Observable, bool)> {
    let rho = from_bloch(r, basis)?;
    let (mut values, vectors) = linalg::hermitian_eigen(rho.matrix())?;
    if values.first().is_some_and(|&v| v >= 0.0) {
        return Ok((r.clone(), rho, false));
    }
    linalg::project_to_simplex(&mut values);
    let diag: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let projected = Observable(linalg::hermitian_part(&linalg::reassemble(&vectors, &diag)));
    let coeffs = basis.coefficients(projected.matrix());
    Ok((BlochVector(coeffs), projected, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{to_bloch, PureState};

    #[test]
    fn physical_input_is_returned_unchanged() {
        let basis = HermitianBasis::gell_mann(3);
        let rho = PureState::basis_state(3, 1).unwrap().density();
        let r = to_bloch(&rho, &basis).unwrap();
        let w = DMatrix::<f64>::identity(8, 8);
        let out = psd_project(&r, &w, &basis, 1e-8).unwrap();
        assert_eq!(out.iterations, 0);
        assert!((out.r_bar.0 - r.0).amax() < 1e-15);
    }

    #[test]
    fn identity_weight_gives_euclidean_projection() {
        let basis = HermitianBasis::gell_mann(2);
        let r = BlochVector::from_vec(alloc::vec![0.0, 0.0, 3.0]);
        let w = DMatrix::<f64>::identity(3, 3);
        let out = psd_project(&r, &w, &basis, 1e-10).unwrap();
        // Pure state on the z axis: r_z = 1/√2.
        assert!((out.r_bar.as_slice()[2] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        let (euclid, _) = project_to_density(&r, &basis).unwrap();
        assert!((out.r_bar.0 - euclid.0).amax() < 1e-9);
    }

    #[test]
    fn output_is_a_density_matrix() {
        let basis = HermitianBasis::gell_mann(4);
        let r = BlochVector::from_vec((0..15).map(|k| (k as f64 - 7.0) * 0.3).collect());
        let w = DMatrix::from_fn(15, 15, |i, j| if i == j { 1.0 + i as f64 } else { 0.1 });
        let out = psd_project(&r, &w, &basis, 1e-10).unwrap();
        let eig = out.rho_bar.eigenvalues().unwrap();
        assert!(eig[0] >= -1e-12);
        assert!((out.rho_bar.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let basis = HermitianBasis::gell_mann(4);
        let r = BlochVector::from_vec((0..15).map(|k| (k as f64 - 7.0) * 0.3).collect());
        let w = DMatrix::from_fn(
            15,
            15,
            |i, j| if i == j { 1.0 + i as f64 * 10.0 } else { 0.0 },
        );
        let projector = PsdProjector {
            tol: 1e-300,
            max_iter: 3,
            accelerated: false,
            nearest_to_start: false,
        };
        let out = projector.project(&r, &w, &basis, None).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert!(matches!(
            PsdProjector {
                accelerated: true,
                ..projector
            }
            .project(&r, &w, &basis, None),
            Ok(ProjectedEstimate {
                converged: false,
                ..
            })
        ));
    }

    /// Weight that only sees the first Bloch component, as a one-row design.
    struct FirstComponent;

    impl QuadraticWeight for FirstComponent {
        fn dim(&self) -> usize {
            3
        }

        fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(alloc::vec![x[0], 0.0, 0.0])
        }

        fn max_eigenvalue(&self) -> Result<f64> {
            Ok(1.0)
        }

        fn project_range(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
            Some(self.apply(x))
        }
    }

    #[test]
    fn ties_are_broken_toward_the_start() {
        let basis = HermitianBasis::gell_mann(2);
        let r = BlochVector::from_vec(alloc::vec![0.3, 0.0, 0.0]);
        let projector = PsdProjector::default();

        let none = projector
            .project(&r, &FirstComponent, &basis, None)
            .unwrap();
        assert!((none.r_bar.0 - &r.0).amax() < 1e-15);

        // A start that already fits is returned as is.
        let inside = BlochVector::from_vec(alloc::vec![0.3, 0.2, 0.1]);
        let out = projector
            .project(&r, &FirstComponent, &basis, Some(&inside))
            .unwrap();
        assert!((out.r_bar.0 - &inside.0).amax() < 1e-9);

        // Otherwise the nearest exact fit is the radial clip onto the disk
        // r_1 = 0.3 of the Bloch ball, |r|^2 <= 1/2.
        let outside = BlochVector::from_vec(alloc::vec![0.0, 0.6, 0.4]);
        let out = projector
            .project(&r, &FirstComponent, &basis, Some(&outside))
            .unwrap();
        let radius = libm::sqrt(0.5 - 0.09) / libm::sqrt(0.52);
        let expected = [0.3, 0.6 * radius, 0.4 * radius];
        for (a, b) in out.r_bar.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(out.objective < 1e-16);

        let off = PsdProjector {
            nearest_to_start: false,
            ..projector
        };
        let out = off
            .project(&r, &FirstComponent, &basis, Some(&outside))
            .unwrap();
        assert!((out.r_bar.0[0] - 0.3).abs() < 1e-6);
    }
}
