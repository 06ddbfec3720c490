//! Quantum kicked top: Floquet maps, Heisenberg-picture operator trajectories
//! and the error unitary between ideal and perturbed dynamics.
//!
//! One period is `F = exp(-iλ J_z² / 2j) · exp(-iα J_x)`. The *true* dynamics
//! uses kick strength `λ + δλ`; the experimenter's *ideal* model uses `λ`.

use alloc::vec::Vec;

use crate::spin::{
    angular_momentum_ops, haar_random_unitary, spectral_function, Observable, SpinParams,
    UnitaryMatrix,
};
use crate::{CMatrix, Error, Result, C64};

/// Linear precession angle used throughout the kicked-top studies.
pub const DEFAULT_ALPHA: f64 = 1.4;
/// Kick-strength perturbation of the true dynamics.
pub const DEFAULT_DELTA_LAMBDA: f64 = 0.01;
/// Number of Floquet periods when no horizon is given.
pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedTopParams {
    /// Kick strength of the ideal map.
    pub lambda: f64,
    /// Rotation angle about `x`.
    pub alpha: f64,
    /// Offset of the true kick strength, `λ_true = λ + δλ`.
    pub delta_lambda: f64,
    pub spin: SpinParams,
}

impl KickedTopParams {
    pub fn new(spin: SpinParams, lambda: f64, alpha: f64, delta_lambda: f64) -> Result<Self> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite",
                })
            }
        };
        finite("lambda", lambda)?;
        finite("alpha", alpha)?;
        finite("delta_lambda", delta_lambda)?;
        Ok(Self {
            lambda,
            alpha,
            delta_lambda,
            spin,
        })
    }
}

/// Diagonal kick `exp(-iλ m² / 2j)` as exact elementwise phases.
fn kick_factor(spin: SpinParams, lambda: f64) -> CMatrix {
    let d = spin.dim();
    let j = spin.j();
    let mut kick = CMatrix::zeros(d, d);
    for (k, m) in spin.magnetic_numbers().enumerate() {
        kick[(k, k)] = C64::from_polar(1.0, -lambda * m * m / (2.0 * j));
    }
    kick
}

/// `exp(-iα J_x)` from the spectral decomposition of `J_x`.
fn rotation_factor(spin: SpinParams, alpha: f64) -> Result<CMatrix> {
    let jx = angular_momentum_ops(spin)?.x;
    spectral_function(&jx, |x| C64::from_polar(1.0, -alpha * x))
}

/// One Floquet period, ideal (`λ`) or perturbed (`λ + δλ`).
pub fn floquet_map(p: &KickedTopParams, use_perturbed: bool) -> Result<UnitaryMatrix> {
    let lambda = if use_perturbed {
        p.lambda + p.delta_lambda
    } else {
        p.lambda
    };
    let rotation = rotation_factor(p.spin, p.alpha)?;
    Ok(UnitaryMatrix::from_product(
        kick_factor(p.spin, lambda) * rotation,
    ))
}

/// Ideal map `U'_τ` and true map `U_τ` for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetPair {
    pub ideal: UnitaryMatrix,
    pub true_perturbed: UnitaryMatrix,
}

impl FloquetPair {
    pub fn new(p: &KickedTopParams) -> Result<Self> {
        let rotation = rotation_factor(p.spin, p.alpha)?;
        let ideal = kick_factor(p.spin, p.lambda) * &rotation;
        let true_perturbed = kick_factor(p.spin, p.lambda + p.delta_lambda) * rotation;
        Ok(Self {
            ideal: UnitaryMatrix::from_product(ideal),
            true_perturbed: UnitaryMatrix::from_product(true_perturbed),
        })
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim()
    }
}

/// Random observable `V J_x V^†` with `V` Haar-distributed.
pub fn initial_observable(p: SpinParams, seed: u64) -> Result<Observable> {
    let v = haar_random_unitary(p, seed);
    rotated_jx(p, &v)
}

/// `V J_x V^†` for a given rotation.
pub fn rotated_jx(p: SpinParams, v: &UnitaryMatrix) -> Result<Observable> {
    if v.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: v.dim(),
        });
    }
    Ok(angular_momentum_ops(p)?.x.rotated(v))
}

/// Heisenberg-picture operators `O_0, O_1, …, O_n` with `O_k = U^{†k} O U^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTrajectory {
    steps: Vec<Observable>,
}

impl OperatorTrajectory {
    /// Wraps an explicit operator sequence; the first element plays `O_0`.
    pub fn from_steps(steps: Vec<Observable>) -> Result<Self> {
        let Some(first) = steps.first() else {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "a trajectory needs at least its initial operator",
            });
        };
        let d = first.dim();
        if let Some(bad) = steps.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { steps })
    }

    /// Number of stored operators, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of evolution steps `n`.
    pub fn n_steps(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.steps[0].dim()
    }

    pub fn steps(&self) -> &[Observable] {
        &self.steps
    }

    pub fn initial(&self) -> &Observable {
        &self.steps[0]
    }

    pub fn get(&self, k: usize) -> Option<&Observable> {
        self.steps.get(k)
    }

    /// The measured operators `O_1 … O_n` (the unevolved `O_0` is not
    /// recorded).
    pub fn measured(&self) -> &[Observable] {
        &self.steps[1..]
    }
}

/// Iterates `O_{k+1} = U^† O_k U`, re-Hermitizing every step.
pub fn operator_trajectory(
    o: &Observable,
    u: &UnitaryMatrix,
    n_steps: usize,
) -> Result<OperatorTrajectory> {
    if o.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: o.dim(),
            found: u.dim(),
        });
    }
    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push(o.clone());
    for k in 0..n_steps {
        let next = steps[k].heisenberg(u);
        steps.push(next);
    }
    Ok(OperatorTrajectory { steps })
}

/// Error unitary `𝒰_n = U'^n (U^n)^†` (ideal forward, true backward).
pub fn error_unitary(pair: &FloquetPair, n: usize) -> UnitaryMatrix {
    let ideal_n = pair.ideal.pow(n);
    let true_n = pair.true_perturbed.pow(n);
    UnitaryMatrix::from_product(ideal_n.matrix() * true_n.matrix().adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn params(j: f64, lambda: f64, delta: f64) -> KickedTopParams {
        KickedTopParams::new(SpinParams::new(j).unwrap(), lambda, DEFAULT_ALPHA, delta).unwrap()
    }

    /// Truncated Taylor series of `exp(-i a X)`.
    fn taylor_expm(x: &CMatrix, a: f64, terms: usize) -> CMatrix {
        let n = x.nrows();
        let gen = x * C64::new(0.0, -a);
        let mut term = CMatrix::identity(n, n);
        let mut acc = term.clone();
        for k in 1..terms {
            term = &term * &gen / C64::new(k as f64, 0.0);
            acc += &term;
        }
        acc
    }

    #[test]
    fn zero_kick_is_pure_rotation() {
        let p = params(2.0, 0.0, 0.0);
        let u = floquet_map(&p, false).unwrap();
        let rot = rotation_factor(p.spin, DEFAULT_ALPHA).unwrap();
        assert!(linalg::max_abs(&(u.matrix() - rot)) < 1e-15);
    }

    #[test]
    fn qubit_kick_is_global_phase() {
        let spin = SpinParams::new(0.5).unwrap();
        let lambda = 2.3;
        let kick = kick_factor(spin, lambda);
        // m² = 1/4 and 2j = 1 for both levels.
        let phase = C64::from_polar(1.0, -lambda / 4.0);
        let expected = CMatrix::identity(2, 2) * phase;
        assert!(linalg::max_abs(&(kick - expected)) < 1e-15);
    }

    #[test]
    fn floquet_map_is_unitary_at_full_scale() {
        let p = params(10.0, 7.0, 0.01);
        assert!(floquet_map(&p, false).unwrap().unitarity_defect() < 1e-10);
        assert!(floquet_map(&p, true).unwrap().unitarity_defect() < 1e-10);
    }

    #[test]
    fn pair_members_match_single_maps() {
        let p = params(3.0, 2.5, 0.01);
        let pair = FloquetPair::new(&p).unwrap();
        let shifted = params(3.0, 2.51, 0.0);
        let direct = floquet_map(&shifted, false).unwrap();
        assert!(linalg::max_abs(&(pair.true_perturbed.matrix() - direct.matrix())) < 1e-12);
        assert_eq!(pair.ideal, floquet_map(&p, false).unwrap());

        let same = FloquetPair::new(&params(3.0, 2.5, 0.0)).unwrap();
        assert!(linalg::max_abs(&(same.ideal.matrix() - same.true_perturbed.matrix())) < 1e-12);
    }

    #[test]
    fn initial_observable_is_rotated_jx() {
        let spin = SpinParams::new(10.0).unwrap();
        let o = initial_observable(spin, 4).unwrap();
        assert!(o.trace().abs() < 1e-10);
        let eig = o.eigenvalues().unwrap();
        for (k, lambda) in eig.iter().enumerate() {
            assert!((lambda - (k as f64 - 10.0)).abs() < 1e-10);
        }
        let jx = angular_momentum_ops(spin).unwrap().x;
        let same = rotated_jx(spin, &UnitaryMatrix::identity(21)).unwrap();
        assert!(linalg::max_abs(&(same.matrix() - jx.matrix())) < 1e-15);
    }

    #[test]
    fn trajectory_shape_and_norm_conservation() {
        let p = params(10.0, 7.0, 0.01);
        let o = initial_observable(p.spin, 1).unwrap();
        let u = floquet_map(&p, true).unwrap();
        let t0 = operator_trajectory(&o, &u, 0).unwrap();
        assert_eq!(t0.len(), 1);
        assert_eq!(t0.initial(), &o);

        let traj = operator_trajectory(&o, &u, 200).unwrap();
        assert_eq!(traj.len(), 201);
        assert_eq!(traj.measured().len(), 200);
        let norm0 = o.hs_norm_sq();
        for ok in traj.steps() {
            assert!((ok.hs_norm_sq() - norm0).abs() / norm0 < 1e-8);
        }
        let spectrum0 = o.eigenvalues().unwrap();
        let spectrum = traj.get(200).unwrap().eigenvalues().unwrap();
        for (a, b) in spectrum0.iter().zip(&spectrum) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn first_step_matches_taylor_oracle() {
        let spin = SpinParams::new(1.0).unwrap();
        let p = KickedTopParams::new(spin, 3.0, 1.4, 0.0).unwrap();
        let ops = angular_momentum_ops(spin).unwrap();
        let jz2 = ops.z.matrix() * ops.z.matrix();
        let kick = taylor_expm(&jz2, 3.0 / (2.0 * spin.j()), 40);
        let rot = taylor_expm(ops.x.matrix(), 1.4, 40);
        let u_oracle = kick * rot;
        let o = initial_observable(spin, 9).unwrap();
        let expected = u_oracle.adjoint() * o.matrix() * &u_oracle;
        let traj = operator_trajectory(&o, &floquet_map(&p, false).unwrap(), 1).unwrap();
        assert!(linalg::max_abs(&(traj.get(1).unwrap().matrix() - expected)) < 1e-9);
    }

    #[test]
    fn evolution_is_reversible() {
        let p = params(10.0, 2.5, 0.01);
        let u = floquet_map(&p, false).unwrap();
        let o = initial_observable(p.spin, 2).unwrap();
        let forward = operator_trajectory(&o, &u, 50).unwrap();
        let back = operator_trajectory(forward.get(50).unwrap(), &u.adjoint(), 50).unwrap();
        assert!(linalg::max_abs(&(back.get(50).unwrap().matrix() - o.matrix())) < 1e-9);
    }

    #[test]
    fn error_unitary_properties() {
        let p = params(10.0, 3.0, 0.01);
        let pair = FloquetPair::new(&p).unwrap();
        let identity = CMatrix::identity(21, 21);
        assert_eq!(error_unitary(&pair, 0).matrix(), &identity);
        let bound = 2.0 * libm::sqrt(21.0);
        for n in [1, 5, 20, 60] {
            let e = error_unitary(&pair, n);
            assert!(e.unitarity_defect() < 1e-10);
            let dist = (e.matrix() - &identity).norm();
            assert!(dist > 0.0 && dist <= bound, "n = {n}: {dist}");
        }
        let same = FloquetPair::new(&params(10.0, 3.0, 0.0)).unwrap();
        for n in [1, 10, 40] {
            assert!(linalg::max_abs(&(error_unitary(&same, n).matrix() - &identity)) < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let o = Observable::identity(3);
        let u = UnitaryMatrix::identity(4);
        assert!(operator_trajectory(&o, &u, 2).is_err());
        assert!(OperatorTrajectory::from_steps(Vec::new()).is_err());
    }
}
