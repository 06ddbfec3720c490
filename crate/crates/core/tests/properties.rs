use kicktomo_core::metrics::{regularize, relative_entropy, DEFAULT_ENTROPY_FLOOR};
use kicktomo_core::spin::{
    from_bloch, haar_random_state, hermitian_basis, to_bloch, BlochVector, Observable, SpinParams,
};
use kicktomo_core::tomography::{covariance, fidelity, DesignMatrix, PsdProjector};
use kicktomo_core::{CMatrix, DMatrix, C64};
use proptest::prelude::*;

fn spin(twice_j: u32) -> SpinParams {
    SpinParams::from_twice_j(twice_j).unwrap()
}

fn hermitian(d: usize, entries: &[f64]) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |i, j| {
        C64::new(
            entries[(i * d + j) % entries.len()],
            entries[(j * d + i + 7) % entries.len()],
        )
    });
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn quadratic(w: &DMatrix<f64>, r: &[f64], target: &[f64]) -> f64 {
    let e = DMatrix::from_fn(r.len(), 1, |i, _| r[i] - target[i]);
    (e.transpose() * w * &e)[(0, 0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bloch_coordinates_round_trip(
        twice_j in 1u32..6,
        entries in prop::collection::vec(-1.0f64..1.0, 49),
    ) {
        let p = spin(twice_j);
        let basis = hermitian_basis(p);
        let d = p.dim();
        let mut m = hermitian(d, &entries);
        let shift = (m.trace().re - 1.0) / d as f64;
        for i in 0..d {
            m[(i, i)] -= C64::new(shift, 0.0);
        }
        let rho = Observable::new(m.clone()).unwrap();
        let back = from_bloch(&to_bloch(&rho, &basis).unwrap(), &basis).unwrap();
        prop_assert!((back.matrix() - m).norm() < 1e-12);
    }

    #[test]
    fn covariance_is_a_pseudoinverse(
        rows in 1usize..12,
        cols in 1usize..15,
        rank in 1usize..6,
        entries in prop::collection::vec(-1.0f64..1.0, 200),
    ) {
        let rank = rank.min(rows).min(cols);
        let left = DMatrix::from_fn(rows, rank, |i, k| entries[(i * 7 + k * 3) % 200]);
        let right = DMatrix::from_fn(rank, cols, |k, j| entries[(k * 11 + j * 5 + 100) % 200]);
        let a = left * right;
        let cov = covariance(&DesignMatrix::from_matrix(a.clone()), 1e-10).unwrap();
        let c = cov.entries();
        let g = a.transpose() * &a;
        let scale = 1.0 + g.amax();
        prop_assert!((&g * &c * &g - &g).amax() < 1e-8 * scale * scale);
        prop_assert!((&c * &g * &c - &c).amax() < 1e-8 * (1.0 + c.amax()));
        prop_assert!((&c - c.transpose()).amax() < 1e-8 * (1.0 + c.amax()));
    }

    #[test]
    fn relative_entropy_is_nonnegative(
        twice_j in 1u32..6,
        a in prop::collection::vec(-1.0f64..1.0, 49),
        b in prop::collection::vec(-1.0f64..1.0, 49),
    ) {
        let d = spin(twice_j).dim();
        let ra = regularize(&Observable::new(hermitian(d, &a)).unwrap());
        let rb = regularize(&Observable::new(hermitian(d, &b)).unwrap());
        if let (Ok(ra), Ok(rb)) = (ra, rb) {
            let value = relative_entropy(&ra, &rb, DEFAULT_ENTROPY_FLOOR).unwrap();
            prop_assert!(value >= -1e-12, "{value}");
            let own = relative_entropy(&ra, &ra, DEFAULT_ENTROPY_FLOOR).unwrap();
            prop_assert!(own.abs() < 1e-9);
        }
    }

    #[test]
    fn projection_is_physical_and_beats_the_mixed_state(
        twice_j in 1u32..5,
        target in prop::collection::vec(-1.5f64..1.5, 24),
        weight in prop::collection::vec(-1.0f64..1.0, 600),
    ) {
        let p = spin(twice_j);
        let basis = hermitian_basis(p);
        let n = basis.len();
        let target = &target[..n];
        let a = DMatrix::from_fn(n, n, |i, j| weight[(i * n + j) % 600]);
        let w = a.transpose() * &a;
        let est = PsdProjector::default()
            .project(&BlochVector::from_vec(target.to_vec()), &w, &basis, None)
            .unwrap();
        let eigenvalues = est.rho_bar.eigenvalues().unwrap();
        prop_assert!(eigenvalues.iter().all(|&x| x > -1e-12));
        prop_assert!((est.rho_bar.trace() - 1.0).abs() < 1e-12);
        let mixed = quadratic(&w, &vec![0.0; n], target);
        prop_assert!(est.objective <= mixed * (1.0 + 1e-9) + 1e-12);
        prop_assert!((quadratic(&w, est.r_bar.as_slice(), target) - est.objective).abs()
            <= 1e-9 * (1.0 + mixed));
    }

    #[test]
    fn fidelity_lies_in_the_unit_interval(twice_j in 1u32..8, s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = spin(twice_j);
        let psi = haar_random_state(p, s1);
        let phi = haar_random_state(p, s2);
        let f = fidelity(&psi, &phi.density());
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((fidelity(&psi, &psi.density()) - 1.0).abs() < 1e-12);
    }
}
