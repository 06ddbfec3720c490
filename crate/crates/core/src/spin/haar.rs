use nalgebra::{DVector, QR};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::spin::{PureState, SpinParams, UnitaryMatrix};
use crate::{CMatrix, C64};

/// Generator behind every seeded sampler in the crate.
pub type SimRng = ChaCha12Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn haar_random_state(p: SpinParams, seed: u64) -> PureState {
    haar_random_state_with(p.dim(), &mut seeded_rng(seed))
}

pub fn haar_random_state_with<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if let Ok(psi) = PureState::new(v) {
            return psi;
        }
    }
}

/// Haar-random unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary(p: SpinParams, seed: u64) -> UnitaryMatrix {
    haar_random_unitary_with(p.dim(), &mut seeded_rng(seed))
}

pub fn haar_random_unitary_with<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let z = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = QR::new(z);
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let diag = r[(k, k)];
        let norm = diag.norm();
        let phase = if norm > 0.0 {
            diag / norm
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    UnitaryMatrix::from_product(q)
}
