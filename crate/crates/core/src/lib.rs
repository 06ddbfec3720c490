//! Numerical core for continuous weak-measurement tomography of a spin-j
//! system driven by the quantum kicked top.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! - [`spin`]: spin-j operators, the generalized Gell-Mann basis, Bloch
//!   coordinates, Haar sampling and Hermitian/unitary matrix functions.
//! - [`kicked_top`]: ideal and perturbed Floquet maps, Heisenberg-picture
//!   operator trajectories and the error unitary.
//! - [`tomography`]: noisy measurement records, least-squares estimation with
//!   a pseudoinverse covariance, projection onto physical states and
//!   reconstruction fidelity.
//! - [`metrics`]: operator Loschmidt echo, relative entropy of regularized
//!   operators and the operator incompatibility (error OTOC).
//! - [`bloch_analysis`]: the zero-noise ordered-measurement fidelity curves.
//!
//! Enable the `std` feature to link the standard library, and `parallel` to
//! spread ensemble reconstructions over a rayon pool.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bloch_analysis;
pub mod error;
pub mod kicked_top;
pub(crate) mod linalg;
pub mod metrics;
pub mod seed;
pub mod series;
pub mod spin;
pub mod tomography;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
