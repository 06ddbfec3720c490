//! Deterministic sub-seed derivation.
//!
//! Every random draw in an experiment comes from a stream keyed by the master
//! seed, a purpose tag and an index, so adding members to an ensemble never
//! changes the draws of existing members.

/// Purpose tag of a derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Rotation producing the shared initial observable.
    Observable,
    /// Initial state of ensemble member `index`.
    State,
    /// Measurement noise of ensemble member `index`.
    Noise,
    /// Random unitary for basis perturbations.
    PerturbingUnitary,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Observable => 0x6f62_7365_7276_6162,
            Stream::State => 0x7374_6174_6573_0001,
            Stream::Noise => 0x6e6f_6973_6500_0002,
            Stream::PerturbingUnitary => 0x756e_6974_6172_7903,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream` under `master`.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ stream.tag()).wrapping_add(splitmix64(index)))
}
