// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams, Haar-random unitaries and uniform Pauli strings.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};
use crate::pauli::{Pauli, PauliString};

/// A deterministic random stream addressed by `(seed, index)`.
///
/// The same pair always yields the same sequence. Streams are never shared
/// between tasks; parallel code derives one stream per unit of work.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Rewinds to the start of the stream.
    pub fn reset(&mut self) {
        *self = Self::new(self.seed, self.index);
    }

    /// An independent child stream. Children of distinct parents, or distinct
    /// children of one parent, never coincide.
    pub fn substream(&self, child: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(self.index)), child)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard complex Gaussian, `E|z|² = 1`.
fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random element of `U(dim)`.
///
/// QR-decomposes a complex Ginibre matrix and rescales column `k` of `Q` by
/// `R_kk/|R_kk|`, which makes the decomposition unique and the result
/// exactly Haar distributed.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(dim >= 1);
    let ginibre = nalgebra::DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        let phase = if norm > 0.0 { rkk / norm } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    ComplexMatrix::from_inner(q)
}

/// Uniform unsigned Pauli string on `n` qubits, optionally excluding the
/// all-identity string.
pub fn sample_pauli(n: usize, exclude_identity: bool, rng: &mut impl Rng) -> PauliString {
    assert!(n >= 1);
    loop {
        let letters: Vec<Pauli> = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
        let p = PauliString::new(letters).expect("n >= 1");
        if !(exclude_identity && p.is_identity()) {
            return p;
        }
    }
}
