//! Seed derivation and positioned random streams.
//!
//! Every random quantity in the crate is a pure function of a master seed and
//! an index (cell, replicate, resolution). Streams are ChaCha8 keyed by the
//! seed and positioned by word offset, so a chunk of cells can be generated
//! by any worker without changing the output.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32-bit words consumed per noise cell (two 64-bit uniforms).
pub(crate) const WORDS_PER_CELL: u128 = 4;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and an ordered list of indices.
///
/// Order-sensitive and independent of evaluation order, so the seed of the
/// replicate `(N, r)` is the same whether it runs first or last.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p.wrapping_add(GOLDEN))))
}

/// Map 64 random bits to a uniform on the open interval (0, 1).
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// A ChaCha8 stream keyed by `seed` and positioned at the first word of
/// absolute cell `cell`.
pub(crate) fn cell_stream(seed: u64, cell: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = (cell as i128 + (1i128 << 62)) as u128;
    rng.set_word_pos(offset * WORDS_PER_CELL);
    rng
}

/// Two open uniforms for one cell, drawn from a positioned stream.
#[inline]
pub(crate) fn next_pair<R: RngCore>(rng: &mut R) -> (f64, f64) {
    let a = rng.next_u64();
    let b = rng.next_u64();
    (open_unit(a), open_unit(b))
}

/// Seeded generator for replicate-level randomness outside noise grids.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
