//! Deterministic random streams.
//!
//! Every parallel unit of work (one simulation, one RR set) draws from its own
//! ChaCha8 stream selected by its global index, so results do not depend on
//! how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The independent stream `index` under master `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a value into a fresh seed; used to derive per-purpose seeds from a
/// single configured seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Stateless uniform in `[0, 1)` keyed by `(seed, simulation, edge)`.
///
/// Two simulations with the same key see the same coin for every edge, which
/// couples runs over different seed sets.
#[inline]
pub fn keyed_uniform(seed: u64, simulation: u64, edge: u64) -> f64 {
    let h = splitmix64(
        seed ^ splitmix64(simulation ^ splitmix64(edge.wrapping_mul(0x9e37_79b9_7f4a_7c15))),
    );
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
