// SPDX-License-Identifier: Apache-2.0

//! Seeded random sources.
//!
//! Every simulated unit owns its own ChaCha8 stream. The key comes from the
//! master seed; the 64-bit ChaCha stream id comes from [`substream_id`], so
//! two units never share keystream and results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for a path of indices, e.g. `[sample, unit]`.
pub fn substream_id(path: &[u64]) -> u64 {
    path.iter()
        .fold(0x5851_f42d_4c95_7f2d, |acc, &i| mix64(acc ^ mix64(i)))
}

/// Random stream for the unit addressed by `path` under `seed`.
pub fn substream(seed: u64, path: &[u64]) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream_id(path));
    rng
}
