//! Counter-based seed derivation: every random stream is a pure function
//! of (master seed, stream id, counter), so trial-level parallelism cannot
//! change any result.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub mod streams {
    pub const CIR: u64 = 1;
    pub const VELOCITY: u64 = 2;
    pub const PAYLOAD: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const PREAMBLE: u64 = 5;
    pub const PILOTS: u64 = 6;
    pub const INTERLEAVER: u64 = 7;
    pub const RADAR_PAYLOAD: u64 = 8;
    pub const PAPR_PAYLOAD: u64 = 9;
}

/// RNG for `(master, stream, counter)`.
pub fn stream_rng(master: u64, stream: u64, counter: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&counter.to_le_bytes());
    seed[24..32].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}

/// Plain u64 sub-seed for APIs that take one.
pub fn stream_seed(master: u64, stream: u64, counter: u64) -> u64 {
    // splitmix64 over the mixed triple.
    let mut x = master
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.rotate_left(17))
        .wrapping_add(counter.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}
