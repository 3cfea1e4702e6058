//! Counter-keyed random streams: every (seed, cell, trial) triple maps to its
//! own generator, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, cell: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let words = [
        splitmix(seed),
        splitmix(seed ^ splitmix(cell.wrapping_add(1))),
        splitmix(cell ^ splitmix(trial.wrapping_add(0x51))),
        splitmix(trial.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ seed),
    ];
    for (i, w) in words.iter().enumerate() {
        key[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
