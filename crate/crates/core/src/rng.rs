//! Counter-based random streams.
//!
//! A stream is addressed by (master seed, experiment, trial). ChaCha keys on
//! the first two and uses the trial as its stream id, so the output of trial t
//! never depends on which worker ran it or on how many trials ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(master_seed: u64, experiment: u64, trial: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&experiment.to_le_bytes());
    key[16..24].copy_from_slice(b"ffuniv01");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
