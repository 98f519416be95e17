use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Generator used throughout the simulation harness.
pub type SimRng = ChaCha20Rng;

/// ChaCha20 keyed by `seed` (expanded with `seed_from_u64`) on stream
/// `stream_id`. ChaCha is counter based, so every `(seed, stream_id)` pair
/// yields the same sequence on every platform and thread layout.
pub fn rng_stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for one draw of one replication. Attempts count resamples after
/// disconnected graphs.
pub fn replication_stream(pair_index: usize, replication: usize, attempt: usize) -> u64 {
    ((pair_index as u64) << 48) | ((attempt as u64 & 0xFFFF) << 32) | (replication as u64 & 0xFFFF_FFFF)
}
