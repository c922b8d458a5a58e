//! Deterministic random streams.
//!
//! Every stochastic routine takes its generator explicitly. Replication `r` of
//! an experiment seeded with `master` draws from ChaCha8 stream `r` under that
//! seed, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream for replication `index` under `master_seed`.
pub fn replication_stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
