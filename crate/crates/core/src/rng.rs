//! Deterministic random streams.
//!
//! Each independent unit of work (a sweep point, a CHSH setting pair, an
//! oracle comparison configuration) owns its own ChaCha stream, selected by
//! `(master seed, stream index)`. Results therefore do not depend on how the
//! units are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
