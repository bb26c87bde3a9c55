//! Seed plumbing: one command-level seed, child streams split by label.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type WorkbenchRng = ChaCha8Rng;

/// Generator for the stream `label` under `seed`. Distinct labels give
/// independent streams, so adding a consumer never perturbs another.
pub fn stream(seed: u64, label: &str) -> WorkbenchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label_hash(label));
    rng
}

// FNV-1a; stable across platforms and releases.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
