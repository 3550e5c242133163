//! Co-presence feature pipeline: turn per-device location and WiFi logs
//! into pairwise co-location features on a shared 10-minute timeline, then
//! evaluate how well those features recover self-reported social ties under
//! leakage-aware cross-validation.
//!
//! The crate is organised as a pipeline. Each stage reads and writes plain
//! files so stages can be rerun or inspected independently:
//!
//! 1. [`ingest`]: parse raw CSV logs onto per-device bin grids.
//! 2. [`thresholds`]: derive distance thresholds from the pooled pairwise
//!    distance distribution (weighted 1-D clustering) or take a static set.
//! 3. [`dyads`]: build per-pair binary co-location series.
//! 4. [`features`]: aggregate series into a fixed-width feature matrix.
//! 5. [`networks`]: survey tie networks and label tables.
//! 6. [`eval`]: fold assignment schemas and classification metrics.
//! 7. [`learn`]: trees, random forest, boosting, correlation-based feature
//!    selection.
//! 8. [`synth`]: synthetic cohort generator for end-to-end validation.
//! 9. [`pipeline`] and [`report`]: stage orchestration with a content-hash
//!    manifest, and report rendering (CSV tables, SVG charts).

pub mod config;
pub mod dyads;
pub mod error;
pub mod eval;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod learn;
pub mod networks;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod thresholds;
pub mod timeframe;

pub use config::StudyConfig;
pub use error::{Error, Result};

/// Independent deterministic RNG stream for a named sub-task of a run.
/// Streams for different names never collide, and adding parallelism or
/// reordering work cannot change what any stream yields.
pub fn substream(seed: u64, name: &str) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::from_seed(stream_key(seed, name))
}

/// A derived u64 seed for components that take a seed rather than an RNG
/// (e.g. per-fold model training). Same isolation guarantees as
/// [`substream`].
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let key = stream_key(seed, name);
    u64::from_le_bytes(key[..8].try_into().expect("8 bytes"))
}

fn stream_key(seed: u64, name: &str) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    key
}
