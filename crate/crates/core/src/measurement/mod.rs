//! Seeded simulation of homodyne, heterodyne and parity measurements.
//!
//! Shots are generated in blocks of [`BLOCK_SHOTS`]; block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so records are identical
//! regardless of thread count or scheduling.

mod heterodyne;
mod homodyne;
mod parity;
mod record;

pub use heterodyne::{heterodyne_sample, heterodyne_sample_with};
pub(crate) use heterodyne::heterodyne_map;
pub use homodyne::{homodyne_sample, homodyne_sample_with};
pub(crate) use homodyne::homodyne_map;
pub use parity::{parity_sample, parity_sample_with};
pub(crate) use parity::parity_map;
pub use record::{histogram, MeasurementKind, MeasurementRecord, Outcomes};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::Result;

/// Shots per RNG stream.
pub const BLOCK_SHOTS: usize = 4096;

pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Runs `fill(rng, count, out)` once per block in parallel, reduces each block
/// with `map(first_shot, outcomes)` and returns the reductions in block order.
pub(crate) fn run_blocks<T, A, F, M>(shots: usize, seed: u64, fill: F, map: M) -> Result<Vec<A>>
where
    T: Send,
    A: Send,
    F: Fn(&mut ChaCha8Rng, usize, &mut Vec<T>) -> Result<()> + Sync,
    M: Fn(usize, Vec<T>) -> Result<A> + Sync,
{
    let blocks = shots.div_ceil(BLOCK_SHOTS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SHOTS.min(shots - b * BLOCK_SHOTS);
            let mut rng = block_rng(seed, b);
            let mut out = Vec::new();
            fill(&mut rng, count, &mut out)?;
            map(b * BLOCK_SHOTS, out)
        })
        .collect()
}

fn concat<T>(parts: Vec<Vec<T>>) -> Vec<T> {
    parts.into_iter().flatten().collect()
}

/// Index `g` with `cdf[g-1] ≤ u·total < cdf[g]` for a cumulative weight table.
pub(crate) fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

pub(crate) fn cumulative(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .into_iter()
        .map(|w| {
            acc += w.max(0.0);
            acc
        })
        .collect()
}
