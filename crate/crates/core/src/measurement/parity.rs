use rand::Rng;

use super::{concat, cumulative, inverse_cdf, run_blocks, MeasurementKind, MeasurementRecord, Outcomes};
use crate::fock::{unflatten, StateRef};
use crate::states::TruncationGuard;
use crate::Result;

/// Photon-number parity of every mode, `±1` per mode and shot.
pub fn parity_sample<'a>(state: impl Into<StateRef<'a>>, shots: usize, seed: u64) -> Result<MeasurementRecord> {
    parity_sample_with(state, shots, seed, TruncationGuard::default())
}

pub fn parity_sample_with<'a>(
    state: impl Into<StateRef<'a>>,
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
) -> Result<MeasurementRecord> {
    let state = state.into();
    let values = concat(parity_map(state, shots, seed, guard, |_, v| Ok(v))?);
    Ok(MeasurementRecord {
        kind: MeasurementKind::Parity,
        settings: None,
        n_modes: state.n_modes(),
        shots,
        seed,
        outcomes: Outcomes::Parity(values),
    })
}

/// Block-wise parity sampling; `map` sees each block's row-major `±1` outcomes.
pub(crate) fn parity_map<A: Send>(
    state: StateRef<'_>,
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
    map: impl Fn(usize, Vec<i8>) -> Result<A> + Sync,
) -> Result<Vec<A>> {
    state.check_truncation(guard.limit, guard.allow_override)?;
    let (cutoff, n_modes) = (state.cutoff(), state.n_modes());
    // pattern bit k set ⇔ mode k odd
    let mut probs = vec![0.0; 1 << n_modes];
    let mut levels = vec![0usize; n_modes];
    for i in 0..state.dim() {
        let p = match state {
            StateRef::Pure(v) => v.amplitudes()[i].norm_sqr(),
            StateRef::Mixed(r) => r.matrix()[(i, i)].re,
        };
        unflatten(i, cutoff, n_modes, &mut levels);
        let pattern = levels.iter().enumerate().fold(0usize, |acc, (k, &n)| acc | ((n & 1) << k));
        probs[pattern] += p;
    }
    let cdf = cumulative(probs);
    run_blocks(
        shots,
        seed,
        |rng, count, out| {
            out.reserve(count * n_modes);
            for _ in 0..count {
                let pattern = inverse_cdf(&cdf, rng.random());
                out.extend((0..n_modes).map(|k| if pattern >> k & 1 == 1 { -1i8 } else { 1 }));
            }
            Ok(())
        },
        map,
    )
}
