//! Homodyne sampling on the quadrature grid.
//!
//! Mode 0 is drawn by inverse CDF from its exact marginal. Each later mode is
//! drawn from its conditional density given the earlier outcomes by discrete
//! rejection against the kernel `K(x) = Σₙ |φₙ(x)|²`: for any conditional
//! amplitude tensor `T`, `Σ_r |Σₙ φₙ(x) T[n,r]|² ≤ ‖T‖² K(x)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{concat, cumulative, inverse_cdf, run_blocks, MeasurementKind, MeasurementRecord, Outcomes};
use crate::error::invalid;
use crate::fock::pdf::{pure_marginal, rotated_table};
use crate::fock::{GridSpec, StateRef, C64};
use crate::states::TruncationGuard;
use crate::{Error, Result};

const MAX_TRIALS: usize = 1_000_000;

struct Member {
    amps: Vec<C64>,
    first_cdf: Vec<f64>,
}

struct Sampler {
    cutoff: usize,
    n_modes: usize,
    points: Vec<f64>,
    tables: Vec<Vec<C64>>,
    kernel: Vec<f64>,
    kernel_cdf: Vec<f64>,
    members: Vec<Member>,
    member_cdf: Vec<f64>,
}

impl Sampler {
    fn new(state: StateRef<'_>, angles: &[f64]) -> Result<Self> {
        let cutoff = state.cutoff();
        let n_modes = state.n_modes();
        let points = GridSpec::for_cutoff(cutoff).points();
        let g = points.len();
        let tables: Vec<Vec<C64>> = angles.iter().map(|&t| rotated_table(&points, cutoff, t)).collect();
        let kernel: Vec<f64> = (0..g)
            .map(|i| tables[0][i * cutoff..(i + 1) * cutoff].iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let kernel_cdf = cumulative(kernel.iter().cloned());
        let ensemble = state.ensemble()?;
        let member_cdf = cumulative(ensemble.iter().map(|(p, _)| *p));
        let members = ensemble
            .into_iter()
            .map(|(_, v)| {
                let amps = v.into_amplitudes();
                let density = pure_marginal(&amps, cutoff, n_modes, 0, &tables[0], g);
                Member {
                    first_cdf: cumulative(density),
                    amps,
                }
            })
            .collect();
        Ok(Self {
            cutoff,
            n_modes,
            points,
            tables,
            kernel,
            kernel_cdf,
            members,
            member_cdf,
        })
    }

    fn row(&self, mode: usize, g: usize) -> &[C64] {
        &self.tables[mode][g * self.cutoff..(g + 1) * self.cutoff]
    }

    /// `v[r] = Σₙ row[n]·t[n·rest + r]`.
    fn contract(&self, row: &[C64], t: &[C64]) -> Vec<C64> {
        let rest = t.len() / self.cutoff;
        let mut v = vec![C64::new(0.0, 0.0); rest];
        for (n, &a) in row.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (vr, &tr) in v.iter_mut().zip(&t[n * rest..(n + 1) * rest]) {
                *vr += a * tr;
            }
        }
        v
    }

    fn shot(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) -> Result<()> {
        let member = if self.members.len() == 1 {
            &self.members[0]
        } else {
            &self.members[inverse_cdf(&self.member_cdf, rng.random())]
        };
        let g0 = inverse_cdf(&member.first_cdf, rng.random());
        out.push(self.points[g0]);
        if self.n_modes == 1 {
            return Ok(());
        }
        let mut t = self.contract(self.row(0, g0), &member.amps);
        for mode in 1..self.n_modes {
            let norm2: f64 = t.iter().map(|a| a.norm_sqr()).sum();
            let mut accepted = false;
            for _ in 0..MAX_TRIALS {
                let g = inverse_cdf(&self.kernel_cdf, rng.random());
                let u: f64 = rng.random();
                let v = self.contract(self.row(mode, g), &t);
                let w: f64 = v.iter().map(|a| a.norm_sqr()).sum();
                if u * norm2 * self.kernel[g] <= w {
                    out.push(self.points[g]);
                    t = v;
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(Error::NumericsFailure(format!(
                    "conditional homodyne sampling on mode {mode} did not accept within {MAX_TRIALS} trials"
                )));
            }
        }
        Ok(())
    }
}

/// Samples `x_θ` on every mode, `angles[k]` on mode `k`.
pub fn homodyne_sample<'a>(
    state: impl Into<StateRef<'a>>,
    angles: &[f64],
    shots: usize,
    seed: u64,
) -> Result<MeasurementRecord> {
    homodyne_sample_with(state, angles, shots, seed, TruncationGuard::default())
}

pub fn homodyne_sample_with<'a>(
    state: impl Into<StateRef<'a>>,
    angles: &[f64],
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
) -> Result<MeasurementRecord> {
    let state = state.into();
    let values = concat(homodyne_map(state, angles, shots, seed, guard, |_, v| Ok(v))?);
    Ok(MeasurementRecord {
        kind: MeasurementKind::Homodyne,
        settings: Some(angles.to_vec()),
        n_modes: state.n_modes(),
        shots,
        seed,
        outcomes: Outcomes::Real(values),
    })
}

/// Block-wise homodyne sampling; `map` sees each block's row-major outcomes.
pub(crate) fn homodyne_map<A: Send>(
    state: StateRef<'_>,
    angles: &[f64],
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
    map: impl Fn(usize, Vec<f64>) -> Result<A> + Sync,
) -> Result<Vec<A>> {
    if angles.len() != state.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: state.n_modes(),
            found: angles.len(),
        });
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(invalid("angles", "must be finite"));
    }
    state.check_truncation(guard.limit, guard.allow_override)?;
    let sampler = Sampler::new(state, angles)?;
    run_blocks(
        shots,
        seed,
        |rng, count, out| {
            out.reserve(count * sampler.n_modes);
            for _ in 0..count {
                sampler.shot(rng, out)?;
            }
            Ok(())
        },
        map,
    )
}
