//! Heterodyne sampling from the Husimi function `Q(α) = ⟨α|ρ|α⟩/π`.
//!
//! Each mode is drawn by rejection from a Gaussian proposal centred on the
//! (conditional) mean of `Q`, its covariance inflated threefold. Later modes are
//! conditioned on earlier outcomes by projecting onto `⟨α|`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{concat, cumulative, inverse_cdf, run_blocks, MeasurementKind, MeasurementRecord, Outcomes};
use crate::fock::{StateRef, C64};
use crate::states::TruncationGuard;
use crate::{Error, Result};

const INFLATION: f64 = 3.0;
const ENVELOPE_MARGIN: f64 = 1.5;
const MIN_ACCEPTANCE: f64 = 0.01;
const ENVELOPE_GRID: usize = 61;
const ENVELOPE_REACH: f64 = 4.5;

/// Gaussian proposal over `(Re α, Im α)` with its rejection envelope.
#[derive(Clone, Debug)]
struct Proposal {
    mean: [f64; 2],
    /// Lower Cholesky factor of the covariance.
    chol: [[f64; 2]; 2],
    log_norm: f64,
    inv: [[f64; 2]; 2],
    envelope: f64,
}

impl Proposal {
    fn log_density(&self, z: [f64; 2]) -> f64 {
        let d = [z[0] - self.mean[0], z[1] - self.mean[1]];
        let q = d[0] * (self.inv[0][0] * d[0] + self.inv[0][1] * d[1]) + d[1] * (self.inv[1][0] * d[0] + self.inv[1][1] * d[1]);
        self.log_norm - 0.5 * q
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let e0: f64 = rng.sample(StandardNormal);
        let e1: f64 = rng.sample(StandardNormal);
        [
            self.mean[0] + self.chol[0][0] * e0,
            self.mean[1] + self.chol[1][0] * e0 + self.chol[1][1] * e1,
        ]
    }
}

struct Conditional<'a> {
    t: &'a [C64],
    cutoff: usize,
    norm2: f64,
}

impl Conditional<'_> {
    fn rest(&self) -> usize {
        self.t.len() / self.cutoff
    }

    /// `v[r] = ⟨α| t[·, r]` with `⟨α|n⟩ = e^{−|α|²/2} α*ⁿ/√n!`.
    fn project(&self, alpha: C64) -> Vec<C64> {
        let rest = self.rest();
        let mut v = vec![C64::new(0.0, 0.0); rest];
        let mut coh = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        let ac = alpha.conj();
        for n in 0..self.cutoff {
            if n > 0 {
                coh *= ac / (n as f64).sqrt();
            }
            for (vr, &tr) in v.iter_mut().zip(&self.t[n * rest..(n + 1) * rest]) {
                *vr += coh * tr;
            }
        }
        v
    }

    fn q(&self, alpha: C64) -> (f64, Vec<C64>) {
        let v = self.project(alpha);
        let w: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        (w / (PI * self.norm2), v)
    }

    fn proposal(&self) -> Result<Proposal> {
        let rest = self.rest();
        let at = |n: usize, r: usize| self.t[n * rest + r];
        let mut a1 = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        let mut num = 0.0;
        for n in 0..self.cutoff {
            for r in 0..rest {
                num += n as f64 * at(n, r).norm_sqr();
                if n >= 1 {
                    a1 += at(n - 1, r).conj() * at(n, r) * (n as f64).sqrt();
                }
                if n >= 2 {
                    a2 += at(n - 2, r).conj() * at(n, r) * ((n * (n - 1)) as f64).sqrt();
                }
            }
        }
        let (a1, a2, mod2) = (a1 / self.norm2, a2 / self.norm2, num / self.norm2 + 1.0);
        let sxx = (a2.re + mod2) / 2.0 - a1.re * a1.re;
        let syy = (mod2 - a2.re) / 2.0 - a1.im * a1.im;
        let sxy = a2.im / 2.0 - a1.re * a1.im;
        let (cxx, cyy, cxy) = (INFLATION * sxx, INFLATION * syy, INFLATION * sxy);
        let det = cxx * cyy - cxy * cxy;
        if !(cxx > 0.0 && det > 0.0) {
            return Err(Error::ProposalFailure(format!(
                "degenerate proposal covariance [[{cxx}, {cxy}], [{cxy}, {cyy}]]"
            )));
        }
        let l00 = cxx.sqrt();
        let l10 = cxy / l00;
        let l11 = (cyy - l10 * l10).sqrt();
        let mut p = Proposal {
            mean: [a1.re, a1.im],
            chol: [[l00, 0.0], [l10, l11]],
            log_norm: -(2.0 * PI * det.sqrt()).ln(),
            inv: [[cyy / det, -cxy / det], [-cxy / det, cxx / det]],
            envelope: 0.0,
        };
        let (hx, hy) = (ENVELOPE_REACH * cxx.sqrt(), ENVELOPE_REACH * cyy.sqrt());
        let mut best = 0.0f64;
        for i in 0..ENVELOPE_GRID {
            for j in 0..ENVELOPE_GRID {
                let fx = 2.0 * i as f64 / (ENVELOPE_GRID - 1) as f64 - 1.0;
                let fy = 2.0 * j as f64 / (ENVELOPE_GRID - 1) as f64 - 1.0;
                let z = [p.mean[0] + fx * hx, p.mean[1] + fy * hy];
                let (q, _) = self.q(C64::new(z[0], z[1]));
                best = best.max(q / p.log_density(z).exp());
            }
        }
        p.envelope = ENVELOPE_MARGIN * best;
        if 1.0 / p.envelope < MIN_ACCEPTANCE {
            return Err(Error::ProposalFailure(format!(
                "expected acceptance {:.2e} below floor {MIN_ACCEPTANCE} (mean {:?}, cov [[{cxx:.3}, {cxy:.3}], [{cxy:.3}, {cyy:.3}]])",
                1.0 / p.envelope,
                p.mean
            )));
        }
        Ok(p)
    }

    /// One accepted draw and the projected remainder.
    fn draw(&self, proposal: &Proposal, rng: &mut ChaCha8Rng) -> Result<(C64, Vec<C64>)> {
        let max_trials = (100.0 * proposal.envelope).ceil() as usize + 1000;
        for _ in 0..max_trials {
            let z = proposal.draw(rng);
            let u: f64 = rng.random();
            let alpha = C64::new(z[0], z[1]);
            let (q, v) = self.q(alpha);
            let ratio = q / proposal.log_density(z).exp();
            if ratio > proposal.envelope {
                return Err(Error::ProposalFailure(format!(
                    "Q/g = {ratio:.4} exceeds the envelope {:.4} at α = {alpha}",
                    proposal.envelope
                )));
            }
            if u * proposal.envelope <= ratio {
                return Ok((alpha, v));
            }
        }
        Err(Error::ProposalFailure(format!(
            "no acceptance in {max_trials} trials (envelope {:.3})",
            proposal.envelope
        )))
    }
}

struct Member {
    amps: Vec<C64>,
    first: Proposal,
}

pub fn heterodyne_sample<'a>(state: impl Into<StateRef<'a>>, shots: usize, seed: u64) -> Result<MeasurementRecord> {
    heterodyne_sample_with(state, shots, seed, TruncationGuard::default())
}

pub fn heterodyne_sample_with<'a>(
    state: impl Into<StateRef<'a>>,
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
) -> Result<MeasurementRecord> {
    let state = state.into();
    let values = concat(heterodyne_map(state, shots, seed, guard, |_, v| Ok(v))?);
    Ok(MeasurementRecord {
        kind: MeasurementKind::Heterodyne,
        settings: None,
        n_modes: state.n_modes(),
        shots,
        seed,
        outcomes: Outcomes::Complex(values),
    })
}

/// Block-wise heterodyne sampling; `map` sees each block's row-major outcomes.
pub(crate) fn heterodyne_map<A: Send>(
    state: StateRef<'_>,
    shots: usize,
    seed: u64,
    guard: TruncationGuard,
    map: impl Fn(usize, Vec<C64>) -> Result<A> + Sync,
) -> Result<Vec<A>> {
    state.check_truncation(guard.limit, guard.allow_override)?;
    let (cutoff, n_modes) = (state.cutoff(), state.n_modes());
    let ensemble = state.ensemble()?;
    let member_cdf = cumulative(ensemble.iter().map(|(p, _)| *p));
    let members: Vec<Member> = ensemble
        .into_iter()
        .map(|(_, v)| {
            let amps = v.into_amplitudes();
            let first = Conditional {
                t: &amps,
                cutoff,
                norm2: 1.0,
            }
            .proposal()?;
            Ok(Member { amps, first })
        })
        .collect::<Result<_>>()?;
    run_blocks(
        shots,
        seed,
        |rng, count, out| {
            out.reserve(count * n_modes);
            for _ in 0..count {
                let m = if members.len() == 1 {
                    &members[0]
                } else {
                    &members[inverse_cdf(&member_cdf, rng.random())]
                };
                let first = Conditional {
                    t: &m.amps,
                    cutoff,
                    norm2: 1.0,
                };
                let (alpha, mut t) = first.draw(&m.first, rng)?;
                out.push(alpha);
                for _ in 1..n_modes {
                    let norm2: f64 = t.iter().map(|a| a.norm_sqr()).sum();
                    let cond = Conditional { t: &t, cutoff, norm2 };
                    let p = cond.proposal()?;
                    let (alpha, next) = cond.draw(&p, rng)?;
                    out.push(alpha);
                    t = next;
                }
            }
            Ok(())
        },
        map,
    )
}
