use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::bounds::{hoeffding_half_width, hoeffding_requirements, second_moment_bound, SecondMomentProxy};
use super::estimate::{derive_seed, estimate_from_moments, simulate_moments, WitnessEstimate};
use super::plan::plan_importance_sampling;
use crate::error::invalid;
use crate::fock::StateRef;
use crate::states::{CatFamily, TruncationGuard};
use crate::witness::{cat_quadrature_angles, decompose_for_measurement, Strategy, WitnessDecomposition, WitnessSpec};
use crate::{Error, Result};

/// Default cap on the shots a single certification may spend.
pub const DEFAULT_MAX_SHOTS: u64 = 10_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

/// Accept iff `lo ≥ 1 − ε`; reject iff `hi < 1 − ε`.
pub fn verdict(ci: [f64; 2], epsilon: f64) -> Verdict {
    let threshold = 1.0 - epsilon;
    if ci[0] >= threshold {
        Verdict::Accept
    } else if ci[1] < threshold {
        Verdict::Reject
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyOptions {
    pub strategy: Strategy,
    /// Per-mode homodyne angle lists; cat witnesses pick their own when absent.
    pub angles: Option<Vec<Vec<f64>>>,
    pub proxy: SecondMomentProxy,
    /// User-supplied `⟨F²⟩`, overriding `proxy`.
    pub second_moment: Option<f64>,
    pub max_shots: u64,
    pub guard: TruncationGuard,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            angles: None,
            proxy: SecondMomentProxy::Exact,
            second_moment: None,
            max_shots: DEFAULT_MAX_SHOTS,
            guard: TruncationGuard::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificationReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub ci: [f64; 2],
    pub epsilon: f64,
    pub delta: f64,
    pub threshold: f64,
    pub n_used: u64,
    pub n_terms: usize,
    pub n_settings: usize,
    pub second_moment: f64,
    /// `None` when `⟨F²⟩` was user-supplied.
    pub proxy: Option<SecondMomentProxy>,
    pub verdict: Verdict,
    pub witness_params: WitnessSpec,
    pub seed: u64,
}

/// Angle lists the decomposition of `spec` should use.
pub fn default_angles(spec: &WitnessSpec) -> Option<Vec<Vec<f64>>> {
    match spec {
        WitnessSpec::Cat { params } if params.family == CatFamily::SqueezedTwoComponent => {
            Some(vec![cat_quadrature_angles(params)])
        }
        _ => None,
    }
}

/// Builds and decomposes the witness for `spec`.
pub fn witness_decomposition(spec: &WitnessSpec, strategy: Strategy, angles: Option<&[Vec<f64>]>) -> Result<WitnessDecomposition> {
    let w = spec.build()?;
    let own = default_angles(spec);
    decompose_for_measurement(&w.normal, strategy, angles.or(own.as_deref()))
}

/// Resolves `⟨F²⟩` for a budget: user value or proxy evaluated on `state`.
fn resolve_second_moment(decomp: &WitnessDecomposition, state: StateRef<'_>, opts: &CertifyOptions) -> Result<(f64, Option<SecondMomentProxy>)> {
    match opts.second_moment {
        Some(v) if v > 0.0 && v.is_finite() => Ok((v, None)),
        Some(v) => Err(invalid("second_moment", format!("{v} must be positive and finite"))),
        None => {
            let moments = decomp.oracle_moments(state)?;
            Ok((second_moment_bound(decomp, &moments, opts.proxy)?, Some(opts.proxy)))
        }
    }
}

/// Runs the importance-sampling protocol for `spec` on a simulated `state`.
///
/// The budget `N` targets half-width `ε/2`, so an estimate at the threshold
/// cannot be both accepted and rejected by nearby states.
pub fn certify<'a>(
    state: impl Into<StateRef<'a>>,
    spec: &WitnessSpec,
    epsilon: f64,
    delta: f64,
    seed: u64,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    let state = state.into();
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} outside (0, 1)")));
    }
    spec.validate()?;
    if state.n_modes() != spec.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_modes(),
            found: state.n_modes(),
        });
    }
    state.check_truncation(opts.guard.limit, opts.guard.allow_override)?;
    let decomp = witness_decomposition(spec, opts.strategy, opts.angles.as_deref())?;
    let (second_moment, proxy) = resolve_second_moment(&decomp, state, opts)?;
    let n = hoeffding_requirements(second_moment, epsilon / 2.0, delta)?.max(decomp.entries.len() as u64);
    if n > opts.max_shots {
        return Err(Error::ResourceLimit(format!(
            "certification needs {n} shots, cap is {} (⟨F²⟩ = {second_moment:.4e})",
            opts.max_shots
        )));
    }
    let est = run_estimate(state, &decomp, n, seed, opts.guard)?;
    let half = hoeffding_half_width(second_moment, delta, n);
    let ci = [est.estimate - half, est.estimate + half];
    Ok(CertificationReport {
        estimate: est.estimate,
        standard_error: est.standard_error,
        ci,
        epsilon,
        delta,
        threshold: 1.0 - epsilon,
        n_used: n,
        n_terms: decomp.entries.len(),
        n_settings: decomp.settings().len(),
        second_moment,
        proxy,
        verdict: verdict(ci, epsilon),
        witness_params: spec.clone(),
        seed,
    })
}

/// One plan-and-sample pass with `n` shots. The plan draws from
/// `derive_seed(seed, 0)` and the measurements from `derive_seed(seed, 1)`.
pub fn run_estimate(
    state: StateRef<'_>,
    decomp: &WitnessDecomposition,
    n: u64,
    seed: u64,
    guard: TruncationGuard,
) -> Result<WitnessEstimate> {
    let plan = plan_importance_sampling(decomp, n as usize, derive_seed(seed, 0))?;
    let moments = simulate_moments(state, decomp, &plan, derive_seed(seed, 1), guard)?;
    estimate_from_moments(decomp, &moments)
}

/// Miss counts of a doubling search for the shots needed to hit `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotStudy {
    pub epsilon: f64,
    pub delta: f64,
    pub runs: usize,
    /// `(N, runs with |ω − ⟨W⟩| > ε)` per tried `N`.
    pub grid: Vec<(u64, usize)>,
    /// Smallest tried `N` whose miss fraction is at most `δ`.
    pub required: Option<u64>,
}

/// Doubles `N` from `n_start` until at most `δ·runs` of `runs` seeded estimates
/// miss `oracle` by more than `ε`, or `n_max` is passed.
#[allow(clippy::too_many_arguments)]
pub fn empirical_shot_requirement(
    state: StateRef<'_>,
    decomp: &WitnessDecomposition,
    oracle: f64,
    epsilon: f64,
    delta: f64,
    runs: usize,
    n_start: u64,
    n_max: u64,
    seed: u64,
    guard: TruncationGuard,
) -> Result<ShotStudy> {
    let mut grid = Vec::new();
    let mut n = n_start.max(decomp.entries.len() as u64);
    let mut required = None;
    while n <= n_max {
        let mut misses = 0;
        for run in 0..runs {
            let e = run_estimate(state, decomp, n, derive_seed(seed, (n << 16) ^ run as u64), guard)?;
            if (e.estimate - oracle).abs() > epsilon {
                misses += 1;
            }
        }
        grid.push((n, misses));
        if misses as f64 <= delta * runs as f64 {
            required = Some(n);
            break;
        }
        n *= 2;
    }
    Ok(ShotStudy {
        epsilon,
        delta,
        runs,
        grid,
        required,
    })
}

/// Shots a two-sided normal interval at level `1 − δ` needs to reach `ε`,
/// from the variance of one pilot run: `⌈z²_{1−δ/2}·Var(F)/ε²⌉`.
pub fn pilot_shot_requirement(
    state: StateRef<'_>,
    decomp: &WitnessDecomposition,
    epsilon: f64,
    delta: f64,
    pilot_shots: u64,
    seed: u64,
    guard: TruncationGuard,
) -> Result<u64> {
    let e = run_estimate(state, decomp, pilot_shots, seed, guard)?;
    let var = (e.second_moment - e.estimate * e.estimate).max(0.0);
    let z = Normal::standard().inverse_cdf(1.0 - delta / 2.0);
    Ok((z * z * var / (epsilon * epsilon)).ceil() as u64)
}
