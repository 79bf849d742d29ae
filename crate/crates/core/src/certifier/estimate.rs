use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::plan::SamplingPlan;
use crate::fock::{StateRef, C64};
use crate::measurement::{heterodyne_map, homodyne_map, parity_map, MeasurementRecord, Outcomes};
use crate::states::TruncationGuard;
use crate::witness::{Measurable, MeasurementSetting, WitnessDecomposition};
use crate::{Error, Result};

/// Running first and second moments of one monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn mean_sq(&self) -> f64 {
        self.sum_sq / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sum_sq - self.n as f64 * m * m) / (self.n - 1) as f64).max(0.0)
    }
}

/// Measurement record whose shots all belong to decomposition entry `entry`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub entry: usize,
    pub record: MeasurementRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEstimate {
    /// `Σ λᵢ · mean(fᵢ)`.
    pub estimate: f64,
    /// `√(Σ λᵢ² var(fᵢ)/nᵢ)`.
    pub standard_error: f64,
    /// Plug-in estimate of `⟨F²⟩ = Σ|λ| · Σ|λᵢ| ⟨fᵢ²⟩` for the importance-sampling variable.
    pub second_moment: f64,
    pub shots: u64,
    pub entry_means: Vec<f64>,
    pub entry_shots: Vec<u64>,
}

fn eval(monomial: &Measurable, outcomes: &Outcomes, shot: usize, n_modes: usize) -> f64 {
    let r = shot * n_modes..(shot + 1) * n_modes;
    match outcomes {
        Outcomes::Real(v) => monomial.eval_real(&v[r]),
        Outcomes::Complex(v) => monomial.eval_complex(&v[r]),
        Outcomes::Parity(v) => monomial.eval_parity(&v[r]),
    }
}

fn setting_matches(setting: &MeasurementSetting, record: &MeasurementRecord) -> bool {
    use crate::measurement::MeasurementKind as K;
    match (setting, record.kind) {
        (MeasurementSetting::Homodyne { angles }, K::Homodyne) => record
            .settings
            .as_ref()
            .is_some_and(|s| s.len() == angles.len() && s.iter().zip(angles).all(|(a, b)| a.to_bits() == b.to_bits())),
        (MeasurementSetting::Heterodyne, K::Heterodyne) | (MeasurementSetting::Parity, K::Parity) => true,
        _ => false,
    }
}

/// Combines per-entry moments into the witness estimate.
pub fn estimate_from_moments(decomp: &WitnessDecomposition, moments: &[Moments]) -> Result<WitnessEstimate> {
    let mut estimate = 0.0;
    let mut var = 0.0;
    let mut second = 0.0;
    let mut means = Vec::with_capacity(decomp.entries.len());
    for (i, e) in decomp.entries.iter().enumerate() {
        let (mean, mean_sq) = if e.monomial == Measurable::Identity {
            (1.0, 1.0)
        } else {
            let m = &moments[i];
            if m.n == 0 {
                return Err(Error::MissingCoverage(format!("entry {i} ({:?}) has no shots", e.monomial)));
            }
            var += e.lambda * e.lambda * m.variance() / m.n as f64;
            (m.mean(), m.mean_sq())
        };
        if !(mean.is_finite() && mean_sq.is_finite()) {
            return Err(Error::NumericsFailure(format!("entry {i} produced a non-finite average")));
        }
        estimate += e.lambda * mean;
        second += e.lambda.abs() * mean_sq;
        means.push(mean);
    }
    Ok(WitnessEstimate {
        estimate,
        standard_error: var.sqrt(),
        second_moment: decomp.lambda_l1() * second,
        shots: moments.iter().map(|m| m.n).sum(),
        entry_means: means,
        entry_shots: moments.iter().map(|m| m.n).collect(),
    })
}

/// `Σ λᵢ · (empirical mean of fᵢ under its records)`.
pub fn estimate_witness(decomp: &WitnessDecomposition, records: &[EntryRecord]) -> Result<WitnessEstimate> {
    let mut moments = vec![Moments::default(); decomp.entries.len()];
    for er in records {
        let entry = decomp
            .entries
            .get(er.entry)
            .ok_or_else(|| Error::MissingCoverage(format!("record for unknown entry {}", er.entry)))?;
        let rec = &er.record;
        rec.validate()?;
        if rec.n_modes != decomp.n_modes {
            return Err(Error::DimensionMismatch {
                expected: decomp.n_modes,
                found: rec.n_modes,
            });
        }
        if !setting_matches(&entry.monomial.setting(), rec) {
            return Err(Error::MissingCoverage(format!(
                "record for entry {} was taken with a different setting",
                er.entry
            )));
        }
        for s in 0..rec.shots {
            moments[er.entry].push(eval(&entry.monomial, &rec.outcomes, s, rec.n_modes));
        }
    }
    estimate_from_moments(decomp, &moments)
}

/// Seed of the `k`-th derived stream (SplitMix64 finalizer over `seed` and `k`).
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ (k.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Entries grouped by measurement setting, each group's shots laid out
/// consecutively in entry order.
struct Group {
    setting: MeasurementSetting,
    entries: Vec<usize>,
    /// Cumulative shot offsets, `offsets[j+1] − offsets[j]` shots for `entries[j]`.
    offsets: Vec<usize>,
}

fn groups(decomp: &WitnessDecomposition, plan: &SamplingPlan) -> Result<Vec<Group>> {
    if plan.allotments.len() != decomp.entries.len() {
        return Err(Error::DimensionMismatch {
            expected: decomp.entries.len(),
            found: plan.allotments.len(),
        });
    }
    let mut map: BTreeMap<(u8, Vec<u64>), Group> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, e) in decomp.entries.iter().enumerate() {
        let s = e.monomial.setting();
        if s == MeasurementSetting::None {
            continue;
        }
        let key = s.key();
        let g = map.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Group {
                setting: s,
                entries: vec![],
                offsets: vec![0],
            }
        });
        let last = *g.offsets.last().expect("offsets start at 0");
        g.entries.push(i);
        g.offsets.push(last + plan.allotments[i]);
    }
    Ok(order.into_iter().map(|k| map.remove(&k).expect("key recorded")).collect())
}

fn block_moments<T>(
    group: &Group,
    decomp: &WitnessDecomposition,
    first: usize,
    block: &[T],
    n_modes: usize,
    eval: impl Fn(&Measurable, &[T]) -> f64,
) -> Vec<Moments> {
    let mut out = vec![Moments::default(); group.entries.len()];
    let shots = block.len() / n_modes;
    for s in 0..shots {
        let global = first + s;
        let j = group.offsets.partition_point(|&o| o <= global) - 1;
        let m = &decomp.entries[group.entries[j]].monomial;
        out[j].push(eval(m, &block[s * n_modes..(s + 1) * n_modes]));
    }
    out
}

/// Simulates the plan on `state` and returns per-entry moments without
/// materializing records. Setting `k` (in order of first appearance) draws
/// from seed `derive_seed(seed, k)`.
pub fn simulate_moments<'a>(
    state: impl Into<StateRef<'a>>,
    decomp: &WitnessDecomposition,
    plan: &SamplingPlan,
    seed: u64,
    guard: TruncationGuard,
) -> Result<Vec<Moments>> {
    let state = state.into();
    if state.n_modes() != decomp.n_modes {
        return Err(Error::DimensionMismatch {
            expected: decomp.n_modes,
            found: state.n_modes(),
        });
    }
    let n = decomp.n_modes;
    let mut moments = vec![Moments::default(); decomp.entries.len()];
    for (k, group) in groups(decomp, plan)?.iter().enumerate() {
        let shots = *group.offsets.last().expect("offsets start at 0");
        if shots == 0 {
            continue;
        }
        let s = derive_seed(seed, k as u64);
        let parts: Vec<Vec<Moments>> = match &group.setting {
            MeasurementSetting::Homodyne { angles } => homodyne_map(state, angles, shots, s, guard, |first, block| {
                Ok(block_moments(group, decomp, first, &block, n, |m, o: &[f64]| m.eval_real(o)))
            })?,
            MeasurementSetting::Heterodyne => heterodyne_map(state, shots, s, guard, |first, block| {
                Ok(block_moments(group, decomp, first, &block, n, |m, o: &[C64]| m.eval_complex(o)))
            })?,
            MeasurementSetting::Parity => parity_map(state, shots, s, guard, |first, block| {
                Ok(block_moments(group, decomp, first, &block, n, |m, o: &[i8]| m.eval_parity(o)))
            })?,
            MeasurementSetting::None => unreachable!("identity entries are not grouped"),
        };
        for part in parts {
            for (j, m) in part.iter().enumerate() {
                moments[group.entries[j]].merge(m);
            }
        }
    }
    Ok(moments)
}

/// Simulates the plan and returns one record per (setting, entry) pair.
pub fn simulate_entry_records<'a>(
    state: impl Into<StateRef<'a>>,
    decomp: &WitnessDecomposition,
    plan: &SamplingPlan,
    seed: u64,
    guard: TruncationGuard,
) -> Result<Vec<EntryRecord>> {
    use crate::measurement::{heterodyne_sample_with, homodyne_sample_with, parity_sample_with};
    let state = state.into();
    let n = decomp.n_modes;
    let mut out = Vec::new();
    for (k, group) in groups(decomp, plan)?.iter().enumerate() {
        let shots = *group.offsets.last().expect("offsets start at 0");
        if shots == 0 {
            continue;
        }
        let s = derive_seed(seed, k as u64);
        let rec = match &group.setting {
            MeasurementSetting::Homodyne { angles } => homodyne_sample_with(state, angles, shots, s, guard)?,
            MeasurementSetting::Heterodyne => heterodyne_sample_with(state, shots, s, guard)?,
            MeasurementSetting::Parity => parity_sample_with(state, shots, s, guard)?,
            MeasurementSetting::None => unreachable!("identity entries are not grouped"),
        };
        for (j, &entry) in group.entries.iter().enumerate() {
            let (a, b) = (group.offsets[j], group.offsets[j + 1]);
            let outcomes = match &rec.outcomes {
                Outcomes::Real(v) => Outcomes::Real(v[a * n..b * n].to_vec()),
                Outcomes::Complex(v) => Outcomes::Complex(v[a * n..b * n].to_vec()),
                Outcomes::Parity(v) => Outcomes::Parity(v[a * n..b * n].to_vec()),
            };
            out.push(EntryRecord {
                entry,
                record: MeasurementRecord {
                    shots: b - a,
                    outcomes,
                    ..rec.clone()
                },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::plan_importance_sampling;
    use crate::fock::FockVector;
    use crate::witness::{decompose_for_measurement, DecompositionEntry, NormalForm, Strategy};

    #[test]
    fn identity_estimate_is_exact() {
        let d = decompose_for_measurement(&NormalForm::identity(1), Strategy::Auto, None).unwrap();
        let e = estimate_witness(&d, &[]).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.standard_error, 0.0);
    }

    #[test]
    fn missing_coverage_is_an_error() {
        let d = WitnessDecomposition {
            n_modes: 1,
            entries: vec![DecompositionEntry {
                lambda: 1.0,
                monomial: Measurable::Parity { modes: vec![0] },
            }],
        };
        assert!(matches!(estimate_witness(&d, &[]), Err(Error::MissingCoverage(_))));
    }

    #[test]
    fn streaming_and_records_agree() {
        let x = NormalForm::x(1, 0);
        let nf = x.mul(&x).add(&NormalForm::p(1, 0).mul(&NormalForm::p(1, 0)));
        let d = decompose_for_measurement(&nf, Strategy::Homodyne, None).unwrap();
        let plan = plan_importance_sampling(&d, 20_000, 3).unwrap();
        let vac = FockVector::vacuum(8, 1).unwrap();
        let guard = TruncationGuard::default();
        let m = simulate_moments(&vac, &d, &plan, 9, guard).unwrap();
        let recs = simulate_entry_records(&vac, &d, &plan, 9, guard).unwrap();
        let a = estimate_from_moments(&d, &m).unwrap();
        let b = estimate_witness(&d, &recs).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-12);
        assert!((a.estimate - 1.0).abs() < 5.0 * a.standard_error);
    }
}
