use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::witness::WitnessDecomposition;
use crate::{Error, Result};

/// Shot allotment per decomposition entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub total: usize,
    /// `pᵢ = |λᵢ| / Σ|λⱼ|`.
    pub probabilities: Vec<f64>,
    pub allotments: Vec<usize>,
}

/// Multinomial allotment of `n` shots with `pᵢ ∝ |λᵢ|`.
///
/// Entries left empty by the draw receive one shot taken from the largest
/// allotment, so every entry is covered and the total stays `n`.
pub fn plan_importance_sampling(decomp: &WitnessDecomposition, n: usize, seed: u64) -> Result<SamplingPlan> {
    let k = decomp.entries.len();
    if n < k {
        return Err(Error::InsufficientShots(format!("{n} shots for {k} decomposition entries")));
    }
    let l1 = decomp.lambda_l1();
    let probabilities: Vec<f64> = if l1 > 0.0 {
        decomp.entries.iter().map(|e| e.lambda.abs() / l1).collect()
    } else {
        vec![1.0 / k as f64; k]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut allotments = vec![0usize; k];
    let mut left = n as u64;
    let mut mass = 1.0;
    for i in 0..k {
        if left == 0 {
            break;
        }
        if i == k - 1 || mass <= 0.0 {
            allotments[i] = left as usize;
            break;
        }
        let p = (probabilities[i] / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, p)
            .map_err(|e| Error::NumericsFailure(format!("binomial draw: {e}")))?
            .sample(&mut rng);
        allotments[i] = draw as usize;
        left -= draw;
        mass -= probabilities[i];
    }
    for i in 0..k {
        if allotments[i] == 0 {
            let donor = (0..k).max_by_key(|&j| allotments[j]).expect("non-empty plan");
            allotments[donor] -= 1;
            allotments[i] = 1;
        }
    }
    Ok(SamplingPlan {
        total: n,
        probabilities,
        allotments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{DecompositionEntry, Measurable};

    fn decomp(lambdas: &[f64]) -> WitnessDecomposition {
        WitnessDecomposition {
            n_modes: 1,
            entries: lambdas
                .iter()
                .enumerate()
                .map(|(i, &lambda)| DecompositionEntry {
                    lambda,
                    monomial: Measurable::Homodyne {
                        angles: vec![0.0],
                        powers: vec![i as u32 + 1],
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn single_entry_gets_everything() {
        let p = plan_importance_sampling(&decomp(&[-3.0]), 1000, 1).unwrap();
        assert_eq!(p.allotments, vec![1000]);
    }

    #[test]
    fn symmetric_split_within_three_sigma() {
        let p = plan_importance_sampling(&decomp(&[1.0, 1.0]), 1_000_000, 5).unwrap();
        assert_eq!(p.allotments.iter().sum::<usize>(), 1_000_000);
        assert!((p.allotments[0] as f64 - 500_000.0).abs() < 1500.0);
    }

    #[test]
    fn too_few_shots() {
        assert!(plan_importance_sampling(&decomp(&[1.0, 1.0, 1.0]), 2, 0).is_err());
    }
}
