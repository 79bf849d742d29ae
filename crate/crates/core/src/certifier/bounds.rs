use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::fock::StateRef;
use crate::witness::{Measurable, WitnessDecomposition};
use crate::{Error, Result};

/// Constant in the tail bound `Pr(|F* − F| > ε) ≤ 8·exp(−Nε²/(33⟨F²⟩))`.
pub const HOEFFDING_CONSTANT: f64 = 33.0;

/// Safety factor applied to oracle moment bounds.
pub const ORACLE_SAFETY: f64 = 1.5;

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} outside (0, 1)")));
    }
    Ok(())
}

/// `33·ln(8/δ)/ε²` before rounding.
fn hoeffding_factor(epsilon: f64, delta: f64) -> f64 {
    HOEFFDING_CONSTANT * (8.0 / delta).ln() / (epsilon * epsilon)
}

/// `N = ⌈33·⟨F²⟩·ln(8/δ)/ε²⌉`.
///
/// `δ` may exceed 1 formally (down to `ln(8/δ) > 0`); only positivity is required.
pub fn hoeffding_requirements(second_moment: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(second_moment > 0.0 && second_moment.is_finite()) {
        return Err(invalid("second_moment", format!("{second_moment} must be positive and finite")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("{epsilon} must be positive")));
    }
    if !(delta > 0.0 && delta < 8.0) {
        return Err(invalid("delta", format!("{delta} must lie in (0, 8)")));
    }
    let n = (HOEFFDING_CONSTANT * second_moment * (8.0 / delta).ln() / (epsilon * epsilon)).ceil();
    if n > u64::MAX as f64 {
        return Err(Error::ResourceLimit(format!("required shots {n:.3e} overflow u64")));
    }
    Ok(n as u64)
}

/// Half-width `ε` at which `N` shots reach confidence `1 − δ`.
pub fn hoeffding_half_width(second_moment: f64, delta: f64, n: u64) -> f64 {
    (HOEFFDING_CONSTANT * second_moment * (8.0 / delta).ln() / n as f64).sqrt()
}

/// Which bound on `⟨F²⟩` sets the shot budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondMomentProxy {
    /// `m²·maxᵢ|λᵢ|·maxᵢ⟨fᵢ²⟩` with `m` the number of entries.
    #[default]
    PaperBound,
    /// `m²·maxᵢ|λᵢ|²·maxᵢ⟨fᵢ²⟩`.
    SquaredBound,
    /// `Σ|λ|·Σᵢ|λᵢ|⟨fᵢ²⟩`, the exact second moment of the importance-sampling variable.
    Exact,
}

/// Evaluates `proxy` from per-entry `(⟨fᵢ⟩, ⟨fᵢ²⟩)`.
pub fn second_moment_bound(decomp: &WitnessDecomposition, moments: &[(f64, f64)], proxy: SecondMomentProxy) -> Result<f64> {
    if moments.len() != decomp.entries.len() {
        return Err(Error::DimensionMismatch {
            expected: decomp.entries.len(),
            found: moments.len(),
        });
    }
    let m = decomp.entries.len() as f64;
    let max_f2 = moments.iter().map(|&(_, f2)| f2).fold(0.0, f64::max);
    let max_l = decomp.max_abs_lambda();
    let v = match proxy {
        SecondMomentProxy::PaperBound => m * m * max_l * max_f2,
        SecondMomentProxy::SquaredBound => m * m * max_l * max_l * max_f2,
        SecondMomentProxy::Exact => {
            decomp.lambda_l1()
                * decomp
                    .entries
                    .iter()
                    .zip(moments)
                    .map(|(e, &(_, f2))| e.lambda.abs() * f2)
                    .sum::<f64>()
        }
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::NumericsFailure(format!("second-moment proxy evaluated to {v}")));
    }
    Ok(v)
}

/// `σ_k` for `k = 1..`: uniform bounds on the mean square of degree-`k`
/// quadrature products. `sigma[k-1]` holds `σ_k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentBounds {
    pub sigma: Vec<f64>,
}

impl MomentBounds {
    /// `σ_{≤k} = max_{1≤j≤k} σ_j`.
    pub fn up_to(&self, k: usize) -> Result<f64> {
        if k == 0 || self.sigma.len() < k {
            return Err(invalid(
                "sigma",
                format!("σ_≤{k} needs bounds for degrees 1..={k}, {} supplied", self.sigma.len()),
            ));
        }
        Ok(self.sigma[..k].iter().cloned().fold(0.0, f64::max))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid("sigma", "moment bounds must be finite and non-negative"));
        }
        Ok(())
    }
}

fn degree(m: &Measurable) -> usize {
    match m {
        Measurable::Identity | Measurable::Parity { .. } => 0,
        Measurable::Homodyne { powers, .. } => powers.iter().map(|&p| p as usize).sum(),
        Measurable::Heterodyne { ann, cre, .. } => ann.iter().chain(cre).map(|&p| p as usize).sum(),
    }
}

/// Oracle `σ_k` up to `max_degree`: the largest `⟨fᵢ²⟩` over decomposition
/// entries of degree `k`, times [`ORACLE_SAFETY`].
pub fn oracle_moment_bounds<'a>(
    decomp: &WitnessDecomposition,
    state: impl Into<StateRef<'a>>,
    max_degree: usize,
) -> Result<MomentBounds> {
    let moments = decomp.oracle_moments(state)?;
    let mut sigma = vec![0.0; max_degree];
    for (e, &(_, f2)) in decomp.entries.iter().zip(&moments) {
        let d = degree(&e.monomial);
        if (1..=max_degree).contains(&d) {
            sigma[d - 1] = f64::max(sigma[d - 1], ORACLE_SAFETY * f2);
        }
    }
    Ok(MomentBounds { sigma })
}

/// Inputs to the resource and IQP sample-complexity bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityParams {
    pub n_s: u64,
    pub n_gkp: u64,
    pub m: u32,
    pub r: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: MomentBounds,
    #[serde(default)]
    pub n_t: u64,
    #[serde(default)]
    pub n_z: u64,
    #[serde(default)]
    pub n_cz: u64,
}

impl ComplexityParams {
    pub fn validate(&self) -> Result<()> {
        check_eps_delta(self.epsilon, self.delta)?;
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(invalid("r", format!("{} must be finite and non-negative", self.r)));
        }
        self.sigma.validate()
    }

    fn gkp_degree(&self) -> usize {
        4 * self.m as usize + 2
    }
}

/// `33·ln(8/δ)/ε² · (N_GKP²·e^{r(4m+2)}·σ_{≤4m+2} + N_s²·e^{2r}·σ₂)`.
pub fn sample_complexity_resource(p: &ComplexityParams) -> Result<f64> {
    p.validate()?;
    let k = p.gkp_degree();
    let mut bracket = 0.0;
    if p.n_gkp > 0 {
        bracket += (p.n_gkp as f64).powi(2) * (p.r * k as f64).exp() * p.sigma.up_to(k)?;
    }
    if p.n_s > 0 {
        let s2 = *p.sigma.sigma.get(1).ok_or_else(|| invalid("sigma", "σ₂ required for squeezed modes"))?;
        bracket += (p.n_s as f64).powi(2) * (2.0 * p.r).exp() * s2;
    }
    Ok(hoeffding_factor(p.epsilon, p.delta) * bracket)
}

/// `33·ln(8/δ)/ε² · (N_GKP²·(n_T e^r)^{4m+2}·(n_CZ+3)^{8m+4}·σ_{≤4m+2} + N_s²·n_T²·(n_CZ+3)⁴·σ_{≤4})`
/// with `n_T` floored at 1 so circuits without T gates keep a nonzero bound.
pub fn sample_complexity_iqp(p: &ComplexityParams) -> Result<f64> {
    p.validate()?;
    let k = p.gkp_degree();
    let nt = p.n_t.max(1) as f64;
    let cz = p.n_cz as f64 + 3.0;
    let mut bracket = 0.0;
    if p.n_gkp > 0 {
        bracket += (p.n_gkp as f64).powi(2)
            * (nt * p.r.exp()).powi(k as i32)
            * cz.powi(2 * k as i32)
            * p.sigma.up_to(k)?;
    }
    if p.n_s > 0 {
        bracket += (p.n_s as f64).powi(2) * nt * nt * cz.powi(4) * p.sigma.up_to(4)?;
    }
    Ok(hoeffding_factor(p.epsilon, p.delta) * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ComplexityParams {
        ComplexityParams {
            n_s: 2,
            n_gkp: 1,
            m: 1,
            r: 0.6,
            epsilon: 0.1,
            delta: 0.05,
            sigma: MomentBounds {
                sigma: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            },
            n_t: 0,
            n_z: 0,
            n_cz: 0,
        }
    }

    #[test]
    fn hoeffding_reference_values() {
        assert_eq!(hoeffding_requirements(1.0, 0.1, 0.05).unwrap(), 16749);
        let n = hoeffding_requirements(1.0, 0.1, 8.0 * (-1.0f64).exp()).unwrap();
        assert_eq!(n, 3300);
    }

    #[test]
    fn halving_epsilon_quadruples() {
        for f2 in [0.37, 1.0, 12.5, 980.0] {
            let a = hoeffding_requirements(f2, 0.1, 0.05).unwrap();
            let b = hoeffding_requirements(f2, 0.05, 0.05).unwrap();
            // ⌈4x⌉ ∈ (4⌈x⌉ − 4, 4⌈x⌉]
            assert!(b <= 4 * a && b + 4 > 4 * a, "{a} {b}");
        }
    }

    #[test]
    fn squeezed_only_dropout() {
        let mut p = params();
        p.n_gkp = 0;
        let b = sample_complexity_resource(&p).unwrap();
        let expect = hoeffding_factor(0.1, 0.05) * 4.0 * (1.2f64).exp() * 2.0;
        assert!((b - expect).abs() < 1e-9 * expect);
        p.n_s = 4;
        assert!((sample_complexity_resource(&p).unwrap() / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn iqp_cz_scaling() {
        let mut p = params();
        p.n_s = 0;
        p.n_cz = 1;
        let a = sample_complexity_iqp(&p).unwrap();
        p.n_cz = 2;
        let b = sample_complexity_iqp(&p).unwrap();
        assert!((b / a - (5.0f64 / 4.0).powi(12)).abs() < 1e-9);
    }

    #[test]
    fn missing_bounds() {
        let mut p = params();
        p.sigma.sigma.truncate(3);
        assert!(sample_complexity_resource(&p).is_err());
        p.n_gkp = 0;
        assert!(sample_complexity_resource(&p).is_ok());
    }
}
