//! Splitting a witness into directly measurable monomials `W = Σ λᵢ fᵢ`.
//!
//! Homodyne monomials are products of rotated-quadrature powers, heterodyne
//! monomials are real parts of phased `αᵐ α*ⁿ` (optical equivalence), parity
//! monomials are products of per-mode parities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lower::real_expectation;
use super::poly::{AntiMono, AntiNormalForm, Mono, NormalForm};
use super::quadrature::quadrature_form;
use crate::fock::{StateRef, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Homodyne,
    Heterodyne,
    Auto,
}

/// One directly estimable random variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurable {
    Identity,
    /// `Πₖ x_{θₖ}^{dₖ}`; modes with power 0 carry angle 0.
    Homodyne { angles: Vec<f64>, powers: Vec<u32> },
    /// `Re(e^{iφ} Πₖ αₖ^{annₖ} αₖ*^{creₖ})`, estimating `Re(e^{iφ}⟨Π â^ann â†^cre⟩)`.
    Heterodyne { ann: Vec<u32>, cre: Vec<u32>, phase: f64 },
    /// `Π_{k∈modes} (−1)^{n̂ₖ}`.
    Parity { modes: Vec<usize> },
}

/// Which record a monomial is read from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSetting {
    None,
    Homodyne { angles: Vec<f64> },
    Heterodyne,
    Parity,
}

impl MeasurementSetting {
    /// Total order usable as a map key (angles compared bitwise).
    pub fn key(&self) -> (u8, Vec<u64>) {
        match self {
            MeasurementSetting::None => (0, vec![]),
            MeasurementSetting::Homodyne { angles } => (1, angles.iter().map(|a| a.to_bits()).collect()),
            MeasurementSetting::Heterodyne => (2, vec![]),
            MeasurementSetting::Parity => (3, vec![]),
        }
    }
}

impl Measurable {
    pub fn setting(&self) -> MeasurementSetting {
        match self {
            Measurable::Identity => MeasurementSetting::None,
            Measurable::Homodyne { angles, .. } => MeasurementSetting::Homodyne { angles: angles.clone() },
            Measurable::Heterodyne { .. } => MeasurementSetting::Heterodyne,
            Measurable::Parity { .. } => MeasurementSetting::Parity,
        }
    }

    /// Value of the monomial on one homodyne shot.
    pub fn eval_real(&self, outcome: &[f64]) -> f64 {
        match self {
            Measurable::Homodyne { powers, .. } => powers
                .iter()
                .zip(outcome)
                .map(|(&k, &x)| x.powi(k as i32))
                .product(),
            Measurable::Identity => 1.0,
            _ => f64::NAN,
        }
    }

    /// Value of the monomial on one heterodyne shot.
    pub fn eval_complex(&self, outcome: &[C64]) -> f64 {
        match self {
            Measurable::Heterodyne { ann, cre, phase } => {
                let mut z = C64::from_polar(1.0, *phase);
                for ((&m, &n), a) in ann.iter().zip(cre).zip(outcome) {
                    z *= a.powu(m) * a.conj().powu(n);
                }
                z.re
            }
            Measurable::Identity => 1.0,
            _ => f64::NAN,
        }
    }

    /// Value of the monomial on one parity shot.
    pub fn eval_parity(&self, outcome: &[i8]) -> f64 {
        match self {
            Measurable::Parity { modes } => modes.iter().map(|&k| outcome[k] as f64).product(),
            Measurable::Identity => 1.0,
            _ => f64::NAN,
        }
    }

    /// The monomial as a canonical operator on `n_modes` modes.
    pub fn operator(&self, n_modes: usize) -> NormalForm {
        match self {
            Measurable::Identity => NormalForm::identity(n_modes),
            Measurable::Homodyne { angles, powers } => {
                let mut out = NormalForm::identity(n_modes);
                for (mode, (&theta, &k)) in angles.iter().zip(powers).enumerate() {
                    if k > 0 {
                        let q = NormalForm::factor(n_modes, super::Factor::new(mode, super::Symbol::Quad(theta)));
                        out = out.mul(&q.pow(k));
                    }
                }
                out
            }
            Measurable::Heterodyne { ann, cre, phase } => {
                let key: Vec<AntiMono> = ann
                    .iter()
                    .zip(cre)
                    .map(|(&a, &c)| AntiMono { parity: false, ann: a, cre: c })
                    .collect();
                let conj: Vec<AntiMono> = key.iter().map(|m| AntiMono { parity: false, ann: m.cre, cre: m.ann }).collect();
                let e = C64::from_polar(0.5, *phase);
                let mut terms = BTreeMap::new();
                *terms.entry(key).or_insert(C64::new(0.0, 0.0)) += e;
                *terms.entry(conj).or_insert(C64::new(0.0, 0.0)) += e.conj();
                AntiNormalForm::from_terms(n_modes, terms).to_normal()
            }
            Measurable::Parity { modes } => {
                let key: Vec<Mono> = (0..n_modes)
                    .map(|k| Mono { parity: modes.contains(&k), cre: 0, ann: 0 })
                    .collect();
                let mut nf = NormalForm::zero(n_modes);
                nf.insert_add(key, C64::new(1.0, 0.0));
                nf
            }
        }
    }

    /// The square `fᵢ²` as a canonical operator, for second-moment oracles.
    pub fn square_operator(&self, n_modes: usize) -> NormalForm {
        match self {
            Measurable::Heterodyne { ann, cre, phase } => {
                // Re(z)² = (z² + z*²)/4 + |z|²/2
                let double = Measurable::Heterodyne {
                    ann: ann.iter().map(|a| 2 * a).collect(),
                    cre: cre.iter().map(|c| 2 * c).collect(),
                    phase: 2.0 * phase,
                };
                let modulus = Measurable::Heterodyne {
                    ann: ann.iter().zip(cre).map(|(a, c)| a + c).collect(),
                    cre: ann.iter().zip(cre).map(|(a, c)| a + c).collect(),
                    phase: 0.0,
                };
                double
                    .operator(n_modes)
                    .scaled(C64::new(0.5, 0.0))
                    .add(&modulus.operator(n_modes).scaled(C64::new(0.5, 0.0)))
            }
            Measurable::Parity { .. } | Measurable::Identity => NormalForm::identity(n_modes),
            Measurable::Homodyne { angles, powers } => Measurable::Homodyne {
                angles: angles.clone(),
                powers: powers.iter().map(|k| 2 * k).collect(),
            }
            .operator(n_modes),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub lambda: f64,
    pub monomial: Measurable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDecomposition {
    pub n_modes: usize,
    pub entries: Vec<DecompositionEntry>,
}

impl WitnessDecomposition {
    pub fn lambda_l1(&self) -> f64 {
        self.entries.iter().map(|e| e.lambda.abs()).sum()
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.entries.iter().map(|e| e.lambda.abs()).fold(0.0, f64::max)
    }

    /// Distinct settings in order of first appearance.
    pub fn settings(&self) -> Vec<MeasurementSetting> {
        let mut out: Vec<MeasurementSetting> = Vec::new();
        for e in &self.entries {
            let s = e.monomial.setting();
            if s != MeasurementSetting::None && !out.iter().any(|o| o.key() == s.key()) {
                out.push(s);
            }
        }
        out
    }

    /// Homodyne angle tuples in use.
    pub fn homodyne_settings(&self) -> Vec<Vec<f64>> {
        self.settings()
            .into_iter()
            .filter_map(|s| match s {
                MeasurementSetting::Homodyne { angles } => Some(angles),
                _ => None,
            })
            .collect()
    }

    /// `Σ λᵢ fᵢ` as a canonical operator.
    pub fn reconstruct(&self) -> NormalForm {
        let mut out = NormalForm::zero(self.n_modes);
        for e in &self.entries {
            out.add_assign(&e.monomial.operator(self.n_modes).scaled(C64::new(e.lambda, 0.0)));
        }
        out.prune(0.0);
        out
    }

    /// Exact `⟨fᵢ⟩` and `⟨fᵢ²⟩` for every entry.
    pub fn oracle_moments<'a>(&self, state: impl Into<StateRef<'a>>) -> Result<Vec<(f64, f64)>> {
        let state = state.into();
        self.entries
            .iter()
            .map(|e| {
                let m1 = real_expectation(&e.monomial.operator(self.n_modes), state)?;
                let m2 = real_expectation(&e.monomial.square_operator(self.n_modes), state)?;
                Ok((m1, m2))
            })
            .collect()
    }
}

/// Splits off terms containing parity; they must be pure parity products.
fn split_parity(nf: &NormalForm) -> Result<(NormalForm, Vec<DecompositionEntry>)> {
    let n = nf.n_modes();
    let mut ladder = NormalForm::zero(n);
    let mut parity = Vec::new();
    for (key, c) in nf.terms() {
        if !key.iter().any(|m| m.parity) {
            ladder.insert_add(key.clone(), *c);
            continue;
        }
        if key.iter().any(|m| m.cre + m.ann > 0) {
            return Err(Error::UnsupportedShape(
                "parity mixed with ladder operators has no measurement primitive".into(),
            ));
        }
        if c.im.abs() > 1e-9 * c.norm().max(1.0) {
            return Err(Error::NotHermitian(format!("parity coefficient {c} is not real")));
        }
        let modes = key.iter().enumerate().filter(|(_, m)| m.parity).map(|(k, _)| k).collect();
        parity.push(DecompositionEntry {
            lambda: c.re,
            monomial: Measurable::Parity { modes },
        });
    }
    Ok((ladder, parity))
}

fn homodyne_entries(nf: &NormalForm, angles: Option<&[Vec<f64>]>) -> Result<Vec<DecompositionEntry>> {
    let form = quadrature_form(nf, angles)?;
    Ok(form
        .terms
        .iter()
        .map(|(key, &lambda)| {
            let monomial = if key.iter().all(|s| s.power == 0) {
                Measurable::Identity
            } else {
                Measurable::Homodyne {
                    angles: key
                        .iter()
                        .enumerate()
                        .map(|(m, s)| if s.power == 0 { 0.0 } else { form.angles[m][s.angle] })
                        .collect(),
                    powers: key.iter().map(|s| s.power).collect(),
                }
            };
            DecompositionEntry { lambda, monomial }
        })
        .collect())
}

fn heterodyne_entries(nf: &NormalForm) -> Result<Vec<DecompositionEntry>> {
    let anti = AntiNormalForm::from_normal(nf);
    let scale = anti.terms().values().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut out = Vec::new();
    for (key, &c) in anti.terms() {
        let conj: Vec<AntiMono> = key.iter().map(|m| AntiMono { parity: false, ann: m.cre, cre: m.ann }).collect();
        let cc = anti.coeff(&conj);
        if (cc - c.conj()).norm() > 1e-9 * scale {
            return Err(Error::NotHermitian(format!("anti-normal coefficients {c} and {cc} are not conjugate")));
        }
        if c.norm() <= 1e-14 * scale {
            continue;
        }
        let ann: Vec<u32> = key.iter().map(|m| m.ann).collect();
        let cre: Vec<u32> = key.iter().map(|m| m.cre).collect();
        if ann.iter().chain(&cre).all(|&k| k == 0) {
            out.push(DecompositionEntry { lambda: c.re, monomial: Measurable::Identity });
        } else if conj == *key {
            out.push(DecompositionEntry {
                lambda: c.re,
                monomial: Measurable::Heterodyne { ann, cre, phase: 0.0 },
            });
        } else if *key < conj {
            // c·z + c*·z* = 2|c|·Re(e^{i arg c} z)
            out.push(DecompositionEntry {
                lambda: 2.0 * c.norm(),
                monomial: Measurable::Heterodyne { ann, cre, phase: c.arg() },
            });
        }
    }
    Ok(out)
}

/// Decomposes a Hermitian canonical polynomial into measurable monomials.
///
/// `angles` overrides the per-mode homodyne angle lists. `Auto` keeps the
/// decomposition with the smaller `Σ|λᵢ|`, preferring homodyne on ties; an
/// infeasible homodyne system falls back to heterodyne.
pub fn decompose_for_measurement(
    nf: &NormalForm,
    strategy: Strategy,
    angles: Option<&[Vec<f64>]>,
) -> Result<WitnessDecomposition> {
    if !nf.is_hermitian(1e-9) {
        return Err(Error::NotHermitian("witness polynomial is not Hermitian".into()));
    }
    let (ladder, parity) = split_parity(nf)?;
    let homodyne = || match homodyne_entries(&ladder, angles) {
        Ok(e) => Ok(e),
        Err(Error::NumericsFailure(_)) => heterodyne_entries(&ladder),
        Err(e) => Err(e),
    };
    let mut entries = match strategy {
        Strategy::Homodyne => homodyne()?,
        Strategy::Heterodyne => heterodyne_entries(&ladder)?,
        Strategy::Auto => {
            let h = homodyne()?;
            let q = heterodyne_entries(&ladder)?;
            let l1 = |v: &[DecompositionEntry]| v.iter().map(|e| e.lambda.abs()).sum::<f64>();
            if l1(&q) < l1(&h) * (1.0 - 1e-12) {
                q
            } else {
                h
            }
        }
    };
    entries.extend(parity);
    // merge identity pieces into one leading entry
    let id: f64 = entries
        .iter()
        .filter(|e| e.monomial == Measurable::Identity)
        .map(|e| e.lambda)
        .sum();
    entries.retain(|e| e.monomial != Measurable::Identity);
    if id != 0.0 {
        entries.insert(0, DecompositionEntry { lambda: id, monomial: Measurable::Identity });
    }
    if entries.is_empty() {
        entries.push(DecompositionEntry { lambda: 0.0, monomial: Measurable::Identity });
    }
    Ok(WitnessDecomposition {
        n_modes: nf.n_modes(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::CatParams;
    use crate::witness::{build_code_witness, lower_normal_form, CodeFamily};
    use std::f64::consts::PI;

    fn close(a: &NormalForm, b: &NormalForm, cutoff: usize) -> f64 {
        let ma = lower_normal_form(a, cutoff).unwrap();
        let mb = lower_normal_form(b, cutoff).unwrap();
        (ma.matrix() - mb.matrix()).norm()
    }

    #[test]
    fn identity_is_single_entry() {
        let d = decompose_for_measurement(&NormalForm::identity(1), Strategy::Auto, None).unwrap();
        assert_eq!(d.entries, vec![DecompositionEntry { lambda: 1.0, monomial: Measurable::Identity }]);
    }

    #[test]
    fn cat_homodyne_uses_four_angles() {
        let w = build_code_witness(&CodeFamily::Cat(CatParams::two(1.0))).unwrap();
        let d = decompose_for_measurement(&w.normal, Strategy::Homodyne, None).unwrap();
        let mut angles: Vec<f64> = d.homodyne_settings().into_iter().map(|a| a[0]).collect();
        angles.sort_by(f64::total_cmp);
        let want = [-PI / 4.0, 0.0, PI / 4.0, PI / 2.0];
        assert_eq!(angles.len(), 4);
        for (a, b) in angles.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(close(&d.reconstruct(), &w.normal, 20) < 1e-10);
    }

    #[test]
    fn heterodyne_reconstructs_complex_alpha() {
        let p = CatParams { alpha: C64::new(0.7, 0.9), ..CatParams::two(0.0) };
        let w = build_code_witness(&CodeFamily::Cat(p)).unwrap();
        let d = decompose_for_measurement(&w.normal, Strategy::Heterodyne, None).unwrap();
        assert!(d.entries.iter().all(|e| e.lambda.is_finite()));
        assert!(close(&d.reconstruct(), &w.normal, 20) < 1e-10);
    }

    #[test]
    fn four_component_gets_parity_entry() {
        let w = build_code_witness(&CodeFamily::Cat(CatParams::four(1.5))).unwrap();
        let d = decompose_for_measurement(&w.normal, Strategy::Auto, None).unwrap();
        let parity: Vec<_> = d.entries.iter().filter(|e| matches!(e.monomial, Measurable::Parity { .. })).collect();
        assert_eq!(parity.len(), 1);
        assert!((parity[0].lambda - 0.5).abs() < 1e-15);
        assert!(close(&d.reconstruct(), &w.normal, 24) < 1e-8);
    }

    #[test]
    fn mixed_parity_rejected() {
        let n = NormalForm::factor(1, crate::witness::Factor::new(0, crate::witness::Symbol::Parity));
        let bad = n.mul(&NormalForm::adag(1, 0).mul(&NormalForm::a(1, 0)));
        assert!(matches!(
            decompose_for_measurement(&bad, Strategy::Auto, None),
            Err(Error::UnsupportedShape(_)) | Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn square_operator_of_heterodyne_monomial() {
        // f = Re(α), f² = (α² + α*²)/4 + |α|²/2 → ⟨â²+â†²⟩/4 + ⟨ââ†⟩/2; on vacuum 1/2
        let f = Measurable::Heterodyne { ann: vec![1], cre: vec![0], phase: 0.0 };
        let vac = crate::fock::FockVector::vacuum(6, 1).unwrap();
        let v = real_expectation(&f.square_operator(1), &vac).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let w = build_code_witness(&CodeFamily::Cat(CatParams::two(2.0))).unwrap();
        let d = decompose_for_measurement(&w.normal, Strategy::Homodyne, None).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: WitnessDecomposition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
