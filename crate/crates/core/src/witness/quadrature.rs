//! Rewriting ladder polynomials as sums of products of rotated-quadrature powers.
//!
//! For each mode of maximal ladder degree `D`, the normal-ordered monomials of
//! degree `≤ D` are expressed in the basis `{x̂_θ^d : d ≤ D, θ ∈ first d+1 angles}`
//! by solving one square linear system of size `(D+1)(D+2)/2`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::poly::{Factor, Mono, NormalForm, OperatorPolynomial, Symbol, Term};
use crate::fock::C64;
use crate::{Error, Result};

/// `0, π/2, π/4, −π/4, π/8, 3π/8, −π/8, −3π/8, π/16, …`
pub fn preferred_angles(count: usize) -> Vec<f64> {
    let mut out = vec![0.0, PI / 2.0];
    let mut level = 2u32;
    while out.len() < count {
        let denom = (1u64 << level) as f64;
        let half = 1u64 << (level - 1);
        let odd: Vec<u64> = (1..half).step_by(2).collect();
        for &j in &odd {
            out.push(j as f64 * PI / denom);
        }
        for &j in &odd {
            out.push(-(j as f64) * PI / denom);
        }
        level += 1;
    }
    out.truncate(count);
    out
}

/// Per-mode quadrature expansion: `(power d, angle index l) ↦ coefficient`.
type Expansion = Vec<((u32, usize), C64)>;

struct AngleSystem {
    degree: u32,
    /// Inverse of the monomial-by-quadrature-power matrix.
    inverse: DMatrix<C64>,
    rows: HashMap<(u32, u32), usize>,
    cols: Vec<(u32, usize)>,
}

fn x_theta_power(theta: f64, d: u32) -> NormalForm {
    NormalForm::factor(1, Factor::new(0, Symbol::Quad(theta))).pow(d)
}

impl AngleSystem {
    fn build(degree: u32, angles: &[f64]) -> Result<Self> {
        let need = degree as usize + 1;
        if angles.len() < need {
            return Err(Error::UnsupportedShape(format!(
                "degree {degree} needs {need} angles, got {}",
                angles.len()
            )));
        }
        let mut rows = HashMap::new();
        for total in 0..=degree {
            for j in 0..=total {
                let idx = rows.len();
                rows.insert((j, total - j), idx);
            }
        }
        let mut cols = Vec::new();
        for d in 0..=degree {
            for l in 0..=d as usize {
                cols.push((d, l));
            }
        }
        let n = rows.len();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (c, &(d, l)) in cols.iter().enumerate() {
            let nf = x_theta_power(angles[l], d);
            for (key, v) in nf.terms() {
                let mono = key[0];
                m[(rows[&(mono.cre, mono.ann)], c)] = *v;
            }
        }
        let inverse = m.clone().try_inverse().ok_or_else(|| {
            Error::UnsupportedShape(format!("angle system of degree {degree} is singular"))
        })?;
        let resid = (&m * &inverse - DMatrix::<C64>::identity(n, n)).norm();
        if resid > 1e-8 {
            return Err(Error::UnsupportedShape(format!(
                "angle system of degree {degree} is ill-conditioned (residual {resid:.2e})"
            )));
        }
        Ok(Self {
            degree,
            inverse,
            rows,
            cols,
        })
    }

    fn expand(&self, mono: Mono) -> Result<Expansion> {
        if mono.parity {
            return Err(Error::UnsupportedShape("parity has no quadrature expansion".into()));
        }
        if mono.degree() > self.degree {
            return Err(Error::UnsupportedShape("monomial degree exceeds the angle system".into()));
        }
        let r = self.rows[&(mono.cre, mono.ann)];
        Ok(self
            .cols
            .iter()
            .enumerate()
            .map(|(c, &col)| (col, self.inverse[(c, r)]))
            .filter(|(_, v)| v.norm() > 1e-14)
            .collect())
    }
}

fn angle_key(angles: &[f64]) -> Vec<u64> {
    angles.iter().map(|a| a.to_bits()).collect()
}

type SystemCache = Mutex<HashMap<(u32, Vec<u64>), Arc<AngleSystem>>>;

fn system(degree: u32, angles: &[f64]) -> Result<Arc<AngleSystem>> {
    static CACHE: OnceLock<SystemCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (degree, angle_key(&angles[..degree as usize + 1]));
    if let Some(s) = cache.lock().expect("angle cache poisoned").get(&key) {
        return Ok(s.clone());
    }
    let built = Arc::new(AngleSystem::build(degree, angles)?);
    cache
        .lock()
        .expect("angle cache poisoned")
        .entry(key)
        .or_insert(built.clone());
    Ok(built)
}

/// One mode's factor in a quadrature-form term: `x̂_{angles[angle]}^power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadSlot {
    pub angle: usize,
    pub power: u32,
}

/// Polynomial written as `Σ c · Πₖ x̂_{θₖ}^{dₖ}` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureForm {
    /// Angle table per mode; slots index into it.
    pub angles: Vec<Vec<f64>>,
    pub terms: BTreeMap<Vec<QuadSlot>, f64>,
}

impl QuadratureForm {
    pub fn n_modes(&self) -> usize {
        self.angles.len()
    }

    pub fn coeff(&self, slots: &[(f64, u32)]) -> f64 {
        let key: Option<Vec<QuadSlot>> = slots
            .iter()
            .enumerate()
            .map(|(mode, &(theta, power))| {
                if power == 0 {
                    return Some(QuadSlot { angle: 0, power: 0 });
                }
                self.angles[mode]
                    .iter()
                    .position(|a| (a - theta).abs() < 1e-12)
                    .map(|angle| QuadSlot { angle, power })
            })
            .collect();
        key.and_then(|k| self.terms.get(&k).cloned()).unwrap_or(0.0)
    }

    /// Distinct per-mode angle tuples needed to measure every term
    /// (modes with power 0 are reported at angle 0).
    pub fn settings(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for key in self.terms.keys() {
            let s: Vec<f64> = key
                .iter()
                .enumerate()
                .map(|(m, slot)| if slot.power == 0 { 0.0 } else { self.angles[m][slot.angle] })
                .collect();
            if s.iter().all(|&a| a == 0.0) && key.iter().all(|sl| sl.power == 0) {
                continue;
            }
            if !out.iter().any(|o| o.iter().zip(&s).all(|(a, b)| a.to_bits() == b.to_bits())) {
                out.push(s);
            }
        }
        out
    }

    pub fn to_polynomial(&self) -> OperatorPolynomial {
        let n = self.n_modes();
        let terms = self
            .terms
            .iter()
            .map(|(key, c)| {
                let mut factors = Vec::new();
                for (mode, slot) in key.iter().enumerate() {
                    let theta = self.angles[mode][slot.angle];
                    factors.extend((0..slot.power).map(|_| Factor::new(mode, Symbol::Quad(theta))));
                }
                Term {
                    coeff: C64::new(*c, 0.0),
                    factors,
                }
            })
            .collect();
        OperatorPolynomial::from_terms(n, terms).expect("slots stay within the mode range")
    }
}

/// Quadrature form of a parity-free canonical polynomial.
///
/// `angles` overrides the per-mode angle preference list; by default
/// [`preferred_angles`] is used on every mode.
pub fn quadrature_form(nf: &NormalForm, angles: Option<&[Vec<f64>]>) -> Result<QuadratureForm> {
    if nf.has_parity() {
        return Err(Error::UnsupportedShape("parity terms cannot be written with quadratures".into()));
    }
    let n = nf.n_modes();
    let degrees = nf.mode_degrees();
    let tables: Vec<Vec<f64>> = match angles {
        Some(a) => {
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.len(),
                });
            }
            a.to_vec()
        }
        None => degrees.iter().map(|&d| preferred_angles(d as usize + 1)).collect(),
    };
    let systems: Vec<Arc<AngleSystem>> = degrees
        .iter()
        .zip(&tables)
        .map(|(&d, t)| system(d, t))
        .collect::<Result<_>>()?;

    // expand one mode at a time; each stage keys the transformed prefix by slots
    let mut memo: Vec<HashMap<Mono, Expansion>> = vec![HashMap::new(); n];
    let mut acc: BTreeMap<Vec<QuadSlot>, C64> = BTreeMap::new();
    for (key, c) in nf.terms() {
        let mut partial: Vec<(Vec<QuadSlot>, C64)> = vec![(Vec::with_capacity(n), *c)];
        for (mode, mono) in key.iter().enumerate() {
            if !memo[mode].contains_key(mono) {
                let e = systems[mode].expand(*mono)?;
                memo[mode].insert(*mono, e);
            }
            let exp = &memo[mode][mono];
            let mut next = Vec::with_capacity(partial.len() * exp.len());
            for (slots, v) in &partial {
                for &((d, l), w) in exp {
                    let mut s = slots.clone();
                    s.push(QuadSlot {
                        angle: if d == 0 { 0 } else { l },
                        power: d,
                    });
                    next.push((s, v * w));
                }
            }
            partial = next;
        }
        for (s, v) in partial {
            *acc.entry(s).or_default() += v;
        }
    }
    let scale = acc.values().map(|v| v.norm()).fold(0.0, f64::max);
    let mut terms = BTreeMap::new();
    for (k, v) in acc {
        if v.norm() <= 1e-12 * scale.max(1.0) {
            continue;
        }
        if v.im.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::NotHermitian(format!(
                "quadrature coefficient {v} is not real"
            )));
        }
        terms.insert(k, v.re);
    }
    Ok(QuadratureForm {
        angles: tables,
        terms,
    })
}

/// Rewrites a Hermitian polynomial into rotated-quadrature powers.
pub fn rewrite_quadrature_form(poly: &OperatorPolynomial) -> Result<OperatorPolynomial> {
    Ok(quadrature_form(&poly.normal_form(), None)?.to_polynomial())
}

/// Same as [`rewrite_quadrature_form`] with explicit per-mode angle preferences.
pub fn rewrite_quadrature_form_with(poly: &OperatorPolynomial, angles: &[Vec<f64>]) -> Result<OperatorPolynomial> {
    Ok(quadrature_form(&poly.normal_form(), Some(angles))?.to_polynomial())
}
