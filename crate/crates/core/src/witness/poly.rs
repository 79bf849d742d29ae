//! Noncommutative polynomials in per-mode ladder, quadrature, number and parity symbols.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::fock::C64;
use crate::{Error, Result};

/// One operator symbol acting on a single mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    /// â
    A,
    /// â†
    Adag,
    /// x̂_θ = cos θ·x̂ + sin θ·p̂
    Quad(f64),
    /// n̂ = â†â
    Number,
    /// (−1)^n̂
    Parity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factor {
    pub mode: usize,
    pub symbol: Symbol,
}

impl Factor {
    pub fn new(mode: usize, symbol: Symbol) -> Self {
        Self { mode, symbol }
    }
}

/// Coefficient times an ordered product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub factors: Vec<Factor>,
}

/// Sum of terms whose factor lists keep operator order.
///
/// Multiplication concatenates factor lists without reordering; [`normal_form`]
/// canonicalizes using `[â, â†] = 1`.
///
/// [`normal_form`]: OperatorPolynomial::normal_form
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPolynomial {
    n_modes: usize,
    terms: Vec<Term>,
}

impl OperatorPolynomial {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::constant(n_modes, C64::new(1.0, 0.0))
    }

    pub fn constant(n_modes: usize, c: C64) -> Self {
        Self {
            n_modes,
            terms: vec![Term {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    pub fn symbol(n_modes: usize, mode: usize, symbol: Symbol) -> Self {
        assert!(mode < n_modes, "mode {mode} out of range for {n_modes} modes");
        Self {
            n_modes,
            terms: vec![Term {
                coeff: C64::new(1.0, 0.0),
                factors: vec![Factor::new(mode, symbol)],
            }],
        }
    }

    pub fn from_terms(n_modes: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            for f in &t.factors {
                if f.mode >= n_modes {
                    return Err(Error::InvalidComposition(format!(
                        "factor on mode {} in a {n_modes}-mode polynomial",
                        f.mode
                    )));
                }
            }
        }
        Ok(Self { n_modes, terms })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scale(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n_modes);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Reverses factor order, conjugates coefficients and daggers every symbol.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                factors: t
                    .factors
                    .iter()
                    .rev()
                    .map(|f| Factor {
                        mode: f.mode,
                        symbol: match f.symbol {
                            Symbol::A => Symbol::Adag,
                            Symbol::Adag => Symbol::A,
                            s => s,
                        },
                    })
                    .collect(),
            })
            .collect();
        Self {
            n_modes: self.n_modes,
            terms,
        }
    }

    pub fn normal_form(&self) -> NormalForm {
        let mut out = NormalForm::zero(self.n_modes);
        for t in &self.terms {
            let mut prod = NormalForm::constant(self.n_modes, t.coeff);
            for f in &t.factors {
                prod = prod.mul(&NormalForm::factor(self.n_modes, *f));
            }
            out.add_assign(&prod);
        }
        out.prune(0.0);
        out
    }

    /// Symbolic Hermiticity check on the canonical form.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.normal_form().is_hermitian(tol)
    }

    /// Largest symbol count in any term.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0)
    }
}

fn check_modes(a: usize, b: usize) {
    assert_eq!(a, b, "polynomials act on different numbers of modes");
}

impl Add for &OperatorPolynomial {
    type Output = OperatorPolynomial;
    fn add(self, rhs: &OperatorPolynomial) -> OperatorPolynomial {
        check_modes(self.n_modes, rhs.n_modes);
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        OperatorPolynomial {
            n_modes: self.n_modes,
            terms,
        }
    }
}

impl Sub for &OperatorPolynomial {
    type Output = OperatorPolynomial;
    fn sub(self, rhs: &OperatorPolynomial) -> OperatorPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &OperatorPolynomial {
    type Output = OperatorPolynomial;
    fn neg(self) -> OperatorPolynomial {
        self.clone().scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &OperatorPolynomial {
    type Output = OperatorPolynomial;
    fn mul(self, rhs: &OperatorPolynomial) -> OperatorPolynomial {
        check_modes(self.n_modes, rhs.n_modes);
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        OperatorPolynomial {
            n_modes: self.n_modes,
            terms,
        }
    }
}

// ---------------------------------------------------------------------------
// canonical forms

/// `Π^parity · â†^cre · â^ann` on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono {
    pub parity: bool,
    pub cre: u32,
    pub ann: u32,
}

impl Mono {
    pub const ONE: Mono = Mono {
        parity: false,
        cre: 0,
        ann: 0,
    };

    pub fn ladder(cre: u32, ann: u32) -> Self {
        Self {
            parity: false,
            cre,
            ann,
        }
    }

    pub fn degree(&self) -> u32 {
        self.cre + self.ann
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(Π^p₁ â†^j₁ â^k₁)(Π^p₂ â†^j₂ â^k₂)` as a normal-ordered sum.
fn mono_product(x: Mono, y: Mono) -> Vec<(Mono, f64)> {
    let sign = if y.parity && (x.cre + x.ann) % 2 == 1 { -1.0 } else { 1.0 };
    let parity = x.parity ^ y.parity;
    let top = x.ann.min(y.cre);
    (0..=top)
        .map(|i| {
            let c = binomial(x.ann, i) * binomial(y.cre, i) * factorial(i);
            (
                Mono {
                    parity,
                    cre: x.cre + y.cre - i,
                    ann: x.ann + y.ann - i,
                },
                sign * c,
            )
        })
        .collect()
}

/// Per-mode monomial key of a multimode canonical term.
pub type Key = Vec<Mono>;

/// Normal-ordered canonical polynomial: coefficient per multimode key.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    n_modes: usize,
    terms: BTreeMap<Key, C64>,
}

impl NormalForm {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_modes: usize, c: C64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![Mono::ONE; n_modes], c);
        Self { n_modes, terms }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::constant(n_modes, C64::new(1.0, 0.0))
    }

    pub fn mono(n_modes: usize, mode: usize, m: Mono, c: C64) -> Self {
        let mut key = vec![Mono::ONE; n_modes];
        key[mode] = m;
        let mut terms = BTreeMap::new();
        terms.insert(key, c);
        Self { n_modes, terms }
    }

    pub fn factor(n_modes: usize, f: Factor) -> Self {
        let one = C64::new(1.0, 0.0);
        match f.symbol {
            Symbol::A => Self::mono(n_modes, f.mode, Mono::ladder(0, 1), one),
            Symbol::Adag => Self::mono(n_modes, f.mode, Mono::ladder(1, 0), one),
            Symbol::Number => Self::mono(n_modes, f.mode, Mono::ladder(1, 1), one),
            Symbol::Parity => Self::mono(
                n_modes,
                f.mode,
                Mono {
                    parity: true,
                    cre: 0,
                    ann: 0,
                },
                one,
            ),
            Symbol::Quad(theta) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut out = Self::mono(n_modes, f.mode, Mono::ladder(0, 1), C64::from_polar(s, -theta));
                out.add_assign(&Self::mono(n_modes, f.mode, Mono::ladder(1, 0), C64::from_polar(s, theta)));
                out
            }
        }
    }

    /// `x̂` on one mode.
    pub fn x(n_modes: usize, mode: usize) -> Self {
        Self::factor(n_modes, Factor::new(mode, Symbol::Quad(0.0)))
    }

    /// `p̂` on one mode.
    pub fn p(n_modes: usize, mode: usize) -> Self {
        Self::factor(n_modes, Factor::new(mode, Symbol::Quad(std::f64::consts::FRAC_PI_2)))
    }

    pub fn a(n_modes: usize, mode: usize) -> Self {
        Self::factor(n_modes, Factor::new(mode, Symbol::A))
    }

    pub fn adag(n_modes: usize, mode: usize) -> Self {
        Self::factor(n_modes, Factor::new(mode, Symbol::Adag))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &BTreeMap<Key, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &[Mono]) -> C64 {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> C64 {
        self.coeff(&vec![Mono::ONE; self.n_modes])
    }

    pub fn insert_add(&mut self, key: Key, c: C64) {
        *self.terms.entry(key).or_default() += c;
    }

    pub fn add_assign(&mut self, other: &NormalForm) {
        check_modes(self.n_modes, other.n_modes);
        for (k, c) in &other.terms {
            self.insert_add(k.clone(), *c);
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &NormalForm) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out.terms.retain(|_, c| c.norm() > 0.0);
        out
    }

    pub fn sub(&self, other: &NormalForm) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn add_constant(&self, c: C64) -> Self {
        self.add(&NormalForm::constant(self.n_modes, c))
    }

    pub fn mul(&self, other: &NormalForm) -> Self {
        check_modes(self.n_modes, other.n_modes);
        let mut out: BTreeMap<Key, C64> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let base = ca * cb;
                if base == C64::new(0.0, 0.0) {
                    continue;
                }
                let per_mode: Vec<Vec<(Mono, f64)>> =
                    ka.iter().zip(kb).map(|(x, y)| mono_product(*x, *y)).collect();
                let mut key = vec![Mono::ONE; self.n_modes];
                expand_into(&per_mode, 0, &mut key, base, &mut out);
            }
        }
        let mut nf = Self {
            n_modes: self.n_modes,
            terms: out,
        };
        nf.prune(0.0);
        nf
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n_modes);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_modes);
        for (k, c) in &self.terms {
            let mut sign = 1.0;
            let key: Key = k
                .iter()
                .map(|m| {
                    if m.parity && (m.cre + m.ann) % 2 == 1 {
                        sign = -sign;
                    }
                    Mono {
                        parity: m.parity,
                        cre: m.ann,
                        ann: m.cre,
                    }
                })
                .collect();
            out.insert_add(key, c.conj() * sign);
        }
        out
    }

    /// Drops coefficients with magnitude ≤ `tol` times the largest magnitude.
    pub fn prune(&mut self, tol: f64) {
        let scale = self.max_abs_coeff();
        let cut = tol * scale;
        self.terms.retain(|_, c| c.norm() > cut);
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of `self − other`.
    pub fn distance(&self, other: &NormalForm) -> f64 {
        self.sub(other).max_abs_coeff()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol * self.max_abs_coeff().max(1.0)
    }

    pub fn has_parity(&self) -> bool {
        self.terms.keys().any(|k| k.iter().any(|m| m.parity))
    }

    /// Total ladder degree per mode.
    pub fn mode_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n_modes];
        for k in self.terms.keys() {
            for (i, m) in k.iter().enumerate() {
                d[i] = d[i].max(m.degree());
            }
        }
        d
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(|m| m.degree()).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Substitutes each mode's `â` by a linear form `u·â + v·â†` (and `â†` by its adjoint).
    pub fn substitute_linear(&self, maps: &[(C64, C64)]) -> Result<Self> {
        if maps.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                found: maps.len(),
            });
        }
        let n = self.n_modes;
        let mut out = Self::zero(n);
        for (key, c) in &self.terms {
            let mut prod = Self::constant(n, *c);
            for (mode, m) in key.iter().enumerate() {
                if m.parity {
                    return Err(Error::UnsupportedShape("cannot substitute into a parity factor".into()));
                }
                let (u, v) = maps[mode];
                let a = Self::a(n, mode).scaled(u).add(&Self::adag(n, mode).scaled(v));
                let ad = Self::adag(n, mode).scaled(u.conj()).add(&Self::a(n, mode).scaled(v.conj()));
                prod = prod.mul(&ad.pow(m.cre)).mul(&a.pow(m.ann));
            }
            out.add_assign(&prod);
        }
        out.prune(0.0);
        Ok(out)
    }

    /// Expresses the canonical form as an ordered-factor polynomial
    /// `[Π] â† … â† â … â` per mode, modes ascending.
    pub fn to_polynomial(&self) -> OperatorPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(key, c)| {
                let mut factors = Vec::new();
                for (mode, m) in key.iter().enumerate() {
                    if m.parity {
                        factors.push(Factor::new(mode, Symbol::Parity));
                    }
                    factors.extend((0..m.cre).map(|_| Factor::new(mode, Symbol::Adag)));
                    factors.extend((0..m.ann).map(|_| Factor::new(mode, Symbol::A)));
                }
                Term { coeff: *c, factors }
            })
            .collect();
        OperatorPolynomial {
            n_modes: self.n_modes,
            terms,
        }
    }
}

fn expand_into(
    per_mode: &[Vec<(Mono, f64)>],
    mode: usize,
    key: &mut Key,
    coeff: C64,
    out: &mut BTreeMap<Key, C64>,
) {
    if mode == per_mode.len() {
        *out.entry(key.clone()).or_default() += coeff;
        return;
    }
    for (m, c) in &per_mode[mode] {
        key[mode] = *m;
        expand_into(per_mode, mode + 1, key, coeff * *c, out);
    }
}

// ---------------------------------------------------------------------------
// anti-normal order

/// `Π^parity · â^ann · â†^cre` on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AntiMono {
    pub parity: bool,
    pub ann: u32,
    pub cre: u32,
}

/// Anti-normal-ordered canonical polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiNormalForm {
    n_modes: usize,
    terms: BTreeMap<Vec<AntiMono>, C64>,
}

/// `â†^j â^k = Σᵢ (−1)ⁱ C(j,i) C(k,i) i! â^{k−i} â†^{j−i}`.
fn normal_to_anti(m: Mono) -> Vec<(AntiMono, f64)> {
    (0..=m.cre.min(m.ann))
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (
                AntiMono {
                    parity: m.parity,
                    ann: m.ann - i,
                    cre: m.cre - i,
                },
                sign * binomial(m.cre, i) * binomial(m.ann, i) * factorial(i),
            )
        })
        .collect()
}

/// `â^k â†^j = Σᵢ C(k,i) C(j,i) i! â†^{j−i} â^{k−i}`.
fn anti_to_normal(m: AntiMono) -> Vec<(Mono, f64)> {
    (0..=m.cre.min(m.ann))
        .map(|i| {
            (
                Mono {
                    parity: m.parity,
                    cre: m.cre - i,
                    ann: m.ann - i,
                },
                binomial(m.cre, i) * binomial(m.ann, i) * factorial(i),
            )
        })
        .collect()
}

impl AntiNormalForm {
    pub fn from_normal(nf: &NormalForm) -> Self {
        let mut terms: BTreeMap<Vec<AntiMono>, C64> = BTreeMap::new();
        for (key, c) in nf.terms() {
            let per_mode: Vec<Vec<(AntiMono, f64)>> = key.iter().map(|m| normal_to_anti(*m)).collect();
            let mut k = vec![AntiMono::default(); nf.n_modes()];
            expand_anti(&per_mode, 0, &mut k, *c, &mut terms);
        }
        terms.retain(|_, c| c.norm() > 0.0);
        Self {
            n_modes: nf.n_modes(),
            terms,
        }
    }

    pub fn from_terms(n_modes: usize, mut terms: BTreeMap<Vec<AntiMono>, C64>) -> Self {
        terms.retain(|_, c| c.norm() > 0.0);
        Self { n_modes, terms }
    }

    pub fn to_normal(&self) -> NormalForm {
        let mut out = NormalForm::zero(self.n_modes);
        for (key, c) in &self.terms {
            let per_mode: Vec<Vec<(Mono, f64)>> = key.iter().map(|m| anti_to_normal(*m)).collect();
            let mut k = vec![Mono::ONE; self.n_modes];
            expand_into(&per_mode, 0, &mut k, *c, &mut out.terms);
        }
        out.prune(0.0);
        out
    }

    pub fn terms(&self) -> &BTreeMap<Vec<AntiMono>, C64> {
        &self.terms
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coeff(&self, key: &[AntiMono]) -> C64 {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    /// Ordered-factor form `[Π] â … â â† … â†` per mode.
    pub fn to_polynomial(&self) -> OperatorPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(key, c)| {
                let mut factors = Vec::new();
                for (mode, m) in key.iter().enumerate() {
                    if m.parity {
                        factors.push(Factor::new(mode, Symbol::Parity));
                    }
                    factors.extend((0..m.ann).map(|_| Factor::new(mode, Symbol::A)));
                    factors.extend((0..m.cre).map(|_| Factor::new(mode, Symbol::Adag)));
                }
                Term { coeff: *c, factors }
            })
            .collect();
        OperatorPolynomial {
            n_modes: self.n_modes,
            terms,
        }
    }
}

fn expand_anti(
    per_mode: &[Vec<(AntiMono, f64)>],
    mode: usize,
    key: &mut Vec<AntiMono>,
    coeff: C64,
    out: &mut BTreeMap<Vec<AntiMono>, C64>,
) {
    if mode == per_mode.len() {
        *out.entry(key.clone()).or_default() += coeff;
        return;
    }
    for (m, c) in &per_mode[mode] {
        key[mode] = *m;
        expand_anti(per_mode, mode + 1, key, coeff * *c, out);
    }
}

/// Rewrites every term in anti-normal order (all â left of all â† on each mode).
pub fn rewrite_antinormal(poly: &OperatorPolynomial) -> OperatorPolynomial {
    AntiNormalForm::from_normal(&poly.normal_form()).to_polynomial()
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct FactorDoc {
    mode: usize,
    symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coeff: [f64; 2],
    factors: Vec<FactorDoc>,
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    n_modes: usize,
    terms: Vec<TermDoc>,
}

impl Serialize for OperatorPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyDoc {
            n_modes: self.n_modes,
            terms: self
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: [t.coeff.re, t.coeff.im],
                    factors: t
                        .factors
                        .iter()
                        .map(|f| {
                            let (symbol, param) = match f.symbol {
                                Symbol::A => ("a", None),
                                Symbol::Adag => ("a_dag", None),
                                Symbol::Quad(t) => ("x_theta", Some(t)),
                                Symbol::Number => ("n", None),
                                Symbol::Parity => ("parity", None),
                            };
                            FactorDoc {
                                mode: f.mode,
                                symbol: symbol.into(),
                                param,
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = PolyDoc::deserialize(d)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let mut factors = Vec::with_capacity(t.factors.len());
            for f in t.factors {
                let symbol = match (f.symbol.as_str(), f.param) {
                    ("a", None) => Symbol::A,
                    ("a_dag", None) => Symbol::Adag,
                    ("x_theta", Some(theta)) => Symbol::Quad(theta),
                    ("n", None) => Symbol::Number,
                    ("parity", None) => Symbol::Parity,
                    (s, p) => return Err(D::Error::custom(format!("unknown factor {s} with param {p:?}"))),
                };
                factors.push(Factor::new(f.mode, symbol));
            }
            terms.push(Term {
                coeff: C64::new(t.coeff[0], t.coeff[1]),
                factors,
            });
        }
        OperatorPolynomial::from_terms(doc.n_modes, terms).map_err(D::Error::custom)
    }
}
