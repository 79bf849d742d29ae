use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::fock::C64;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatFamily {
    TwoComponent,
    FourComponent,
    SqueezedTwoComponent,
}

/// Cat code parameters. `r` is ignored unless the family is squeezed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatParams {
    pub alpha: C64,
    #[serde(default)]
    pub r: C64,
    pub family: CatFamily,
}

impl CatParams {
    pub fn two(alpha: f64) -> Self {
        Self {
            alpha: C64::new(alpha, 0.0),
            r: C64::new(0.0, 0.0),
            family: CatFamily::TwoComponent,
        }
    }

    pub fn four(alpha: f64) -> Self {
        Self {
            family: CatFamily::FourComponent,
            ..Self::two(alpha)
        }
    }

    pub fn squeezed(alpha: f64, r: f64) -> Self {
        Self {
            alpha: C64::new(alpha, 0.0),
            r: C64::new(r, 0.0),
            family: CatFamily::SqueezedTwoComponent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(invalid("alpha", "must be finite"));
        }
        match self.family {
            CatFamily::SqueezedTwoComponent => {
                if !(self.r.re.is_finite() && self.r.im.is_finite()) {
                    return Err(invalid("r", "must be finite"));
                }
                if self.r.norm() > 0.0 && self.alpha.norm() > 0.0 {
                    let want = self.alpha.arg() / 2.0;
                    let tau = 2.0 * std::f64::consts::PI;
                    let diff = (self.r.arg() - want).rem_euclid(tau);
                    if diff.min(tau - diff) > 1e-12 {
                        return Err(invalid(
                            "r",
                            format!("arg(r) = {} must equal arg(alpha)/2 = {want}", self.r.arg()),
                        ));
                    }
                }
            }
            _ => {
                if self.r.norm() != 0.0 {
                    return Err(invalid("r", "only the squeezed family takes a squeezing parameter"));
                }
            }
        }
        Ok(())
    }

    /// Displacement amplitude seen after pulling the squeeze through:
    /// `D(α)S(r) = S(r)D(β)`.
    pub fn squeezed_amplitude(&self) -> C64 {
        let s = self.r.norm();
        let psi = self.r.arg();
        self.alpha * s.cosh() + self.alpha.conj() * C64::from_polar(s.sinh(), psi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GkpLogical {
    Zero,
    One,
    Plus,
}

/// Realistic GKP parameters: peak width `σ` (the position-squeezed vacuum has
/// `⟨x̂²⟩ = σ²/2`), truncation index `m` (peaks with `|x| ≤ m√π` survive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpParams {
    pub sigma: f64,
    pub m: u32,
    pub logical: GkpLogical,
}

impl GkpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(invalid("sigma", format!("{} outside (0, 1)", self.sigma)));
        }
        if self.m > 12 {
            return Err(invalid("m", format!("{} is beyond the supported range 0..=12", self.m)));
        }
        Ok(())
    }

    /// Squeezing parameter of one peak, `e^{−r} = σ`.
    pub fn r(&self) -> f64 {
        (1.0 / self.sigma).ln()
    }

    /// Peak positions (in units of x̂) and their envelope weights `e^{−σ²x²}`.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let m = self.m as i64;
        let sp = std::f64::consts::PI.sqrt();
        (-m..=m)
            .filter(|j| match self.logical {
                GkpLogical::Zero => j.rem_euclid(2) == 0,
                GkpLogical::One => j.rem_euclid(2) == 1,
                GkpLogical::Plus => true,
            })
            .map(|j| {
                let x = j as f64 * sp;
                (x, (-self.sigma * self.sigma * x * x).exp())
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    SqueezedVacuum,
    GkpPlus,
}

/// Graph of a CV cluster state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub mode_kinds: Vec<ModeKind>,
    /// Unordered pairs; stored as given.
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(mode_kinds: Vec<ModeKind>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = Self { mode_kinds, edges };
        g.validate()?;
        Ok(g)
    }

    /// Path graph `0 − 1 − … − (n−1)`.
    pub fn linear(mode_kinds: Vec<ModeKind>) -> Self {
        let edges = (1..mode_kinds.len()).map(|i| (i - 1, i)).collect();
        Self { mode_kinds, edges }
    }

    pub fn n_modes(&self) -> usize {
        self.mode_kinds.len()
    }

    pub fn n_squeezed(&self) -> usize {
        self.mode_kinds.iter().filter(|k| **k == ModeKind::SqueezedVacuum).count()
    }

    pub fn n_gkp(&self) -> usize {
        self.mode_kinds.iter().filter(|k| **k == ModeKind::GkpPlus).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode_kinds.is_empty() {
            return Err(invalid("mode_kinds", "graph needs at least one mode"));
        }
        let n = self.n_modes();
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j) in &self.edges {
            if i >= n || j >= n {
                return Err(invalid("edges", format!("edge ({i}, {j}) references a mode ≥ {n}")));
            }
            if i == j {
                return Err(invalid("edges", format!("self-loop on mode {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(invalid("edges", format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(())
    }

    pub fn neighbours(&self, mode: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(i, j)| {
                if i == mode {
                    Some(j)
                } else if j == mode {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Largest neighbourhood size.
    pub fn max_degree(&self) -> usize {
        (0..self.n_modes()).map(|i| self.neighbours(i).len()).max().unwrap_or(0)
    }
}

/// IQP circuit: CZ on every graph edge plus per-mode Z and T counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqpCircuitSpec {
    pub graph: GraphSpec,
    pub n_z: Vec<u32>,
    pub n_t: Vec<u32>,
}

impl IqpCircuitSpec {
    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let n = self.graph.n_modes();
        if self.n_z.len() != n {
            return Err(invalid("n_z", format!("needs {n} entries, got {}", self.n_z.len())));
        }
        if self.n_t.len() != n {
            return Err(invalid("n_t", format!("needs {n} entries, got {}", self.n_t.len())));
        }
        Ok(())
    }

    pub fn n_cz(&self, mode: usize) -> usize {
        self.graph.neighbours(mode).len()
    }
}

/// Input widths shared by cluster and IQP constructions and their witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceParams {
    /// GKP peak width.
    pub sigma: f64,
    /// GKP truncation index.
    pub m: u32,
    /// Squeezing of the momentum-squeezed inputs, `⟨p̂²⟩ = e^{−2r}/2`.
    pub squeezing_r: f64,
}

impl ResourceParams {
    /// Same width for every input, `e^{−r} = σ`.
    pub fn uniform(sigma: f64, m: u32) -> Self {
        Self {
            sigma,
            m,
            squeezing_r: (1.0 / sigma).ln(),
        }
    }

    pub fn gkp_plus(&self) -> GkpParams {
        GkpParams {
            sigma: self.sigma,
            m: self.m,
            logical: GkpLogical::Plus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gkp_plus().validate()?;
        if !(self.squeezing_r.is_finite() && self.squeezing_r >= 0.0 && self.squeezing_r <= 3.0) {
            return Err(invalid("squeezing_r", format!("{} outside [0, 3]", self.squeezing_r)));
        }
        Ok(())
    }
}
