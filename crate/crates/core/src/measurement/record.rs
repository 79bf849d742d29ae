use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::fock::C64;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    Homodyne,
    Heterodyne,
    Parity,
}

/// Row-major `shots × n_modes` outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "values", rename_all = "snake_case")]
pub enum Outcomes {
    Real(Vec<f64>),
    Complex(Vec<C64>),
    Parity(Vec<i8>),
}

impl Outcomes {
    pub fn len(&self) -> usize {
        match self {
            Outcomes::Real(v) => v.len(),
            Outcomes::Complex(v) => v.len(),
            Outcomes::Parity(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub kind: MeasurementKind,
    /// Homodyne angles per mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<f64>>,
    pub n_modes: usize,
    pub shots: usize,
    pub seed: u64,
    pub outcomes: Outcomes,
}

impl MeasurementRecord {
    pub fn real_shot(&self, shot: usize) -> &[f64] {
        match &self.outcomes {
            Outcomes::Real(v) => &v[shot * self.n_modes..(shot + 1) * self.n_modes],
            _ => &[],
        }
    }

    pub fn complex_shot(&self, shot: usize) -> &[C64] {
        match &self.outcomes {
            Outcomes::Complex(v) => &v[shot * self.n_modes..(shot + 1) * self.n_modes],
            _ => &[],
        }
    }

    pub fn parity_shot(&self, shot: usize) -> &[i8] {
        match &self.outcomes {
            Outcomes::Parity(v) => &v[shot * self.n_modes..(shot + 1) * self.n_modes],
            _ => &[],
        }
    }

    /// Outcomes of one mode, real part only for heterodyne.
    pub fn mode_values(&self, mode: usize) -> Vec<f64> {
        (0..self.shots)
            .map(|s| match &self.outcomes {
                Outcomes::Real(v) => v[s * self.n_modes + mode],
                Outcomes::Complex(v) => v[s * self.n_modes + mode].re,
                Outcomes::Parity(v) => v[s * self.n_modes + mode] as f64,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.outcomes.len() != self.shots * self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.shots * self.n_modes,
                found: self.outcomes.len(),
            });
        }
        let consistent = matches!(
            (self.kind, &self.outcomes),
            (MeasurementKind::Homodyne, Outcomes::Real(_))
                | (MeasurementKind::Heterodyne, Outcomes::Complex(_))
                | (MeasurementKind::Parity, Outcomes::Parity(_))
        );
        if !consistent {
            return Err(invalid("outcomes", "outcome type does not match the measurement kind"));
        }
        Ok(())
    }

    fn header(&self) -> String {
        let kind = serde_json::to_value(self.kind).expect("enum serializes");
        let settings = self
            .settings
            .as_ref()
            .map(|s| s.iter().map(|a| format!("{a:.16e}")).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        format!(
            "# kind={} settings={} seed={} shots={} n_modes={}",
            kind.as_str().unwrap_or_default(),
            settings,
            self.seed,
            self.shots,
            self.n_modes
        )
    }

    /// CSV: one comment line with kind/settings/seed, a column header, one row per shot.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header())?;
        let mut w = csv::Writer::from_writer(out);
        let mut cols = vec!["shot".to_string()];
        for m in 0..self.n_modes {
            match self.kind {
                MeasurementKind::Heterodyne => {
                    cols.push(format!("mode{m}_re"));
                    cols.push(format!("mode{m}_im"));
                }
                _ => cols.push(format!("mode{m}")),
            }
        }
        w.write_record(&cols).map_err(csv_err)?;
        for s in 0..self.shots {
            let mut row = vec![s.to_string()];
            match &self.outcomes {
                Outcomes::Real(_) => row.extend(self.real_shot(s).iter().map(|x| format!("{x:.16e}"))),
                Outcomes::Complex(_) => {
                    for a in self.complex_shot(s) {
                        row.push(format!("{:.16e}", a.re));
                        row.push(format!("{:.16e}", a.im));
                    }
                }
                Outcomes::Parity(_) => row.extend(self.parity_shot(s).iter().map(|x| x.to_string())),
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(Error::from)
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let meta = first.trim().strip_prefix("# ").ok_or_else(|| invalid("csv", "missing metadata line"))?;
        let mut kind = None;
        let mut settings = None;
        let (mut seed, mut shots, mut n_modes) = (None, None, None);
        for field in meta.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| invalid("csv", format!("bad metadata field {field}")))?;
            let bad = |_| invalid("csv", format!("bad value in {field}"));
            match k {
                "kind" => kind = Some(serde_json::from_value(serde_json::Value::String(v.into()))?),
                "settings" if !v.is_empty() => {
                    settings = Some(v.split(';').map(|a| a.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| invalid("csv", "bad angle"))?)
                }
                "settings" => {}
                "seed" => seed = Some(v.parse().map_err(bad)?),
                "shots" => shots = Some(v.parse().map_err(bad)?),
                "n_modes" => n_modes = Some(v.parse().map_err(bad)?),
                _ => return Err(invalid("csv", format!("unknown metadata key {k}"))),
            }
        }
        let kind: MeasurementKind = kind.ok_or_else(|| invalid("csv", "missing kind"))?;
        let n_modes: usize = n_modes.ok_or_else(|| invalid("csv", "missing n_modes"))?;
        let mut r = csv::Reader::from_reader(input);
        let parse = |s: &str| s.parse::<f64>().map_err(|_| invalid("csv", format!("bad number {s}")));
        let mut real = Vec::new();
        let mut cplx = Vec::new();
        let mut par = Vec::new();
        for row in r.records() {
            let row = row.map_err(csv_err)?;
            let vals: Vec<&str> = row.iter().skip(1).collect();
            match kind {
                MeasurementKind::Homodyne => for v in vals { real.push(parse(v)?) },
                MeasurementKind::Heterodyne => {
                    for pair in vals.chunks(2) {
                        cplx.push(C64::new(parse(pair[0])?, parse(pair[1])?));
                    }
                }
                MeasurementKind::Parity => {
                    for v in vals {
                        par.push(v.parse::<i8>().map_err(|_| invalid("csv", format!("bad parity {v}")))?)
                    }
                }
            }
        }
        let outcomes = match kind {
            MeasurementKind::Homodyne => Outcomes::Real(real),
            MeasurementKind::Heterodyne => Outcomes::Complex(cplx),
            MeasurementKind::Parity => Outcomes::Parity(par),
        };
        let rec = Self {
            kind,
            settings,
            n_modes,
            shots: shots.ok_or_else(|| invalid("csv", "missing shots"))?,
            seed: seed.ok_or_else(|| invalid("csv", "missing seed"))?,
            outcomes,
        };
        rec.validate()?;
        Ok(rec)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// `(bin_left, count)` pairs over `[min, max)` with the given bin width.
pub fn histogram(values: &[f64], bin_width: f64) -> Vec<(f64, u64)> {
    if values.is_empty() || !(bin_width > 0.0) {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let start = (lo / bin_width).floor() * bin_width;
    let bins = (((hi - start) / bin_width).floor() as usize) + 1;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = (((v - start) / bin_width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (start + i as f64 * bin_width, c))
        .collect()
}
