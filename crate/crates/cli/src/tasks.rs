//! One function per task; each returns the artifacts it wrote.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bosonic_cert::certifier::{
    certify, oracle_moment_bounds, sample_complexity_iqp, sample_complexity_resource, witness_decomposition,
    ComplexityParams,
};
use bosonic_cert::fock::{eigendecompose, DensityMatrix, FockVector, StateRef};
use bosonic_cert::measurement::{heterodyne_sample_with, histogram, homodyne_sample_with, parity_sample_with, MeasurementRecord};
use bosonic_cert::states::{apply_loss, TruncationGuard};
use bosonic_cert::witness::{lower_normal_form, MeasurementSetting, WitnessSpec};
use serde::Serialize;

use crate::config::{require, ExperimentConfig, SampleMeasurement, StateConfig, Task};
use crate::error::CliError;

/// Largest operator dimension the witness report diagonalizes.
pub const SPECTRUM_DIM_LIMIT: usize = 1024;
/// Eigenvalues within this distance of 1 count towards the code eigenspace.
pub const SPECTRUM_TOL: f64 = 1e-6;
/// Cutoff used for a single-mode spectrum when the config gives none.
pub const DEFAULT_SPECTRUM_CUTOFF: usize = 60;

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub out: &'a Path,
    pub seed: u64,
    pub guard: TruncationGuard,
}

enum Prepared {
    Pure(FockVector),
    Mixed(DensityMatrix),
}

impl Prepared {
    fn as_ref(&self) -> StateRef<'_> {
        match self {
            Prepared::Pure(v) => v.into(),
            Prepared::Mixed(m) => m.into(),
        }
    }
}

fn prepare(state: &StateConfig, cutoff: usize, guard: TruncationGuard) -> Result<Prepared, CliError> {
    let pure = state.build(cutoff, guard)?;
    Ok(match state.loss {
        Some(eta) if eta < 1.0 => Prepared::Mixed(apply_loss(&pure, eta)?),
        _ => Prepared::Pure(pure),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn run(ctx: &Context<'_>) -> Result<Vec<PathBuf>, CliError> {
    match ctx.config.task {
        Task::Certify => run_certify(ctx),
        Task::WitnessReport => run_witness_report(ctx),
        Task::Complexity => run_complexity(ctx),
        Task::SampleDump => run_sample_dump(ctx),
    }
}

fn run_certify(ctx: &Context<'_>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ctx.config;
    let task = cfg.task;
    let cutoff = *require(&cfg.cutoff, "cutoff", task)?;
    let state = prepare(require(&cfg.state, "state", task)?, cutoff, ctx.guard)?;
    let spec = require(&cfg.witness, "witness", task)?;
    let mut opts = cfg.certify.clone();
    opts.guard = ctx.guard;
    let eps = *require(&cfg.epsilon, "epsilon", task)?;
    let delta = *require(&cfg.delta, "delta", task)?;
    let report = certify(state.as_ref(), spec, eps, delta, ctx.seed, &opts)?;
    let path = ctx.out.join(&cfg.outputs.report);
    write_json(&path, &report)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct SpectrumSummary {
    cutoff: usize,
    max_eigenvalue: f64,
    code_eigenspace_dimension: usize,
    tolerance: f64,
}

#[derive(Serialize)]
struct DecompositionSummary {
    strategy: bosonic_cert::witness::Strategy,
    n_terms: usize,
    max_abs_lambda: f64,
    lambda_l1: f64,
    settings: Vec<MeasurementSetting>,
}

#[derive(Serialize)]
struct WitnessReport {
    witness: WitnessSpec,
    n_modes: usize,
    polynomial_terms: usize,
    normal_ordered_terms: usize,
    degree: u32,
    /// `(n+2)^{4m+2}` for resource and IQP witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    term_bound: Option<f64>,
    decomposition: DecompositionSummary,
    spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum_skipped: Option<String>,
}

fn term_bound(spec: &WitnessSpec) -> Option<f64> {
    let (n, m) = match spec {
        WitnessSpec::Resource { graph, resource } => (graph.n_modes(), resource.m),
        WitnessSpec::Iqp { circuit, resource } => (circuit.graph.n_modes(), resource.m),
        _ => return None,
    };
    Some(((n + 2) as f64).powi(4 * m as i32 + 2))
}

fn run_witness_report(ctx: &Context<'_>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ctx.config;
    let spec = require(&cfg.witness, "witness", cfg.task)?;
    let w = spec.build()?;
    let strategy = cfg.certify.strategy;
    let decomp = witness_decomposition(spec, strategy, cfg.certify.angles.as_deref())?;
    let n_modes = spec.n_modes();
    let cutoff = cfg.cutoff.unwrap_or(DEFAULT_SPECTRUM_CUTOFF);
    let dim = (cutoff as f64).powi(n_modes as i32);
    let (spectrum, spectrum_skipped) = if n_modes == 1 || dim <= SPECTRUM_DIM_LIMIT as f64 {
        let e = eigendecompose(&lower_normal_form(&w.normal, cutoff)?)?;
        let max = e.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let summary = SpectrumSummary {
            cutoff,
            max_eigenvalue: max,
            code_eigenspace_dimension: e.count_in(1.0 - SPECTRUM_TOL, 1.0 + SPECTRUM_TOL),
            tolerance: SPECTRUM_TOL,
        };
        (Some(summary), None)
    } else {
        (None, Some(format!("dimension {cutoff}^{n_modes} exceeds {SPECTRUM_DIM_LIMIT}")))
    };
    let report = WitnessReport {
        witness: spec.clone(),
        n_modes,
        polynomial_terms: w.polynomial.terms().len(),
        normal_ordered_terms: w.normal.len(),
        degree: w.normal.degree(),
        term_bound: term_bound(spec),
        decomposition: DecompositionSummary {
            strategy,
            n_terms: decomp.entries.len(),
            max_abs_lambda: decomp.max_abs_lambda(),
            lambda_l1: decomp.lambda_l1(),
            settings: decomp.settings(),
        },
        spectrum,
        spectrum_skipped,
    };
    let path = ctx.out.join(&cfg.outputs.witness);
    write_json(&path, &report)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct BoundTerms {
    total: f64,
    gkp_term: f64,
    squeezed_term: f64,
}

#[derive(Serialize)]
struct ComplexityReport {
    params: ComplexityParams,
    sigma_source: &'static str,
    resource: BoundTerms,
    iqp: BoundTerms,
}

fn split(p: &ComplexityParams, f: fn(&ComplexityParams) -> bosonic_cert::Result<f64>) -> Result<BoundTerms, CliError> {
    let total = f(p)?;
    let squeezed_term = f(&ComplexityParams { n_gkp: 0, ..p.clone() })?;
    let gkp_term = f(&ComplexityParams { n_s: 0, ..p.clone() })?;
    Ok(BoundTerms {
        total,
        gkp_term,
        squeezed_term,
    })
}

fn run_complexity(ctx: &Context<'_>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ctx.config;
    let mut params = require(&cfg.complexity, "complexity", cfg.task)?.clone();
    let mut sigma_source = "config";
    if params.sigma.sigma.is_empty() {
        let spec = require(&cfg.witness, "witness", cfg.task)?;
        let cutoff = *require(&cfg.cutoff, "cutoff", cfg.task)?;
        let state = prepare(require(&cfg.state, "state", cfg.task)?, cutoff, ctx.guard)?;
        let decomp = witness_decomposition(spec, cfg.certify.strategy, cfg.certify.angles.as_deref())?;
        let degree = (4 * params.m as usize + 2).max(4);
        params.sigma = oracle_moment_bounds(&decomp, state.as_ref(), degree)?;
        sigma_source = "oracle";
    }
    let report = ComplexityReport {
        resource: split(&params, sample_complexity_resource)?,
        iqp: split(&params, sample_complexity_iqp)?,
        params,
        sigma_source,
    };
    let path = ctx.out.join(&cfg.outputs.complexity);
    write_json(&path, &report)?;
    Ok(vec![path])
}

fn histogram_path(out: &Path, name: &str, mode: usize, n_modes: usize) -> PathBuf {
    if n_modes == 1 {
        return out.join(name);
    }
    let p = Path::new(name);
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("histogram");
    let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.join(format!("{stem}_mode{mode}.{ext}"))
}

fn write_histogram(path: &Path, values: &[f64], bin_width: f64) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Internal(e.to_string()))?;
    w.write_record(["bin_left", "count"]).map_err(|e| CliError::Internal(e.to_string()))?;
    for (left, count) in histogram(values, bin_width) {
        w.write_record([format!("{left:.12e}"), count.to_string()])
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn run_sample_dump(ctx: &Context<'_>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ctx.config;
    let task = cfg.task;
    let cutoff = *require(&cfg.cutoff, "cutoff", task)?;
    let state = prepare(require(&cfg.state, "state", task)?, cutoff, ctx.guard)?;
    let sample = require(&cfg.sample, "sample", task)?;
    let record: MeasurementRecord = match &sample.measurement {
        SampleMeasurement::Homodyne { angles } => homodyne_sample_with(state.as_ref(), angles, sample.shots, ctx.seed, ctx.guard)?,
        SampleMeasurement::Heterodyne => heterodyne_sample_with(state.as_ref(), sample.shots, ctx.seed, ctx.guard)?,
        SampleMeasurement::Parity => parity_sample_with(state.as_ref(), sample.shots, ctx.seed, ctx.guard)?,
    };
    let samples = ctx.out.join(&cfg.outputs.samples);
    let mut f = BufWriter::new(File::create(&samples)?);
    record.write_csv(&mut f)?;
    f.flush()?;
    let mut written = vec![samples];
    if matches!(sample.measurement, SampleMeasurement::Homodyne { .. }) {
        for mode in 0..record.n_modes {
            let path = histogram_path(ctx.out, &cfg.outputs.histogram, mode, record.n_modes);
            write_histogram(&path, &record.mode_values(mode), sample.bin_width)?;
            written.push(path);
        }
    }
    Ok(written)
}
