//! Importance-sampling estimation of witness expectations, Hoeffding budgets,
//! sample-complexity bounds and accept/reject verdicts.

mod bounds;
mod certify;
mod estimate;
mod plan;

pub use bounds::{
    hoeffding_half_width, hoeffding_requirements, oracle_moment_bounds, sample_complexity_iqp, sample_complexity_resource,
    second_moment_bound, ComplexityParams, MomentBounds, SecondMomentProxy, HOEFFDING_CONSTANT, ORACLE_SAFETY,
};
pub use certify::{
    certify, default_angles, empirical_shot_requirement, pilot_shot_requirement, run_estimate, verdict,
    witness_decomposition, CertificationReport, CertifyOptions, ShotStudy, Verdict, DEFAULT_MAX_SHOTS,
};
pub use estimate::{
    derive_seed, estimate_from_moments, estimate_witness, simulate_entry_records, simulate_moments, EntryRecord, Moments,
    WitnessEstimate,
};
pub use plan::{plan_importance_sampling, SamplingPlan};
