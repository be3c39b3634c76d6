//! Exact discrete Bayesian-network inference and a rail-break risk model.
//!
//! The factor algebra in [`factor`] and [`inference`] is generic. [`network`]
//! adds DAG validation and CPT bookkeeping. [`rail`], [`fit`], [`ingest`] and
//! [`synth`] build the Season / Time-of-day / Location → Rail-break model on
//! top of it.

// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchors;
pub mod error;
pub mod factor;
pub mod fit;
pub mod inference;
pub mod ingest;
pub mod model_file;
pub mod network;
pub mod rail;
pub mod synth;

pub use anchors::{evaluate_anchors, reference_anchors, Anchor, AnchorQuery, AnchorResult};
pub use error::{Error, Result};
pub use factor::{Evidence, Factor, Variable, DISTRIBUTION_TOL, IDENTITY_TOL};
pub use fit::{fit_factorized, fit_full_joint, CountTable, DEFAULT_ALPHA};
pub use inference::{bayes_posterior, check_independence, eliminate};
pub use ingest::{
    assign_season, assign_section, assign_time_bucket, build_counts, parse_exposures,
    read_exposures, write_exposures, BucketMaps, ExposureRecord, ScheduleConfig,
};
pub use model_file::{ModelFile, Provenance, SCHEMA_VERSION};
pub use network::{BayesNet, Dag};
pub use rail::{
    leg_contribution, morning_share_of_breaks, normalized_percentage, query_risk, risk_ratio,
    trip_risk, BreakCpt, Conditions, FitMode, Leg, Location, RailBreakModel, Season, TimeOfDay,
    TripAggregation,
};
pub use synth::{calibrate, reference_model, reference_schedule, sample_exposures, Calibration};
