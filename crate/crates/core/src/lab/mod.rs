//! Desk-scale experiments on convergence of lacunary products.
//!
//! Verdicts are trend diagnostics with fixed thresholds; a finite run says
//! nothing rigorous about the limit `N -> infinity`.

mod experiment;
mod report;
mod spec;

pub use experiment::{
    run_experiment, theorem1_experiment, theorem2_experiment, theorem3_experiment, window_ladder,
    ExperimentConfig, ExperimentKind, CONVERGED_THRESHOLD, MAX_GRID_POINTS, NO_THRESHOLD,
    YES_THRESHOLD,
};
pub use report::{
    ChainRow, ExperimentReport, MetricRow, PVerdict, PointwiseRow, Summary, SCHEMA_VERSION,
};
pub use spec::{
    generate_coefficients, generate_lacunary, trend_check, CoefficientKind, CoefficientSpec,
    FrequencyMode, GeneratedCoefficients, TrendCheck, TREND_SHARE, TREND_TERMS,
};
