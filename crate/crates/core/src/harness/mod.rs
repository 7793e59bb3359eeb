//! Multi-trial experiments, coverage metrics, significance tests and reports.

mod config;
mod coverage;
mod experiment;
mod report;
mod stats;

pub use config::{
    AgentSpec, EnvironmentSpec, EpisodeLogs, ExperimentConfig, ReportSection, RunSection,
};
pub use coverage::{
    series_csv, target_coverage, unique_state_coverage, CoverageSeries, SeriesBuilder, SeriesRow,
    SERIES_HEADER,
};
pub use experiment::{
    build_agent, run_cell, run_comparison, waypoint_sequence, AgentSummary, Report, Significance,
    TrialFailure, TrialOutcome, World,
};
pub use report::{
    render_heatmaps, significance_csv, summary_csv, summary_table, write_report, RESOLVED_CONFIG,
};
pub use stats::{exact_p, mann_whitney_u, mean_sd, normal_p, MannWhitney, EXACT_LIMIT};
