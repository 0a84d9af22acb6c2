//! Binned queue statistics, flight delay summaries, throughput-demand curves
//! with saturation detection, and comparison against observed series.

mod bins;
mod delays;
mod export;
mod saturation;
mod validate;

use thiserror::Error;

pub use bins::{bin_statistics, departure_sampled_queue_lengths, BinnedQueueStats, DemandDefinition};
pub use delays::{flight_delay_summary, DelayBin, DelaySummary};
pub use export::{read_bins, read_traces, write_bins, write_curve, write_traces};
pub use saturation::{
    detect_saturation, throughput_vs_demand, ThroughputDemandCurve, DEFAULT_SATURATION_WINDOW,
    DEFAULT_SLOPE_EPSILON,
};
pub use validate::{validate_against_actual, BinResidual, ValidationMetrics};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("no {0} to analyze")]
    Empty(&'static str),
    #[error("need at least {needed} curve points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("simulated and actual series share no bins")]
    NoCommonBins,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
