//! Calibration of the two stochastic simulation inputs: the walk-speed
//! mixture that drives arrivals at immigration and the per-desk service-rate
//! distribution that drives service.

mod em;
mod families;
mod model_io;
mod service;
mod walk;

use thiserror::Error;

pub use em::{
    assign_clusters, em_cluster, fit_k, Candidate, ClusterAssignment, EmOptions, EmResult, GaussianComponent,
    MixtureFit, DEFAULT_ASSIGNMENT_THRESHOLD,
};
pub use families::{aic, fit_all_families, fit_component, select_family, Family, FamilyFit, FitReport};
pub use model_io::CalibratedModels;
pub use service::{
    estimate_desk_service_rate, service_rate_at, CongestionFilter, ServiceRateModel, ServiceRateOptions,
};
pub use walk::{
    build_walk_speed_model, sample_walk_time, walk_times_to_speeds, MixtureComponent, WalkFitOptions,
    WalkSpeedFit, WalkSpeedModel, MAX_SPEED_REDRAWS, MIN_SPEED_POINTS,
};

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("{family} fit infeasible: {reason}")]
    Infeasible { family: Family, reason: String },
    #[error("optimisation did not converge: {0}")]
    NoConvergence(&'static str),
    #[error("no feasible distribution family")]
    NoFeasibleFamily,
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("gate distance table is empty")]
    NoDistances,
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("walk-speed model produced {0} consecutive nonpositive speeds")]
    NonPositiveSpeeds(usize),
    #[error("no window passed the congestion filter")]
    InsufficientCongestion,
    #[error("staffing schedule undefined at t = {0}")]
    StaffingUndefined(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}
