//! Event-driven simulation of the arrival process: flight block time,
//! passenger walk to immigration, and an FCFS M(t)/M(t)/c(t) service node
//! whose desk count follows a staffing schedule or a congestion policy.

mod fel;
mod policy;
mod queue;
mod sim;

use thiserror::Error;

pub use crate::staffing::{StaffingError, StaffingSchedule};
pub use fel::{EventKind, EventNotice, FutureEventList, StaffingDirective};
pub use policy::{congestion_based_staffing, CongestionPolicy};
pub use queue::{Completion, QueueState, ServiceStart};
pub use sim::{
    generate_passenger_arrivals, simulate_arrivals, simulate_day, simulate_day_with, EmpiricalServiceTimes,
    EventSnapshot, ExponentialServiceTimes, FixedServiceTimes, OccupancyIntegrals, PassengerArrival,
    PassengerTrace, QueueSnapshot, ServiceTimeSampler, SimDiagnostics, SimObserver, SimulationConfig,
    SimulationResult, StaffingControl, UnservedPassenger,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("event at t = {time} scheduled before the clock ({clock})")]
    Causality { time: f64, clock: f64 },
    #[error("staffing schedule starts at {schedule_start}, after the first event at {first_event}")]
    StaffingNotCovering { schedule_start: f64, first_event: f64 },
    #[error("no flights or arrivals to simulate")]
    NoArrivals,
    #[error("flight {0} has no passenger count and no occupancy data")]
    NoOccupancy(String),
    #[error("invalid congestion policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("desk {0} completed service while idle")]
    DeskNotBusy(usize),
    #[error("service duration {0} is not a finite nonnegative number")]
    InvalidServiceTime(f64),
    #[error(transparent)]
    Calibrate(#[from] crate::calibrate::CalibrateError),
}
