//! Event-log ingestion: flight schedules, immigration stamps and Wi-Fi
//! device traces, plus the joined datasets derived from them.

mod derive;
mod join;
mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::UtcSeconds;

pub use derive::{estimate_open_desks, estimate_passengers_per_flight, FlightOccupancyDistribution};
pub use join::{
    immigration_dwell_times, join_gate_to_immigration, mean_wait_by_window, DwellObservation, JoinReport,
};
pub use parse::{
    parse_distances, parse_flight_schedule, parse_immigration_stamps, parse_staffing_schedule,
    parse_wifi_traces, write_distances, write_flight_schedule, write_immigration_stamps,
    write_staffing_schedule, write_wifi_traces, Parsed,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("gate and immigration zone sets overlap on {0:?}")]
    OverlappingZones(Vec<String>),
    #[error("no immigration stamp carries a flight id that matches the flight schedule")]
    UnusableFlightJoin,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("window length must be positive, got {0}")]
    InvalidWindow(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Arrival,
    Departure,
}

impl Direction {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "arrival" | "arr" | "a" => Some(Direction::Arrival),
            "departure" | "dep" | "d" => Some(Direction::Departure),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Arrival => "arrival",
            Direction::Departure => "departure",
        }
    }
}

/// One arriving flight from the flight information display system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightArrival {
    pub flight_id: String,
    pub scheduled_time: UtcSeconds,
    /// Block time at the gate.
    pub actual_time: UtcSeconds,
    pub gate: String,
    pub passenger_count: Option<u32>,
}

impl FlightArrival {
    /// Arrival delay in seconds; negative for early arrivals.
    pub fn delay(&self) -> i64 {
        self.actual_time - self.scheduled_time
    }
}

/// One passport stamp at an immigration desk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StampRecord {
    pub timestamp: UtcSeconds,
    pub desk_id: String,
    pub flight_id: Option<String>,
    pub direction: Direction,
}

/// A Wi-Fi device sighting. A device triangulated into several zones at one
/// instant yields one observation per zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceObservation {
    pub device_id: String,
    pub timestamp: UtcSeconds,
    pub zone: String,
    pub position: Option<(f64, f64)>,
}

/// Gate-to-immigration transit of one tracked device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkObservation {
    pub device_id: String,
    pub gate: String,
    pub gate_exit_time: UtcSeconds,
    pub immigration_entry_time: UtcSeconds,
    /// Seconds, always > 0.
    pub walk_time: f64,
}

/// Row-level outcome of parsing one CSV source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub rows_read: usize,
    pub accepted: usize,
    /// Departure rows dropped from the flight schedule (not errors).
    pub filtered: usize,
    /// Duplicate rows removed.
    pub duplicates: usize,
    pub skipped: usize,
    pub skips: Vec<RowSkip>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSkip {
    pub line: u64,
    pub reason: String,
}
