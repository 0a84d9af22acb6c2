//! Timestamp parsing and time-bin arithmetic.
//!
//! Log timestamps are ISO 8601 strings with an explicit UTC offset and are
//! stored as whole UTC seconds. Simulation clocks are `f64` seconds on the
//! same epoch.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// UTC seconds since the Unix epoch.
pub type UtcSeconds = i64;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Default statistics bin: 15 minutes.
pub const DEFAULT_BIN_WIDTH: i64 = 900;

/// Parses an RFC 3339 / ISO 8601 timestamp with explicit offset (`Z` or `±hh:mm`).
///
/// Fractional seconds are truncated toward negative infinity.
pub fn parse_timestamp(text: &str) -> Option<UtcSeconds> {
    let parsed = DateTime::parse_from_rfc3339(text.trim()).ok()?;
    Some(parsed.timestamp())
}

/// Formats UTC seconds as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(ts: UtcSeconds) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

/// Calendar day (days since epoch) of a timestamp, shifted into local time by
/// `utc_offset` seconds.
pub fn day_index(ts: UtcSeconds, utc_offset: i64) -> i64 {
    (ts + utc_offset).div_euclid(SECONDS_PER_DAY)
}

/// Start (UTC seconds) of the local calendar day with index `day`.
pub fn day_start(day: i64, utc_offset: i64) -> UtcSeconds {
    day * SECONDS_PER_DAY - utc_offset
}

/// `YYYY-MM-DD` label of a local day index.
pub fn day_label(day: i64) -> String {
    DateTime::<Utc>::from_timestamp(day * SECONDS_PER_DAY, 0)
        .map(|dt| dt.format("%Y-%m-%d").to_string())
        .unwrap_or_else(|| day.to_string())
}

/// Parses a `YYYY-MM-DD` date into a day index.
pub fn parse_day(text: &str) -> Option<i64> {
    let date = chrono::NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()?;
    let midnight = date.and_hms_opt(0, 0, 0)?.and_utc().timestamp();
    Some(midnight.div_euclid(SECONDS_PER_DAY))
}

/// Left-closed, right-open bins of fixed width aligned to local midnight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub width: f64,
    pub utc_offset: f64,
}

impl BinGrid {
    pub fn new(width: f64, utc_offset: f64) -> Self {
        assert!(width > 0.0, "bin width must be positive");
        BinGrid { width, utc_offset }
    }

    pub fn index(&self, t: f64) -> i64 {
        ((t + self.utc_offset) / self.width).floor() as i64
    }

    pub fn start(&self, index: i64) -> f64 {
        index as f64 * self.width - self.utc_offset
    }

    pub fn end(&self, index: i64) -> f64 {
        self.start(index + 1)
    }
}

impl Default for BinGrid {
    fn default() -> Self {
        BinGrid::new(DEFAULT_BIN_WIDTH as f64, 0.0)
    }
}
