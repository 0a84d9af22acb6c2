use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyzeError;
use crate::ingest::FlightArrival;
use crate::time::BinGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayBin {
    pub bin_start: f64,
    pub flights: usize,
    pub mean_delay_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySummary {
    /// Flights binned by scheduled arrival time.
    pub per_bin_mean_delay: Vec<DelayBin>,
    /// Minutes.
    pub overall_mean_delay: f64,
    pub flight_count: usize,
}

/// Gate arrival delay (actual - scheduled) per scheduled-time bin.
pub fn flight_delay_summary(flights: &[FlightArrival], grid: BinGrid) -> Result<DelaySummary, AnalyzeError> {
    if flights.is_empty() {
        return Err(AnalyzeError::Empty("flights"));
    }
    let mut bins: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    let mut total = 0.0;
    for f in flights {
        let minutes = f.delay() as f64 / 60.0;
        total += minutes;
        let e = bins.entry(grid.index(f.scheduled_time as f64)).or_insert((0.0, 0));
        e.0 += minutes;
        e.1 += 1;
    }
    Ok(DelaySummary {
        per_bin_mean_delay: bins
            .into_iter()
            .map(|(i, (sum, n))| DelayBin {
                bin_start: grid.start(i),
                flights: n,
                mean_delay_minutes: sum / n as f64,
            })
            .collect(),
        overall_mean_delay: total / flights.len() as f64,
        flight_count: flights.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flight(scheduled: i64, delay_min: i64) -> FlightArrival {
        FlightArrival {
            flight_id: format!("F{scheduled}"),
            scheduled_time: scheduled,
            actual_time: scheduled + delay_min * 60,
            gate: "53".into(),
            passenger_count: None,
        }
    }

    #[test]
    fn on_time_flights() {
        let s = flight_delay_summary(&[flight(0, 0), flight(1000, 0)], BinGrid::default()).unwrap();
        assert_eq!(s.overall_mean_delay, 0.0);
        assert!(s.per_bin_mean_delay.iter().all(|b| b.mean_delay_minutes == 0.0));
    }

    #[test]
    fn mean_of_two() {
        let s = flight_delay_summary(&[flight(0, 10), flight(100, 30)], BinGrid::default()).unwrap();
        assert_eq!(s.overall_mean_delay, 20.0);
        assert_eq!(s.per_bin_mean_delay.len(), 1);
        assert_eq!(s.flight_count, 2);
        assert!(flight_delay_summary(&[], BinGrid::default()).is_err());
    }
}
