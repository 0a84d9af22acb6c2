use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Direction, FlightArrival, IngestError, StampRecord};
use crate::time::{day_index, UtcSeconds};

/// Empirical passenger counts per flight id, one entry per observed day,
/// with a pooled fallback for flights never matched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightOccupancyDistribution {
    pub per_flight: BTreeMap<String, Vec<u32>>,
    pub fallback: Vec<u32>,
}

impl FlightOccupancyDistribution {
    pub fn counts_for(&self, flight_id: &str) -> &[u32] {
        self.per_flight.get(flight_id).map(Vec::as_slice).unwrap_or(&self.fallback)
    }

    pub fn mean(&self, flight_id: &str) -> Option<f64> {
        let c = self.counts_for(flight_id);
        (!c.is_empty()).then(|| c.iter().map(|&v| v as f64).sum::<f64>() / c.len() as f64)
    }

    /// Uniform draw from the flight's observed counts (or the fallback).
    pub fn sample<R: Rng + ?Sized>(&self, flight_id: &str, rng: &mut R) -> Option<u32> {
        let c = self.counts_for(flight_id);
        (!c.is_empty()).then(|| c[rng.random_range(0..c.len())])
    }
}

/// Counts arrival stamps per (flight id, local day) for flights present in
/// the schedule. Each flight id gets its daily counts in day order; the
/// fallback pools every matched flight-day.
pub fn estimate_passengers_per_flight(
    stamps: &[StampRecord],
    flights: &[FlightArrival],
    utc_offset: i64,
) -> Result<FlightOccupancyDistribution, IngestError> {
    if stamps.is_empty() {
        return Err(IngestError::EmptyInput("immigration stamps"));
    }
    if flights.is_empty() {
        return Err(IngestError::EmptyInput("flight schedule"));
    }
    let known: BTreeSet<&str> = flights.iter().map(|f| f.flight_id.as_str()).collect();
    let mut daily: BTreeMap<&str, BTreeMap<i64, u32>> = BTreeMap::new();
    for s in stamps.iter().filter(|s| s.direction == Direction::Arrival) {
        let Some(id) = s.flight_id.as_deref() else { continue };
        if !known.contains(id) {
            continue;
        }
        *daily.entry(id).or_default().entry(day_index(s.timestamp, utc_offset)).or_insert(0) += 1;
    }
    if daily.is_empty() {
        return Err(IngestError::UnusableFlightJoin);
    }
    let per_flight: BTreeMap<String, Vec<u32>> =
        daily.into_iter().map(|(id, days)| (id.to_string(), days.into_values().collect())).collect();
    let fallback = per_flight.values().flatten().copied().collect();
    Ok(FlightOccupancyDistribution { per_flight, fallback })
}

/// Number of distinct desks stamping in each window, keyed by window start.
///
/// Windows are aligned to local midnight. Within each local day the map spans
/// from the first to the last window holding a stamp; stamp-free windows in
/// between receive that day's minimum nonzero count.
pub fn estimate_open_desks(
    stamps: &[StampRecord],
    window: i64,
    utc_offset: i64,
) -> Result<BTreeMap<UtcSeconds, u32>, IngestError> {
    if window <= 0 {
        return Err(IngestError::InvalidWindow(window));
    }
    let align = |t: UtcSeconds| (t + utc_offset).div_euclid(window) * window - utc_offset;
    let mut desks: BTreeMap<UtcSeconds, BTreeSet<&str>> = BTreeMap::new();
    for s in stamps {
        desks.entry(align(s.timestamp)).or_default().insert(s.desk_id.as_str());
    }

    let mut by_day: BTreeMap<i64, Vec<(UtcSeconds, u32)>> = BTreeMap::new();
    for (start, set) in desks {
        by_day.entry(day_index(start, utc_offset)).or_default().push((start, set.len() as u32));
    }

    let mut out = BTreeMap::new();
    for windows in by_day.values() {
        let day_min = windows.iter().map(|&(_, c)| c).min().unwrap_or(0);
        let observed: BTreeMap<UtcSeconds, u32> = windows.iter().copied().collect();
        let (first, last) = (windows[0].0, windows[windows.len() - 1].0);
        let mut t = first;
        while t <= last {
            out.insert(t, observed.get(&t).copied().unwrap_or(day_min));
            t += window;
        }
    }
    Ok(out)
}
