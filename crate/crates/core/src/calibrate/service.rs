//! Per-desk service-rate distribution estimated from congested periods.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CalibrateError;
use crate::ingest::StampRecord;
use crate::staffing::StaffingSchedule;
use crate::time::{day_index, UtcSeconds, DEFAULT_BIN_WIDTH, SECONDS_PER_DAY};

/// Empirical per-desk service rate in passengers per desk per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRateModel {
    pub per_desk_rates: Vec<f64>,
    /// Bin length (s) the rates are expressed in.
    pub bin_width: f64,
    /// (local day index, window start) of each retained window.
    pub source_windows: Vec<(i64, UtcSeconds)>,
}

impl ServiceRateModel {
    pub fn validate(&self) -> Result<(), CalibrateError> {
        if self.per_desk_rates.is_empty() {
            return Err(CalibrateError::InvalidModel("no service rates".into()));
        }
        if let Some(r) = self.per_desk_rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(CalibrateError::InvalidModel(format!("service rate {r} is not positive")));
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(CalibrateError::InvalidModel(format!("bin width {}", self.bin_width)));
        }
        Ok(())
    }

    pub fn mean_rate(&self) -> f64 {
        self.per_desk_rates.iter().sum::<f64>() / self.per_desk_rates.len() as f64
    }

    /// Uniform draw from the empirical rates (passengers per desk per bin).
    pub fn sample_rate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.per_desk_rates[rng.random_range(0..self.per_desk_rates.len())]
    }

    /// Same draw converted to passengers per desk per second.
    pub fn sample_rate_per_second<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_rate(rng) / self.bin_width
    }
}

/// Which windows count as congested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CongestionFilter {
    /// Windows whose observed mean wait exceeds this many seconds.
    MinWait(f64),
    /// Every window of the `k` days with the longest mean observed wait.
    TopKDays(usize),
}

impl Default for CongestionFilter {
    fn default() -> Self {
        CongestionFilter::MinWait(15.0 * 60.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceRateOptions {
    /// Window length (s); must match the keys of the open-desk map.
    pub window: i64,
    pub utc_offset: i64,
    /// Keep only the maximum rate per hour of day.
    pub hourly_max: bool,
}

impl Default for ServiceRateOptions {
    fn default() -> Self {
        ServiceRateOptions { window: DEFAULT_BIN_WIDTH, utc_offset: 0, hourly_max: false }
    }
}

/// Service rate per desk = stamps in a window / open desks in that window,
/// collected over the windows selected by `filter`.
///
/// `observed_waits` maps window start to the mean wait seen in that window
/// (for instance from device dwell times at immigration).
pub fn estimate_desk_service_rate(
    stamps: &[StampRecord],
    open_desks: &BTreeMap<UtcSeconds, u32>,
    observed_waits: &BTreeMap<UtcSeconds, f64>,
    filter: CongestionFilter,
    options: &ServiceRateOptions,
) -> Result<ServiceRateModel, CalibrateError> {
    let window = options.window;
    if window <= 0 {
        return Err(CalibrateError::InvalidOption("window must be positive"));
    }
    let off = options.utc_offset;
    let align = |t: UtcSeconds| (t + off).div_euclid(window) * window - off;

    let mut throughput: BTreeMap<UtcSeconds, u32> = BTreeMap::new();
    for s in stamps {
        *throughput.entry(align(s.timestamp)).or_insert(0) += 1;
    }

    let selected_days: Option<BTreeSet<i64>> = match filter {
        CongestionFilter::MinWait(_) => None,
        CongestionFilter::TopKDays(k) => {
            let mut per_day: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
            for (&w, &wait) in observed_waits {
                let e = per_day.entry(day_index(w, off)).or_insert((0.0, 0));
                e.0 += wait;
                e.1 += 1;
            }
            let mut days: Vec<(i64, f64)> =
                per_day.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect();
            days.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            Some(days.into_iter().take(k).map(|(d, _)| d).collect())
        }
    };

    let mut retained: Vec<(UtcSeconds, f64)> = Vec::new();
    for (&w, &desks) in open_desks {
        if desks == 0 {
            continue;
        }
        let passes = match (filter, &selected_days) {
            (CongestionFilter::MinWait(min), _) => observed_waits.get(&w).is_some_and(|&x| x > min),
            (_, Some(days)) => days.contains(&day_index(w, off)),
            _ => false,
        };
        if !passes {
            continue;
        }
        let served = throughput.get(&w).copied().unwrap_or(0);
        if served == 0 {
            continue;
        }
        retained.push((w, served as f64 / desks as f64));
    }

    if options.hourly_max {
        let mut by_hour: BTreeMap<i64, (UtcSeconds, f64)> = BTreeMap::new();
        for &(w, r) in &retained {
            let hour = (w + off).rem_euclid(SECONDS_PER_DAY) / 3600;
            by_hour
                .entry(hour)
                .and_modify(|best| {
                    if r > best.1 {
                        *best = (w, r);
                    }
                })
                .or_insert((w, r));
        }
        retained = by_hour.into_values().collect();
    }

    if retained.is_empty() {
        return Err(CalibrateError::InsufficientCongestion);
    }
    Ok(ServiceRateModel {
        per_desk_rates: retained.iter().map(|&(_, r)| r).collect(),
        bin_width: window as f64,
        source_windows: retained.iter().map(|&(w, _)| (day_index(w, off), w)).collect(),
    })
}

/// mu(t) = c(t) x a draw from the per-desk distribution (passengers per bin).
pub fn service_rate_at<R: Rng + ?Sized>(
    model: &ServiceRateModel,
    staffing: &StaffingSchedule,
    t: f64,
    rng: &mut R,
) -> Result<f64, CalibrateError> {
    let desks = staffing.desks_at(t).ok_or(CalibrateError::StaffingUndefined(t))?;
    if desks == 0 {
        return Ok(0.0);
    }
    Ok(desks as f64 * model.sample_rate(rng))
}
