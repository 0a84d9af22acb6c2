use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DeviceObservation, IngestError, WalkObservation};
use crate::time::UtcSeconds;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    pub devices_total: usize,
    pub devices_at_gates: usize,
    pub devices_at_immigration: usize,
    pub matched: usize,
    /// Devices seen at both ends whose last gate sighting is not strictly
    /// before their first immigration sighting.
    pub nonpositive_discarded: usize,
}

#[derive(Default)]
struct DeviceSpan<'a> {
    /// Latest gate sighting; ties on time resolve to the smallest zone name.
    last_gate: Option<(UtcSeconds, &'a str)>,
    first_immigration: Option<UtcSeconds>,
}

/// Joins device sightings at gates with sightings at immigration.
///
/// The walk time of a device is its first immigration timestamp minus its
/// last gate timestamp; devices where that is not positive are discarded.
/// Output is ordered by device id.
pub fn join_gate_to_immigration(
    traces: &[DeviceObservation],
    gate_zones: &BTreeSet<String>,
    immigration_zones: &BTreeSet<String>,
) -> Result<(Vec<WalkObservation>, JoinReport), IngestError> {
    let overlap: Vec<String> = gate_zones.intersection(immigration_zones).cloned().collect();
    if !overlap.is_empty() {
        return Err(IngestError::OverlappingZones(overlap));
    }

    let mut spans: BTreeMap<&str, DeviceSpan<'_>> = BTreeMap::new();
    for obs in traces {
        let span = spans.entry(obs.device_id.as_str()).or_default();
        if gate_zones.contains(&obs.zone) {
            let candidate = (obs.timestamp, obs.zone.as_str());
            span.last_gate = Some(match span.last_gate {
                Some((t, z)) if t > candidate.0 || (t == candidate.0 && z <= candidate.1) => (t, z),
                _ => candidate,
            });
        } else if immigration_zones.contains(&obs.zone) {
            span.first_immigration =
                Some(span.first_immigration.map_or(obs.timestamp, |t| t.min(obs.timestamp)));
        }
    }

    let mut report = JoinReport { devices_total: spans.len(), ..Default::default() };
    let mut walks = Vec::new();
    for (device, span) in &spans {
        if span.last_gate.is_some() {
            report.devices_at_gates += 1;
        }
        if span.first_immigration.is_some() {
            report.devices_at_immigration += 1;
        }
        let (Some((gate_time, gate)), Some(imm_time)) = (span.last_gate, span.first_immigration) else {
            continue;
        };
        if imm_time <= gate_time {
            report.nonpositive_discarded += 1;
            continue;
        }
        walks.push(WalkObservation {
            device_id: device.to_string(),
            gate: gate.to_string(),
            gate_exit_time: gate_time,
            immigration_entry_time: imm_time,
            walk_time: (imm_time - gate_time) as f64,
        });
    }
    report.matched = walks.len();
    Ok((walks, report))
}

/// First and last sighting of a device inside the immigration zones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellObservation {
    pub device_id: String,
    pub entry_time: UtcSeconds,
    pub exit_time: UtcSeconds,
}

impl DwellObservation {
    pub fn dwell(&self) -> f64 {
        (self.exit_time - self.entry_time) as f64
    }
}

/// Time each device spent in the immigration zones, a proxy for its wait.
/// Devices with a single sighting are omitted.
pub fn immigration_dwell_times(
    traces: &[DeviceObservation],
    immigration_zones: &BTreeSet<String>,
) -> Vec<DwellObservation> {
    let mut spans: BTreeMap<&str, (UtcSeconds, UtcSeconds)> = BTreeMap::new();
    for obs in traces.iter().filter(|o| immigration_zones.contains(&o.zone)) {
        spans
            .entry(obs.device_id.as_str())
            .and_modify(|(lo, hi)| {
                *lo = (*lo).min(obs.timestamp);
                *hi = (*hi).max(obs.timestamp);
            })
            .or_insert((obs.timestamp, obs.timestamp));
    }
    spans
        .into_iter()
        .filter(|(_, (lo, hi))| hi > lo)
        .map(|(device, (entry_time, exit_time))| DwellObservation {
            device_id: device.to_string(),
            entry_time,
            exit_time,
        })
        .collect()
}

/// Mean dwell per window, keyed by window start and binned on entry time.
pub fn mean_wait_by_window(
    dwells: &[DwellObservation],
    window: i64,
    utc_offset: i64,
) -> Result<BTreeMap<UtcSeconds, f64>, IngestError> {
    if window <= 0 {
        return Err(IngestError::InvalidWindow(window));
    }
    let mut sums: BTreeMap<UtcSeconds, (f64, usize)> = BTreeMap::new();
    for d in dwells {
        let start = (d.entry_time + utc_offset).div_euclid(window) * window - utc_offset;
        let e = sums.entry(start).or_insert((0.0, 0));
        e.0 += d.dwell();
        e.1 += 1;
    }
    Ok(sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}
