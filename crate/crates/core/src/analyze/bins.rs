use serde::{Deserialize, Serialize};

use crate::engine::PassengerTrace;
use crate::time::BinGrid;

/// Which passengers count as demand at a bin boundary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandDefinition {
    QueueOnly,
    #[default]
    QueueAndService,
}

/// Per-bin aggregate of passenger traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinnedQueueStats {
    pub bin_start: f64,
    pub bin_width: f64,
    /// Mean wait (s) of passengers departing in the bin; 0 when none depart.
    pub mean_wait: f64,
    /// Departures in the bin.
    pub throughput: u64,
    /// Waiting passengers at the end of the bin.
    pub queue_length_end: u64,
    /// Passengers present at the end of the bin, per the demand definition.
    pub demand: u64,
}

/// Aggregates traces into contiguous bins spanning the first queue arrival
/// to the last departure. Occupancy is evaluated just before each bin end,
/// so an arrival exactly on a boundary belongs to the later bin.
pub fn bin_statistics(
    traces: &[PassengerTrace],
    grid: BinGrid,
    demand: DemandDefinition,
) -> Vec<BinnedQueueStats> {
    if traces.is_empty() {
        return Vec::new();
    }
    let first = traces.iter().map(|t| grid.index(t.queue_arrival)).min().expect("non-empty");
    let last = traces.iter().map(|t| grid.index(t.departure)).max().expect("non-empty");
    let n = (last - first + 1) as usize;

    let mut departures = vec![0u64; n];
    let mut wait_sum = vec![0.0f64; n];
    // Difference arrays over bin-end occupancy.
    let mut queue_delta = vec![0i64; n + 1];
    let mut service_delta = vec![0i64; n + 1];
    let slot = |t: f64| (grid.index(t) - first) as usize;
    for t in traces {
        let d = slot(t.departure);
        departures[d] += 1;
        wait_sum[d] += t.wait();
        // Present at the end of bin b iff arrival < end(b) <= leaving time,
        // i.e. for bins index(arrival) ..= index(leaving) - 1.
        queue_delta[slot(t.queue_arrival)] += 1;
        queue_delta[slot(t.service_start)] -= 1;
        service_delta[slot(t.service_start)] += 1;
        service_delta[d] -= 1;
    }

    let mut out = Vec::with_capacity(n);
    let (mut q, mut s) = (0i64, 0i64);
    for i in 0..n {
        q += queue_delta[i];
        s += service_delta[i];
        let queue_length_end = q as u64;
        let demand = match demand {
            DemandDefinition::QueueOnly => queue_length_end,
            DemandDefinition::QueueAndService => (q + s) as u64,
        };
        out.push(BinnedQueueStats {
            bin_start: grid.start(first + i as i64),
            bin_width: grid.width,
            mean_wait: if departures[i] > 0 { wait_sum[i] / departures[i] as f64 } else { 0.0 },
            throughput: departures[i],
            queue_length_end,
            demand,
        });
    }
    out
}

/// Queue length seen by each departing passenger, in departure order.
pub fn departure_sampled_queue_lengths(traces: &[PassengerTrace]) -> Vec<(f64, usize)> {
    let mut events: Vec<(f64, i8)> = Vec::with_capacity(traces.len() * 3);
    for t in traces {
        events.push((t.queue_arrival, 1));
        events.push((t.service_start, -1));
        events.push((t.departure, 0));
    }
    // At equal times, joins and service starts apply before the sample.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.abs().cmp(&a.1.abs())));
    let mut len = 0i64;
    let mut out = Vec::with_capacity(traces.len());
    for (t, kind) in events {
        match kind {
            0 => out.push((t, len.max(0) as usize)),
            k => len += k as i64,
        }
    }
    out
}
