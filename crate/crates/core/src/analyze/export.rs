use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AnalyzeError, BinnedQueueStats, ThroughputDemandCurve};
use crate::engine::PassengerTrace;
use crate::time::format_timestamp;

#[derive(Debug, Serialize, Deserialize)]
struct BinRow {
    bin_start: f64,
    #[serde(default, skip_deserializing)]
    time: String,
    bin_width: f64,
    queue_length: u64,
    throughput: u64,
    mean_wait: f64,
    demand: u64,
}

pub fn write_traces<W: Write>(traces: &[PassengerTrace], sink: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(sink);
    for t in traces {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_traces<R: Read>(source: R) -> Result<Vec<PassengerTrace>, AnalyzeError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let traces = r.deserialize().collect::<Result<Vec<PassengerTrace>, _>>()?;
    if let Some(t) = traces.iter().find(|t| {
        ![t.gate_time, t.queue_arrival, t.service_start, t.departure].iter().all(|v| v.is_finite())
            || t.service_start < t.queue_arrival
            || t.departure < t.service_start
    }) {
        return Err(AnalyzeError::Invalid(format!(
            "passenger {} has inconsistent timestamps",
            t.passenger_id
        )));
    }
    Ok(traces)
}

/// Per-bin rows: bin start in UTC seconds and as a timestamp, plus the
/// end-of-bin queue length, throughput, mean wait and demand.
pub fn write_bins<W: Write>(bins: &[BinnedQueueStats], sink: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(sink);
    for b in bins {
        w.serialize(BinRow {
            bin_start: b.bin_start,
            time: format_timestamp(b.bin_start.floor() as i64),
            bin_width: b.bin_width,
            queue_length: b.queue_length_end,
            throughput: b.throughput,
            mean_wait: b.mean_wait,
            demand: b.demand,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bins<R: Read>(source: R) -> Result<Vec<BinnedQueueStats>, AnalyzeError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: BinRow = row?;
        if !row.bin_start.is_finite()
            || !row.mean_wait.is_finite()
            || !(row.bin_width > 0.0 && row.bin_width.is_finite())
        {
            return Err(AnalyzeError::Invalid(format!("bin at {} has non-finite fields", row.bin_start)));
        }
        out.push(BinnedQueueStats {
            bin_start: row.bin_start,
            bin_width: row.bin_width,
            mean_wait: row.mean_wait,
            throughput: row.throughput,
            queue_length_end: row.queue_length,
            demand: row.demand,
        });
    }
    Ok(out)
}

/// Curve points with a `saturated` marker on the detected knee.
pub fn write_curve<W: Write>(curve: &ThroughputDemandCurve, sink: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["demand", "throughput", "saturated"])?;
    for &(d, t) in &curve.points {
        let knee = curve.saturation_demand == Some(d);
        w.write_record([d.to_string(), t.to_string(), u8::from(knee).to_string()])?;
    }
    w.flush()?;
    Ok(())
}
