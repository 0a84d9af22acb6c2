use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use csv::{ByteRecord, ReaderBuilder, Trim, WriterBuilder};

use super::{
    DeviceObservation, Direction, FlightArrival, IngestError, ParseDiagnostics, RowSkip, StampRecord,
};
use crate::staffing::StaffingSchedule;
use crate::time::{format_timestamp, parse_timestamp, UtcSeconds};

/// Parsed records plus the row-level diagnostics gathered while reading them.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: T,
    pub diagnostics: ParseDiagnostics,
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }
}

struct Row<'a> {
    columns: &'a Columns,
    record: &'a ByteRecord,
}

impl Row<'_> {
    /// Trimmed field; `Ok(None)` when the column is absent from the header.
    fn get(&self, name: &str) -> Result<Option<&str>, String> {
        let Some(&i) = self.columns.index.get(name) else {
            return Ok(None);
        };
        let raw = self.record.get(i).unwrap_or_default();
        std::str::from_utf8(raw)
            .map(|s| Some(s.trim()))
            .map_err(|_| format!("column {name} is not valid UTF-8"))
    }

    fn required(&self, name: &str) -> Result<&str, String> {
        self.get(name)?.ok_or_else(|| format!("missing column {name}"))
    }

    fn non_empty(&self, name: &str) -> Result<&str, String> {
        let v = self.required(name)?;
        if v.is_empty() {
            return Err(format!("empty {name}"));
        }
        Ok(v)
    }

    fn timestamp(&self, name: &str) -> Result<UtcSeconds, String> {
        let v = self.required(name)?;
        parse_timestamp(v).ok_or_else(|| format!("unparseable {name} {v:?}"))
    }
}

enum RowOutcome<T> {
    Keep(T),
    Filter,
}

fn read_table<R, T, F>(
    source: R,
    required: &[&str],
    check_header: impl Fn(&Columns) -> Result<(), String>,
    mut convert: F,
) -> Result<(Vec<T>, ParseDiagnostics), IngestError>
where
    R: Read,
    F: FnMut(&Row<'_>) -> Result<RowOutcome<T>, String>,
{
    let mut reader =
        ReaderBuilder::new().has_headers(true).flexible(false).trim(Trim::All).from_reader(source);

    let header = match reader.byte_headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(e.into()),
        Err(e) => return Err(IngestError::Schema(format!("unreadable header: {e}"))),
    };
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(IngestError::Schema("missing header row".into()));
    }
    let mut index = HashMap::new();
    for (i, raw) in header.iter().enumerate() {
        let name = std::str::from_utf8(raw)
            .map_err(|_| IngestError::Schema("header is not valid UTF-8".into()))?
            .trim()
            .to_string();
        if index.insert(name.clone(), i).is_some() {
            return Err(IngestError::Schema(format!("duplicate column {name:?}")));
        }
    }
    let columns = Columns { index };
    let missing: Vec<&str> = required.iter().copied().filter(|c| !columns.has(c)).collect();
    if !missing.is_empty() {
        return Err(IngestError::Schema(format!("missing required columns {missing:?}")));
    }
    check_header(&columns).map_err(IngestError::Schema)?;

    let mut out = Vec::new();
    let mut diag = ParseDiagnostics::default();
    let mut record = ByteRecord::new();
    loop {
        let line = reader.position().line() + 1;
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                diag.rows_read += 1;
                let line = record.position().map(|p| p.line()).unwrap_or(line);
                let row = Row { columns: &columns, record: &record };
                match convert(&row) {
                    Ok(RowOutcome::Keep(v)) => out.push(v),
                    Ok(RowOutcome::Filter) => diag.filtered += 1,
                    Err(reason) => {
                        diag.skipped += 1;
                        diag.skips.push(RowSkip { line, reason });
                    }
                }
            }
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                diag.rows_read += 1;
                diag.skipped += 1;
                let line = e.position().map(|p| p.line()).unwrap_or(line);
                diag.skips.push(RowSkip { line, reason: e.to_string() });
            }
        }
    }
    Ok((out, diag))
}

fn no_header_check(_: &Columns) -> Result<(), String> {
    Ok(())
}

/// Reads `flights.csv` (`flight_id,scheduled_time,actual_time,gate,direction[,passenger_count]`).
/// Departure rows are filtered; malformed rows are skipped and counted.
pub fn parse_flight_schedule<R: Read>(source: R) -> Result<Parsed<Vec<FlightArrival>>, IngestError> {
    let required = ["flight_id", "scheduled_time", "actual_time", "gate", "direction"];
    let (records, mut diagnostics) = read_table(source, &required, no_header_check, |row| {
        let direction = row.required("direction")?;
        let direction =
            Direction::parse(direction).ok_or_else(|| format!("unknown direction {direction:?}"))?;
        let flight_id = row.non_empty("flight_id")?.to_string();
        let scheduled_time = row.timestamp("scheduled_time")?;
        let actual_time = row.timestamp("actual_time")?;
        let gate = row.non_empty("gate")?.to_string();
        let passenger_count = match row.get("passenger_count")? {
            None | Some("") => None,
            Some(v) => Some(v.parse::<u32>().map_err(|_| format!("bad passenger_count {v:?}"))?),
        };
        if direction == Direction::Departure {
            return Ok(RowOutcome::Filter);
        }
        Ok(RowOutcome::Keep(FlightArrival { flight_id, scheduled_time, actual_time, gate, passenger_count }))
    })?;
    diagnostics.accepted = records.len();
    Ok(Parsed { records, diagnostics })
}

/// Reads `stamps.csv` (`timestamp,desk_id,flight_id,direction`), ordered by
/// timestamp. A blank flight id is kept as `None`.
pub fn parse_immigration_stamps<R: Read>(source: R) -> Result<Parsed<Vec<StampRecord>>, IngestError> {
    let required = ["timestamp", "desk_id", "flight_id", "direction"];
    let (mut records, mut diagnostics) = read_table(source, &required, no_header_check, |row| {
        let timestamp = row.timestamp("timestamp")?;
        let desk_id = row.non_empty("desk_id")?.to_string();
        let flight_id = row.required("flight_id")?;
        let flight_id = (!flight_id.is_empty()).then(|| flight_id.to_string());
        let direction = row.required("direction")?;
        let direction =
            Direction::parse(direction).ok_or_else(|| format!("unknown direction {direction:?}"))?;
        Ok(RowOutcome::Keep(StampRecord { timestamp, desk_id, flight_id, direction }))
    })?;
    records.sort_by_key(|s| s.timestamp);
    diagnostics.accepted = records.len();
    Ok(Parsed { records, diagnostics })
}

/// Reads `wifi.csv` (`device_id,timestamp,zone[,x,y]`). Rows repeating a
/// `(device_id, timestamp, zone)` key are dropped; the first occurrence wins.
/// Output is ordered by `(timestamp, device_id, zone)`.
pub fn parse_wifi_traces<R: Read>(source: R) -> Result<Parsed<Vec<DeviceObservation>>, IngestError> {
    let required = ["device_id", "timestamp", "zone"];
    let check = |c: &Columns| {
        if c.has("x") != c.has("y") {
            Err("columns x and y must appear together".to_string())
        } else {
            Ok(())
        }
    };
    let (mut records, mut diagnostics) = read_table(source, &required, check, |row| {
        let device_id = row.non_empty("device_id")?.to_string();
        let timestamp = row.timestamp("timestamp")?;
        let zone = row.non_empty("zone")?.to_string();
        let position = match (row.get("x")?, row.get("y")?) {
            (None, None) | (Some(""), Some("")) => None,
            (Some(x), Some(y)) => {
                let x: f64 = x.parse().map_err(|_| format!("bad x {x:?}"))?;
                let y: f64 = y.parse().map_err(|_| format!("bad y {y:?}"))?;
                if !x.is_finite() || !y.is_finite() {
                    return Err("non-finite position".into());
                }
                Some((x, y))
            }
            _ => return Err("incomplete position".into()),
        };
        Ok(RowOutcome::Keep(DeviceObservation { device_id, timestamp, zone, position }))
    })?;
    records.sort_by(|a, b| (a.timestamp, &a.device_id, &a.zone).cmp(&(b.timestamp, &b.device_id, &b.zone)));
    let before = records.len();
    records.dedup_by(|b, a| a.timestamp == b.timestamp && a.device_id == b.device_id && a.zone == b.zone);
    diagnostics.duplicates = before - records.len();
    diagnostics.accepted = records.len();
    Ok(Parsed { records, diagnostics })
}

/// Reads `distances.csv` (`gate,distance_m`). Distances must be positive and
/// finite; a repeated gate is skipped.
pub fn parse_distances<R: Read>(source: R) -> Result<Parsed<BTreeMap<String, f64>>, IngestError> {
    let (rows, mut diagnostics) = read_table(source, &["gate", "distance_m"], no_header_check, |row| {
        let gate = row.non_empty("gate")?.to_string();
        let d = row.required("distance_m")?;
        let d: f64 = d.parse().map_err(|_| format!("bad distance_m {d:?}"))?;
        if !(d.is_finite() && d > 0.0) {
            return Err(format!("distance_m must be positive, got {d}"));
        }
        Ok(RowOutcome::Keep((gate, d)))
    })?;
    let mut map = BTreeMap::new();
    for (gate, d) in rows {
        if map.contains_key(&gate) {
            diagnostics.duplicates += 1;
            continue;
        }
        map.insert(gate, d);
    }
    diagnostics.accepted = map.len();
    Ok(Parsed { records: map, diagnostics })
}

/// Reads a staffing schedule (`start_time,desks`). Rows are sorted by time;
/// a repeated start time keeps the first row.
pub fn parse_staffing_schedule<R: Read>(source: R) -> Result<Parsed<StaffingSchedule>, IngestError> {
    let (mut rows, mut diagnostics) = read_table(source, &["start_time", "desks"], no_header_check, |row| {
        let t = row.timestamp("start_time")?;
        let d = row.required("desks")?;
        let d: u32 = d.parse().map_err(|_| format!("bad desks {d:?}"))?;
        Ok(RowOutcome::Keep((t, d)))
    })?;
    rows.sort_by_key(|&(t, _)| t);
    let before = rows.len();
    rows.dedup_by_key(|&mut (t, _)| t);
    diagnostics.duplicates = before - rows.len();
    diagnostics.accepted = rows.len();
    let breakpoints = rows.into_iter().map(|(t, d)| (t as f64, d)).collect();
    let schedule = StaffingSchedule::new(breakpoints)
        .map_err(|_| IngestError::EmptyInput("staffing schedule has no valid rows"))?;
    Ok(Parsed { records: schedule, diagnostics })
}

pub fn write_flight_schedule<W: Write>(flights: &[FlightArrival], sink: W) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["flight_id", "scheduled_time", "actual_time", "gate", "direction", "passenger_count"])?;
    for f in flights {
        let count = f.passenger_count.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            f.flight_id.as_str(),
            &format_timestamp(f.scheduled_time),
            &format_timestamp(f.actual_time),
            &f.gate,
            Direction::Arrival.as_str(),
            &count,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_immigration_stamps<W: Write>(stamps: &[StampRecord], sink: W) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["timestamp", "desk_id", "flight_id", "direction"])?;
    for s in stamps {
        w.write_record([
            format_timestamp(s.timestamp).as_str(),
            &s.desk_id,
            s.flight_id.as_deref().unwrap_or(""),
            s.direction.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_wifi_traces<W: Write>(traces: &[DeviceObservation], sink: W) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["device_id", "timestamp", "zone", "x", "y"])?;
    for o in traces {
        let (x, y) = o.position.map(|(x, y)| (x.to_string(), y.to_string())).unwrap_or_default();
        w.write_record([o.device_id.as_str(), &format_timestamp(o.timestamp), &o.zone, &x, &y])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_distances<W: Write>(distances: &BTreeMap<String, f64>, sink: W) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["gate", "distance_m"])?;
    for (gate, d) in distances {
        w.write_record([gate.as_str(), &d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_staffing_schedule<W: Write>(schedule: &StaffingSchedule, sink: W) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["start_time", "desks"])?;
    for &(t, d) in schedule.breakpoints() {
        w.write_record([format_timestamp(t.floor() as i64), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
