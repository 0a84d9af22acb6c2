use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, StaffingMode};
use super::CliError;
use crate::analyze::{
    bin_statistics, detect_saturation, flight_delay_summary, read_bins, throughput_vs_demand,
    validate_against_actual, write_bins, write_curve, write_traces, AnalyzeError, BinnedQueueStats,
    ValidationMetrics,
};
use crate::calibrate::{
    build_walk_speed_model, estimate_desk_service_rate, walk_times_to_speeds, CalibratedModels, Candidate,
    Family, FitReport, GaussianComponent, ServiceRateOptions,
};
use crate::engine::{simulate_day, StaffingControl, StaffingSchedule};
use crate::ingest::{
    estimate_open_desks, estimate_passengers_per_flight, immigration_dwell_times, join_gate_to_immigration,
    mean_wait_by_window, parse_distances, parse_flight_schedule, parse_immigration_stamps,
    parse_staffing_schedule, parse_wifi_traces, write_distances, write_flight_schedule,
    write_immigration_stamps, write_staffing_schedule, write_wifi_traces, DeviceObservation, Direction,
    FlightArrival, FlightOccupancyDistribution, JoinReport, ParseDiagnostics, StampRecord,
};
use crate::time::{day_index, day_label, day_start, format_timestamp};

pub const INGEST_DIR: &str = "ingest";
pub const CALIBRATE_DIR: &str = "calibrate";
pub const SIMULATE_DIR: &str = "simulate";
pub const ANALYZE_DIR: &str = "analyze";

/// Output directory built under a temporary name and renamed into place
/// once complete; dropped uncommitted, it is removed.
struct StagedDir {
    tmp: PathBuf,
    target: PathBuf,
    committed: bool,
}

impl StagedDir {
    fn create(out: &Path, name: &str) -> io::Result<Self> {
        fs::create_dir_all(out)?;
        let tmp = out.join(format!(".{name}.partial"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir(&tmp)?;
        Ok(StagedDir { tmp, target: out.join(name), committed: false })
    }

    fn file(&self, rel: &str) -> io::Result<File> {
        let path = self.tmp.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        File::create(path)
    }

    fn json<T: Serialize>(&self, rel: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.tmp.join(rel), text)
    }

    fn commit(mut self) -> io::Result<()> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target)?;
        }
        fs::rename(&self.tmp, &self.target)?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}

fn open(path: &Path) -> io::Result<BufReader<File>> {
    File::open(path).map(BufReader::new)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub inputs: BTreeMap<String, ParseDiagnostics>,
    pub total_skipped: usize,
    /// Days of the simulation range on which an input has no records.
    pub missing_days: BTreeMap<String, Vec<String>>,
}

struct Bundle {
    flights: Vec<FlightArrival>,
    stamps: Vec<StampRecord>,
    wifi: Vec<DeviceObservation>,
    distances: BTreeMap<String, f64>,
    staffing: Option<StaffingSchedule>,
}

/// Parses and cleans every input into `<out>/ingest`, with a diagnostics report.
pub fn ingest(config: &RunConfig) -> Result<IngestReport, CliError> {
    let inputs = &config.inputs;
    let mut sources: Vec<(&str, &Path)> = vec![
        ("flights", &inputs.flights),
        ("stamps", &inputs.stamps),
        ("wifi", &inputs.wifi),
        ("distances", &inputs.distances),
    ];
    if let Some(s) = &inputs.staffing {
        sources.push(("staffing", s));
    }
    for (name, path) in &sources {
        if !path.is_file() {
            return Err(CliError::Ingest(format!("{name} input not found: {}", path.display())));
        }
    }
    let fail =
        |name: &'static str| move |e: crate::ingest::IngestError| CliError::Ingest(format!("{name}: {e}"));
    let io_fail = |name: &'static str| move |e: io::Error| CliError::Ingest(format!("{name}: {e}"));

    let mut report =
        IngestReport { inputs: BTreeMap::new(), total_skipped: 0, missing_days: BTreeMap::new() };
    let flights =
        parse_flight_schedule(open(&inputs.flights).map_err(io_fail("flights"))?).map_err(fail("flights"))?;
    let stamps =
        parse_immigration_stamps(open(&inputs.stamps).map_err(io_fail("stamps"))?).map_err(fail("stamps"))?;
    let wifi = parse_wifi_traces(open(&inputs.wifi).map_err(io_fail("wifi"))?).map_err(fail("wifi"))?;
    let distances =
        parse_distances(open(&inputs.distances).map_err(io_fail("distances"))?).map_err(fail("distances"))?;
    let staffing = match &inputs.staffing {
        Some(p) => {
            Some(parse_staffing_schedule(open(p).map_err(io_fail("staffing"))?).map_err(fail("staffing"))?)
        }
        None => None,
    };
    for (name, d) in [
        ("flights", &flights.diagnostics),
        ("stamps", &stamps.diagnostics),
        ("wifi", &wifi.diagnostics),
        ("distances", &distances.diagnostics),
    ]
    .into_iter()
    .chain(staffing.as_ref().map(|s| ("staffing", &s.diagnostics)))
    {
        report.total_skipped += d.skipped;
        report.inputs.insert(name.to_string(), d.clone());
    }

    let off = config.simulation.utc_offset_s;
    let (first, last) = config.day_range()?;
    let days = |ts: &mut dyn Iterator<Item = i64>| ts.map(|t| day_index(t, off)).collect::<BTreeSet<i64>>();
    let present = [
        ("flights", days(&mut flights.records.iter().map(|f| f.actual_time))),
        ("stamps", days(&mut stamps.records.iter().map(|s| s.timestamp))),
        ("wifi", days(&mut wifi.records.iter().map(|o| o.timestamp))),
    ];
    for day in first..=last {
        let missing: Vec<String> =
            present.iter().filter(|(_, d)| !d.contains(&day)).map(|(n, _)| n.to_string()).collect();
        if !missing.is_empty() {
            report.missing_days.insert(day_label(day), missing);
        }
    }

    let write = |e: io::Error| CliError::Ingest(format!("writing bundle: {e}"));
    let werr = |e: crate::ingest::IngestError| CliError::Ingest(format!("writing bundle: {e}"));
    let staged = StagedDir::create(&config.output, INGEST_DIR).map_err(write)?;
    write_flight_schedule(&flights.records, staged.file("flights.csv").map_err(write)?).map_err(werr)?;
    write_immigration_stamps(&stamps.records, staged.file("stamps.csv").map_err(write)?).map_err(werr)?;
    write_wifi_traces(&wifi.records, staged.file("wifi.csv").map_err(write)?).map_err(werr)?;
    write_distances(&distances.records, staged.file("distances.csv").map_err(write)?).map_err(werr)?;
    if let Some(s) = &staffing {
        write_staffing_schedule(&s.records, staged.file("staffing.csv").map_err(write)?).map_err(werr)?;
    }
    staged.json("report.json", &report).map_err(write)?;
    staged.commit().map_err(write)?;
    info!(
        "ingested {} flights, {} stamps, {} wifi rows ({} rows skipped)",
        flights.records.len(),
        stamps.records.len(),
        wifi.records.len(),
        report.total_skipped
    );
    Ok(report)
}

fn load_bundle(config: &RunConfig, err: fn(String) -> CliError) -> Result<Bundle, CliError> {
    let dir = config.output.join(INGEST_DIR);
    if !dir.join("report.json").is_file() {
        return Err(err(format!("ingest bundle not found in {}; run `paxflow ingest` first", dir.display())));
    }
    let read = |name: &str| open(&dir.join(name)).map_err(|e| err(format!("{name}: {e}")));
    let bad = |name: &'static str| move |e: crate::ingest::IngestError| err(format!("{name}: {e}"));
    let staffing_path = dir.join("staffing.csv");
    Ok(Bundle {
        flights: parse_flight_schedule(read("flights.csv")?).map_err(bad("flights"))?.records,
        stamps: parse_immigration_stamps(read("stamps.csv")?).map_err(bad("stamps"))?.records,
        wifi: parse_wifi_traces(read("wifi.csv")?).map_err(bad("wifi"))?.records,
        distances: parse_distances(read("distances.csv")?).map_err(bad("distances"))?.records,
        staffing: match staffing_path.is_file() {
            true => Some(parse_staffing_schedule(read("staffing.csv")?).map_err(bad("staffing"))?.records),
            false => None,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub join: JoinReport,
    pub speeds: usize,
    pub walks_without_distance: usize,
    pub em_candidates: Vec<Candidate>,
    pub em_components: Vec<GaussianComponent>,
    pub em_iterations: usize,
    pub em_converged: bool,
    pub family_fits: Vec<FitReport>,
    pub service_windows: usize,
    pub mean_per_desk_rate: f64,
    pub occupancy_flights: usize,
}

/// Fits the walk-speed mixture, the per-desk service rate and the per-flight
/// occupancy from the ingest bundle into `<out>/calibrate`.
pub fn calibrate(config: &RunConfig) -> Result<CalibrationReport, CliError> {
    let bundle = load_bundle(config, CliError::Calibrate)?;
    let off = config.simulation.utc_offset_s;
    let window = config.calibration.service_window_s;
    let gates: BTreeSet<String> = bundle.distances.keys().cloned().collect();
    let immigration: BTreeSet<String> = config.zones.immigration.iter().cloned().collect();

    let (walks, join) = join_gate_to_immigration(&bundle.wifi, &gates, &immigration)
        .map_err(|e| CliError::Calibrate(format!("wifi: {e}")))?;
    let (speeds, walks_without_distance) = walk_times_to_speeds(&walks, &bundle.distances)
        .map_err(|e| CliError::Calibrate(format!("distances: {e}")))?;
    let fit = build_walk_speed_model(&speeds, &bundle.distances, &config.calibration.walk_options())
        .map_err(|e| CliError::Calibrate(format!("wifi: walk-speed fit failed: {e}")))?;

    let arrivals: Vec<StampRecord> =
        bundle.stamps.iter().filter(|s| s.direction == Direction::Arrival).cloned().collect();
    let open_desks = estimate_open_desks(&arrivals, window, off)
        .map_err(|e| CliError::Calibrate(format!("stamps: {e}")))?;
    let dwell = immigration_dwell_times(&bundle.wifi, &immigration);
    let waits =
        mean_wait_by_window(&dwell, window, off).map_err(|e| CliError::Calibrate(format!("wifi: {e}")))?;
    let options = ServiceRateOptions { window, utc_offset: off, hourly_max: config.calibration.hourly_max };
    let service = estimate_desk_service_rate(
        &arrivals,
        &open_desks,
        &waits,
        config.calibration.congestion_filter(),
        &options,
    )
    .map_err(|e| CliError::Calibrate(format!("stamps: service-rate estimation failed: {e}")))?;
    let occupancy = estimate_passengers_per_flight(&bundle.stamps, &bundle.flights, off)
        .map_err(|e| CliError::Calibrate(format!("stamps: occupancy estimation failed: {e}")))?;

    let models = CalibratedModels::new(&fit.model, &service);
    let report = CalibrationReport {
        join,
        speeds: speeds.len(),
        walks_without_distance,
        em_candidates: fit.clustering.candidates.clone(),
        em_components: fit.clustering.selected.components.clone(),
        em_iterations: fit.clustering.selected.iterations,
        em_converged: fit.clustering.selected.converged,
        family_fits: fit.reports.clone(),
        service_windows: service.per_desk_rates.len(),
        mean_per_desk_rate: service.mean_rate(),
        occupancy_flights: occupancy.per_flight.len(),
    };

    let write = |e: io::Error| CliError::Calibrate(format!("writing models: {e}"));
    let staged = StagedDir::create(&config.output, CALIBRATE_DIR).map_err(write)?;
    fs::write(staged.tmp.join("models.json"), models.to_json()).map_err(write)?;
    staged.json("occupancy.json", &occupancy).map_err(write)?;
    staged.json("fit_report.json", &report).map_err(write)?;
    write_aic_table(&fit.reports, staged.file("fit_report.csv").map_err(write)?).map_err(write)?;
    staged.commit().map_err(write)?;
    info!(
        "walk-speed mixture with {} components from {} speeds; {} congested service windows",
        fit.model.components.len(),
        speeds.len(),
        service.per_desk_rates.len()
    );
    Ok(report)
}

/// One row per mixture component: weight, cluster size, AIC of each family
/// and the selected family.
fn write_aic_table<W: io::Write>(reports: &[FitReport], sink: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["component".to_string(), "weight".into(), "cluster_size".into()];
    header.extend(Family::ALL.iter().map(|f| format!("{f}_aic")));
    header.push("selected".into());
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            (r.component_index + 1).to_string(),
            r.mixture_weight.to_string(),
            r.cluster_size.to_string(),
        ];
        row.extend(
            Family::ALL.iter().map(|f| r.per_family.get(f).map(|x| x.aic.to_string()).unwrap_or_default()),
        );
        row.push(r.selected.map(|f| f.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySummary {
    pub date: String,
    pub seed: u64,
    pub flights: usize,
    pub passengers: usize,
    pub served: usize,
    pub unserved: usize,
    pub unstable: bool,
    pub max_queue: usize,
    pub mean_wait_s: f64,
    /// Set when the day had no arriving flights and was not simulated.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub days: Vec<DaySummary>,
    pub unstable_days: Vec<String>,
}

struct DayOutput {
    summary: DaySummary,
    traces: Vec<u8>,
    bins: Vec<u8>,
}

fn derived_schedules(
    stamps: &[StampRecord],
    window: i64,
    off: i64,
) -> Result<BTreeMap<i64, StaffingSchedule>, CliError> {
    let arrivals: Vec<StampRecord> =
        stamps.iter().filter(|s| s.direction == Direction::Arrival).cloned().collect();
    let desks = estimate_open_desks(&arrivals, window, off)
        .map_err(|e| CliError::Simulate(format!("stamps: {e}")))?;
    let mut by_day: BTreeMap<i64, Vec<(f64, u32)>> = BTreeMap::new();
    for (start, n) in desks {
        let day = by_day.entry(day_index(start, off)).or_default();
        if day.is_empty() && start > day_start(day_index(start, off), off) {
            day.push((day_start(day_index(start, off), off) as f64, n));
        }
        day.push((start as f64, n));
    }
    by_day
        .into_iter()
        .map(|(day, bp)| {
            StaffingSchedule::new(bp)
                .map(|s| (day, s))
                .map_err(|e| CliError::Simulate(format!("derived staffing: {e}")))
        })
        .collect()
}

/// Simulates every day of the configured range (in parallel, seed + day
/// offset) into `<out>/simulate`.
pub fn simulate(config: &RunConfig) -> Result<SimulationSummary, CliError> {
    let bundle = load_bundle(config, CliError::Simulate)?;
    let dir = config.output.join(CALIBRATE_DIR);
    let models_path = dir.join("models.json");
    if !models_path.is_file() {
        return Err(CliError::Simulate(format!(
            "calibrated models not found in {}; run `paxflow calibrate` first",
            dir.display()
        )));
    }
    let read =
        |p: &Path| fs::read_to_string(p).map_err(|e| CliError::Simulate(format!("{}: {e}", p.display())));
    let models = CalibratedModels::from_json(&read(&models_path)?)
        .map_err(|e| CliError::Simulate(format!("models.json: {e}")))?;
    let occupancy: FlightOccupancyDistribution = serde_json::from_str(&read(&dir.join("occupancy.json"))?)
        .map_err(|e| CliError::Simulate(format!("occupancy.json: {e}")))?;
    let walk = models.walk_model();
    let service = models.service_model();

    let off = config.simulation.utc_offset_s;
    let (first, last) = config.day_range()?;
    let derived = match config.staffing.mode {
        StaffingMode::Derived => derived_schedules(&bundle.stamps, config.calibration.service_window_s, off)?,
        _ => BTreeMap::new(),
    };
    let file_schedule = match (config.staffing.mode, &bundle.staffing) {
        (StaffingMode::File, None) => {
            return Err(CliError::Simulate("staffing mode \"file\" needs a staffing schedule input".into()))
        }
        (_, s) => s.clone(),
    };

    let days: Vec<i64> = (first..=last).collect();
    let outputs: Vec<Result<DayOutput, CliError>> = days
        .par_iter()
        .map(|&day| {
            let label = day_label(day);
            let seed = config.simulation.seed.wrapping_add((day - first) as u64);
            let flights: Vec<FlightArrival> =
                bundle.flights.iter().filter(|f| day_index(f.actual_time, off) == day).cloned().collect();
            let mut summary = DaySummary {
                date: label.clone(),
                seed,
                flights: flights.len(),
                passengers: 0,
                served: 0,
                unserved: 0,
                unstable: false,
                max_queue: 0,
                mean_wait_s: 0.0,
                skipped: flights.is_empty(),
            };
            if flights.is_empty() {
                return Ok(DayOutput { summary, traces: Vec::new(), bins: Vec::new() });
            }
            let control = match config.staffing.mode {
                StaffingMode::File => {
                    StaffingControl::Schedule(file_schedule.clone().expect("checked above"))
                }
                StaffingMode::Derived => {
                    StaffingControl::Schedule(derived.get(&day).cloned().ok_or_else(|| {
                        CliError::Simulate(format!("{label}: no stamps to derive staffing from"))
                    })?)
                }
                StaffingMode::Policy => StaffingControl::Policy(config.staffing.policy()),
            };
            let result = simulate_day(
                &flights,
                &occupancy,
                &walk,
                &service,
                &control,
                &config.simulation_config(seed),
            )
            .map_err(|e| CliError::Simulate(format!("{label}: {e}")))?;
            let bins = bin_statistics(&result.traces, config.grid(), config.analysis.demand);
            let d = &result.diagnostics;
            summary.passengers = d.generated;
            summary.served = d.served;
            summary.unserved = result.unserved.len();
            summary.unstable = d.unstable;
            summary.max_queue = d.max_queue;
            if !result.traces.is_empty() {
                summary.mean_wait_s =
                    result.traces.iter().map(|t| t.wait()).sum::<f64>() / result.traces.len() as f64;
            }
            let mut traces = Vec::new();
            let mut bin_rows = Vec::new();
            let werr = |e: AnalyzeError| CliError::Simulate(format!("{label}: {e}"));
            write_traces(&result.traces, &mut traces).map_err(werr)?;
            write_bins(&bins, &mut bin_rows).map_err(werr)?;
            Ok(DayOutput { summary, traces, bins: bin_rows })
        })
        .collect();

    let write = |e: io::Error| CliError::Simulate(format!("writing results: {e}"));
    let staged = StagedDir::create(&config.output, SIMULATE_DIR).map_err(write)?;
    let mut summary = SimulationSummary { days: Vec::new(), unstable_days: Vec::new() };
    for out in outputs {
        let out = out?;
        if !out.summary.skipped {
            fs::create_dir_all(staged.tmp.join(&out.summary.date)).map_err(write)?;
            fs::write(staged.tmp.join(&out.summary.date).join("traces.csv"), &out.traces).map_err(write)?;
            fs::write(staged.tmp.join(&out.summary.date).join("bins.csv"), &out.bins).map_err(write)?;
        }
        if out.summary.unstable {
            warn!("{}: queue exceeded the instability cap", out.summary.date);
            summary.unstable_days.push(out.summary.date.clone());
        }
        summary.days.push(out.summary);
    }
    staged.json("summary.json", &summary).map_err(write)?;
    staged.commit().map_err(write)?;
    info!("simulated {} days, {} unstable", summary.days.len(), summary.unstable_days.len());
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationBlock {
    pub common_bins: usize,
    pub mae_wait_s: f64,
    pub rmse_wait_s: f64,
    pub mae_queue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub flight_count: usize,
    pub mean_delay_minutes: Option<f64>,
    pub bins: usize,
    pub curve_points: usize,
    pub saturation_demand: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validation: Option<ValidationBlock>,
}

/// Delay summary, throughput-demand curve and, when observed bins are
/// configured, validation metrics into `<out>/analyze`.
pub fn analyze(config: &RunConfig) -> Result<AnalysisSummary, CliError> {
    let sim_dir = config.output.join(SIMULATE_DIR);
    let summary_path = sim_dir.join("summary.json");
    let text = fs::read_to_string(&summary_path).map_err(|_| {
        CliError::Analyze(format!(
            "no simulation results in {}; run `paxflow simulate` first",
            sim_dir.display()
        ))
    })?;
    let sim: SimulationSummary =
        serde_json::from_str(&text).map_err(|e| CliError::Analyze(format!("summary.json: {e}")))?;
    let aerr = |what: String| move |e: AnalyzeError| CliError::Analyze(format!("{what}: {e}"));

    let mut bins: Vec<BinnedQueueStats> = Vec::new();
    for day in sim.days.iter().filter(|d| !d.skipped) {
        let path = sim_dir.join(&day.date).join("bins.csv");
        let file = open(&path).map_err(|e| CliError::Analyze(format!("{}: {e}", path.display())))?;
        bins.extend(read_bins(file).map_err(aerr(path.display().to_string()))?);
    }
    if bins.is_empty() {
        return Err(CliError::Analyze("simulation results hold no binned statistics".into()));
    }

    let off = config.simulation.utc_offset_s;
    let (first, last) = config.day_range()?;
    let bundle = load_bundle(config, CliError::Analyze)?;
    let flights: Vec<FlightArrival> = bundle
        .flights
        .into_iter()
        .filter(|f| (first..=last).contains(&day_index(f.actual_time, off)))
        .collect();
    let delays = match flights.is_empty() {
        true => None,
        false => Some(flight_delay_summary(&flights, config.grid()).map_err(aerr("delays".into()))?),
    };

    let mut curve = throughput_vs_demand(&bins).map_err(aerr("curve".into()))?;
    curve.saturation_demand =
        match detect_saturation(&curve, config.analysis.saturation_window, config.analysis.slope_epsilon) {
            Ok(knee) => knee,
            Err(AnalyzeError::TooFewPoints { needed, got }) => {
                warn!("saturation not assessed: {got} demand levels, {needed} needed");
                None
            }
            Err(e) => return Err(CliError::Analyze(e.to_string())),
        };

    let validation: Option<ValidationMetrics> = match &config.inputs.actual_bins {
        None => None,
        Some(path) => {
            let file = open(path).map_err(|e| CliError::Analyze(format!("{}: {e}", path.display())))?;
            let actual = read_bins(file).map_err(aerr(path.display().to_string()))?;
            Some(validate_against_actual(&bins, &actual).map_err(aerr("validation".into()))?)
        }
    };

    let summary = AnalysisSummary {
        flight_count: flights.len(),
        mean_delay_minutes: delays.as_ref().map(|d| d.overall_mean_delay),
        bins: bins.len(),
        curve_points: curve.points.len(),
        saturation_demand: curve.saturation_demand,
        validation: validation.as_ref().map(|m| ValidationBlock {
            common_bins: m.common_bins,
            mae_wait_s: m.mae_wait,
            rmse_wait_s: m.rmse_wait,
            mae_queue: m.mae_queue,
        }),
    };

    let write = |e: io::Error| CliError::Analyze(format!("writing analysis: {e}"));
    let staged = StagedDir::create(&config.output, ANALYZE_DIR).map_err(write)?;
    write_curve(&curve, staged.file("curve.csv").map_err(write)?).map_err(aerr("curve.csv".into()))?;
    if let Some(d) = &delays {
        let mut w = csv::Writer::from_writer(staged.file("delays.csv").map_err(write)?);
        let row = |w: &mut csv::Writer<File>, r: [String; 4]| w.write_record(r).map_err(|e| write(e.into()));
        row(&mut w, ["bin_start".into(), "time".into(), "flights".into(), "mean_delay_minutes".into()])?;
        for b in &d.per_bin_mean_delay {
            row(
                &mut w,
                [
                    b.bin_start.to_string(),
                    format_timestamp(b.bin_start.floor() as i64),
                    b.flights.to_string(),
                    b.mean_delay_minutes.to_string(),
                ],
            )?;
        }
        w.flush().map_err(write)?;
    }
    if let Some(m) = &validation {
        let mut w = csv::Writer::from_writer(staged.file("validation.csv").map_err(write)?);
        for r in &m.residuals {
            w.serialize(r).map_err(|e| write(e.into()))?;
        }
        w.flush().map_err(write)?;
    }
    staged.json("summary.json", &summary).map_err(write)?;
    staged.commit().map_err(write)?;
    Ok(summary)
}
