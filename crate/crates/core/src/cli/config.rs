use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analyze::{DemandDefinition, DEFAULT_SATURATION_WINDOW, DEFAULT_SLOPE_EPSILON};
use crate::calibrate::{CongestionFilter, EmOptions, WalkFitOptions, DEFAULT_ASSIGNMENT_THRESHOLD};
use crate::engine::{CongestionPolicy, SimulationConfig};
use crate::time::{parse_day, BinGrid, DEFAULT_BIN_WIDTH};

/// Pipeline configuration, read from a TOML file. Relative paths are
/// resolved against the directory holding the file.
///
/// ```toml
/// output = "out"
///
/// [inputs]
/// flights = "flights.csv"
/// stamps = "stamps.csv"
/// wifi = "wifi.csv"
/// distances = "distances.csv"
/// # staffing = "staffing.csv"     # required for staffing mode "file"
/// # actual_bins = "actual.csv"    # enables validation in `analyze`
///
/// [simulation]
/// start_date = "2024-12-02"
/// end_date = "2024-12-03"         # inclusive
/// seed = 7
///
/// [staffing]
/// mode = "derived"                # file | derived | policy
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    #[serde(default)]
    pub zones: Zones,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub staffing: StaffingSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub flights: PathBuf,
    pub stamps: PathBuf,
    pub wifi: PathBuf,
    pub distances: PathBuf,
    pub staffing: Option<PathBuf>,
    pub actual_bins: Option<PathBuf>,
}

/// Wi-Fi zone names. Gate zones are the gate names of the distance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zones {
    pub immigration: Vec<String>,
}

impl Default for Zones {
    fn default() -> Self {
        Zones { immigration: vec!["immigration".to_string()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub start_date: String,
    pub end_date: String,
    pub seed: u64,
    pub bin_width_s: f64,
    pub instability_cap: usize,
    /// Local time minus UTC, in seconds.
    pub utc_offset_s: i64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            start_date: String::new(),
            end_date: String::new(),
            seed: 0,
            bin_width_s: DEFAULT_BIN_WIDTH as f64,
            instability_cap: SimulationConfig::default().instability_cap,
            utc_offset_s: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StaffingMode {
    /// Breakpoints from the staffing input file.
    File,
    /// Historical open desks estimated from the stamps of each simulated day.
    #[default]
    Derived,
    /// Queue-length threshold policy.
    Policy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaffingSection {
    pub mode: StaffingMode,
    pub upper: usize,
    pub lower: usize,
    pub min_desks: u32,
    pub max_desks: u32,
    pub initial_desks: u32,
    pub review_interval_s: f64,
}

impl Default for StaffingSection {
    fn default() -> Self {
        StaffingSection {
            mode: StaffingMode::Derived,
            upper: 50,
            lower: 10,
            min_desks: 1,
            max_desks: 20,
            initial_desks: 4,
            review_interval_s: 300.0,
        }
    }
}

impl StaffingSection {
    pub fn policy(&self) -> CongestionPolicy {
        CongestionPolicy {
            upper: self.upper,
            lower: self.lower,
            min_desks: self.min_desks,
            max_desks: self.max_desks,
            initial_desks: self.initial_desks,
            review_interval: self.review_interval_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    pub max_components: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub em_seed: u64,
    pub assignment_threshold: f64,
    /// Window (s) for open-desk and service-rate estimation.
    pub service_window_s: i64,
    /// Keep windows whose mean observed wait exceeds this (s)...
    pub min_wait_s: Option<f64>,
    /// ...or every window of the k most congested days instead.
    pub top_k_days: Option<usize>,
    pub hourly_max: bool,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        let em = EmOptions::default();
        CalibrationSection {
            max_components: em.max_components,
            restarts: em.restarts,
            tolerance: em.tolerance,
            max_iterations: em.max_iterations,
            em_seed: em.seed,
            assignment_threshold: DEFAULT_ASSIGNMENT_THRESHOLD,
            service_window_s: DEFAULT_BIN_WIDTH,
            min_wait_s: None,
            top_k_days: None,
            hourly_max: false,
        }
    }
}

impl CalibrationSection {
    pub fn walk_options(&self) -> WalkFitOptions {
        WalkFitOptions {
            em: EmOptions {
                max_components: self.max_components,
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
                restarts: self.restarts,
                seed: self.em_seed,
                ..EmOptions::default()
            },
            assignment_threshold: self.assignment_threshold,
        }
    }

    pub fn congestion_filter(&self) -> CongestionFilter {
        match (self.top_k_days, self.min_wait_s) {
            (Some(k), _) => CongestionFilter::TopKDays(k),
            (None, Some(w)) => CongestionFilter::MinWait(w),
            (None, None) => CongestionFilter::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub saturation_window: usize,
    pub slope_epsilon: f64,
    pub demand: DemandDefinition,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            saturation_window: DEFAULT_SATURATION_WINDOW,
            slope_epsilon: DEFAULT_SLOPE_EPSILON,
            demand: DemandDefinition::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub bin_width_s: Option<f64>,
    pub output: Option<PathBuf>,
    pub staffing_mode: Option<StaffingMode>,
    pub upper: Option<usize>,
    pub lower: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads the file, resolves relative paths against its directory,
    /// applies `overrides` and validates the result.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.inputs;
        for p in [&mut i.flights, &mut i.stamps, &mut i.wifi, &mut i.distances] {
            join(p);
        }
        for p in [&mut i.staffing, &mut i.actual_bins].into_iter().flatten() {
            join(p);
        }
        join(&mut self.output);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.simulation.seed = seed;
        }
        if let Some(w) = o.bin_width_s {
            self.simulation.bin_width_s = w;
        }
        if let Some(out) = &o.output {
            self.output = out.clone();
        }
        if let Some(mode) = o.staffing_mode {
            self.staffing.mode = mode;
        }
        if let Some(u) = o.upper {
            self.staffing.upper = u;
        }
        if let Some(l) = o.lower {
            self.staffing.lower = l;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let (start, end) = self.day_range()?;
        if start > end {
            return Err(CliError::Config("start_date is after end_date".into()));
        }
        let w = self.simulation.bin_width_s;
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Config(format!("bin width must be positive, got {w}")));
        }
        if self.calibration.service_window_s <= 0 {
            return Err(CliError::Config("service_window_s must be positive".into()));
        }
        if self.zones.immigration.is_empty() {
            return Err(CliError::Config("no immigration zones configured".into()));
        }
        if self.staffing.mode == StaffingMode::Policy {
            self.staffing.policy().validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Inclusive range of local day indices to simulate.
    pub fn day_range(&self) -> Result<(i64, i64), CliError> {
        let day = |s: &str, name: &str| {
            parse_day(s).ok_or_else(|| CliError::Config(format!("{name} {s:?} is not a YYYY-MM-DD date")))
        };
        Ok((day(&self.simulation.start_date, "start_date")?, day(&self.simulation.end_date, "end_date")?))
    }

    pub fn grid(&self) -> BinGrid {
        BinGrid::new(self.simulation.bin_width_s, self.simulation.utc_offset_s as f64)
    }

    pub fn simulation_config(&self, seed: u64) -> SimulationConfig {
        SimulationConfig { instability_cap: self.simulation.instability_cap, seed, bins: self.grid() }
    }
}
