use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paxflow::calibrate::CalibratedModels;
use serde_json::Value;
use tempfile::TempDir;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
const INPUTS: [&str; 6] =
    ["flights.csv", "stamps.csv", "wifi.csv", "distances.csv", "staffing.csv", "actual_bins.csv"];

/// A scratch copy of the fixture inputs with its own config.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self::with_config(|c| c)
    }

    fn with_config(edit: impl FnOnce(String) -> String) -> Self {
        let dir = tempfile::tempdir().unwrap();
        for name in INPUTS {
            fs::copy(Path::new(FIXTURES).join(name), dir.path().join(name)).unwrap();
        }
        let config = fs::read_to_string(Path::new(FIXTURES).join("config.toml")).unwrap();
        fs::write(dir.path().join("config.toml"), edit(config)).unwrap();
        Workspace { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_paxflow"))
            .args(args)
            .arg("--config")
            .arg(self.path("config.toml"))
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    fn json(&self, rel: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(rel)).unwrap()).unwrap()
    }
}

fn without_line(config: String, prefix: &str) -> String {
    config.lines().filter(|l| !l.starts_with(prefix)).map(|l| format!("{l}\n")).collect()
}

#[test]
fn ingest_fixture_has_no_skips() {
    let ws = Workspace::new();
    ws.ok(&["ingest"]);
    let report = ws.json("out/ingest/report.json");
    assert_eq!(report["total_skipped"], 0);
    for name in ["flights.csv", "stamps.csv", "wifi.csv", "distances.csv", "staffing.csv"] {
        assert!(ws.path("out/ingest").join(name).is_file(), "{name}");
    }
}

#[test]
fn missing_input_exits_2_without_output() {
    let ws = Workspace::new();
    fs::remove_file(ws.path("wifi.csv")).unwrap();
    let out = ws.run(&["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wifi"));
    assert!(!ws.path("out/ingest").exists());
    assert!(!ws.path("out/.ingest.partial").exists());
}

#[test]
fn bad_rows_are_counted() {
    let ws = Workspace::new();
    let mut flights = fs::read_to_string(ws.path("flights.csv")).unwrap();
    flights.push_str("BAD1,not-a-time,2024-12-02T08:00:00Z,G1,arrival,\n");
    flights.push_str("BAD2,2024-12-02T08:00:00Z,2024-12-02T08:05:00Z,,arrival,\n");
    flights.push_str("BAD3,2024-12-02T08:00:00Z,2024-12-02T08:05:00Z,G1,sideways,\n");
    fs::write(ws.path("flights.csv"), flights).unwrap();
    ws.ok(&["ingest"]);
    let report = ws.json("out/ingest/report.json");
    assert_eq!(report["total_skipped"], 3);
    assert_eq!(report["inputs"]["flights"]["skipped"], 3);
}

#[test]
fn calibrate_writes_models() {
    let ws = Workspace::new();
    ws.ok(&["ingest"]);
    ws.ok(&["calibrate"]);
    let models =
        CalibratedModels::from_json(&fs::read_to_string(ws.path("out/calibrate/models.json")).unwrap());
    let models = models.unwrap();
    assert!(!models.components.is_empty());
    let table = fs::read_to_string(ws.path("out/calibrate/fit_report.csv")).unwrap();
    assert!(table.starts_with("component,weight,cluster_size,logistic_aic,lognormal_aic,gamma_aic,selected"));
}

#[test]
fn calibrate_without_bundle_exits_3() {
    let ws = Workspace::new();
    assert_eq!(ws.run(&["calibrate"]).status.code(), Some(3));
    assert!(!ws.path("out/calibrate").exists());
}

#[test]
fn calibrate_on_tiny_wifi_exits_3_naming_it() {
    let ws = Workspace::new();
    fs::write(
        ws.path("wifi.csv"),
        "device_id,timestamp,zone\n\
         a,2024-12-02T07:00:00Z,G1\na,2024-12-02T07:05:00Z,immigration\n\
         b,2024-12-02T07:00:00Z,G2\nb,2024-12-02T07:06:00Z,immigration\n",
    )
    .unwrap();
    ws.ok(&["ingest"]);
    let out = ws.run(&["calibrate"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wifi"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    ws.ok(&["ingest"]);
    ws.ok(&["calibrate"]);
    ws.ok(&["simulate"]);
    let day = "out/simulate/2024-12-02";
    let first: Vec<Vec<u8>> =
        ["traces.csv", "bins.csv"].iter().map(|f| fs::read(ws.path(day).join(f)).unwrap()).collect();
    let summary = fs::read(ws.path("out/simulate/summary.json")).unwrap();
    ws.ok(&["simulate"]);
    let second: Vec<Vec<u8>> =
        ["traces.csv", "bins.csv"].iter().map(|f| fs::read(ws.path(day).join(f)).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(summary, fs::read(ws.path("out/simulate/summary.json")).unwrap());
}

#[test]
fn twelve_day_batch_flags_two_unstable_days() {
    let ws = Workspace::with_config(|c| {
        c.replace("end_date = \"2024-12-03\"", "end_date = \"2024-12-13\"")
            .replace("instability_cap = 100000", "instability_cap = 400")
            .replace("mode = \"derived\"", "mode = \"policy\"")
            .replace("max_desks = 10", "max_desks = 4")
    });
    ws.ok(&["ingest"]);
    ws.ok(&["calibrate"]);

    // Replace the schedule with twelve days of modest flights, except for two
    // days that each bring several thousand passengers in one hour.
    let mut flights = String::from("flight_id,scheduled_time,actual_time,gate,direction,passenger_count\n");
    for day in 2..=13 {
        let heavy = day == 5 || day == 11;
        for k in 0..8 {
            let (hour, pax) = if heavy { (8, 1500) } else { (6 + 2 * k, 40) };
            let minute = if heavy { 7 * k } else { 0 };
            flights.push_str(&format!(
                "X{day}{k},2024-12-{day:02}T{hour:02}:{minute:02}:00Z,2024-12-{day:02}T{hour:02}:{minute:02}:00Z,G{},arrival,{pax}\n",
                k + 1
            ));
        }
    }
    fs::write(ws.path("flights.csv"), flights).unwrap();
    ws.ok(&["ingest"]);
    ws.ok(&["simulate"]);
    let summary = ws.json("out/simulate/summary.json");
    let days = summary["days"].as_array().unwrap();
    assert_eq!(days.len(), 12);
    assert_eq!(summary["unstable_days"], serde_json::json!(["2024-12-05", "2024-12-11"]));
}

#[test]
fn file_staffing_without_schedule_exits_4() {
    let ws = Workspace::with_config(|c| without_line(c, "staffing = \"staffing.csv\""));
    ws.ok(&["ingest"]);
    ws.ok(&["calibrate"]);
    let out = ws.run(&["simulate", "--staffing-mode", "file"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!ws.path("out/simulate").exists());
}

#[test]
fn analyze_without_results_exits_5() {
    let ws = Workspace::new();
    assert_eq!(ws.run(&["analyze"]).status.code(), Some(5));
}

#[test]
fn analyze_validation_block_only_with_actuals() {
    let ws = Workspace::with_config(|c| without_line(c, "actual_bins ="));
    ws.ok(&["all"]);
    let summary = ws.json("out/analyze/summary.json");
    assert!(summary.get("validation").is_none());
    assert!(!ws.path("out/analyze/validation.csv").exists());
    assert!(summary["curve_points"].as_u64().unwrap() > 0);

    let ws = Workspace::new();
    ws.ok(&["all"]);
    let summary = ws.json("out/analyze/summary.json");
    let block = &summary["validation"];
    assert!(block["common_bins"].as_u64().unwrap() > 0);
    assert!(block["mae_wait_s"].as_f64().unwrap() >= 0.0);
    assert!(ws.path("out/analyze/validation.csv").is_file());
}

#[test]
fn flags_override_config() {
    let ws = Workspace::new();
    let out = ws.path("elsewhere");
    let status = Command::new(env!("CARGO_BIN_EXE_paxflow"))
        .args(["ingest", "--config"])
        .arg(ws.path("config.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("ingest/report.json").is_file());
    assert!(!ws.path("out").exists());
    assert_eq!(ws.run(&["ingest", "--bin-width", "0"]).status.code(), Some(1));
}
