//! Report generation behind the `optolink` command line: scenario files,
//! regenerated reference tables, accelerator coverage and the NTT self-test.
//!
//! Everything here renders to in-memory [`Artifact`]s; the binary decides
//! where they land. Each artifact starts with a single `generated_at`
//! line and is otherwise byte-stable for fixed inputs.

mod compare;
mod scenario;
mod selftest;
mod tables;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use compare::{
    accelerator_requirements, compare, AcceleratorRequirement, CompareReport, CompareRow,
};
pub use scenario::{Scenario, ScenarioError, SweepSpec, SCHEMA_VERSION};
pub use selftest::{ntt_selftest, SelftestCheck, SelftestReport};
pub use tables::{
    generate_tables, AreaTableRow, BitrateTableRow, Check, PowerTableRow, TableInputs, TablesReport,
};

use crate::sim::{ScenarioRun, SweepPoint};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!(
                "unknown format `{other}` (expected csv, json or both)"
            )),
        }
    }
}

/// A named output file and its full contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        if !v.trim().is_empty() {
            return v.trim().to_string();
        }
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
        .to_string()
}

/// Drops the `generated_at` header line so payloads can be compared.
pub fn strip_timestamp(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.contains("generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    generated_at: &'a str,
    command: &'a str,
    data: &'a T,
}

pub(crate) fn json_artifact<T: Serialize>(
    stem: &str,
    command: &str,
    stamp: &str,
    data: &T,
) -> Artifact {
    let env = Envelope {
        generated_at: stamp,
        command,
        data,
    };
    let mut contents = serde_json::to_string_pretty(&env).expect("report types serialize");
    contents.push('\n');
    Artifact {
        file_name: format!("{stem}.json"),
        contents,
    }
}

pub(crate) fn csv_artifact<R: Serialize>(
    stem: &str,
    command: &str,
    stamp: &str,
    rows: &[R],
) -> Artifact {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("flat rows serialize to csv");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8");
    Artifact {
        file_name: format!("{stem}.csv"),
        contents: format!("# optolink {command} generated_at={stamp}\n{body}"),
    }
}

/// Rounds to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Shortest decimal for `x` after rounding to `digits` significant figures.
pub fn fmt_sig(x: f64, digits: i32) -> String {
    format!("{}", round_sig(x, digits))
}

/// Flat per-run row for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub axis: String,
    pub value: String,
    pub cores: u32,
    pub bitwidth: u32,
    pub load_time_s: f64,
    pub compute_time_s: f64,
    pub store_time_s: f64,
    pub transfer_time_s: f64,
    pub total_time_s: f64,
    pub bottleneck: &'static str,
    pub stall_count: u64,
    pub memory_cap_binding: bool,
    pub link_bandwidth_tbytes: f64,
    pub aggregate_bandwidth_tbytes: f64,
    pub electrical_bitrate_gbytes: f64,
    pub optolink_power_w: f64,
    pub optolink_area_mm2: f64,
}

impl RunRow {
    pub fn new(axis: &str, value: String, run: &ScenarioRun) -> Self {
        let (r, p) = (&run.result, &run.perf);
        RunRow {
            axis: axis.to_string(),
            value,
            cores: p.cores,
            bitwidth: p.bitwidth,
            load_time_s: r.load_time,
            compute_time_s: r.compute_time,
            store_time_s: r.store_time,
            transfer_time_s: r.transfer_time,
            total_time_s: r.total_time,
            bottleneck: r.bottleneck.as_str(),
            stall_count: r.stall_count,
            memory_cap_binding: r.memory_cap_binding,
            link_bandwidth_tbytes: p.link_bandwidth,
            aggregate_bandwidth_tbytes: p.aggregate_bandwidth,
            electrical_bitrate_gbytes: p.electrical.bitrate_gbytes,
            optolink_power_w: p.power.total,
            optolink_area_mm2: p.area.total,
        }
    }
}

pub fn render_simulation(run: &ScenarioRun, format: OutputFormat, stamp: &str) -> Vec<Artifact> {
    let mut out = Vec::new();
    if format.csv() {
        out.push(csv_artifact(
            "simulate",
            "simulate",
            stamp,
            &[RunRow::new("none", String::new(), run)],
        ));
    }
    if format.json() {
        out.push(json_artifact("simulate", "simulate", stamp, run));
    }
    out
}

pub fn render_sweep(points: &[SweepPoint], format: OutputFormat, stamp: &str) -> Vec<Artifact> {
    let mut out = Vec::new();
    if format.csv() {
        let rows: Vec<RunRow> = points
            .iter()
            .map(|p| RunRow::new(p.axis.as_str(), p.value.to_string(), &p.run))
            .collect();
        out.push(csv_artifact("sweep", "sweep", stamp, &rows));
    }
    if format.json() {
        out.push(json_artifact("sweep", "sweep", stamp, &points));
    }
    out
}
