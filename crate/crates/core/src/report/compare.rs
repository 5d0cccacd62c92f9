use serde::Serialize;

use super::{csv_artifact, json_artifact, Artifact, OutputFormat};
use crate::constants::reference;
use crate::perf::optolink_bandwidth;
use crate::photonic::PhotonicParams;

/// Memory bandwidth one FHE accelerator is reported to need.
///
/// Accelerators with several published figures appear once per figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceleratorRequirement {
    pub name: String,
    pub hardware: String,
    pub schemes: Vec<String>,
    /// GB/s
    pub bandwidth: f64,
}

pub fn accelerator_requirements() -> Vec<AcceleratorRequirement> {
    reference()
        .accelerator
        .iter()
        .flat_map(|a| {
            a.bandwidth_gbytes
                .iter()
                .map(move |&bw| AcceleratorRequirement {
                    name: a.name.clone(),
                    hardware: a.hardware.clone(),
                    schemes: a.schemes.clone(),
                    bandwidth: bw,
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub name: String,
    pub hardware: String,
    pub schemes: String,
    pub required_gbytes: f64,
    pub met: bool,
    pub min_channels: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub channels: u64,
    pub per_channel_gbytes: f64,
    pub optolink_tbytes: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn met(&self) -> impl Iterator<Item = &CompareRow> {
        self.rows.iter().filter(|r| r.met)
    }

    pub fn render(&self, format: OutputFormat, stamp: &str) -> Vec<Artifact> {
        let mut out = Vec::new();
        if format.csv() {
            out.push(csv_artifact("compare", "compare", stamp, &self.rows));
        }
        if format.json() {
            out.push(json_artifact("compare", "compare", stamp, self));
        }
        out
    }
}

/// Which accelerators `channels` OptoLink channels can feed, and how many
/// channels each one would need.
pub fn compare(channels: u64, params: &PhotonicParams) -> CompareReport {
    let rate = params.per_channel_rate;
    let available = optolink_bandwidth(channels, rate) * 1000.0;
    let rows = accelerator_requirements()
        .into_iter()
        .map(|a| {
            let needed = a.bandwidth / rate;
            let min_channels = if (needed - needed.round()).abs() <= 1e-9 * needed {
                needed.round()
            } else {
                needed.ceil()
            };
            CompareRow {
                required_gbytes: a.bandwidth,
                met: available >= a.bandwidth * (1.0 - 1e-12),
                min_channels: min_channels.max(1.0) as u64,
                schemes: a.schemes.join("/"),
                name: a.name,
                hardware: a.hardware,
            }
        })
        .collect();
    CompareReport {
        channels,
        per_channel_gbytes: rate,
        optolink_tbytes: available / 1000.0,
        rows,
    }
}
