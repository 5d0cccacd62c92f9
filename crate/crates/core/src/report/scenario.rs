use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::OutputFormat;
use crate::perf::{default_delay_ps_per_mm, AreaParams, ElectricalBaseline};
use crate::photonic::PhotonicParams;
use crate::sim::{LinkTechnology, SimOptions, SimScenario, SweepAxis, TopologySpec, Workload};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON for schema v{SCHEMA_VERSION}: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (this build reads {SCHEMA_VERSION})")]
    UnsupportedVersion(u32),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<u64>,
}

/// On-disk scenario description (JSON).
///
/// ```json
/// {
///   "schema_version": 1,
///   "topology": { "reference": { "cores": 4, "bitwidth": 128 } },
///   "workload": { "ntt_size": 4096, "coefficient_bitwidth": 64 },
///   "photonic": { "coupler_loss": 1.5 },
///   "overlap": true,
///   "sweep": { "axis": "bitwidth", "values": [32, 64, 128] }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub photonic: PhotonicParams,
    #[serde(default)]
    pub area: AreaParams,
    pub topology: TopologySpec,
    #[serde(default)]
    pub workload: Workload,
    #[serde(default = "default_overlap")]
    pub overlap: bool,
    #[serde(default)]
    pub link: LinkTechnology,
    /// Overrides the electrical network latency, ns.
    #[serde(default)]
    pub electrical_latency_ns: Option<f64>,
    #[serde(default)]
    pub delay_ps_per_mm: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_format: Option<OutputFormat>,
}

fn default_overlap() -> bool {
    true
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::UnsupportedVersion(s.schema_version));
        }
        s.photonic
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if let Some(l) = s.electrical_latency_ns {
            if !(l > 0.0) {
                return Err(ScenarioError::Invalid(
                    "electrical_latency_ns must be positive".into(),
                ));
            }
        }
        if let Some(d) = s.delay_ps_per_mm {
            if !(d >= 0.0) {
                return Err(ScenarioError::Invalid(
                    "delay_ps_per_mm must be non-negative".into(),
                ));
            }
        }
        Ok(s)
    }

    pub fn to_sim(&self) -> SimScenario {
        let mut baseline = ElectricalBaseline::default();
        if let Some(l) = self.electrical_latency_ns {
            baseline.latency_ns = l;
        }
        SimScenario {
            topology: self.topology.clone(),
            workload: self.workload.clone(),
            params: self.photonic.clone(),
            area: self.area.clone(),
            options: SimOptions {
                overlap: self.overlap,
                link: self.link,
                baseline,
                delay_ps_per_mm: self.delay_ps_per_mm.unwrap_or_else(default_delay_ps_per_mm),
            },
        }
    }
}
