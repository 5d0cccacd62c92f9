//! Regenerates the bitrate, power and area tables from the models and
//! checks them against the reference figures.

use serde::Serialize;

use super::{csv_artifact, fmt_sig, json_artifact, round_sig, Artifact, OutputFormat};
use crate::constants::reference;
use crate::perf::{
    default_delay_ps_per_mm, electrical_bitrate, equivalent_electrical_bitwidth, optolink_area,
    optolink_bandwidth, optolink_power, propagation_latency, serialization_latency, AreaParams,
    ElectricalBaseline,
};
use crate::photonic::PhotonicParams;
use crate::topology::default_waveguide_length_um;

/// Relative tolerance for OptoLink power totals.
pub const POWER_TOLERANCE: f64 = 0.005;
/// Significant figures compared for rates, latencies and areas.
pub const SIG_FIGS: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TableInputs {
    pub params: PhotonicParams,
    pub area: AreaParams,
    pub baseline: ElectricalBaseline,
    pub waveguide_length_um: f64,
    pub delay_ps_per_mm: f64,
}

impl Default for TableInputs {
    fn default() -> Self {
        TableInputs {
            params: PhotonicParams::default(),
            area: AreaParams::default(),
            baseline: ElectricalBaseline::default(),
            waveguide_length_um: default_waveguide_length_um(),
            delay_ps_per_mm: default_delay_ps_per_mm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// Equal after rounding both sides to [`SIG_FIGS`] significant figures.
    SigFigs,
    /// Within [`POWER_TOLERANCE`] relative error.
    Relative,
    /// Bit-identical (lookup values, integer results).
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub table: &'static str,
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Check {
    fn new(
        table: &'static str,
        name: String,
        expected: f64,
        actual: f64,
        tolerance: Tolerance,
    ) -> Self {
        let pass = match tolerance {
            Tolerance::SigFigs => round_sig(actual, SIG_FIGS) == round_sig(expected, SIG_FIGS),
            Tolerance::Relative => ((actual - expected) / expected).abs() <= POWER_TOLERANCE,
            Tolerance::Exact => actual == expected,
        };
        Check {
            table,
            name,
            expected,
            actual,
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitrateTableRow {
    pub bitwidth: u32,
    pub electrical_latency_ns: f64,
    pub electrical_gbytes: f64,
    pub optolink_latency_ps: f64,
    pub optolink_tbytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTableRow {
    pub bitwidth: u32,
    pub cores: u32,
    pub channels: u64,
    pub electrical_uw: f64,
    pub optolink_w: f64,
    pub reference_optolink_w: f64,
    pub deviation_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaTableRow {
    pub component: &'static str,
    pub count: u64,
    pub value: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TablesReport {
    pub bitrate: Vec<BitrateTableRow>,
    pub power: Vec<PowerTableRow>,
    pub area: Vec<AreaTableRow>,
    pub checks: Vec<Check>,
}

impl TablesReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn status(&self, table: &str, prefix: &str) -> &'static str {
        let ok = self
            .checks
            .iter()
            .filter(|c| c.table == table && c.name.starts_with(prefix))
            .all(|c| c.pass);
        if ok {
            "ok"
        } else {
            "MISMATCH"
        }
    }

    pub fn render(&self, format: OutputFormat, stamp: &str) -> Vec<Artifact> {
        let mut out = Vec::new();
        if format.csv() {
            let rows: Vec<BitrateCsv> = self
                .bitrate
                .iter()
                .map(|r| BitrateCsv {
                    bitwidth: r.bitwidth,
                    electrical_latency: format!("{}ns", fmt_sig(r.electrical_latency_ns, SIG_FIGS)),
                    electrical_bitrate: format!("{}GB/s", fmt_sig(r.electrical_gbytes, SIG_FIGS)),
                    optolink_latency: format!("{}ps", fmt_sig(r.optolink_latency_ps, SIG_FIGS)),
                    optolink_bitrate: format!("{}TB/s", fmt_sig(r.optolink_tbytes, SIG_FIGS)),
                    status: self.status("bitrate", &format!("{}-bit", r.bitwidth)),
                })
                .collect();
            out.push(csv_artifact("bitrate", "tables", stamp, &rows));

            let rows: Vec<PowerCsv> = self
                .power
                .iter()
                .map(|r| PowerCsv {
                    bitwidth: r.bitwidth,
                    cores: r.cores,
                    channels: r.channels,
                    electrical: format!("{}uW", r.electrical_uw),
                    optolink: format!("{:.2}W", r.optolink_w),
                    reference_optolink: format!("{}W", r.reference_optolink_w),
                    deviation: format!("{:+.2}%", r.deviation_pct),
                    status: self.status("power", &format!("{}-bit {} cores", r.bitwidth, r.cores)),
                })
                .collect();
            out.push(csv_artifact("power", "tables", stamp, &rows));
            out.push(csv_artifact("area", "tables", stamp, &self.area));
            out.push(csv_artifact("checks", "tables", stamp, &self.checks));
        }
        if format.json() {
            out.push(json_artifact("bitrate", "tables", stamp, &self.bitrate));
            out.push(json_artifact("power", "tables", stamp, &self.power));
            out.push(json_artifact("area", "tables", stamp, &self.area));
            out.push(json_artifact("checks", "tables", stamp, &self.checks));
        }
        out
    }
}

#[derive(Serialize)]
struct BitrateCsv {
    bitwidth: u32,
    electrical_latency: String,
    electrical_bitrate: String,
    optolink_latency: String,
    optolink_bitrate: String,
    status: &'static str,
}

#[derive(Serialize)]
struct PowerCsv {
    bitwidth: u32,
    cores: u32,
    channels: u64,
    electrical: String,
    optolink: String,
    reference_optolink: String,
    deviation: String,
    status: &'static str,
}

/// Model failures (bad inputs) surface as failing checks with a NaN actual.
fn or_nan<E>(r: Result<f64, E>) -> f64 {
    r.unwrap_or(f64::NAN)
}

pub fn generate_tables(inputs: &TableInputs) -> TablesReport {
    let c = reference();
    let p = &inputs.params;
    let mut checks = Vec::new();

    let optolink_latency_ps = or_nan(propagation_latency(
        inputs.waveguide_length_um,
        inputs.delay_ps_per_mm,
    ));
    let bitrate: Vec<BitrateTableRow> = c
        .bitrate
        .iter()
        .map(|row| {
            let b = row.bitwidth;
            let model = BitrateTableRow {
                bitwidth: b,
                electrical_latency_ns: inputs.baseline.latency_ns,
                electrical_gbytes: or_nan(electrical_bitrate(b, inputs.baseline.latency_ns)),
                optolink_latency_ps,
                optolink_tbytes: optolink_bandwidth(b as u64, p.per_channel_rate),
            };
            let pairs = [
                (
                    "electrical latency ns",
                    row.electrical_latency_ns,
                    model.electrical_latency_ns,
                ),
                (
                    "electrical bitrate GB/s",
                    row.electrical_gbytes,
                    model.electrical_gbytes,
                ),
                (
                    "optolink latency ps",
                    row.optolink_latency_ps,
                    model.optolink_latency_ps,
                ),
                (
                    "optolink bitrate TB/s",
                    row.optolink_tbytes,
                    model.optolink_tbytes,
                ),
            ];
            for (what, expected, actual) in pairs {
                checks.push(Check::new(
                    "bitrate",
                    format!("{b}-bit {what}"),
                    expected,
                    actual,
                    Tolerance::SigFigs,
                ));
            }
            model
        })
        .collect();

    let power: Vec<PowerTableRow> = c
        .power
        .iter()
        .map(|row| {
            let (b, n) = (row.bitwidth, row.cores);
            let opto = optolink_power(b, n, p);
            let electrical_uw = or_nan(inputs.baseline.power(b, n));
            let label = format!("{b}-bit {n} cores");
            checks.push(Check::new(
                "power",
                format!("{label} electrical uW"),
                row.electrical_uw,
                electrical_uw,
                Tolerance::Exact,
            ));
            checks.push(Check::new(
                "power",
                format!("{label} optolink W"),
                row.optolink_w,
                opto.total,
                Tolerance::Relative,
            ));
            PowerTableRow {
                bitwidth: b,
                cores: n,
                channels: opto.channels,
                electrical_uw,
                optolink_w: opto.total,
                reference_optolink_w: row.optolink_w,
                deviation_pct: (opto.total - row.optolink_w) / row.optolink_w * 100.0,
            }
        })
        .collect();

    let mut area = Vec::new();
    for row in &c.area.electrical {
        let um2 = or_nan(inputs.baseline.area(row.cores, false));
        checks.push(Check::new(
            "area",
            format!("electrical {} cores um2", row.cores),
            row.um2,
            um2,
            Tolerance::Exact,
        ));
        area.push(AreaTableRow {
            component: "electrical_network_128bit",
            count: row.cores as u64,
            value: um2,
            unit: "um2",
        });
    }
    let one = optolink_area(1, &inputs.area);
    checks.push(Check::new(
        "area",
        "optolink per-channel mm2".into(),
        c.claims.optolink_channel_area_mm2,
        one.total,
        Tolerance::SigFigs,
    ));
    area.push(AreaTableRow {
        component: "optolink_tx",
        count: 1,
        value: one.tx,
        unit: "mm2",
    });
    area.push(AreaTableRow {
        component: "optolink_rx",
        count: 1,
        value: one.rx,
        unit: "mm2",
    });
    area.push(AreaTableRow {
        component: "optolink_mrr",
        count: 1,
        value: one.mrr,
        unit: "mm2",
    });
    area.push(AreaTableRow {
        component: "optolink_channel",
        count: 1,
        value: one.total,
        unit: "mm2",
    });
    for row in c.power.iter().filter(|r| r.bitwidth == 128) {
        let channels = row.bitwidth as u64 * row.cores as u64;
        let total = optolink_area(channels, &inputs.area).total;
        area.push(AreaTableRow {
            component: "optolink_total_128bit",
            count: channels,
            value: total,
            unit: "mm2",
        });
    }

    let claims = &c.claims;
    let latency = inputs.baseline.latency_ns;
    checks.push(Check::new(
        "link",
        "serialization of 64 bits ns".into(),
        claims.serialization_ns,
        or_nan(serialization_latency(
            reference().link.serialization_bits,
            p.per_wavelength_rate,
        )),
        Tolerance::Exact,
    ));
    checks.push(Check::new(
        "link",
        "electrical width for 1.6 TB/s".into(),
        claims.electrical_equivalent_bitwidth as f64,
        equivalent_electrical_bitwidth(optolink_bandwidth(128, p.per_channel_rate), latency)
            .map_or(f64::NAN, |w| w as f64),
        Tolerance::Exact,
    ));
    checks.push(Check::new(
        "link",
        "electrical 1024-bit GB/s".into(),
        claims.electrical_1024bit_gbytes,
        or_nan(electrical_bitrate(1024, latency)),
        Tolerance::SigFigs,
    ));
    checks.push(Check::new(
        "link",
        "optolink 192 channels TB/s".into(),
        claims.optolink_192ch_tbytes,
        optolink_bandwidth(192, p.per_channel_rate),
        Tolerance::Exact,
    ));
    checks.push(Check::new(
        "link",
        "optolink 1024 channels TB/s".into(),
        claims.optolink_1024ch_tbytes,
        optolink_bandwidth(1024, p.per_channel_rate),
        Tolerance::Exact,
    ));

    TablesReport {
        bitrate,
        power,
        area,
        checks,
    }
}
