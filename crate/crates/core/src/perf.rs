//! Closed-form latency, bandwidth, power and area models for OptoLink and
//! the electrical baseline it replaces.
//!
//! Units follow the quantity: latency in ps (propagation) or ns
//! (serialization, electrical), bandwidth in GB/s or TB/s as named, power
//! in W for OptoLink and uW for the electrical network, area in mm2 for
//! photonics and um2 for the electrical network.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::reference;
use crate::photonic::{channel_electrical_power, PhotonicParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerfError {
    #[error("length must be non-negative, got {0}")]
    NegativeLength(f64),
    #[error("rate must be positive")]
    ZeroRate,
    #[error("latency must be positive")]
    ZeroLatency,
    #[error("no electrical power data for bitwidth {0} (supported: 32, 64, 128)")]
    UnsupportedBitwidth(u32),
    #[error("{cores} cores is outside the characterised range {min}..={max}")]
    OutOfRange { cores: u32, min: u32, max: u32 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

/// Waveguide flight time in ps for a guide of `length_um`.
pub fn propagation_latency(length_um: f64, delay_ps_per_mm: f64) -> Result<f64, PerfError> {
    if length_um < 0.0 || length_um.is_nan() {
        return Err(PerfError::NegativeLength(length_um));
    }
    Ok(length_um / 1000.0 * delay_ps_per_mm)
}

pub fn default_delay_ps_per_mm() -> f64 {
    reference().link.delay_ps_per_mm
}

/// Time in ns to clock `bits` out at `rate_gbps` (Gb/s, i.e. bits per ns).
pub fn serialization_latency(bits: u64, rate_gbps: f64) -> Result<f64, PerfError> {
    if !(rate_gbps > 0.0) {
        return Err(PerfError::ZeroRate);
    }
    Ok(bits as f64 / rate_gbps)
}

/// Aggregate OptoLink bandwidth in TB/s.
pub fn optolink_bandwidth(channels: u64, per_channel_rate_gbytes: f64) -> f64 {
    channels as f64 * per_channel_rate_gbytes / 1000.0
}

/// One `bitwidth`-bit word per latency period, in GB/s.
pub fn electrical_bitrate(bitwidth: u32, latency_ns: f64) -> Result<f64, PerfError> {
    if !(latency_ns > 0.0) {
        return Err(PerfError::ZeroLatency);
    }
    if bitwidth == 0 {
        return Err(PerfError::NonPositive("bitwidth"));
    }
    Ok(bitwidth as f64 / latency_ns / 8.0)
}

fn ceil_tolerant(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Electrical data width quoted as equivalent to `target_tbytes` of
/// bandwidth: one lane per byte moved in each latency window, i.e.
/// `target (GB/s) * latency (ns)` rounded up. This is the convention behind
/// the 4864-bit figure for 1.6 TB/s at 3.04 ns.
///
/// For the exact inverse of [`electrical_bitrate`] use
/// [`electrical_bitwidth_for_rate`], which is 8x larger.
pub fn equivalent_electrical_bitwidth(
    target_tbytes: f64,
    latency_ns: f64,
) -> Result<u64, PerfError> {
    if !(latency_ns > 0.0) {
        return Err(PerfError::ZeroLatency);
    }
    if !(target_tbytes > 0.0) {
        return Err(PerfError::NonPositive("target bandwidth"));
    }
    Ok(ceil_tolerant(target_tbytes * 1000.0 * latency_ns))
}

/// Smallest bitwidth whose [`electrical_bitrate`] reaches `target_gbytes`.
pub fn electrical_bitwidth_for_rate(target_gbytes: f64, latency_ns: f64) -> Result<u64, PerfError> {
    if !(latency_ns > 0.0) {
        return Err(PerfError::ZeroLatency);
    }
    if !(target_gbytes > 0.0) {
        return Err(PerfError::NonPositive("target bandwidth"));
    }
    Ok(ceil_tolerant(target_gbytes * latency_ns * 8.0))
}

/// OptoLink power draw, W. `total = laser + tx + rx`; ring heating is
/// already inside `tx` and is reported for reference only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBreakdown {
    pub channels: u64,
    pub laser: f64,
    pub tx: f64,
    pub rx: f64,
    pub ring_heating: f64,
    pub total: f64,
}

/// Power for `bitwidth` lanes per core across `cores` cores.
pub fn optolink_power(bitwidth: u32, cores: u32, params: &PhotonicParams) -> PowerBreakdown {
    let channels = bitwidth as u64 * cores as u64;
    let per = channel_electrical_power(params);
    let n = channels as f64;
    let laser = n * per.laser / 1000.0;
    let tx = n * per.tx / 1000.0;
    let rx = n * per.rx / 1000.0;
    PowerBreakdown {
        channels,
        laser,
        tx,
        rx,
        ring_heating: n * params.ring_heating_power / 1000.0,
        total: n * per.total / 1000.0,
    }
}

/// Photonic component footprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaParams {
    pub tx_mm2_per_wavelength: f64,
    pub rx_mm2_per_wavelength: f64,
    pub mrr_mm2: f64,
    pub rings_per_channel: u32,
}

impl Default for AreaParams {
    fn default() -> Self {
        let a = &reference().area;
        AreaParams {
            tx_mm2_per_wavelength: a.tx_mm2_per_wavelength,
            rx_mm2_per_wavelength: a.rx_mm2_per_wavelength,
            mrr_mm2: a.mrr_mm2,
            rings_per_channel: a.rings_per_channel,
        }
    }
}

/// mm2
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaBreakdown {
    pub tx: f64,
    pub rx: f64,
    pub mrr: f64,
    pub total: f64,
}

pub fn optolink_area(channels: u64, area: &AreaParams) -> AreaBreakdown {
    let n = channels as f64;
    let tx = n * area.tx_mm2_per_wavelength;
    let rx = n * area.rx_mm2_per_wavelength;
    let mrr = n * area.rings_per_channel as f64 * area.mrr_mm2;
    AreaBreakdown {
        tx,
        rx,
        mrr,
        total: tx + rx + mrr,
    }
}

/// Synthesised electrical-network figures, used as a lookup with linear
/// interpolation in the core count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectricalBaseline {
    pub latency_ns: f64,
    /// bitwidth -> sorted (cores, uW)
    pub power_table: BTreeMap<u32, Vec<(u32, f64)>>,
    /// sorted (cores, um2), 128-bit configuration
    pub area_table: Vec<(u32, f64)>,
}

impl Default for ElectricalBaseline {
    fn default() -> Self {
        let c = reference();
        let mut power_table: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
        for row in &c.power {
            power_table
                .entry(row.bitwidth)
                .or_default()
                .push((row.cores, row.electrical_uw));
        }
        for v in power_table.values_mut() {
            v.sort_by_key(|&(cores, _)| cores);
        }
        let mut area_table: Vec<(u32, f64)> =
            c.area.electrical.iter().map(|r| (r.cores, r.um2)).collect();
        area_table.sort_by_key(|&(cores, _)| cores);
        ElectricalBaseline {
            latency_ns: c.electrical.latency_ns,
            power_table,
            area_table,
        }
    }
}

/// Piecewise-linear interpolation over sorted `(x, y)` points; outside the
/// range the nearest segment is extended.
fn piecewise_linear(points: &[(u32, f64)], x: u32) -> f64 {
    if let Some(&(_, y)) = points.iter().find(|&&(px, _)| px == x) {
        return y;
    }
    if points.len() == 1 {
        return points[0].1;
    }
    let i = points
        .partition_point(|&(px, _)| px < x)
        .clamp(1, points.len() - 1);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x as f64 - x0 as f64) / (x1 as f64 - x0 as f64)
}

impl ElectricalBaseline {
    /// uW; exact at characterised points.
    pub fn power(&self, bitwidth: u32, cores: u32) -> Result<f64, PerfError> {
        if cores == 0 {
            return Err(PerfError::NonPositive("cores"));
        }
        let points = self
            .power_table
            .get(&bitwidth)
            .ok_or(PerfError::UnsupportedBitwidth(bitwidth))?;
        Ok(piecewise_linear(points, cores))
    }

    /// um2 at 128 bits. Outside the characterised core range only when
    /// `extrapolate` is set.
    pub fn area(&self, cores: u32, extrapolate: bool) -> Result<f64, PerfError> {
        let min = self.area_table.first().map_or(0, |p| p.0);
        let max = self.area_table.last().map_or(0, |p| p.0);
        if cores == 0 || (!extrapolate && (cores < min || cores > max)) {
            return Err(PerfError::OutOfRange { cores, min, max });
        }
        Ok(piecewise_linear(&self.area_table, cores))
    }

    /// GB/s
    pub fn bitrate(&self, bitwidth: u32) -> Result<f64, PerfError> {
        electrical_bitrate(bitwidth, self.latency_ns)
    }
}

pub fn electrical_power(bitwidth: u32, cores: u32) -> Result<f64, PerfError> {
    ElectricalBaseline::default().power(bitwidth, cores)
}

pub fn electrical_area(cores: u32) -> Result<f64, PerfError> {
    ElectricalBaseline::default().area(cores, false)
}

/// Electrical-network figures for the same configuration. Fields are `None`
/// where the baseline has no characterisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectricalComparison {
    pub latency_ns: f64,
    pub bitrate_gbytes: f64,
    pub power_uw: Option<f64>,
    pub area_um2: Option<f64>,
    /// OptoLink link bandwidth over electrical bitrate.
    pub bandwidth_ratio: f64,
}

/// Full model output for `cores` NTT cores, each with a `bitwidth`-lane link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfReport {
    pub cores: u32,
    pub bitwidth: u32,
    /// ps
    pub propagation_latency: f64,
    /// ns, one `bitwidth`-bit word on a single wavelength
    pub serialization_latency: f64,
    /// TB/s of one core's link (`bitwidth` channels)
    pub link_bandwidth: f64,
    /// TB/s across all cores
    pub aggregate_bandwidth: f64,
    pub power: PowerBreakdown,
    pub area: AreaBreakdown,
    pub electrical: ElectricalComparison,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfInputs<'a> {
    pub cores: u32,
    pub bitwidth: u32,
    pub waveguide_length_um: f64,
    pub delay_ps_per_mm: f64,
    pub params: &'a PhotonicParams,
    pub area: &'a AreaParams,
    pub baseline: &'a ElectricalBaseline,
}

pub fn perf_report(inputs: &PerfInputs<'_>) -> Result<PerfReport, PerfError> {
    let PerfInputs {
        cores, bitwidth, ..
    } = *inputs;
    if cores == 0 {
        return Err(PerfError::NonPositive("cores"));
    }
    if bitwidth == 0 {
        return Err(PerfError::NonPositive("bitwidth"));
    }
    let params = inputs.params;
    let link_bandwidth = optolink_bandwidth(bitwidth as u64, params.per_channel_rate);
    let bitrate = inputs.baseline.bitrate(bitwidth)?;
    Ok(PerfReport {
        cores,
        bitwidth,
        propagation_latency: propagation_latency(
            inputs.waveguide_length_um,
            inputs.delay_ps_per_mm,
        )?,
        serialization_latency: serialization_latency(bitwidth as u64, params.per_wavelength_rate)?,
        link_bandwidth,
        aggregate_bandwidth: optolink_bandwidth(
            bitwidth as u64 * cores as u64,
            params.per_channel_rate,
        ),
        power: optolink_power(bitwidth, cores, params),
        area: optolink_area(bitwidth as u64 * cores as u64, inputs.area),
        electrical: ElectricalComparison {
            latency_ns: inputs.baseline.latency_ns,
            bitrate_gbytes: bitrate,
            power_uw: inputs.baseline.power(bitwidth, cores).ok(),
            area_um2: if bitwidth == 128 {
                inputs.baseline.area(cores, false).ok()
            } else {
                None
            },
            bandwidth_ratio: link_bandwidth * 1000.0 / bitrate,
        },
    })
}
