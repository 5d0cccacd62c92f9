//! Phase-level simulation of NTT traffic over an OptoLink topology.
//!
//! Each transform moves its coefficients and twiddles from memory to the
//! cores (load), runs `(n/2) log2 n` butterflies (compute) and writes the
//! results back (store). Input and twiddle traffic ride separate waveguides
//! and overlap; the load phase lasts as long as the slower of the two.
//! Every non-empty transfer takes at least the link's flight latency.
//!
//! With `overlap` the transforms form a three-stage pipeline:
//! `total = (k - 1) * max(phase) + sum(phase)`. Without it they run back to
//! back: `total = k * sum(phase)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ntt::{butterfly_count, butterfly_plan};
use crate::perf::{
    default_delay_ps_per_mm, electrical_bitrate, optolink_bandwidth, perf_report,
    propagation_latency, AreaParams, ElectricalBaseline, PerfError, PerfInputs, PerfReport,
};
use crate::photonic::PhotonicParams;
use crate::topology::{
    build_reference_topology_with_length, default_waveguide_length_um, validate_topology,
    OptoLinkTopology, Role, TopologyError, Violation,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid topology: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTopology(Vec<Violation>),
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Perf(#[from] PerfError),
}

/// How much twiddle data each transform pulls from memory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwiddlePolicy {
    /// One full `n`-entry table per transform.
    #[default]
    PerTransform,
    /// Table stays on chip; no twiddle traffic.
    Cached,
    /// The table is fetched again for every butterfly stage.
    PerStage,
}

/// Byte and operation counts for workloads that are not a plain NTT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitTraffic {
    pub bytes_in: f64,
    pub bytes_twiddle: f64,
    pub bytes_out: f64,
    pub compute_ops: f64,
    /// operations per second
    pub ops_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Workload {
    pub ntt_size: usize,
    pub coefficient_bitwidth: u32,
    pub num_transforms: u64,
    /// per core
    pub butterflies_per_cycle: f64,
    pub clock_hz: f64,
    pub twiddle_policy: TwiddlePolicy,
    /// Write-back buffer depth for read-after-write checking; `None` skips
    /// the check (no stalls).
    pub raw_buffer_depth: Option<usize>,
    /// Memory-side aggregate bandwidth limit, GB/s.
    pub memory_bandwidth_cap: Option<f64>,
    pub explicit_override: Option<ExplicitTraffic>,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            ntt_size: 4096,
            coefficient_bitwidth: 64,
            num_transforms: 1,
            butterflies_per_cycle: 1.0,
            clock_hz: 300e6,
            twiddle_policy: TwiddlePolicy::PerTransform,
            raw_buffer_depth: None,
            memory_bandwidth_cap: None,
            explicit_override: None,
        }
    }
}

impl Workload {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidWorkload(m.to_string()));
        if self.num_transforms == 0 {
            return bad("num_transforms must be at least 1");
        }
        if let Some(cap) = self.memory_bandwidth_cap {
            if !(cap > 0.0) {
                return bad("memory_bandwidth_cap must be positive");
            }
        }
        match &self.explicit_override {
            Some(x) => {
                if !(x.ops_rate > 0.0) {
                    return bad("ops_rate must be positive");
                }
                let counts = [x.bytes_in, x.bytes_twiddle, x.bytes_out, x.compute_ops];
                if counts.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return bad("byte and op counts must be finite and non-negative");
                }
            }
            None => {
                if self.ntt_size == 0 || !self.ntt_size.is_power_of_two() {
                    return bad("ntt_size must be a power of two");
                }
                if self.coefficient_bitwidth == 0 {
                    return bad("coefficient_bitwidth must be positive");
                }
                if !(self.butterflies_per_cycle > 0.0) || !(self.clock_hz > 0.0) {
                    return bad("butterflies_per_cycle and clock_hz must be positive");
                }
                if self.raw_buffer_depth == Some(0) {
                    return bad("raw_buffer_depth must be at least 1");
                }
            }
        }
        Ok(())
    }

    /// Bytes per transform as (input, twiddle, output).
    pub fn traffic(&self) -> (f64, f64, f64) {
        if let Some(x) = &self.explicit_override {
            return (x.bytes_in, x.bytes_twiddle, x.bytes_out);
        }
        let table = self.ntt_size as f64 * self.coefficient_bitwidth as f64 / 8.0;
        let twiddle = match self.twiddle_policy {
            TwiddlePolicy::PerTransform => table,
            TwiddlePolicy::Cached => 0.0,
            TwiddlePolicy::PerStage => table * self.ntt_size.trailing_zeros() as f64,
        };
        (table, twiddle, table)
    }
}

/// Which link carries the traffic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkTechnology {
    #[default]
    Optical,
    Electrical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub overlap: bool,
    pub link: LinkTechnology,
    pub baseline: ElectricalBaseline,
    pub delay_ps_per_mm: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            overlap: true,
            link: LinkTechnology::Optical,
            baseline: ElectricalBaseline::default(),
            delay_ps_per_mm: default_delay_ps_per_mm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    Transfer,
    Compute,
    Balanced,
}

impl Bottleneck {
    pub fn as_str(self) -> &'static str {
        match self {
            Bottleneck::Transfer => "transfer",
            Bottleneck::Compute => "compute",
            Bottleneck::Balanced => "balanced",
        }
    }
}

/// Transfer and compute within this fraction of each other count as balanced.
pub const BALANCE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveguideUtilization {
    pub waveguide_id: u32,
    pub role: Option<Role>,
    pub utilization: f64,
}

/// Phase times are per transform, in seconds; `total_time` covers all
/// `num_transforms`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub load_time: f64,
    pub compute_time: f64,
    pub store_time: f64,
    /// `load_time + store_time`
    pub transfer_time: f64,
    pub total_time: f64,
    pub num_transforms: u64,
    pub bytes_per_transform: f64,
    pub butterflies_per_transform: u64,
    pub stall_count: u64,
    pub memory_cap_binding: bool,
    pub channel_utilization: Vec<WaveguideUtilization>,
    pub bottleneck: Bottleneck,
}

pub fn classify(transfer: f64, compute: f64) -> Bottleneck {
    let hi = transfer.max(compute);
    if hi == 0.0 || (transfer - compute).abs() <= BALANCE_TOLERANCE * hi {
        Bottleneck::Balanced
    } else if transfer > compute {
        Bottleneck::Transfer
    } else {
        Bottleneck::Compute
    }
}

/// Read-after-write replay outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RawCheck {
    pub stall_count: u64,
    /// Issue cycles including stall bubbles.
    pub cycles: u64,
}

/// Replays a butterfly schedule one butterfly per cycle and counts reads
/// that arrive before the producing write has retired.
///
/// A write-back buffer of `buffer_depth` slots retires writes so that a
/// result becomes readable `ceil(n / buffer_depth)` cycles after it issues.
/// A premature read is forwarded after a one-cycle bubble, so each stall
/// costs exactly one cycle.
pub fn raw_conflict_check(plan: &[Vec<(usize, usize)>], n: usize, buffer_depth: usize) -> RawCheck {
    if n < 2 {
        return RawCheck {
            stall_count: 0,
            cycles: 0,
        };
    }
    let latency = n.div_ceil(buffer_depth.max(1)) as u64;
    let mut ready = vec![0u64; n];
    let mut cycle = 0u64;
    let mut stalls = 0u64;
    for stage in plan {
        for &(a, b) in stage {
            let conflicts = [a, b].iter().filter(|&&i| ready[i] > cycle).count() as u64;
            stalls += conflicts;
            cycle += conflicts;
            ready[a] = cycle + latency;
            ready[b] = cycle + latency;
            cycle += 1;
        }
    }
    RawCheck {
        stall_count: stalls,
        cycles: cycle,
    }
}

/// [`simulate_with`] using optical links and reference constants.
pub fn simulate(
    t: &OptoLinkTopology,
    wl: &Workload,
    params: &PhotonicParams,
    overlap: bool,
) -> Result<SimResult, SimError> {
    simulate_with(
        t,
        wl,
        params,
        &SimOptions {
            overlap,
            ..SimOptions::default()
        },
    )
}

fn role_transfer(
    t: &OptoLinkTopology,
    role: Role,
    bytes: f64,
    params: &PhotonicParams,
    opts: &SimOptions,
) -> Result<f64, SimError> {
    if bytes == 0.0 {
        return Ok(0.0);
    }
    let cores = t.cores_with_role(role) as u64;
    let (gbytes_per_s, floor_s) = match opts.link {
        LinkTechnology::Optical => {
            let lanes = cores * t.bitwidth as u64;
            let length = t
                .waveguides
                .iter()
                .filter(|w| w.channels.iter().any(|c| c.role == role))
                .map(|w| w.length_um)
                .fold(0.0, f64::max);
            let flight_ps = propagation_latency(length, opts.delay_ps_per_mm)?;
            (
                optolink_bandwidth(lanes, params.per_channel_rate) * 1000.0,
                flight_ps * 1e-12,
            )
        }
        LinkTechnology::Electrical => {
            let per_core = electrical_bitrate(t.bitwidth, opts.baseline.latency_ns)?;
            (cores as f64 * per_core, opts.baseline.latency_ns * 1e-9)
        }
    };
    if !(gbytes_per_s > 0.0) {
        return Err(SimError::InvalidWorkload(format!(
            "topology has no {role} bandwidth"
        )));
    }
    let seconds = if gbytes_per_s.is_infinite() {
        0.0
    } else {
        bytes / (gbytes_per_s * 1e9)
    };
    Ok(seconds.max(floor_s))
}

pub fn simulate_with(
    t: &OptoLinkTopology,
    wl: &Workload,
    params: &PhotonicParams,
    opts: &SimOptions,
) -> Result<SimResult, SimError> {
    let report = validate_topology(t);
    if !report.is_ok() {
        return Err(SimError::InvalidTopology(report.violations));
    }
    wl.validate()?;
    params
        .validate()
        .map_err(|e| SimError::InvalidWorkload(e.to_string()))?;

    let (bytes_in, bytes_tw, bytes_out) = wl.traffic();
    let t_in = role_transfer(t, Role::InputData, bytes_in, params, opts)?;
    let t_tw = role_transfer(t, Role::Twiddle, bytes_tw, params, opts)?;
    let t_out = role_transfer(t, Role::Output, bytes_out, params, opts)?;

    let mut load = t_in.max(t_tw);
    let mut store = t_out;
    let mut stretch = 1.0;
    let total_bytes = bytes_in + bytes_tw + bytes_out;
    let mut cap_binding = false;
    if let Some(cap) = wl.memory_bandwidth_cap {
        let capped = total_bytes / (cap * 1e9);
        if capped > load + store {
            stretch = capped / (load + store);
            load *= stretch;
            store *= stretch;
            cap_binding = true;
        }
    }

    let (compute, butterflies, stall_count) = match &wl.explicit_override {
        Some(x) => (x.compute_ops / x.ops_rate, 0, 0),
        None => {
            let n = wl.ntt_size;
            let butterflies = butterfly_count(n);
            let rate = t.num_cores as f64 * wl.butterflies_per_cycle * wl.clock_hz;
            let stalls = wl.raw_buffer_depth.map_or(0, |depth| {
                raw_conflict_check(&butterfly_plan(n), n, depth).stall_count
            });
            (
                butterflies as f64 / rate + stalls as f64 / wl.clock_hz,
                butterflies,
                stalls,
            )
        }
    };

    let k = wl.num_transforms as f64;
    let sum = load + compute + store;
    let total = if opts.overlap {
        (k - 1.0) * load.max(compute).max(store) + sum
    } else {
        k * sum
    };

    let channel_utilization = t
        .waveguides
        .iter()
        .map(|w| {
            let mut roles: Vec<Role> = w.channels.iter().map(|c| c.role).collect();
            roles.sort();
            roles.dedup();
            let busy: f64 = roles
                .iter()
                .map(|r| match r {
                    Role::InputData => t_in,
                    Role::Twiddle => t_tw,
                    Role::Output => t_out,
                })
                .sum::<f64>()
                * stretch
                * k;
            let utilization = if total > 0.0 {
                (busy / total).clamp(0.0, 1.0)
            } else {
                0.0
            };
            WaveguideUtilization {
                waveguide_id: w.id,
                role: if roles.len() == 1 {
                    Some(roles[0])
                } else {
                    None
                },
                utilization,
            }
        })
        .collect();

    Ok(SimResult {
        load_time: load,
        compute_time: compute,
        store_time: store,
        transfer_time: load + store,
        total_time: total,
        num_transforms: wl.num_transforms,
        bytes_per_transform: total_bytes,
        butterflies_per_transform: butterflies,
        stall_count,
        memory_cap_binding: cap_binding,
        channel_utilization,
        bottleneck: classify(load + store, compute),
    })
}

/// Where a scenario's topology comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    Reference {
        cores: u32,
        bitwidth: u32,
        #[serde(default = "default_waveguide_length_um")]
        waveguide_length_um: f64,
    },
    Inline(OptoLinkTopology),
}

impl TopologySpec {
    pub fn build(&self) -> Result<OptoLinkTopology, SimError> {
        match self {
            TopologySpec::Reference {
                cores,
                bitwidth,
                waveguide_length_um,
            } => Ok(build_reference_topology_with_length(
                *cores,
                *bitwidth,
                *waveguide_length_um,
            )?),
            TopologySpec::Inline(t) => Ok(t.clone()),
        }
    }
}

/// Everything needed for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub topology: TopologySpec,
    pub workload: Workload,
    pub params: PhotonicParams,
    pub area: AreaParams,
    pub options: SimOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Core count; needs a reference topology.
    Cores,
    /// Link width and coefficient width together.
    Bitwidth,
    /// Link width only.
    Channels,
    /// Transform size.
    N,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Cores => "cores",
            SweepAxis::Bitwidth => "bitwidth",
            SweepAxis::Channels => "channels",
            SweepAxis::N => "n",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cores" => Ok(SweepAxis::Cores),
            "bitwidth" => Ok(SweepAxis::Bitwidth),
            "channels" => Ok(SweepAxis::Channels),
            "n" => Ok(SweepAxis::N),
            other => Err(format!(
                "unknown sweep axis `{other}` (expected cores, bitwidth, channels or n)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRun {
    pub result: SimResult,
    pub perf: PerfReport,
}

pub fn run_scenario(s: &SimScenario) -> Result<ScenarioRun, SimError> {
    let topology = s.topology.build()?;
    let result = simulate_with(&topology, &s.workload, &s.params, &s.options)?;
    let length = topology
        .waveguides
        .iter()
        .map(|w| w.length_um)
        .fold(0.0, f64::max);
    let perf = perf_report(&PerfInputs {
        cores: topology.num_cores,
        bitwidth: topology.bitwidth,
        waveguide_length_um: length,
        delay_ps_per_mm: s.options.delay_ps_per_mm,
        params: &s.params,
        area: &s.area,
        baseline: &s.options.baseline,
    })?;
    Ok(ScenarioRun { result, perf })
}

fn u32_value(axis: SweepAxis, v: u64) -> Result<u32, SimError> {
    u32::try_from(v)
        .map_err(|_| SimError::InvalidWorkload(format!("{} value {v} out of range", axis.as_str())))
}

/// The base scenario with `axis` set to `value`.
pub fn apply_axis(
    base: &SimScenario,
    axis: SweepAxis,
    value: u64,
) -> Result<SimScenario, SimError> {
    let mut s = base.clone();
    let set_width = |spec: &mut TopologySpec, w: u32| match spec {
        TopologySpec::Reference { bitwidth, .. } => *bitwidth = w,
        TopologySpec::Inline(t) => t.bitwidth = w,
    };
    match axis {
        SweepAxis::Cores => match &mut s.topology {
            TopologySpec::Reference { cores, .. } => *cores = u32_value(axis, value)?,
            TopologySpec::Inline(_) => {
                return Err(SimError::InvalidWorkload(
                    "the cores axis needs a reference topology".into(),
                ))
            }
        },
        SweepAxis::Bitwidth => {
            let w = u32_value(axis, value)?;
            set_width(&mut s.topology, w);
            s.workload.coefficient_bitwidth = w;
        }
        SweepAxis::Channels => set_width(&mut s.topology, u32_value(axis, value)?),
        SweepAxis::N => {
            s.workload.ntt_size = usize::try_from(value)
                .map_err(|_| SimError::InvalidWorkload(format!("n value {value} out of range")))?
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub value: u64,
    #[serde(flatten)]
    pub run: ScenarioRun,
}

/// One independent run per value, in input order. Runs are evaluated in
/// parallel.
pub fn sweep(
    base: &SimScenario,
    axis: SweepAxis,
    values: &[u64],
) -> Vec<Result<SweepPoint, SimError>> {
    values
        .par_iter()
        .map(|&value| {
            let s = apply_axis(base, axis, value)?;
            Ok(SweepPoint {
                axis,
                value,
                run: run_scenario(&s)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_reference_topology;
    use approx::assert_relative_eq;

    fn small() -> Workload {
        Workload {
            ntt_size: 1024,
            coefficient_bitwidth: 64,
            ..Workload::default()
        }
    }

    #[test]
    fn single_transform_is_phase_sum() {
        let t = build_reference_topology(4, 128).unwrap();
        let p = PhotonicParams::default();
        for overlap in [true, false] {
            let r = simulate(&t, &small(), &p, overlap).unwrap();
            assert_relative_eq!(
                r.total_time,
                r.load_time + r.compute_time + r.store_time,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn ntt_phase_times() {
        let t = build_reference_topology(4, 128).unwrap();
        let r = simulate(&t, &small(), &PhotonicParams::default(), true).unwrap();
        // 1024 * 64 / 8 bytes over 4 * 128 lanes of 12.5 GB/s
        let expect = 8192.0 / (512.0 * 12.5e9);
        assert_relative_eq!(r.load_time, expect, max_relative = 1e-12);
        assert_relative_eq!(r.store_time, expect, max_relative = 1e-12);
        assert_eq!(r.butterflies_per_transform, 5120);
        assert_relative_eq!(r.compute_time, 5120.0 / (4.0 * 300e6), max_relative = 1e-12);
        assert_eq!(r.bottleneck, Bottleneck::Compute);
        assert_eq!(r.channel_utilization.len(), 5);
    }

    #[test]
    fn flight_time_floors_tiny_transfers() {
        let t = build_reference_topology(4, 128).unwrap();
        let wl = Workload {
            explicit_override: Some(ExplicitTraffic {
                bytes_in: 1.0,
                bytes_twiddle: 0.0,
                bytes_out: 0.0,
                compute_ops: 0.0,
                ops_rate: 1.0,
            }),
            ..Workload::default()
        };
        let r = simulate(&t, &wl, &PhotonicParams::default(), false).unwrap();
        assert_relative_eq!(r.load_time, 10e-12, max_relative = 1e-12);
        assert_eq!(r.store_time, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let t = build_reference_topology(1, 8).unwrap();
        let p = PhotonicParams::default();
        let wl = Workload {
            num_transforms: 0,
            ..Workload::default()
        };
        assert!(matches!(
            simulate(&t, &wl, &p, true),
            Err(SimError::InvalidWorkload(_))
        ));
        let wl = Workload {
            ntt_size: 12,
            ..Workload::default()
        };
        assert!(matches!(
            simulate(&t, &wl, &p, true),
            Err(SimError::InvalidWorkload(_))
        ));
        let empty = OptoLinkTopology {
            num_cores: 1,
            bitwidth: 8,
            waveguides: vec![],
        };
        assert!(matches!(
            simulate(&empty, &Workload::default(), &p, true),
            Err(SimError::InvalidTopology(_))
        ));
    }

    #[test]
    fn raw_trivial_cases() {
        assert_eq!(raw_conflict_check(&butterfly_plan(1), 1, 1).stall_count, 0);
        for n in [2usize, 4, 64, 1024] {
            assert_eq!(raw_conflict_check(&butterfly_plan(n), n, n).stall_count, 0);
            assert_eq!(
                raw_conflict_check(&butterfly_plan(n), n, 4 * n).stall_count,
                0
            );
        }
        let r = raw_conflict_check(&butterfly_plan(4), 4, 1);
        assert_eq!(r.stall_count, 2);
        assert_eq!(r.cycles, 6);
    }

    #[test]
    fn stalls_lengthen_compute() {
        let t = build_reference_topology(1, 64).unwrap();
        let p = PhotonicParams::default();
        let base = simulate(&t, &small(), &p, true).unwrap();
        let wl = Workload {
            raw_buffer_depth: Some(1),
            ..small()
        };
        let r = simulate(&t, &wl, &p, true).unwrap();
        assert!(r.stall_count > 0);
        assert_relative_eq!(
            r.compute_time - base.compute_time,
            r.stall_count as f64 / 300e6,
            max_relative = 1e-9
        );
    }

    #[test]
    fn classification_band() {
        assert_eq!(classify(1.0, 0.95), Bottleneck::Balanced);
        assert_eq!(classify(1.0, 0.85), Bottleneck::Transfer);
        assert_eq!(classify(0.5, 1.0), Bottleneck::Compute);
        assert_eq!(classify(0.0, 0.0), Bottleneck::Balanced);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!(
            "bitwidth".parse::<SweepAxis>().unwrap(),
            SweepAxis::Bitwidth
        );
        assert!("voltage".parse::<SweepAxis>().is_err());
    }
}
