//! OptoLink network descriptions: waveguides, wavelength assignment and the
//! role each optical channel plays between the memory controller and the NTT
//! cores.
//!
//! The reference layout uses five waveguides. Waveguides 1 and 2 carry input
//! coefficients, 3 and 4 carry twiddle factors on the same wavelength ids as
//! 1 and 2, and waveguide 5 returns results on a separate wavelength group.
//! Per core that is 4 input wavelengths (2 on each input guide), 4 twiddle
//! wavelengths reusing those ids and 2 output wavelengths, so 4 cores use
//! 24 distinct wavelengths: 1..=16 for data and 17..=24 for results.
//!
//! A wavelength entry here is a channel group. Power and area models count
//! bit lanes instead: `bitwidth` lanes per core, see
//! [`OptoLinkTopology::total_channels`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::reference;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("{what} must be at least 1")]
    InvalidCount { what: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    InputData,
    Twiddle,
    Output,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::InputData, Role::Twiddle, Role::Output];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::InputData => "input_data",
            Role::Twiddle => "twiddle",
            Role::Output => "output",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    MemoryController,
    Core(u32),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::MemoryController => f.write_str("memory_controller"),
            Endpoint::Core(id) => write!(f, "core {id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalChannel {
    pub wavelength_id: u32,
    pub waveguide_id: u32,
    pub role: Role,
    pub source: Endpoint,
    pub sink: Endpoint,
}

impl OpticalChannel {
    /// The core this channel serves, if either end is a core.
    pub fn core(&self) -> Option<u32> {
        match (self.source, self.sink) {
            (Endpoint::Core(c), _) | (_, Endpoint::Core(c)) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveguide {
    pub id: u32,
    pub length_um: f64,
    pub channels: Vec<OpticalChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptoLinkTopology {
    pub num_cores: u32,
    pub bitwidth: u32,
    pub waveguides: Vec<Waveguide>,
}

impl OptoLinkTopology {
    /// Data-path bit lanes: one channel per bit per core.
    pub fn total_channels(&self) -> u64 {
        self.num_cores as u64 * self.bitwidth as u64
    }

    /// Number of wavelength entries across all waveguides.
    pub fn channel_groups(&self) -> usize {
        self.waveguides.iter().map(|w| w.channels.len()).sum()
    }

    pub fn role_counts(&self) -> BTreeMap<Role, usize> {
        let mut counts: BTreeMap<Role, usize> = Role::ALL.iter().map(|&r| (r, 0)).collect();
        for ch in self.channels() {
            *counts.entry(ch.role).or_default() += 1;
        }
        counts
    }

    pub fn distinct_wavelengths(&self) -> usize {
        self.channels()
            .map(|c| c.wavelength_id)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Each multiplexed wavelength needs a modulator ring at the sender and a
    /// filter ring at the receiver.
    pub fn rings_per_waveguide(&self) -> Vec<(u32, usize)> {
        self.waveguides
            .iter()
            .map(|w| (w.id, 2 * w.channels.len()))
            .collect()
    }

    pub fn channels(&self) -> impl Iterator<Item = &OpticalChannel> {
        self.waveguides.iter().flat_map(|w| w.channels.iter())
    }

    /// Number of cores with at least one channel in `role`.
    pub fn cores_with_role(&self, role: Role) -> usize {
        self.channels()
            .filter(|c| c.role == role)
            .filter_map(OpticalChannel::core)
            .filter(|&c| c < self.num_cores)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn waveguide_roles(&self) -> Vec<(u32, Option<Role>)> {
        self.waveguides
            .iter()
            .map(|w| {
                let roles: BTreeSet<Role> = w.channels.iter().map(|c| c.role).collect();
                let role = if roles.len() == 1 {
                    roles.into_iter().next()
                } else {
                    None
                };
                (w.id, role)
            })
            .collect()
    }
}

pub fn default_waveguide_length_um() -> f64 {
    reference().link.waveguide_length_um
}

/// Builds the five-waveguide reference layout for `num_cores` cores.
pub fn build_reference_topology(
    num_cores: u32,
    bitwidth: u32,
) -> Result<OptoLinkTopology, TopologyError> {
    build_reference_topology_with_length(num_cores, bitwidth, default_waveguide_length_um())
}

pub fn build_reference_topology_with_length(
    num_cores: u32,
    bitwidth: u32,
    length_um: f64,
) -> Result<OptoLinkTopology, TopologyError> {
    if num_cores == 0 {
        return Err(TopologyError::InvalidCount { what: "num_cores" });
    }
    if bitwidth == 0 {
        return Err(TopologyError::InvalidCount { what: "bitwidth" });
    }
    const PER_GUIDE: u32 = 2;
    let c = num_cores;
    let mc = Endpoint::MemoryController;

    // (waveguide id, role, first wavelength id)
    let plan = [
        (1, Role::InputData, 1),
        (2, Role::InputData, 1 + PER_GUIDE * c),
        (3, Role::Twiddle, 1),
        (4, Role::Twiddle, 1 + PER_GUIDE * c),
        (5, Role::Output, 1 + 2 * PER_GUIDE * c),
    ];
    let waveguides = plan
        .iter()
        .map(|&(id, role, base)| {
            let channels = (0..c)
                .flat_map(|core| {
                    (0..PER_GUIDE).map(move |k| {
                        let (source, sink) = match role {
                            Role::Output => (Endpoint::Core(core), mc),
                            _ => (mc, Endpoint::Core(core)),
                        };
                        OpticalChannel {
                            wavelength_id: base + PER_GUIDE * core + k,
                            waveguide_id: id,
                            role,
                            source,
                            sink,
                        }
                    })
                })
                .collect();
            Waveguide {
                id,
                length_um,
                channels,
            }
        })
        .collect();
    Ok(OptoLinkTopology {
        num_cores,
        bitwidth,
        waveguides,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateWavelength {
        waveguide_id: u32,
        wavelength_id: u32,
    },
    MissingRole {
        core: u32,
        role: Role,
    },
    DanglingEndpoint {
        waveguide_id: u32,
        wavelength_id: u32,
        core: u32,
    },
    InvalidDirection {
        waveguide_id: u32,
        wavelength_id: u32,
    },
    InvalidWavelength {
        waveguide_id: u32,
    },
    WaveguideMismatch {
        waveguide_id: u32,
        wavelength_id: u32,
        declared: u32,
    },
    DuplicateWaveguide {
        waveguide_id: u32,
    },
    NegativeLength {
        waveguide_id: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateWavelength { waveguide_id, wavelength_id } => {
                write!(f, "duplicate wavelength: λ{wavelength_id} appears twice in waveguide {waveguide_id}")
            }
            Violation::MissingRole { core, role } => write!(f, "missing role: core {core} has no {role} channel"),
            Violation::DanglingEndpoint { waveguide_id, wavelength_id, core } => write!(
                f,
                "dangling endpoint: λ{wavelength_id} on waveguide {waveguide_id} references unknown core {core}"
            ),
            Violation::InvalidDirection { waveguide_id, wavelength_id } => write!(
                f,
                "invalid direction: λ{wavelength_id} on waveguide {waveguide_id} has endpoints inconsistent with its role"
            ),
            Violation::InvalidWavelength { waveguide_id } => {
                write!(f, "invalid wavelength: waveguide {waveguide_id} has a channel with wavelength id 0")
            }
            Violation::WaveguideMismatch { waveguide_id, wavelength_id, declared } => write!(
                f,
                "waveguide mismatch: λ{wavelength_id} in waveguide {waveguide_id} declares waveguide {declared}"
            ),
            Violation::DuplicateWaveguide { waveguide_id } => write!(f, "duplicate waveguide id {waveguide_id}"),
            Violation::NegativeLength { waveguide_id } => {
                write!(f, "negative length on waveguide {waveguide_id}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_topology(t: &OptoLinkTopology) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_guides = BTreeSet::new();
    let mut covered: BTreeSet<(u32, Role)> = BTreeSet::new();

    for wg in &t.waveguides {
        if !seen_guides.insert(wg.id) {
            violations.push(Violation::DuplicateWaveguide {
                waveguide_id: wg.id,
            });
        }
        if wg.length_um < 0.0 || wg.length_um.is_nan() {
            violations.push(Violation::NegativeLength {
                waveguide_id: wg.id,
            });
        }
        let mut seen = BTreeSet::new();
        for ch in &wg.channels {
            let at = (wg.id, ch.wavelength_id);
            if ch.wavelength_id == 0 {
                violations.push(Violation::InvalidWavelength {
                    waveguide_id: wg.id,
                });
            }
            if !seen.insert(ch.wavelength_id) {
                violations.push(Violation::DuplicateWavelength {
                    waveguide_id: at.0,
                    wavelength_id: at.1,
                });
            }
            if ch.waveguide_id != wg.id {
                violations.push(Violation::WaveguideMismatch {
                    waveguide_id: wg.id,
                    wavelength_id: ch.wavelength_id,
                    declared: ch.waveguide_id,
                });
            }
            let direction_ok = ch.source != ch.sink
                && match ch.role {
                    Role::Output => {
                        matches!(ch.source, Endpoint::Core(_))
                            && ch.sink == Endpoint::MemoryController
                    }
                    Role::InputData | Role::Twiddle => {
                        ch.source == Endpoint::MemoryController
                            && matches!(ch.sink, Endpoint::Core(_))
                    }
                };
            if !direction_ok {
                violations.push(Violation::InvalidDirection {
                    waveguide_id: at.0,
                    wavelength_id: at.1,
                });
            }
            for end in [ch.source, ch.sink] {
                if let Endpoint::Core(core) = end {
                    if core >= t.num_cores {
                        violations.push(Violation::DanglingEndpoint {
                            waveguide_id: at.0,
                            wavelength_id: at.1,
                            core,
                        });
                    } else if direction_ok {
                        covered.insert((core, ch.role));
                    }
                }
            }
        }
    }
    for core in 0..t.num_cores {
        for role in Role::ALL {
            if !covered.contains(&(core, role)) {
                violations.push(Violation::MissingRole { core, role });
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WavelengthDemand {
    pub distinct_wavelengths: usize,
    pub max_per_waveguide: usize,
    pub density_limit: usize,
    pub warnings: Vec<String>,
}

impl WavelengthDemand {
    pub fn exceeds_density(&self) -> bool {
        self.max_per_waveguide > self.density_limit
    }
}

pub fn wavelength_demand(t: &OptoLinkTopology) -> WavelengthDemand {
    let limit = reference().photonic.wdm_max_wavelengths;
    let mut warnings = Vec::new();
    let mut max_per_waveguide = 0;
    for wg in &t.waveguides {
        let n = wg
            .channels
            .iter()
            .map(|c| c.wavelength_id)
            .collect::<BTreeSet<_>>()
            .len();
        if n > limit {
            warnings.push(format!(
                "waveguide {} multiplexes {n} wavelengths, above the WDM density limit of {limit}",
                wg.id
            ));
        }
        max_per_waveguide = max_per_waveguide.max(n);
    }
    WavelengthDemand {
        distinct_wavelengths: t.distinct_wavelengths(),
        max_per_waveguide,
        density_limit: limit,
        warnings,
    }
}
