//! Design-space models for photonic (WDM) links between memory and NTT
//! accelerator cores.
//!
//! - [`ntt`]: exact NTT/INTT and cyclic polynomial products, with an
//!   `O(n^2)` oracle.
//! - [`photonic`]: insertion loss, laser power and per-channel power.
//! - [`topology`]: five-waveguide wavelength layouts and their validation.
//! - [`perf`]: latency, bandwidth, power and area models, optical and
//!   electrical.
//! - [`sim`]: phase-level traffic simulation and parameter sweeps.
//! - [`report`]: scenario files, table regeneration and report rendering.
//!
//! Reference figures are compiled in from `data/reference_constants.toml`
//! ([`constants`]).

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod modarith;
pub mod ntt;
pub mod perf;
pub mod photonic;
pub mod report;
pub mod sim;
pub mod topology;

pub use ntt::{ModulusContext, NttError, Polynomial};
pub use perf::{ElectricalBaseline, PerfError, PerfReport};
pub use photonic::{OpticalPath, PhotonicParams};
pub use sim::{SimError, SimResult, Workload};
pub use topology::{OptoLinkTopology, Role};
