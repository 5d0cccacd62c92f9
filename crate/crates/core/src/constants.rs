//! Typed view of `data/reference_constants.toml`.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

const RAW: &str = include_str!("../data/reference_constants.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceConstants {
    pub photonic: PhotonicDefaults,
    pub link: LinkDefaults,
    pub electrical: ElectricalDefaults,
    pub claims: LinkClaims,
    pub bitrate: Vec<BitrateRow>,
    pub power: Vec<PowerRow>,
    pub area: AreaFigures,
    pub accelerator: Vec<AcceleratorRow>,
    pub bottleneck: BottleneckReference,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PhotonicDefaults {
    pub laser_source_loss_db: f64,
    pub coupler_loss_db: f64,
    pub splitter_loss_db: f64,
    pub waveguide_loss_db_per_cm: f64,
    pub ring_drop_loss_db: f64,
    pub ring_through_loss_db: f64,
    pub photodetector_loss_db: f64,
    pub ring_heating_mw: f64,
    pub tx_power_per_channel_mw: f64,
    pub rx_power_per_channel_mw: f64,
    pub per_wavelength_rate_gbps: f64,
    pub per_channel_rate_gbytes: f64,
    pub laser_wall_power_per_channel_mw: f64,
    pub rx_sensitivity_dbm: f64,
    pub wdm_max_wavelengths: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LinkDefaults {
    pub waveguide_length_um: f64,
    pub delay_ps_per_mm: f64,
    pub serialization_bits: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ElectricalDefaults {
    pub latency_ns: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LinkClaims {
    pub serialization_ns: f64,
    pub electrical_equivalent_bitwidth: u64,
    pub electrical_1024bit_gbytes: f64,
    pub optolink_192ch_tbytes: f64,
    pub optolink_1024ch_tbytes: f64,
    pub optolink_channel_area_mm2: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct BitrateRow {
    pub bitwidth: u32,
    pub electrical_latency_ns: f64,
    pub electrical_gbytes: f64,
    pub optolink_latency_ps: f64,
    pub optolink_tbytes: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct PowerRow {
    pub bitwidth: u32,
    pub cores: u32,
    pub electrical_uw: f64,
    pub optolink_w: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AreaFigures {
    pub tx_mm2_per_wavelength: f64,
    pub rx_mm2_per_wavelength: f64,
    pub mrr_mm2: f64,
    pub rings_per_channel: u32,
    pub electrical: Vec<ElectricalAreaRow>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct ElectricalAreaRow {
    pub cores: u32,
    pub um2: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct AcceleratorRow {
    pub name: String,
    pub hardware: String,
    pub schemes: Vec<String>,
    pub bandwidth_gbytes: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BottleneckReference {
    pub multipliers: u64,
    pub clock_hz: f64,
    pub memory_bandwidth_gbytes: f64,
    pub compute_ms: f64,
    pub transfer_ms: f64,
}

static CONSTANTS: Lazy<ReferenceConstants> =
    Lazy::new(|| toml::from_str(RAW).expect("bundled reference_constants.toml is well-formed"));

pub fn reference() -> &'static ReferenceConstants {
    &CONSTANTS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        let c = reference();
        assert_eq!(c.bitrate.len(), 3);
        assert_eq!(c.power.len(), 9);
        assert_eq!(c.area.electrical.len(), 3);
        assert_eq!(c.accelerator.len(), 10);
        assert_eq!(c.photonic.laser_source_loss_db, 5.0);
        assert_eq!(c.photonic.ring_heating_mw, 0.32);
    }
}
