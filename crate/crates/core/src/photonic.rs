//! Optical link budget: insertion loss along a path, the laser power needed
//! to close the link, and per-channel electrical power.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::reference;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("waveguide length must be non-negative, got {0} cm")]
    NegativeLength(f64),
    #[error("photonic parameter `{name}` is invalid: {value}")]
    InvalidParam { name: &'static str, value: f64 },
}

/// Component losses (dB), powers (mW) and line rates.
///
/// Every field is optional when deserialized; missing fields take the
/// reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotonicParams {
    pub laser_source_loss: f64,
    pub coupler_loss: f64,
    pub splitter_loss: f64,
    /// dB per cm
    pub waveguide_loss: f64,
    pub ring_drop_loss: f64,
    pub ring_through_loss: f64,
    pub photodetector_loss: f64,
    /// mW per resonator
    pub ring_heating_power: f64,
    pub tx_power_per_channel: f64,
    pub rx_power_per_channel: f64,
    /// Gb/s per wavelength, used for serialization latency.
    pub per_wavelength_rate: f64,
    /// GB/s per channel, used for bandwidth.
    pub per_channel_rate: f64,
    /// mW, calibration constant for the laser's wall-plug draw.
    pub laser_wall_power_per_channel: f64,
    /// dBm
    pub rx_sensitivity: f64,
}

impl Default for PhotonicParams {
    fn default() -> Self {
        let p = &reference().photonic;
        PhotonicParams {
            laser_source_loss: p.laser_source_loss_db,
            coupler_loss: p.coupler_loss_db,
            splitter_loss: p.splitter_loss_db,
            waveguide_loss: p.waveguide_loss_db_per_cm,
            ring_drop_loss: p.ring_drop_loss_db,
            ring_through_loss: p.ring_through_loss_db,
            photodetector_loss: p.photodetector_loss_db,
            ring_heating_power: p.ring_heating_mw,
            tx_power_per_channel: p.tx_power_per_channel_mw,
            rx_power_per_channel: p.rx_power_per_channel_mw,
            per_wavelength_rate: p.per_wavelength_rate_gbps,
            per_channel_rate: p.per_channel_rate_gbytes,
            laser_wall_power_per_channel: p.laser_wall_power_per_channel_mw,
            rx_sensitivity: p.rx_sensitivity_dbm,
        }
    }
}

impl PhotonicParams {
    pub fn validate(&self) -> Result<(), LinkError> {
        let non_negative = [
            ("laser_source_loss", self.laser_source_loss),
            ("coupler_loss", self.coupler_loss),
            ("splitter_loss", self.splitter_loss),
            ("waveguide_loss", self.waveguide_loss),
            ("ring_drop_loss", self.ring_drop_loss),
            ("ring_through_loss", self.ring_through_loss),
            ("photodetector_loss", self.photodetector_loss),
            ("ring_heating_power", self.ring_heating_power),
            ("tx_power_per_channel", self.tx_power_per_channel),
            ("rx_power_per_channel", self.rx_power_per_channel),
            (
                "laser_wall_power_per_channel",
                self.laser_wall_power_per_channel,
            ),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(LinkError::InvalidParam { name, value });
            }
        }
        for (name, value) in [
            ("per_wavelength_rate", self.per_wavelength_rate),
            ("per_channel_rate", self.per_channel_rate),
        ] {
            if !(value > 0.0) {
                return Err(LinkError::InvalidParam { name, value });
            }
        }
        if !self.rx_sensitivity.is_finite() {
            return Err(LinkError::InvalidParam {
                name: "rx_sensitivity",
                value: self.rx_sensitivity,
            });
        }
        Ok(())
    }
}

/// Components crossed between the laser and the receiver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalPath {
    pub couplers_crossed: u32,
    pub splitters_crossed: u32,
    /// cm
    pub waveguide_length: f64,
    pub through_rings_passed: u32,
    pub has_drop_ring: bool,
    pub has_photodetector: bool,
}

impl OpticalPath {
    /// Appends `tail` to this path. Returns `None` if both segments end in a
    /// drop ring or a photodetector, since a path terminates only once.
    pub fn then(&self, tail: &OpticalPath) -> Option<OpticalPath> {
        if (self.has_drop_ring && tail.has_drop_ring)
            || (self.has_photodetector && tail.has_photodetector)
        {
            return None;
        }
        Some(OpticalPath {
            couplers_crossed: self.couplers_crossed + tail.couplers_crossed,
            splitters_crossed: self.splitters_crossed + tail.splitters_crossed,
            waveguide_length: self.waveguide_length + tail.waveguide_length,
            through_rings_passed: self.through_rings_passed + tail.through_rings_passed,
            has_drop_ring: self.has_drop_ring || tail.has_drop_ring,
            has_photodetector: self.has_photodetector || tail.has_photodetector,
        })
    }
}

/// Total insertion loss in dB. The laser-source term is counted once per path.
pub fn path_insertion_loss(path: &OpticalPath, params: &PhotonicParams) -> Result<f64, LinkError> {
    if path.waveguide_length < 0.0 || path.waveguide_length.is_nan() {
        return Err(LinkError::NegativeLength(path.waveguide_length));
    }
    let mut loss = params.laser_source_loss
        + path.couplers_crossed as f64 * params.coupler_loss
        + path.splitters_crossed as f64 * params.splitter_loss
        + path.waveguide_length * params.waveguide_loss
        + path.through_rings_passed as f64 * params.ring_through_loss;
    if path.has_drop_ring {
        loss += params.ring_drop_loss;
    }
    if path.has_photodetector {
        loss += params.photodetector_loss;
    }
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserRequirement {
    pub dbm: f64,
    pub mw: f64,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Laser output needed so the receiver sees exactly its sensitivity.
pub fn required_laser_power(
    path: &OpticalPath,
    params: &PhotonicParams,
) -> Result<LaserRequirement, LinkError> {
    let dbm = params.rx_sensitivity + path_insertion_loss(path, params)?;
    Ok(LaserRequirement {
        dbm,
        mw: dbm_to_mw(dbm),
    })
}

/// Per-channel electrical draw, all in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelPower {
    pub laser: f64,
    pub tx: f64,
    pub rx: f64,
    pub total: f64,
}

pub fn channel_electrical_power(params: &PhotonicParams) -> ChannelPower {
    let laser = params.laser_wall_power_per_channel;
    let tx = params.tx_power_per_channel;
    let rx = params.rx_power_per_channel;
    ChannelPower {
        laser,
        tx,
        rx,
        total: laser + tx + rx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_path() -> OpticalPath {
        OpticalPath {
            couplers_crossed: 1,
            waveguide_length: 0.5,
            through_rings_passed: 15,
            has_drop_ring: true,
            has_photodetector: true,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_match_component_table() {
        let p = PhotonicParams::default();
        assert_eq!(p.laser_source_loss, 5.0);
        assert_eq!(p.coupler_loss, 1.0);
        assert_eq!(p.splitter_loss, 0.2);
        assert_eq!(p.waveguide_loss, 1.0);
        assert_eq!(p.ring_drop_loss, 0.7);
        assert_eq!(p.ring_through_loss, 0.01);
        assert_eq!(p.photodetector_loss, 0.5);
        assert_eq!(p.ring_heating_power, 0.32);
        assert_eq!(p.tx_power_per_channel, 1.22);
        assert_eq!(p.rx_power_per_channel, 0.92);
        assert_eq!(p.rx_sensitivity, -20.0);
        p.validate().unwrap();
    }

    #[test]
    fn empty_path_is_source_only() {
        let loss =
            path_insertion_loss(&OpticalPath::default(), &PhotonicParams::default()).unwrap();
        assert_eq!(loss, 5.0);
    }

    #[test]
    fn reference_path_loss() {
        // 5 + 1 + 0.5 + 15 * 0.01 + 0.7 + 0.5
        let loss = path_insertion_loss(&reference_path(), &PhotonicParams::default()).unwrap();
        assert_relative_eq!(loss, 7.85, epsilon = 1e-12);
        let mut longer = reference_path();
        longer.waveguide_length = 1.0;
        let loss2 = path_insertion_loss(&longer, &PhotonicParams::default()).unwrap();
        assert_relative_eq!(loss2 - loss, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn negative_length_rejected() {
        let path = OpticalPath {
            waveguide_length: -0.1,
            ..Default::default()
        };
        assert_eq!(
            path_insertion_loss(&path, &PhotonicParams::default()),
            Err(LinkError::NegativeLength(-0.1))
        );
    }

    #[test]
    fn laser_requirement() {
        let req = required_laser_power(&reference_path(), &PhotonicParams::default()).unwrap();
        assert_relative_eq!(req.dbm, -12.15, epsilon = 1e-12);
        // 10^(-1.215)
        assert_relative_eq!(req.mw, 0.060_953_689_724_017_1, max_relative = 1e-12);

        let lossless = PhotonicParams {
            laser_source_loss: 0.0,
            ..Default::default()
        };
        let req = required_laser_power(&OpticalPath::default(), &lossless).unwrap();
        assert_eq!(req.dbm, lossless.rx_sensitivity);

        let plus_ten = OpticalPath {
            waveguide_length: 10.0,
            ..Default::default()
        };
        let base =
            required_laser_power(&OpticalPath::default(), &PhotonicParams::default()).unwrap();
        let more = required_laser_power(&plus_ten, &PhotonicParams::default()).unwrap();
        assert_relative_eq!(more.mw / base.mw, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn per_channel_power() {
        let c = channel_electrical_power(&PhotonicParams::default());
        assert_eq!(c.tx, 1.22);
        assert_eq!(c.rx, 0.92);
        assert_relative_eq!(c.total, 12.87, epsilon = 1e-9);

        let zero = PhotonicParams {
            tx_power_per_channel: 0.0,
            rx_power_per_channel: 0.0,
            laser_wall_power_per_channel: 0.0,
            ..Default::default()
        };
        assert_eq!(channel_electrical_power(&zero).total, 0.0);
    }

    #[test]
    fn params_validation() {
        let bad = PhotonicParams {
            coupler_loss: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(LinkError::InvalidParam {
                name: "coupler_loss",
                ..
            })
        ));
        let bad = PhotonicParams {
            per_channel_rate: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn partial_json_takes_defaults() {
        let p: PhotonicParams = serde_json::from_str(r#"{"coupler_loss": 1.5}"#).unwrap();
        assert_eq!(p.coupler_loss, 1.5);
        assert_eq!(p.splitter_loss, 0.2);
        assert!(serde_json::from_str::<PhotonicParams>(r#"{"bogus": 1}"#).is_err());
    }

    fn arb_path(terminates: bool) -> impl Strategy<Value = OpticalPath> {
        (0u32..8, 0u32..8, 0.0f64..5.0, 0u32..64).prop_map(move |(c, s, l, r)| OpticalPath {
            couplers_crossed: c,
            splitters_crossed: s,
            waveguide_length: l,
            through_rings_passed: r,
            has_drop_ring: terminates,
            has_photodetector: terminates,
        })
    }

    proptest! {
        #[test]
        fn loss_is_additive(head in arb_path(false), tail in arb_path(true)) {
            let p = PhotonicParams::default();
            let joined = head.then(&tail).unwrap();
            let lhs = path_insertion_loss(&joined, &p).unwrap();
            let rhs = path_insertion_loss(&head, &p).unwrap() + path_insertion_loss(&tail, &p).unwrap()
                - p.laser_source_loss;
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn adding_components_never_lowers_loss(path in arb_path(false), extra in arb_path(false), end in any::<bool>()) {
            let p = PhotonicParams::default();
            let mut tail = extra;
            tail.has_drop_ring = end;
            tail.has_photodetector = end;
            let longer = path.then(&tail).unwrap();
            let before = path_insertion_loss(&path, &p).unwrap();
            let after = path_insertion_loss(&longer, &p).unwrap();
            prop_assert!(after >= before);
            let lb = required_laser_power(&path, &p).unwrap().mw;
            let la = required_laser_power(&longer, &p).unwrap().mw;
            prop_assert!(la >= lb);
            if after > before {
                prop_assert!(la > lb);
            }
        }
    }
}
