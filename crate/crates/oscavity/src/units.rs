//! Physical constants and the SI bridge.
//!
//! Internally everything runs in natural units (`hbar = c = 1`): `omega` and
//! `theta` are angular frequencies in rad per arbitrary time unit, and only
//! their ratios and products with times enter the formulas. SI conversion
//! happens once, at the input boundary (kelvin -> theta) and once at the
//! output boundary (multiplying `hbar*Omega`-unit energies by `HBAR * omega_si`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact SI).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Unit system a configuration was supplied in. Natural-unit inputs give
/// omega in rad per arbitrary time unit; SI inputs give rad/s and may derive
/// theta from a temperature in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Units {
    #[default]
    Natural,
    Si,
}

/// Thermal angular frequency theta = 2*pi*kB*T/hbar in rad/s.
///
/// At T = 300 K this is about 2.47e14 rad/s, i.e. theta/Omega ~ 3.9e3 for a
/// 10 GHz cavity.
pub fn temperature_to_theta(t_kelvin: f64) -> Result<f64> {
    if !t_kelvin.is_finite() || t_kelvin < 0.0 {
        return Err(Error::InvalidParameter {
            name: "T_kelvin",
            reason: format!("temperature must be finite and >= 0, got {t_kelvin}"),
        });
    }
    Ok(2.0 * std::f64::consts::PI * BOLTZMANN * t_kelvin / HBAR)
}

/// Inverse of [`temperature_to_theta`]; theta in rad/s.
pub fn theta_to_temperature(theta: f64) -> f64 {
    theta * HBAR / (2.0 * std::f64::consts::PI * BOLTZMANN)
}
