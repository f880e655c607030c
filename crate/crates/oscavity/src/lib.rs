//! Radiation from a high-finesse cavity whose mirrors oscillate in a thermal
//! or vacuum field.
//!
//! A cavity of length `L` driven at a resonant mechanical frequency
//! `Omega = K*pi/L` modulates the phase of every ray bouncing between its
//! mirrors. The library computes, for the field component leaving through the
//! output mirror:
//!
//! - the time-resolved energy density over a mechanical period
//!   ([`radiation::energy_density`], [`analysis::sample_period`]),
//! - the pulse train it carries ([`analysis::detect_pulses`]),
//! - period-integrated emitted and intracavity energies and photon numbers,
//!   both by quadrature ([`analysis::quadrature_energy`]) and in closed form
//!   ([`energetics::energy_budget`]).
//!
//! Everything internal is in natural units (`hbar = c = 1`); angular
//! frequencies carry the only dimension. Reported densities are in units of
//! `hbar*Omega^2`, energies in `hbar*Omega`, so results are invariant under
//! the choice of time unit. [`units`] holds the SI bridge.
//!
//! The model is valid strictly below the parametric oscillation threshold
//! `alpha_eff = 2*alpha/rho = 1`; configurations at or beyond it are rejected
//! at validation (closed-form energies remain finite exactly at threshold and
//! are reachable through [`config::validate_config_at_threshold`]).
//!
//! With the default `parallel` feature, time grids and sweeps are evaluated
//! with rayon; disabling it yields a dependency-free sequential build with
//! the same API and bitwise-identical results.

pub mod analysis;
pub mod config;
pub mod dephasing;
pub mod energetics;
pub mod error;
pub mod radiation;
pub mod units;

mod parallel;

pub use analysis::{
    detect_pulses, quadrature_energy, sample_period, DensitySeries, Pulse, PulseTrain,
    QuadratureEnergy,
};
pub use config::{validate_config, validate_config_at_threshold, CavityConfig, RawConfig};
pub use energetics::{energy_budget, f_factor, threshold_budget, EnergyBudget, PhotonEstimate};
pub use error::{Error, Result};
pub use radiation::{background_density, contrast, energy_density, DensityPoint, TruncationPolicy};
