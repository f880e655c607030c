//! Period-integrated energies and photon numbers in closed form.
//!
//! Rather than integrating the sampled density, the per-period energy of the
//! emitted and intracavity fields reduces to closed expressions in the loss
//! `rho`, the drive rapidity `alpha`, the temperature ratio `t = theta/Omega`
//! and one thermal enhancement factor
//!
//! ```text
//! F(theta) = 1 + t^2 * (1 - 24 * sum_{l>=1} 1/sinh^2(x*l)),   x = 2*pi*K*theta/Omega
//! ```
//!
//! which interpolates between `1 - 1/K^2` at zero temperature and `t^2` in
//! the classical regime `theta >> Omega`. The direct sum degenerates
//! numerically for small `x` (it needs ~`1/x` terms and loses the linear
//! behaviour in catastrophic cancellation), so below `t = 1e-3` the
//! evaluation switches to the modular-transformed representation
//!
//! ```text
//! F = 1 - 1/K^2 + 6x/(pi^2 K^2) - 3x^2/(4 pi^2 K^2)
//!     + (24/K^2) * sum_{n>=1} sigma_1(n) * exp(-2 pi^2 n / x)
//! ```
//!
//! whose corrections are exponentially small; the approach to `F(0)` is
//! linear in `theta`, not quadratic. Both branches agree to ~1e-12 at the
//! switch.
//!
//! All energies are reported in units of `hbar*Omega`; photon numbers follow
//! from the energy-to-quantum bookkeeping `N = 2E` in those units.

use serde::Serialize;

use crate::config::CavityConfig;
use crate::error::{Error, Result};
use crate::radiation::TruncationPolicy;

const PI: f64 = std::f64::consts::PI;

/// Which squared temperature parameter multiplies the surface term of the
/// emitted energy, `alpha^2 (1 + ...) / 6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ThetaSquaredConvention {
    /// `1 + (theta/Omega)^2`: dimensionless in any unit system.
    #[default]
    FrequencyRatio,
    /// `1 + theta^2` with `theta` in angular units: matches normalizations
    /// that fix `Omega = 1`, and coincides with `FrequencyRatio` there.
    AngularSquared,
}

/// Closed-form per-period energy and photon bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBudget {
    /// Emitted energy per mechanical period, `hbar*Omega` units.
    pub e_total: f64,
    /// Share present for a static cavity at the same temperature.
    pub e_background: f64,
    /// Motion-induced share, `e_total - e_background`.
    pub e_motion: f64,
    /// Energy stored between the mirrors, same units.
    pub e_intracavity: f64,
    pub e_intracavity_background: f64,
    pub e_intracavity_motion: f64,
    /// Thermal enhancement factor entering both motion terms.
    pub f_value: f64,
    /// Motion-induced photons emitted per period.
    pub photons_emitted: f64,
    /// Motion-induced photons stored in the cavity.
    pub photons_intracavity: f64,
    /// Set when the configuration sits exactly at the parametric threshold.
    pub at_threshold: bool,
}

/// Rough photon yield of a single emission pulse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonEstimate {
    /// Photons carried by a single emission pulse.
    pub photons_per_pulse: f64,
    /// Whether the classical-regime asymptotic form `(rho/9) * t^2` was used.
    pub asymptotic: bool,
    /// Pulse count per period the general estimate divided by, measured with
    /// [`crate::analysis::detect_pulses`]; `None` on the asymptotic branch.
    pub pulses_per_period: Option<usize>,
    /// Present when the estimate is outside its clean regime of validity.
    pub note: Option<String>,
}

/// Thermal enhancement factor `F`; see the module docs for both branches.
pub fn f_factor(theta: f64, omega: f64, k: u32) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be finite and positive, got {omega}"),
        });
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must be finite and non-negative, got {theta}"),
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: "resonance order must be at least 1".to_string(),
        });
    }
    let t = theta / omega;
    let kk = (k as f64) * (k as f64);
    let x = 2.0 * PI * k as f64 * t;

    if t < 1e-3 {
        // Modular-transformed branch: polynomial plus exponentially small
        // corrections in exp(-2 pi^2 / x).
        let mut f = 1.0 - 1.0 / kk + 6.0 * x / (PI * PI * kk) - 3.0 * x * x / (4.0 * PI * PI * kk);
        if x > 0.0 {
            let damp = 2.0 * PI * PI / x;
            for n in 1..=64u64 {
                let term = 24.0 / kk * sigma1(n) as f64 * (-damp * n as f64).exp();
                f += term;
                if term < 1e-18 {
                    break;
                }
            }
        }
        return Ok(f);
    }

    // Direct branch: the csch^2 series converges geometrically once x*l > 1.
    let mut s = 0.0;
    let mut l = 1u64;
    loop {
        let y = x * l as f64;
        if y > 380.0 {
            break; // sinh^2 overflows past any representable contribution
        }
        let sh = y.sinh();
        let term = 1.0 / (sh * sh);
        s += term;
        if term < 1e-17 * s {
            break;
        }
        l += 1;
    }
    Ok(1.0 + t * t * (1.0 - 24.0 * s))
}

/// Sum of divisors of `n`.
fn sigma1(n: u64) -> u64 {
    let mut s = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += d;
            let q = n / d;
            if q != d {
                s += q;
            }
        }
        d += 1;
    }
    s
}

/// Per-period energies and photon numbers for an arbitrary drive below (or
/// exactly at) threshold. See [`energy_budget_with`] for the convention knob.
pub fn energy_budget(cfg: &CavityConfig) -> Result<EnergyBudget> {
    energy_budget_with(cfg, ThetaSquaredConvention::default())
}

/// [`energy_budget`] with an explicit choice for the squared temperature
/// parameter in the surface term.
pub fn energy_budget_with(
    cfg: &CavityConfig,
    convention: ThetaSquaredConvention,
) -> Result<EnergyBudget> {
    // The closed forms stay finite at threshold, so only configurations
    // strictly beyond it are rejected.
    if cfg.alpha_eff > 1.0 {
        return Err(Error::ThresholdExceeded {
            alpha_eff: cfg.alpha_eff,
        });
    }
    let separation = (cfg.rho - cfg.alpha).abs() / cfg.rho;
    if separation < 1e-6 {
        // Unreachable through validation (alpha <= rho/2 below threshold);
        // guards against hand-assembled configurations.
        return Err(Error::PoleProximity { separation });
    }

    let t = cfg.theta / cfg.omega;
    let t2 = match convention {
        ThetaSquaredConvention::FrequencyRatio => t * t,
        ThetaSquaredConvention::AngularSquared => cfg.theta * cfg.theta,
    };
    let f = f_factor(cfg.theta, cfg.omega, cfg.k)?;
    let gain = cfg.alpha * cfg.alpha / (cfg.rho * cfg.rho - cfg.alpha * cfg.alpha);

    let e_background = t * t / 12.0;
    let e_motion = cfg.rho * gain * f / 6.0 + cfg.alpha * cfg.alpha * (1.0 + t2) / 6.0;
    let e_intracavity_background = cfg.k as f64 * t * t / 24.0;
    let e_intracavity_motion = cfg.k as f64 / 24.0 * gain * f;

    Ok(EnergyBudget {
        e_total: e_background + e_motion,
        e_background,
        e_motion,
        e_intracavity: e_intracavity_background + e_intracavity_motion,
        e_intracavity_background,
        e_intracavity_motion,
        f_value: f,
        photons_emitted: 2.0 * e_motion,
        photons_intracavity: 2.0 * e_intracavity_motion,
        at_threshold: (cfg.alpha_eff - 1.0).abs() <= 1e-12,
    })
}

/// Budget of the same cavity driven exactly at its parametric threshold
/// (`alpha = rho/2`), where the gain factor collapses to `1/3`. The drive
/// amplitude stored in `cfg` is ignored.
pub fn threshold_budget(cfg: &CavityConfig) -> Result<EnergyBudget> {
    threshold_budget_with(cfg, ThetaSquaredConvention::default())
}

pub fn threshold_budget_with(
    cfg: &CavityConfig,
    convention: ThetaSquaredConvention,
) -> Result<EnergyBudget> {
    let t = cfg.theta / cfg.omega;
    let t2 = match convention {
        ThetaSquaredConvention::FrequencyRatio => t * t,
        ThetaSquaredConvention::AngularSquared => cfg.theta * cfg.theta,
    };
    let f = f_factor(cfg.theta, cfg.omega, cfg.k)?;

    let e_background = t * t / 12.0;
    let e_motion = cfg.rho * f / 18.0 + cfg.rho * cfg.rho * (1.0 + t2) / 24.0;
    let e_intracavity_background = cfg.k as f64 * t * t / 24.0;
    let e_intracavity_motion = cfg.k as f64 * f / 72.0;

    Ok(EnergyBudget {
        e_total: e_background + e_motion,
        e_background,
        e_motion,
        e_intracavity: e_intracavity_background + e_intracavity_motion,
        e_intracavity_background,
        e_intracavity_motion,
        f_value: f,
        photons_emitted: 2.0 * e_motion,
        photons_intracavity: 2.0 * e_intracavity_motion,
        at_threshold: true,
    })
}

/// Photons carried by one emission pulse at threshold drive.
///
/// One pulse leaves per mechanical period. Deep in the classical regime
/// (`theta > 10*Omega`) the per-period photon number collapses to
/// `(rho/9) (theta/Omega)^2`; below that the pulses ride on a background of
/// comparable magnitude and the full budget is quoted with a note.
pub fn photons_per_pulse(cfg: &CavityConfig) -> Result<PhotonEstimate> {
    let t = cfg.theta / cfg.omega;
    if t > 10.0 {
        return Ok(PhotonEstimate {
            photons_per_pulse: cfg.rho / 9.0 * t * t,
            asymptotic: true,
            pulses_per_period: None,
            note: None,
        });
    }

    // Below the classical regime the per-pulse number is the per-period
    // photon budget divided by the number of pulses each period carries. The
    // count is measured, not assumed: it is fixed by the phase geometry of
    // the drive (K and Omega), and in particular is independent of the loss
    // rate and the drive amplitude, so it is sampled on a moderate-finesse
    // surrogate drive (rho >= 0.05, alpha_eff = 0.9) where the density series
    // is cheap and the pulses are sharply formed. Sampling the configured
    // drive directly would refuse exactly-at-threshold configurations and
    // cost seconds at very small rho without changing the count.
    let surrogate = crate::config::validate_config(&crate::config::RawConfig {
        k: Some(cfg.k),
        omega: Some(cfg.omega),
        rho: Some(cfg.rho.max(0.05)),
        alpha_eff: Some(0.9),
        theta: Some(cfg.theta),
        ..Default::default()
    })?;
    let policy = TruncationPolicy {
        tail_tolerance: 1e-8,
        ..Default::default()
    };
    let series = crate::analysis::sample_period(&surrogate, 256, &policy)?;
    let train = crate::analysis::detect_pulses(&series, 0.5)?;
    let count = train.pulses_per_period.max(1);

    let budget = threshold_budget(cfg)?;
    Ok(PhotonEstimate {
        photons_per_pulse: budget.photons_emitted / count as f64,
        asymptotic: false,
        pulses_per_period: Some(count),
        note: Some(format!(
            "theta = {t:.3} Omega is outside the classical asymptotic regime \
             (theta > 10 Omega): quoting the per-period photon budget split \
             over {count} measured pulse(s) per period"
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, validate_config_at_threshold, RawConfig};
    use crate::units::temperature_to_theta;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: u32, rho: f64, alpha_eff: f64, theta: f64) -> CavityConfig {
        validate_config(&RawConfig {
            k: Some(k),
            omega: Some(1.0),
            alpha_eff: Some(alpha_eff),
            rho: Some(rho),
            theta: Some(theta),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn f_at_zero_temperature_is_one_minus_inverse_k_squared() {
        for k in 1..=6u32 {
            let f = f_factor(0.0, 1.0, k).unwrap();
            let expected = 1.0 - 1.0 / (k as f64 * k as f64);
            assert_relative_eq!(f, expected, max_relative = 1e-15, epsilon = 1e-15);
        }
    }

    #[test]
    fn f_branches_agree_at_the_switch() {
        for k in [1u32, 2, 3, 5, 8] {
            let below = f_factor(0.999_999e-3, 1.0, k).unwrap();
            let above = f_factor(1.000_001e-3, 1.0, k).unwrap();
            // F itself drifts by ~ (12/(pi*K)) * 2e-9 across the probe step,
            // which dominates the comparison at K = 1 where F ~ 12t/pi is
            // small; the absolute epsilon covers exactly that drift.
            assert_relative_eq!(below, above, max_relative = 1e-9, epsilon = 2e-8);
        }
    }

    #[test]
    fn f_small_temperature_growth_is_linear() {
        for k in [1u32, 2, 4] {
            let f0 = f_factor(0.0, 1.0, k).unwrap();
            let t = 1e-4;
            let f = f_factor(t, 1.0, k).unwrap();
            let slope_expected = 12.0 / (PI * k as f64);
            assert_relative_eq!((f - f0) / t, slope_expected, max_relative = 1e-3);
        }
    }

    #[test]
    fn f_classical_regime_is_quadratic() {
        let t = 3924.0;
        for k in [1u32, 3] {
            let f = f_factor(t, 1.0, k).unwrap();
            assert_relative_eq!(f, 1.0 + t * t, max_relative = 1e-12);
        }
        // ratio form used for quick checks
        let f = f_factor(t, 1.0, 3).unwrap();
        assert!((f / (t * t) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn f_is_scale_invariant_in_theta_over_omega() {
        let a = f_factor(0.37, 1.0, 3).unwrap();
        let b = f_factor(0.37 * 2.0e10, 2.0e10, 3).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn budget_shares_are_consistent() {
        let c = cfg(3, 0.05, 0.8, 1.3);
        let b = energy_budget(&c).unwrap();
        assert_relative_eq!(b.e_total, b.e_background + b.e_motion, max_relative = 1e-15);
        assert_relative_eq!(
            b.e_intracavity,
            b.e_intracavity_background + b.e_intracavity_motion,
            max_relative = 1e-15
        );
        assert_relative_eq!(b.photons_emitted, 2.0 * b.e_motion, max_relative = 1e-15);
        assert_relative_eq!(
            b.photons_intracavity,
            2.0 * b.e_intracavity_motion,
            max_relative = 1e-15
        );
        assert!(!b.at_threshold);
        assert!(b.e_motion > 0.0);
    }

    #[test]
    fn static_budget_has_no_motion_share() {
        let c = cfg(2, 0.05, 0.0, 0.9);
        let b = energy_budget(&c).unwrap();
        assert_eq!(b.e_motion, 0.0);
        assert_eq!(b.photons_emitted, 0.0);
        let t = 0.9;
        assert_relative_eq!(b.e_background, t * t / 12.0, max_relative = 1e-15);
        assert_relative_eq!(
            b.e_intracavity_background,
            2.0 * t * t / 24.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn vacuum_threshold_intracavity_matches_frozen_value() {
        // K = 2, theta = 0: (K/72) * F = (2/72) * (1 - 1/4)
        let c = cfg(2, 0.05, 0.5, 0.0);
        let b = threshold_budget(&c).unwrap();
        assert_relative_eq!(
            b.e_intracavity_motion,
            0.020833333333333332,
            max_relative = 1e-15
        );
        assert!(b.at_threshold);
    }

    #[test]
    fn general_budget_collapses_to_threshold_form_at_threshold() {
        // The gain factor alpha^2/(rho^2 - alpha^2) equals exactly 1/3 at
        // alpha = rho/2, so the two independent code paths must agree.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..100 {
            let k = rng.gen_range(1..6u32);
            let rho = 10f64.powf(rng.gen_range(-5.0..-0.52));
            let theta = match i % 3 {
                0 => 0.0,
                1 => rng.gen_range(0.0..5.0),
                _ => 3924.0,
            };
            let raw = RawConfig {
                k: Some(k),
                omega: Some(1.0),
                alpha_eff: Some(1.0),
                rho: Some(rho),
                theta: Some(theta),
                ..Default::default()
            };
            let c = validate_config_at_threshold(&raw).unwrap();
            let general = energy_budget(&c).unwrap();
            let closed = threshold_budget(&c).unwrap();
            assert!(general.at_threshold);
            assert_relative_eq!(general.e_motion, closed.e_motion, max_relative = 1e-12);
            assert_relative_eq!(
                general.e_intracavity_motion,
                closed.e_intracavity_motion,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                general.photons_emitted,
                closed.photons_emitted,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn room_temperature_microwave_cavity_photon_yield() {
        // 10 GHz cavity at 300 K, driven at threshold with rho = 1e-5.
        let omega = 2.0 * PI * 1.0e10;
        let theta = temperature_to_theta(300.0).unwrap();
        let raw = RawConfig {
            k: Some(3),
            omega: Some(omega),
            alpha_eff: Some(1.0),
            rho: Some(1e-5),
            theta: Some(theta),
            ..Default::default()
        };
        let c = validate_config_at_threshold(&raw).unwrap();

        let est = photons_per_pulse(&c).unwrap();
        assert!(est.asymptotic);
        let t = theta / omega;
        assert_relative_eq!(
            est.photons_per_pulse,
            1e-5 / 9.0 * t * t,
            max_relative = 1e-15
        );
        assert!(
            est.photons_per_pulse > 15.0 && est.photons_per_pulse < 25.0,
            "photons per pulse = {}",
            est.photons_per_pulse
        );

        let b = threshold_budget(&c).unwrap();
        assert!(
            b.photons_intracavity > 1.0e6,
            "intracavity photons = {}",
            b.photons_intracavity
        );
    }

    #[test]
    fn cold_cavity_estimate_divides_the_budget_by_the_measured_pulse_count() {
        let c = cfg(3, 0.01, 0.5, 5.0);
        let est = photons_per_pulse(&c).unwrap();
        assert!(!est.asymptotic);
        assert!(est.note.is_some());
        // the drive passes its phase stationary point once per period
        assert_eq!(est.pulses_per_period, Some(1));
        let b = threshold_budget(&c).unwrap();
        assert_eq!(est.photons_per_pulse, b.photons_emitted);
    }

    #[test]
    fn beyond_threshold_is_rejected_and_pole_is_guarded() {
        let raw = RawConfig {
            k: Some(2),
            omega: Some(1.0),
            alpha_eff: Some(1.0 + 1e-9),
            rho: Some(0.05),
            ..Default::default()
        };
        // Config validation itself refuses >1; build the struct by hand to
        // exercise the budget guards.
        let base = cfg(2, 0.05, 0.5, 0.0);
        let over = CavityConfig {
            alpha_eff: 1.0 + 1e-9,
            ..base
        };
        assert!(matches!(
            energy_budget(&over),
            Err(Error::ThresholdExceeded { .. })
        ));
        assert!(validate_config(&raw).is_err());

        let corrupted = CavityConfig {
            alpha: base.rho * (1.0 - 1e-9),
            ..base
        };
        assert!(matches!(
            energy_budget(&corrupted),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn convention_toggle_matters_only_off_unit_frequency() {
        let c = cfg(2, 0.05, 0.8, 1.7); // omega = 1
        let a = energy_budget_with(&c, ThetaSquaredConvention::FrequencyRatio).unwrap();
        let b = energy_budget_with(&c, ThetaSquaredConvention::AngularSquared).unwrap();
        assert_eq!(a.e_motion, b.e_motion);

        let omega = 2.0e9;
        let raw = RawConfig {
            k: Some(2),
            omega: Some(omega),
            alpha_eff: Some(0.8),
            rho: Some(0.05),
            theta: Some(1.7 * omega),
            ..Default::default()
        };
        let c2 = validate_config(&raw).unwrap();
        let a2 = energy_budget_with(&c2, ThetaSquaredConvention::FrequencyRatio).unwrap();
        let b2 = energy_budget_with(&c2, ThetaSquaredConvention::AngularSquared).unwrap();
        assert_relative_eq!(a2.e_motion, a.e_motion, max_relative = 1e-12);
        assert!(b2.e_motion > a2.e_motion);
    }

    #[test]
    fn sigma1_matches_hand_values() {
        for (n, s) in [
            (1u64, 1u64),
            (2, 3),
            (3, 4),
            (4, 7),
            (6, 12),
            (12, 28),
            (28, 56),
        ] {
            assert_eq!(sigma1(n), s);
        }
    }
}
