//! Cavity configuration: raw inputs, cross-validation, derived quantities.
//!
//! A cavity is described by the mode index `K` (even: breathing, odd: global
//! translation), the drive frequency `Omega = K*pi/L`, the peak boost
//! rapidity `alpha` of the moving mirror, the round-trip loss `rho` (or
//! equivalently `r = exp(-2*rho) = sqrt(R1*R2)`), the mirror intensity
//! coefficients, and the thermal frequency `theta = 2*pi*kB*T/hbar`.
//!
//! Redundant inputs are allowed and cross-checked: `omega`/`length`,
//! `alpha`/`alpha_eff`, `rho`/`r`, and `r`/`(r1, r2)`. When both `rho` and
//! `r` are given, `r` wins and `rho` is recomputed as `-ln(r)/2`; a
//! disagreement beyond 1e-9 relative is an error rather than a silent pick.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Relative tolerance for redundant parameter pairs.
const CONSISTENCY_TOL: f64 = 1e-9;

/// Raw, possibly partial configuration as read from a file or flags.
/// `validate_config` resolves it into a [`CavityConfig`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    pub k: Option<u32>,
    pub omega: Option<f64>,
    pub length: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_eff: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub theta: Option<f64>,
}

/// Fully resolved, internally consistent cavity description.
///
/// Invariants (enforced at construction): `k >= 1`, `omega > 0`,
/// `length = k*pi/omega`, `0 < r < 1`, `r = exp(-2*rho) = sqrt(r1*r2)`,
/// `r1 + t1 = 1`, `r2 + t2 = 1`, `alpha >= 0`, `theta >= 0`, and
/// `alpha_eff = 2*alpha/rho < 1` (`<= 1` through the threshold-permitting
/// entry point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityConfig {
    pub k: u32,
    pub omega: f64,
    pub length: f64,
    pub alpha: f64,
    pub rho: f64,
    pub r: f64,
    pub r1: f64,
    pub t1: f64,
    pub r2: f64,
    pub t2: f64,
    pub theta: f64,
    pub alpha_eff: f64,
}

impl CavityConfig {
    /// Mechanical period 2*pi/Omega.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// True for a motionless cavity (alpha = 0).
    pub fn is_static(&self) -> bool {
        self.alpha == 0.0
    }

    /// Errors unless strictly below the parametric threshold. Series
    /// computations (dephasing, density) call this even on validated
    /// configs, because the threshold-permitting entry point can hand out
    /// configs sitting exactly at alpha_eff = 1.
    pub fn require_below_threshold(&self) -> Result<()> {
        if self.alpha_eff >= 1.0 {
            return Err(Error::ThresholdExceeded {
                alpha_eff: self.alpha_eff,
            });
        }
        Ok(())
    }

    /// Hex digest of the resolved parameters; stable across runs and
    /// platforms with identical inputs.
    pub fn fingerprint(&self) -> String {
        let canon = format!(
            "k={};omega={:.17e};alpha={:.17e};rho={:.17e};r1={:.17e};r2={:.17e};theta={:.17e}",
            self.k, self.omega, self.alpha, self.rho, self.r1, self.r2, self.theta
        );
        let digest = Sha256::digest(canon.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

fn require_finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {v}"),
        })
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn resolve(raw: &RawConfig) -> Result<CavityConfig> {
    let k = raw.k.ok_or(Error::InvalidParameter {
        name: "K",
        reason: "mode index is required".into(),
    })?;
    if k < 1 {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: "mode index must be a positive integer".into(),
        });
    }
    let kpi = k as f64 * std::f64::consts::PI;

    let (omega, length) = match (raw.omega, raw.length) {
        (Some(om), None) => (require_finite("omega", om)?, kpi / om),
        (None, Some(l)) => (kpi / require_finite("length", l)?, l),
        (Some(om), Some(l)) => {
            require_finite("omega", om)?;
            require_finite("length", l)?;
            if relative_gap(om, kpi / l) > CONSISTENCY_TOL {
                return Err(Error::InvalidParameter {
                    name: "length",
                    reason: format!(
                        "omega = {om} and length = {l} disagree with omega = K*pi/length"
                    ),
                });
            }
            (om, l)
        }
        (None, None) => {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: "either omega or length is required".into(),
            })
        }
    };
    if omega <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("drive frequency must be > 0, got {omega}"),
        });
    }

    // Loss: r and rho are one parameter in two forms; when both appear
    // explicitly they must agree tightly, and r wins.
    let loss_r = match (raw.rho, raw.r) {
        (None, Some(r)) => Some(require_finite("r", r)?),
        (Some(rho), None) => Some((-2.0 * require_finite("rho", rho)?).exp()),
        (Some(rho), Some(r)) => {
            require_finite("rho", rho)?;
            require_finite("r", r)?;
            if relative_gap(r, (-2.0 * rho).exp()) > CONSISTENCY_TOL {
                return Err(Error::InconsistentMirrors(format!(
                    "rho = {rho} and r = {r} disagree with r = exp(-2*rho)"
                )));
            }
            Some(r)
        }
        (None, None) => None,
    };

    // Mirrors are the measurable quantity: when given they determine r, and a
    // (possibly display-rounded) rho/r input only has to agree loosely. The
    // default preset is a perfect input mirror (t1 = 0).
    let (r1, r2, r) = match (raw.r1, raw.r2) {
        (Some(r1), Some(r2)) => {
            require_finite("R1", r1)?;
            require_finite("R2", r2)?;
            (r1, r2, (r1 * r2).sqrt())
        }
        (None, Some(r2)) => (
            1.0,
            require_finite("R2", r2)?,
            require_finite("R2", r2)?.sqrt(),
        ),
        (Some(r1), None) => {
            let r = loss_r.ok_or(Error::InvalidParameter {
                name: "rho",
                reason: "rho or r is required when only R1 is given".into(),
            })?;
            (require_finite("R1", r1)?, r * r / r1, r)
        }
        (None, None) => {
            let r = loss_r.ok_or(Error::InvalidParameter {
                name: "rho",
                reason: "either rho, r, or mirror reflectivities are required".into(),
            })?;
            (1.0, r * r, r)
        }
    };
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("round-trip reflectivity must lie in (0, 1), got {r}"),
        });
    }
    for (name, v) in [("R1", r1), ("R2", r2)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("intensity reflectivity must lie in (0, 1], got {v}"),
            });
        }
    }
    if let Some(lr) = loss_r {
        let tight = raw.r.is_some(); // an explicit r is exact, a rho may be rounded
        let tol = if tight { CONSISTENCY_TOL } else { 1e-2 };
        if relative_gap(lr, r) > tol {
            return Err(Error::InconsistentMirrors(format!(
                "loss input gives r = {lr} but mirrors give sqrt(R1*R2) = {r}"
            )));
        }
    }
    // Exact relation r = exp(-2*rho); keep a user-supplied rho verbatim only
    // when nothing overrode it.
    let rho = match (raw.rho, raw.r, raw.r1.is_some() || raw.r2.is_some()) {
        (Some(rho), None, false) => rho,
        _ => -r.ln() / 2.0,
    };
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("round-trip loss must be > 0, got {rho}"),
        });
    }

    let alpha = match (raw.alpha, raw.alpha_eff) {
        (Some(a), None) => require_finite("alpha", a)?,
        (None, Some(ae)) => require_finite("alpha_eff", ae)? * rho / 2.0,
        (Some(a), Some(ae)) => {
            require_finite("alpha", a)?;
            require_finite("alpha_eff", ae)?;
            if relative_gap(a, ae * rho / 2.0) > CONSISTENCY_TOL {
                return Err(Error::InvalidParameter {
                    name: "alpha_eff",
                    reason: format!("alpha = {a} and alpha_eff = {ae} disagree"),
                });
            }
            a
        }
        (None, None) => 0.0,
    };
    if alpha < 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("rapidity amplitude must be >= 0, got {alpha}"),
        });
    }

    let theta = raw.theta.unwrap_or(0.0);
    require_finite("theta", theta)?;
    if theta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("thermal frequency must be >= 0, got {theta}"),
        });
    }

    Ok(CavityConfig {
        k,
        omega,
        length,
        alpha,
        rho,
        r,
        r1,
        t1: 1.0 - r1,
        r2,
        t2: 1.0 - r2,
        theta,
        alpha_eff: 2.0 * alpha / rho,
    })
}

/// Resolve and validate a configuration for general use. Rejects
/// `alpha_eff >= 1`: at the parametric threshold the emitted density
/// diverges.
pub fn validate_config(raw: &RawConfig) -> Result<CavityConfig> {
    let cfg = resolve(raw)?;
    cfg.require_below_threshold()?;
    Ok(cfg)
}

/// Like [`validate_config`] but admits a cavity sitting exactly at the
/// parametric threshold (`alpha_eff = 1`), where the period-integrated
/// closed-form energies are still finite. Time-resolved density evaluation
/// re-checks the strict bound and refuses such configs.
pub fn validate_config_at_threshold(raw: &RawConfig) -> Result<CavityConfig> {
    let cfg = resolve(raw)?;
    if cfg.alpha_eff > 1.0 {
        return Err(Error::ThresholdExceeded {
            alpha_eff: cfg.alpha_eff,
        });
    }
    Ok(cfg)
}
