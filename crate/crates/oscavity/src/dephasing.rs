//! Phase-modulation functions of rays traversing the oscillating cavity.
//!
//! A ray labeled by the bounce index `p` leaves the cavity with its light-cone
//! coordinate remapped from `u` to `f_p(u)`. The map is a Moebius transform of
//! the phase circle,
//!
//! ```text
//! exp(i*Omega*f_p(u)) = (a_p e^{i Omega u} + b_p) / (b_p* e^{i Omega u} + a_p*)
//! a_p = (-i)^{Kp} cosh(p*alpha),   b_p = i^{2K+1} (-i)^{Kp} sinh(p*alpha)
//! ```
//!
//! with `|a_p|^2 - |b_p|^2 = 1`. Factoring the phase gives a globally
//! branch-consistent closed form used everywhere in this crate:
//!
//! ```text
//! f_p(u)  = u - p*L + (2/Omega) * Arg W_p(u)
//! W_p(u)  = cosh(p*alpha) + i*(-1)^K sinh(p*alpha) e^{-i Omega u}
//! f_p'(u) = 1 / (cosh^2 + sinh^2 + 2*(-1)^K cosh*sinh*sin(Omega u))
//! ```
//!
//! `Re W_p >= exp(-2|p*alpha|) > 0`, so the principal argument of `W_p` is
//! continuous in `u` and no runtime branch unwinding is needed: for alpha -> 0
//! the form degenerates to the static ray `f_p(u) = u - p*L` identically, and
//! quasi-periodicity `f_p(u + T) = f_p(u) + T` holds by construction. All
//! hyperbolics are evaluated in `exp(-2|p*alpha|)`-scaled form, so nothing
//! overflows however large `p*alpha` gets.

use num_complex::Complex64 as Complex;
use serde::Serialize;

use crate::config::CavityConfig;
use crate::error::Result;

/// Coefficients of the phase-circle Moebius transform for ray `p`.
///
/// `|a|^2 - |b|^2 = 1` up to floating rounding (the cancellation degrades for
/// `|p*alpha|` beyond ~15, where cosh^2 dwarfs the unit difference).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusCoefficients {
    pub p: i64,
    pub a: Complex,
    pub b: Complex,
}

impl MobiusCoefficients {
    /// Image of a unimodular `z = exp(i*Omega*u)` under the transform.
    pub fn apply(&self, z: Complex) -> Complex {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }
}

/// Unit power of `-i`: `(-i)^m` for `m` reduced mod 4.
fn neg_i_pow(m: i64) -> Complex {
    match m.rem_euclid(4) {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, -1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, 1.0),
    }
}

/// Moebius coefficients for ray `p`. The phases reduce over the integers
/// (`K*p mod 4`), so they are exact for any index; the hyperbolic magnitudes
/// overflow f64 for `|p*alpha|` > ~710, far beyond any index the truncated
/// series can reach below threshold.
pub fn mobius_coefficients(p: i64, cfg: &CavityConfig) -> MobiusCoefficients {
    let kp = (cfg.k as i64 % 4) * p.rem_euclid(4);
    let phase_a = neg_i_pow(kp);
    // i^{2K+1} = i * (-1)^K
    let sign_k = if cfg.k % 2 == 0 { 1.0 } else { -1.0 };
    let phase_b = Complex::new(0.0, sign_k) * phase_a;
    let s = p as f64 * cfg.alpha;
    MobiusCoefficients {
        p,
        a: phase_a * s.cosh(),
        b: phase_b * s.sinh(),
    }
}

/// One evaluation of the dephasing map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingEvaluation {
    pub u: f64,
    pub p: i64,
    /// `f_p(u)`.
    pub value: f64,
    /// `f_p'(u)`, strictly positive.
    pub derivative: f64,
    /// Whole phase turns between `Omega*f_p(u)` and its principal value;
    /// counts how many periods the ray image has wound through.
    pub branch_index: i64,
}

/// Scaled per-ray data, computed once per `(p, cfg)` and reused across
/// evaluation times. `ch` and `sh` are `exp(-|s|) * cosh(s)` and
/// `exp(-|s|) * sinh(s)` for `s = p*alpha`; `q = exp(-2|s|)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ray {
    q: f64,
    ch: f64,
    sh: f64,
    sigma: f64,
    static_offset: f64,
    inv_omega_2: f64,
}

impl Ray {
    pub(crate) fn new(p: i64, cfg: &CavityConfig) -> Self {
        let s = p as f64 * cfg.alpha;
        let q = (-2.0 * s.abs()).exp();
        Ray {
            q,
            ch: 0.5 * (1.0 + q),
            sh: 0.5 * s.signum() * (1.0 - q),
            sigma: if cfg.k % 2 == 0 { 1.0 } else { -1.0 },
            static_offset: p as f64 * cfg.length,
            inv_omega_2: 2.0 / cfg.omega,
        }
    }

    /// `f_p'` from the precomputed trig pair at the evaluation time.
    /// `q / (q^2 + (1 - q^2) (1 + w)/2)` with `w = sigma*sign(s)*sin`, an
    /// exact rearrangement of `1/|W|^2` that neither overflows nor loses the
    /// peak value `exp(2|s|)`.
    pub(crate) fn derivative(&self, sin_ou: f64) -> f64 {
        if self.q == 0.0 {
            // |p*alpha| > ~354: below any representable density weight.
            return 0.0;
        }
        // Guard is unnecessary when sh == 0: then q == 1 and w drops out.
        let w = self.sigma * self.sh.signum() * sin_ou;
        self.q / (self.q * self.q + (1.0 - self.q * self.q) * 0.5 * (1.0 + w))
    }

    /// `f_p(u) - (u - p*L) = (2/Omega) Arg W_p(u)`, in `(-pi/Omega, pi/Omega)`.
    pub(crate) fn offset(&self, sin_ou: f64, cos_ou: f64) -> f64 {
        let re = self.ch + self.sigma * self.sh * sin_ou;
        let im = self.sigma * self.sh * cos_ou;
        self.inv_omega_2 * im.atan2(re)
    }

    pub(crate) fn value(&self, u: f64, sin_ou: f64, cos_ou: f64) -> f64 {
        u - self.static_offset + self.offset(sin_ou, cos_ou)
    }
}

/// Evaluate `f_p` and `f_p'` at light-cone coordinate `u`.
///
/// Errors with `ThresholdExceeded` at or above the parametric threshold,
/// where the ray picture of the emitted density stops converging.
pub fn dephasing(u: f64, p: i64, cfg: &CavityConfig) -> Result<DephasingEvaluation> {
    cfg.require_below_threshold()?;
    let ray = Ray::new(p, cfg);
    let (sin_ou, cos_ou) = (cfg.omega * u).sin_cos();
    let value = ray.value(u, sin_ou, cos_ou);
    let phase = cfg.omega * value;
    let principal = phase.sin().atan2(phase.cos());
    let branch_index = ((phase - principal) / (2.0 * std::f64::consts::PI)).round() as i64;
    Ok(DephasingEvaluation {
        u,
        p,
        value,
        derivative: ray.derivative(sin_ou),
        branch_index,
    })
}

/// `f_p'(u)` alone; strictly positive below threshold.
pub fn dephasing_derivative(u: f64, p: i64, cfg: &CavityConfig) -> Result<f64> {
    cfg.require_below_threshold()?;
    Ok(Ray::new(p, cfg).derivative((cfg.omega * u).sin()))
}
