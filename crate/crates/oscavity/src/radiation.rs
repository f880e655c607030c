//! Time-resolved energy density of the radiation leaving the cavity.
//!
//! The outgoing density at light-cone time `t` is assembled from the images
//! of the field under repeated bounces. Writing `f_p` for the dephasing map
//! of ray `p` (see [`crate::dephasing`]), `r` for the round-trip amplitude,
//! `R_i`/`T_i` for the mirror intensity coefficients, and `k(delta)` for the
//! two-point correlation kernel, the density splits into three diagonal
//! families and three interference families (natural units, hbar = c = 1):
//!
//! ```text
//! e_u(t) = (1/48pi) * { R2 * [Omega^2 (f_-1'^2 - 1) + theta^2 f_-1'^2]
//!        + T1*T2   * sum_{n>=0} r^{2n} [Omega^2 (f_2n'^2   - 1) + theta^2 f_2n'^2]
//!        + T2^2*R1 * sum_{n>=0} r^{2n} [Omega^2 (f_2n+1'^2 - 1) + theta^2 f_2n+1'^2] }
//!        + (T2/8pi)      * sum_{n>=0}  r^{n+1} f_-1' f_2n+1' k(f_-1 - f_2n+1)
//!        - (T1*T2/16pi)  * sum_{n!=m}  r^{n+m} f_2n'  f_2m'  k(f_2n  - f_2m)
//!        - (T2^2*R1/16pi)* sum_{n!=m}  r^{n+m} f_2n+1' f_2m+1' k(f_2n+1 - f_2m+1)
//! ```
//!
//! with the thermal kernel `k(delta) = theta^2 / sinh^2(theta*delta/2)`,
//! degenerating to `4/delta^2` in vacuum. For a static cavity the diagonal
//! families sum to the blackbody value `theta^2/48pi` and the interference
//! families cancel exactly, so the static density is the background for any
//! mirror pair.
//!
//! Truncation: below threshold the summands decay geometrically even at the
//! pulse peak, where `f_p'` grows like `exp(2|p| alpha)`. The worst-case
//! decay rates are `exp(-4 rho (1 - alpha_eff) n)` for the diagonal sums and
//! `exp(-2 rho (1 - alpha_eff) (n+m))` for the interference sums, which fixes
//! the series lengths for a requested tail tolerance. At runtime two further
//! prunes apply: interference diagonals `d = m - n` stop once the kernel
//! bound `r^d k(delta_min(d)) fmax^2 / (1 - r^2)` falls below tolerance
//! (separations grow like `2dL`, so high temperature kills all interference),
//! and each inner sum stops once its weight bound is spent.

use serde::Serialize;

use crate::config::CavityConfig;
use crate::dephasing::Ray;
use crate::error::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Ceiling on `f'` table entries. Rays this steep sit far beyond any
/// tolerated series length; the cap only prevents overflow of `f'^2`
/// products in configurations already outside the truncation budget.
const DERIVATIVE_CEILING: f64 = 1e150;

/// Controls where the bounce series are cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Relative weight below which series tails are dropped. The error in
    /// the assembled density is of this order relative to
    /// `(Omega^2 + theta^2)/48pi`.
    pub tail_tolerance: f64,
    /// Hard ceiling on any series index. If the tolerance demands more terms
    /// than this (loss too small, or alpha_eff too close to 1), the series is
    /// saturated here and the result degrades gracefully instead of looping
    /// without bound.
    pub max_index: usize,
    /// Optional tighter ceiling on the combined index `n + m` of the
    /// interference sums, for quick previews. `None` defers to `max_index`.
    pub pair_cap: Option<usize>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_tolerance: 1e-12,
            max_index: 10_000,
            pair_cap: None,
        }
    }
}

/// Finite-temperature correlation kernel `theta^2 / sinh^2(theta*delta/2)`.
///
/// Continuous limits are built in: `theta == 0` gives the vacuum kernel
/// `4/delta^2`; small arguments use the Laurent expansion
/// `4/delta^2 - theta^2/3 + theta^4 delta^2/60` to avoid cancellation; large
/// arguments short-circuit to zero once `sinh^2` would underflow.
pub fn thermal_kernel(delta: f64, theta: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("kernel separation must be finite, got {delta}"),
        });
    }
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("temperature parameter must be finite and non-negative, got {theta}"),
        });
    }
    if delta == 0.0 {
        return Err(Error::SingularKernel { separation: delta });
    }
    if theta == 0.0 {
        return Ok(4.0 / (delta * delta));
    }
    let x = 0.5 * theta * delta.abs();
    if x > 400.0 {
        // sinh^2 exceeds 1/f64::MIN_POSITIVE; the kernel is zero to f64.
        return Ok(0.0);
    }
    if x < 1e-4 {
        let d2 = delta * delta;
        return Ok(4.0 / d2 - theta * theta / 3.0 + theta.powi(4) * d2 / 60.0);
    }
    let s = x.sinh();
    Ok(theta * theta / (s * s))
}

/// Blackbody energy density of the thermal field, `theta^2/48pi`.
pub fn background_density(theta: f64) -> f64 {
    theta * theta / (48.0 * PI)
}

/// One sample of the outgoing energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    /// Light-cone time of the sample.
    pub t: f64,
    /// Outgoing energy density, natural units.
    pub e_u: f64,
    /// Static blackbody value `theta^2/48pi` at the same temperature.
    pub background: f64,
    /// `(e_u - background)/background`; in vacuum, where the background
    /// vanishes, the excess is referenced to `Omega^2/48pi` instead so the
    /// value stays finite.
    pub contrast: f64,
}

/// Precomputed per-configuration state for repeated density evaluations.
///
/// Building the evaluator fixes the series lengths from the truncation
/// policy and tabulates the per-ray constants; each [`Self::density_at`]
/// call is then a pure function of the sample time, with a deterministic
/// summation order, so sampling loops can run in parallel without changing
/// a single bit of the output.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    cfg: CavityConfig,
    policy: TruncationPolicy,
    ray_m1: Ray,
    rays_even: Vec<Ray>,
    rays_odd: Vec<Ray>,
    r_pow: Vec<f64>,
    /// Diagonal series run over `n <= n_single`.
    n_single: usize,
    /// Interference series run over `n + m <= s_pair` (series indices).
    s_pair: usize,
}

impl DensityEvaluator {
    pub fn new(cfg: &CavityConfig, policy: &TruncationPolicy) -> Result<Self> {
        cfg.require_below_threshold()?;
        if !(policy.tail_tolerance > 0.0 && policy.tail_tolerance < 1.0) {
            return Err(Error::InvalidParameter {
                name: "tail_tolerance",
                reason: format!("must lie in (0, 1), got {}", policy.tail_tolerance),
            });
        }
        if policy.max_index == 0 {
            return Err(Error::InvalidParameter {
                name: "max_index",
                reason: "must be at least 1".to_string(),
            });
        }

        let log_tol = -policy.tail_tolerance.ln();
        let one_minus_r2 = 1.0 - cfg.r * cfg.r;
        let headroom = -2.0 * one_minus_r2.ln(); // geometric-tail prefactors
        let gap = 1.0 - cfg.alpha_eff; // > 0, enforced above

        let n_single_raw = (log_tol + headroom) / (4.0 * cfg.rho * gap);
        let n_single = (n_single_raw.ceil() as usize).min(policy.max_index);

        let s_pair_raw = (log_tol + headroom) / (2.0 * cfg.rho * gap);
        let mut s_pair = (s_pair_raw.ceil() as usize).min(policy.max_index);
        if let Some(cap) = policy.pair_cap {
            s_pair = s_pair.min(cap);
        }

        // Ray tables: diagonal sums touch rays up to 2*n_single (+1), the
        // interference sums up to 2*s_pair (+1).
        let max_series = n_single.max(s_pair);
        let rays_even = (0..=max_series)
            .map(|n| Ray::new(2 * n as i64, cfg))
            .collect();
        let rays_odd = (0..=max_series)
            .map(|n| Ray::new(2 * n as i64 + 1, cfg))
            .collect();

        let mut r_pow = Vec::with_capacity(2 * max_series + 3);
        let mut w = 1.0;
        for _ in 0..(2 * max_series + 3) {
            r_pow.push(w);
            w *= cfg.r;
        }

        Ok(DensityEvaluator {
            cfg: *cfg,
            policy: *policy,
            ray_m1: Ray::new(-1, cfg),
            rays_even,
            rays_odd,
            r_pow,
            n_single,
            s_pair,
        })
    }

    pub fn config(&self) -> &CavityConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Series lengths actually in force: `(diagonal cutoff, combined
    /// interference cutoff)`. When either equals the policy's `max_index`,
    /// the tolerance demanded more terms than allowed and results near the
    /// pulse peak carry extra truncation error.
    pub fn ray_budget(&self) -> (usize, usize) {
        (self.n_single, self.s_pair)
    }

    /// Energy density of the outgoing radiation at light-cone time `t`.
    pub fn density_at(&self, t: f64) -> Result<DensityPoint> {
        let cfg = &self.cfg;
        let (sin_ou, cos_ou) = (cfg.omega * t).sin_cos();
        let theta = cfg.theta;
        let omega2 = cfg.omega * cfg.omega;
        let base_scale = (omega2 + theta * theta) / (48.0 * PI);
        // Runtime prunes stop one order below the tail tolerance so that the
        // sum of all dropped pieces stays within the policy's budget.
        let prune = 0.1 * self.policy.tail_tolerance * base_scale;

        // Per-ray values at this time. Derivatives are capped so squared
        // products cannot overflow (see DERIVATIVE_CEILING).
        let fp_m1 = self.ray_m1.derivative(sin_ou).min(DERIVATIVE_CEILING);
        let off_m1 = self.ray_m1.offset(sin_ou, cos_ou);

        let tabulate = |rays: &[Ray]| {
            let mut fp = Vec::with_capacity(rays.len());
            let mut off = Vec::with_capacity(rays.len());
            let mut fmax = 0.0f64;
            for ray in rays {
                let d = ray.derivative(sin_ou).min(DERIVATIVE_CEILING);
                fmax = fmax.max(d);
                fp.push(d);
                off.push(ray.offset(sin_ou, cos_ou));
            }
            (fp, off, fmax)
        };

        let need_even = cfg.t1 > 0.0 && cfg.t2 > 0.0;
        let need_odd = cfg.t2 > 0.0;
        let empty = (Vec::new(), Vec::new(), 0.0);
        let (fp_even, off_even, fmax_even) = if need_even {
            tabulate(&self.rays_even)
        } else {
            empty.clone()
        };
        let (fp_odd, off_odd, fmax_odd) = if need_odd {
            tabulate(&self.rays_odd)
        } else {
            empty
        };

        let diagonal = |fp: &[f64]| -> f64 {
            let mut acc = 0.0;
            for (n, f) in fp.iter().take(self.n_single + 1).enumerate() {
                let f2 = f * f;
                acc += self.r_pow[2 * n] * (omega2 * (f2 - 1.0) + theta * theta * f2);
            }
            acc
        };

        // Diagonal families.
        let fm12 = fp_m1 * fp_m1;
        let term_m1 = cfg.r2 * (omega2 * (fm12 - 1.0) + theta * theta * fm12) / (48.0 * PI);
        let coef_even_diag = cfg.t1 * cfg.t2 / (48.0 * PI);
        let coef_odd_diag = cfg.t2 * cfg.t2 * cfg.r1 / (48.0 * PI);
        let term_even_diag = if need_even {
            coef_even_diag * diagonal(&fp_even)
        } else {
            0.0
        };
        let term_odd_diag = if need_odd {
            coef_odd_diag * diagonal(&fp_odd)
        } else {
            0.0
        };

        // Interference of the direct reflection with transmitted rays:
        // +(T2/8pi) sum_n r^{n+1} f_-1' f_2n+1' k(f_-1 - f_2n+1).
        let mut term_cross = 0.0;
        if need_odd {
            let coef = cfg.t2 / (8.0 * PI);
            let mut acc = 0.0;
            for n in 0..=self.s_pair.min(fp_odd.len() - 1) {
                // Separation grows like (2n+2)L; offsets stay within L/K.
                let delta = (2 * n + 2) as f64 * cfg.length + off_m1 - off_odd[n];
                let delta_floor = ((2 * n + 2) as f64 - 2.0 / cfg.k as f64) * cfg.length;
                if delta_floor > 0.0 {
                    let bound =
                        self.r_pow[n + 1] * fp_m1 * fmax_odd * thermal_kernel(delta_floor, theta)?;
                    if bound * coef < prune {
                        break;
                    }
                }
                acc += self.r_pow[n + 1] * fp_m1 * fp_odd[n] * thermal_kernel(delta, theta)?;
            }
            term_cross = coef * acc;
        }

        // Mutual interference within a parity family:
        // -(coef) sum_{n != m} r^{n+m} f' f' k(delta), m = n + d, doubled.
        let pair_sum = |fp: &[f64], off: &[f64], fmax: f64, coef: f64| -> Result<f64> {
            if coef == 0.0 || fp.is_empty() {
                return Ok(0.0);
            }
            let mut acc = 0.0;
            let fmax2 = fmax * fmax;
            let geo = 1.0 - cfg.r * cfg.r;
            for d in 1..=self.s_pair {
                // Kernel bound over the whole diagonal: separations exceed
                // 2L(d - 1/K), and the kernel decreases with separation, so
                // once this bound dies every later diagonal is smaller too.
                let delta_floor = 2.0 * cfg.length * (d as f64 - 1.0 / cfg.k as f64);
                if delta_floor > 0.0 {
                    let bound =
                        2.0 * self.r_pow[d] * thermal_kernel(delta_floor, theta)? * fmax2 / geo;
                    if bound * coef < prune {
                        break;
                    }
                }
                let shift = 2.0 * d as f64 * cfg.length;
                let n_cap = (self.s_pair - d) / 2;
                let mut diag = 0.0;
                for n in 0..=n_cap.min(fp.len() - 1 - d) {
                    let m = n + d;
                    let delta = shift + off[n] - off[m];
                    diag += self.r_pow[2 * n + d] * fp[n] * fp[m] * thermal_kernel(delta, theta)?;
                }
                acc += 2.0 * diag;
            }
            Ok(coef * acc)
        };

        let term_even_pair = if need_even {
            pair_sum(
                &fp_even,
                &off_even,
                fmax_even,
                cfg.t1 * cfg.t2 / (16.0 * PI),
            )?
        } else {
            0.0
        };
        let term_odd_pair = if need_odd {
            pair_sum(
                &fp_odd,
                &off_odd,
                fmax_odd,
                cfg.t2 * cfg.t2 * cfg.r1 / (16.0 * PI),
            )?
        } else {
            0.0
        };

        let e_u =
            term_m1 + term_even_diag + term_odd_diag + term_cross - term_even_pair - term_odd_pair;
        let background = background_density(theta);
        let contrast = contrast(e_u, background, cfg.omega);
        Ok(DensityPoint {
            t,
            e_u,
            background,
            contrast,
        })
    }
}

/// Relative excess of the density over the static value: for a thermal field
/// `(e_u - background)/background`; in vacuum, where the background vanishes,
/// the density itself measured against the natural scale `Omega^2/48pi`.
pub fn contrast(e_u: f64, background: f64, omega: f64) -> f64 {
    if background > 0.0 {
        (e_u - background) / background
    } else {
        e_u / (omega * omega / (48.0 * PI))
    }
}

/// One-off density evaluation with a given policy. Builds the ray tables on
/// every call; construct a [`DensityEvaluator`] once when sampling many
/// times.
pub fn energy_density(cfg: &CavityConfig, t: f64, policy: &TruncationPolicy) -> Result<f64> {
    Ok(DensityEvaluator::new(cfg, policy)?.density_at(t)?.e_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, RawConfig};
    use approx::assert_relative_eq;

    fn base(k: u32, alpha_eff: f64, theta: f64) -> CavityConfig {
        // One-sided cavity: front mirror perfect, r = 0.9 via the back one.
        validate_config(&RawConfig {
            k: Some(k),
            omega: Some(1.0),
            alpha_eff: Some(alpha_eff),
            r1: Some(1.0),
            r2: Some(0.81),
            theta: Some(theta),
            ..Default::default()
        })
        .unwrap()
    }

    fn two_sided(theta: f64, alpha_eff: f64) -> CavityConfig {
        validate_config(&RawConfig {
            k: Some(2),
            omega: Some(1.0),
            alpha_eff: Some(alpha_eff),
            r1: Some(0.9),
            r2: Some(0.9),
            theta: Some(theta),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn kernel_matches_frozen_thermal_value() {
        // theta = 1, delta = 2: 1/sinh^2(1)
        let k = thermal_kernel(2.0, 1.0).unwrap();
        assert_relative_eq!(k, 0.7240616609663106, max_relative = 1e-15);
    }

    #[test]
    fn kernel_vacuum_form_and_symmetry() {
        assert_eq!(thermal_kernel(0.5, 0.0).unwrap(), 16.0);
        let a = thermal_kernel(-1.3, 0.7).unwrap();
        let b = thermal_kernel(1.3, 0.7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kernel_seam_is_smooth() {
        // Compare the Laurent expansion against the direct form just across
        // the switch at theta*|delta|/2 = 1e-4.
        let theta = 1.0;
        let below = thermal_kernel(2.0 * 0.99e-4, theta).unwrap();
        let above = thermal_kernel(2.0 * 1.01e-4, theta).unwrap();
        let mid = 4.0 / (2.0e-4f64).powi(2) - 1.0 / 3.0;
        assert_relative_eq!(
            below,
            4.0 / (1.98e-4f64).powi(2) - 1.0 / 3.0,
            max_relative = 1e-12
        );
        assert!((above - mid).abs() / mid < 3e-2);
        // direct evaluation right at the seam agrees to full precision
        let x: f64 = 1e-4;
        let delta = 2.0 * x / theta;
        let series =
            4.0 / (delta * delta) - theta * theta / 3.0 + theta.powi(4) * delta * delta / 60.0;
        let direct = theta * theta / (x.sinh() * x.sinh());
        assert_relative_eq!(series, direct, max_relative = 1e-12);
    }

    #[test]
    fn kernel_rejects_zero_separation_and_underflows_to_zero() {
        assert!(matches!(
            thermal_kernel(0.0, 1.0),
            Err(Error::SingularKernel { .. })
        ));
        assert_eq!(thermal_kernel(1000.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn background_is_quadratic_in_temperature() {
        assert_eq!(background_density(0.0), 0.0);
        assert_relative_eq!(
            background_density(2.0) / background_density(1.0),
            4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            background_density(1.0),
            1.0 / (48.0 * PI),
            max_relative = 1e-15
        );
    }

    #[test]
    fn static_cavity_emits_exactly_the_background() {
        for theta in [0.2, 1.0, 3924.0] {
            for cfg in [base(3, 0.0, theta), two_sided(theta, 0.0)] {
                let ev = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
                for i in 0..7 {
                    let t = i as f64 / 7.0 * cfg.period();
                    let pt = ev.density_at(t).unwrap();
                    assert_relative_eq!(pt.e_u, pt.background, max_relative = 3e-11);
                    assert!(pt.contrast.abs() < 3e-11);
                }
            }
        }
    }

    #[test]
    fn static_vacuum_is_empty() {
        let cfg = two_sided(0.0, 0.0);
        let ev = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
        let pt = ev.density_at(0.23 * cfg.period()).unwrap();
        // residual interference cancellation noise sits far below the
        // natural scale 1/48pi
        assert!(pt.e_u.abs() < 1e-13);
    }

    #[test]
    fn density_is_periodic() {
        let cfg = base(3, 0.9, 1.0);
        let ev = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
        for i in 0..5 {
            let t = (0.13 + 0.19 * i as f64) * cfg.period();
            let a = ev.density_at(t).unwrap().e_u;
            let b = ev.density_at(t + 2.0 * cfg.period()).unwrap().e_u;
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn vacuum_limit_is_continuous_in_temperature() {
        let cfg0 = base(3, 0.9, 0.0);
        let cfg1 = base(3, 0.9, 1e-8);
        let ev0 = DensityEvaluator::new(&cfg0, &TruncationPolicy::default()).unwrap();
        let ev1 = DensityEvaluator::new(&cfg1, &TruncationPolicy::default()).unwrap();
        let scale = 1.0 / (48.0 * PI);
        for i in 0..9 {
            let t = i as f64 / 9.0 * cfg0.period();
            let a = ev0.density_at(t).unwrap().e_u;
            let b = ev1.density_at(t).unwrap().e_u;
            assert!(
                (a - b).abs() / scale < 1e-5,
                "t = {t}: vacuum {a} vs theta->0 {b}"
            );
        }
    }

    #[test]
    fn truncation_tolerance_converges() {
        let cfg = base(3, 0.9, 1.0);
        let loose = DensityEvaluator::new(
            &cfg,
            &TruncationPolicy {
                tail_tolerance: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        let tight = DensityEvaluator::new(
            &cfg,
            &TruncationPolicy {
                tail_tolerance: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let scale = (cfg.omega * cfg.omega + cfg.theta * cfg.theta) / (48.0 * PI);
        for i in 0..6 {
            let t = i as f64 / 6.0 * cfg.period();
            let a = loose.density_at(t).unwrap().e_u;
            let b = tight.density_at(t).unwrap().e_u;
            assert!(
                (a - b).abs() < 1e-4 * scale.max(a.abs()),
                "t = {t}: loose {a} vs tight {b}"
            );
        }
    }

    #[test]
    fn closed_back_mirror_leaves_only_the_direct_reflection() {
        // T2 = 0: every transmitted family carries a T2 factor, so only the
        // p = -1 reflection survives.
        let cfg = validate_config(&RawConfig {
            k: Some(2),
            omega: Some(1.0),
            alpha_eff: Some(0.8),
            r1: Some(0.81),
            r2: Some(1.0),
            theta: Some(0.5),
            ..Default::default()
        })
        .unwrap();
        let ev = DensityEvaluator::new(&cfg, &TruncationPolicy::default()).unwrap();
        let t = 0.31 * cfg.period();
        let pt = ev.density_at(t).unwrap();
        let fp = crate::dephasing::dephasing(t, -1, &cfg).unwrap().derivative;
        let expected = (cfg.omega * cfg.omega * (fp * fp - 1.0) + cfg.theta * cfg.theta * fp * fp)
            / (48.0 * PI);
        assert_relative_eq!(pt.e_u, expected, max_relative = 1e-12);
    }

    #[test]
    fn high_temperature_contrast_grows_with_drive() {
        // At theta >> Omega the interference terms die (kernel underflow)
        // and the pulse contrast is set by the diagonal f'^2 average.
        let theta = 3924.0;
        let weak = base(3, 0.5, theta);
        let strong = base(3, 0.9, theta);
        let pol = TruncationPolicy::default();
        let ev_w = DensityEvaluator::new(&weak, &pol).unwrap();
        let ev_s = DensityEvaluator::new(&strong, &pol).unwrap();
        let peak = |ev: &DensityEvaluator, period: f64| -> f64 {
            (0..192)
                .map(|i| ev.density_at(i as f64 / 192.0 * period).unwrap().contrast)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let pw = peak(&ev_w, weak.period());
        let ps = peak(&ev_s, strong.period());
        assert!(
            ps > pw,
            "strong-drive peak {ps} not above weak-drive peak {pw}"
        );
        assert!(pw > 0.0);
    }

    #[test]
    fn one_off_helper_matches_evaluator() {
        let cfg = base(2, 0.7, 0.4);
        let pol = TruncationPolicy::default();
        let ev = DensityEvaluator::new(&cfg, &pol).unwrap();
        let t = 0.4 * cfg.period();
        assert_eq!(
            energy_density(&cfg, t, &pol).unwrap(),
            ev.density_at(t).unwrap().e_u
        );
    }

    #[test]
    fn evaluator_rejects_threshold_configs() {
        let raw = RawConfig {
            k: Some(3),
            omega: Some(1.0),
            alpha_eff: Some(1.0),
            rho: Some(0.05),
            ..Default::default()
        };
        let cfg = crate::config::validate_config_at_threshold(&raw).unwrap();
        assert!(DensityEvaluator::new(&cfg, &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn budget_reports_saturation() {
        let cfg = base(3, 0.9, 0.0);
        let ev = DensityEvaluator::new(
            &cfg,
            &TruncationPolicy {
                tail_tolerance: 1e-12,
                max_index: 50,
                pair_cap: Some(30),
            },
        )
        .unwrap();
        assert_eq!(ev.ray_budget(), (50, 30));
    }
}
