//! Sampling, pulse detection, and the quadrature cross-check of the closed
//! forms.
//!
//! [`sample_period`] evaluates the outgoing energy density on a uniform grid
//! over one mechanical period (grid points run concurrently under the
//! `parallel` feature; results are bitwise independent of thread count).
//! [`detect_pulses`] is a single deterministic pass that locates emission
//! pulses, refines each peak with a local quadratic fit, and integrates each
//! pulse's energy over its half-prominence support. [`quadrature_energy`]
//! integrates the density over a period with an adaptive Simpson rule whose
//! refinement concentrates where the integrand varies (i.e. at the pulses),
//! giving an estimate of the emitted energy that is completely independent
//! of the closed-form budgets.

use serde::Serialize;

use crate::config::CavityConfig;
use crate::error::{Error, Result};
use crate::parallel::maybe_par_map;
use crate::radiation::{background_density, DensityEvaluator, TruncationPolicy};

/// Evaluation budget for [`quadrature_energy`].
pub const DEFAULT_QUAD_EVAL_BUDGET: usize = 200_000;

/// Uniformly sampled energy density over a whole number of periods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySeries {
    /// Sample times, uniformly spaced, excluding the right endpoint.
    pub times: Vec<f64>,
    /// `e_u` at each time, natural units.
    pub values: Vec<f64>,
    /// Static blackbody density at the series temperature.
    pub background: f64,
    /// Truncation under which the values were computed.
    pub truncation: TruncationPolicy,
    /// Fingerprint of the generating configuration.
    pub cfg_fingerprint: String,
    /// Mechanical period `2*pi/Omega` of the generating configuration.
    pub period: f64,
    /// Drive frequency, kept for photon bookkeeping.
    pub omega: f64,
}

/// One detected emission pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    /// Refined peak time (local quadratic fit through 3 samples).
    pub t_peak: f64,
    /// Peak excess over the background, natural units.
    pub height: f64,
    /// Full width of the half-prominence support.
    pub width: f64,
    /// Trapezoidal integral of `e_u - background` over the half-prominence
    /// support, reported in `hbar*Omega` units.
    pub energy: f64,
    /// Photon estimate `2 * energy` (energy already in `hbar*Omega`).
    pub photons: f64,
}

/// Pulses of one series plus their spacing statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseTrain {
    pub pulses: Vec<Pulse>,
    /// Mean gap between consecutive peaks (wrapping around when the series
    /// spans whole periods).
    pub spacing_mean: f64,
    /// Population standard deviation of the gaps.
    pub spacing_stddev: f64,
    /// Detected pulse count per mechanical period.
    pub pulses_per_period: usize,
    /// Period of the underlying series.
    pub period: f64,
}

/// Period-integrated emission measured by numerical quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEnergy {
    /// `integral of e_u dt` over one period, `hbar*Omega` units.
    pub total: f64,
    /// Same integral with the static background removed:
    /// `total - background * period`. This is the motion-induced share.
    pub motion: f64,
    /// Accumulated Richardson error estimate of `motion`, same units.
    pub error_estimate: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

/// Sample one mechanical period on `n_samples` uniform points.
pub fn sample_period(
    cfg: &CavityConfig,
    n_samples: usize,
    trunc: &TruncationPolicy,
) -> Result<DensitySeries> {
    let ev = DensityEvaluator::new(cfg, trunc)?;
    sample_period_with(&ev, n_samples)
}

/// [`sample_period`] against a prebuilt evaluator.
pub fn sample_period_with(ev: &DensityEvaluator, n_samples: usize) -> Result<DensitySeries> {
    let period = ev.config().period();
    sample_range_with(ev, 0.0, period, n_samples)
}

/// Uniform sampling of `[start, end)`; `end - start` need not be a whole
/// number of periods, but pulse spacing statistics are only meaningful when
/// it is.
pub fn sample_range_with(
    ev: &DensityEvaluator,
    start: f64,
    end: f64,
    n_samples: usize,
) -> Result<DensitySeries> {
    if n_samples < 64 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("at least 64 samples required, got {n_samples}"),
        });
    }
    if !(end > start) {
        return Err(Error::InvalidParameter {
            name: "end",
            reason: format!("sampling window [{start}, {end}) is empty"),
        });
    }
    let h = (end - start) / n_samples as f64;
    let times: Vec<f64> = (0..n_samples).map(|i| start + i as f64 * h).collect();
    let points = maybe_par_map(times.clone(), |t| ev.density_at(t));
    let mut values = Vec::with_capacity(n_samples);
    for p in points {
        values.push(p?.e_u);
    }
    let cfg = ev.config();
    Ok(DensitySeries {
        times,
        values,
        background: background_density(cfg.theta),
        truncation: *ev.policy(),
        cfg_fingerprint: cfg.fingerprint(),
        period: cfg.period(),
        omega: cfg.omega,
    })
}

/// Locate emission pulses in a sampled series.
///
/// A sample qualifies as a peak when it is a local maximum whose excess over
/// the background reaches `prominence_factor` times the global maximum
/// excess. Peak positions and heights are refined by a quadratic fit through
/// the three surrounding samples; the width is measured where the excess
/// falls to half the refined height, and the pulse energy is the trapezoidal
/// integral of the excess over exactly that support. When the series spans a
/// whole number of periods the boundary wraps periodically.
pub fn detect_pulses(series: &DensitySeries, prominence_factor: f64) -> Result<PulseTrain> {
    if !(prominence_factor > 0.0) || !prominence_factor.is_finite() {
        return Err(Error::InvalidParameter {
            name: "prominence_factor",
            reason: format!("must be finite and positive, got {prominence_factor}"),
        });
    }
    let n = series.values.len();
    if n < 8 || series.times.len() != n {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: format!("need at least 8 aligned samples, got {n}"),
        });
    }
    let h = series.times[1] - series.times[0];
    let span = h * n as f64;
    let periods_spanned = span / series.period;
    let periodic =
        (periods_spanned - periods_spanned.round()).abs() < 1e-9 && periods_spanned.round() >= 1.0;

    let s: Vec<f64> = series
        .values
        .iter()
        .map(|v| v - series.background)
        .collect();
    let smax = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(smax > 0.0) {
        return Err(Error::NoPulses);
    }
    let threshold = prominence_factor * smax;

    let at = |i: isize| -> f64 {
        let n = n as isize;
        s[(i.rem_euclid(n)) as usize]
    };

    let mut pulses = Vec::new();
    for i in 0..n {
        let (prev, next) = if periodic {
            (at(i as isize - 1), at(i as isize + 1))
        } else {
            if i == 0 || i == n - 1 {
                continue;
            }
            (s[i - 1], s[i + 1])
        };
        if !(s[i] >= threshold && prev < s[i] && next <= s[i]) {
            continue;
        }

        // Quadratic refinement through (prev, here, next).
        let denom = prev - 2.0 * s[i] + next;
        let dt = if denom < 0.0 {
            0.5 * (prev - next) / denom
        } else {
            0.0
        };
        let height = s[i] - 0.25 * (prev - next) * dt;
        let t_peak = series.times[i] + dt * h;

        // Half-prominence crossings, walking out from the peak.
        let level = 0.5 * height;
        let walk = |dir: isize| -> Option<(isize, f64)> {
            // returns (whole steps to the cell boundary just past the
            // crossing, fractional position of the crossing inside that
            // cell measured from the peak side)
            let limit = if periodic { n as isize } else { n as isize };
            let mut k = 1isize;
            while k <= limit {
                let idx = i as isize + dir * k;
                if !periodic && (idx < 0 || idx >= n as isize) {
                    return None;
                }
                let v = at(idx);
                if v < level {
                    let inner = at(idx - dir);
                    let frac = if inner > v {
                        (inner - level) / (inner - v)
                    } else {
                        1.0
                    };
                    return Some((k, frac));
                }
                k += 1;
            }
            None
        };

        let (width, energy_raw) = match (walk(-1), walk(1)) {
            (Some((kl, fl)), Some((kr, fr))) => {
                let width = ((kl - 1) as f64 + fl + (kr - 1) as f64 + fr) * h;
                // Trapezoidal integral of the excess over the support:
                // partial cells at both crossings plus whole cells between.
                let mut acc = 0.0;
                // left partial cell: from the crossing to sample i-kl+1
                let sl = at(i as isize - kl + 1);
                acc += 0.5 * (level + sl) * (fl * h);
                // right partial cell
                let sr = at(i as isize + kr - 1);
                acc += 0.5 * (level + sr) * (fr * h);
                // whole cells j -> j+1 for j in [i-kl+1, i+kr-2]
                let mut j = -(kl - 1);
                while j < kr - 1 {
                    acc += 0.5 * (at(i as isize + j) + at(i as isize + j + 1)) * h;
                    j += 1;
                }
                (width, acc)
            }
            // The excess never drops below half height inside the window:
            // degenerate, attribute the whole window.
            _ => (span, s.iter().sum::<f64>() * h),
        };

        let energy = energy_raw / series.omega;
        pulses.push(Pulse {
            t_peak,
            height,
            width,
            energy,
            photons: 2.0 * energy,
        });
    }

    if pulses.is_empty() {
        return Err(Error::NoPulses);
    }

    // Normalize refined times into the sampled window and order them.
    let t0 = series.times[0];
    for p in &mut pulses {
        p.t_peak = (p.t_peak - t0).rem_euclid(span) + t0;
    }
    pulses.sort_by(|a, b| a.t_peak.partial_cmp(&b.t_peak).unwrap());

    let mut spacings: Vec<f64> = pulses
        .windows(2)
        .map(|w| w[1].t_peak - w[0].t_peak)
        .collect();
    if periodic {
        let wrap = pulses[0].t_peak + span - pulses[pulses.len() - 1].t_peak;
        spacings.push(wrap);
    }
    let (spacing_mean, spacing_stddev) = if spacings.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        let var = spacings
            .iter()
            .map(|d| (d - mean) * (d - mean))
            .sum::<f64>()
            / spacings.len() as f64;
        (mean, var.sqrt())
    };

    let pulses_per_period = if periodic {
        (pulses.len() as f64 / periods_spanned.round()).round() as usize
    } else {
        (pulses.len() as f64 / periods_spanned).round().max(1.0) as usize
    };

    Ok(PulseTrain {
        pulses,
        spacing_mean,
        spacing_stddev,
        pulses_per_period,
        period: series.period,
    })
}

/// Integrate the energy density over one mechanical period with adaptive
/// Simpson quadrature to relative tolerance `quad_tol`, independently of any
/// closed-form result. See [`QuadratureEnergy`] for the reported pieces.
pub fn quadrature_energy(
    cfg: &CavityConfig,
    trunc: &TruncationPolicy,
    quad_tol: f64,
) -> Result<QuadratureEnergy> {
    let ev = DensityEvaluator::new(cfg, trunc)?;
    quadrature_energy_window(&ev, 0.0, quad_tol, DEFAULT_QUAD_EVAL_BUDGET)
}

/// [`quadrature_energy`] over the shifted window `[start, start + period)`
/// with an explicit evaluation budget. The integrand is periodic, so the
/// result must be window-invariant up to the tolerance — a useful self-test.
pub fn quadrature_energy_window(
    ev: &DensityEvaluator,
    start: f64,
    quad_tol: f64,
    max_evals: usize,
) -> Result<QuadratureEnergy> {
    if !(quad_tol > 0.0) || !quad_tol.is_finite() {
        return Err(Error::InvalidParameter {
            name: "quad_tol",
            reason: format!("must be finite and positive, got {quad_tol}"),
        });
    }
    let cfg = ev.config();
    let period = cfg.period();
    let bg = background_density(cfg.theta);
    let g = |t: f64| -> Result<f64> { Ok(ev.density_at(t)?.e_u - bg) };

    // Seed pass: 64 uniform Simpson cells.
    const SEEDS: usize = 64;
    let mut evals = 0usize;
    let mut grid = Vec::with_capacity(2 * SEEDS + 1);
    for i in 0..=(2 * SEEDS) {
        let t = start + period * i as f64 / (2 * SEEDS) as f64;
        grid.push((t, g(t)?));
        evals += 1;
    }

    struct Seg {
        a: f64,
        fa: f64,
        m: f64,
        fm: f64,
        b: f64,
        fb: f64,
        s: f64,
        tol: f64,
    }
    let simpson =
        |a: f64, fa: f64, fm: f64, b: f64, fb: f64| -> f64 { (b - a) / 6.0 * (fa + 4.0 * fm + fb) };

    // Tolerance scale: the integral of |g| estimated from the seed pass,
    // floored at a sliver of the natural density scale so that a flat
    // (static) integrand converges immediately instead of chasing noise.
    let mut scale = 0.0;
    for i in 0..SEEDS {
        let (a, fa) = grid[2 * i];
        let (_, fm) = grid[2 * i + 1];
        let (b, fb) = grid[2 * i + 2];
        scale += simpson(a, fa, fm, b, fb).abs();
    }
    let floor = (cfg.omega * cfg.omega + cfg.theta * cfg.theta) / (48.0 * PI_F) * period * 1e-9;
    let abs_tol = quad_tol * scale.max(floor);

    let mut stack: Vec<Seg> = Vec::new();
    for i in (0..SEEDS).rev() {
        let (a, fa) = grid[2 * i];
        let (m, fm) = grid[2 * i + 1];
        let (b, fb) = grid[2 * i + 2];
        stack.push(Seg {
            a,
            fa,
            m,
            fm,
            b,
            fb,
            s: simpson(a, fa, fm, b, fb),
            tol: abs_tol / SEEDS as f64,
        });
    }

    let mut acc = 0.0;
    let mut err_acc = 0.0;
    while let Some(seg) = stack.pop() {
        if evals + 2 > max_evals {
            let pending: f64 = stack.iter().map(|s| s.s).sum::<f64>() + seg.s + acc;
            return Err(Error::QuadratureNonConvergence {
                tol: quad_tol,
                evals,
                estimate: pending / cfg.omega,
            });
        }
        let lm = 0.5 * (seg.a + seg.m);
        let rm = 0.5 * (seg.m + seg.b);
        let flm = g(lm)?;
        let frm = g(rm)?;
        evals += 2;
        let sl = simpson(seg.a, seg.fa, flm, seg.m, seg.fm);
        let sr = simpson(seg.m, seg.fm, frm, seg.b, seg.fb);
        let diff = sl + sr - seg.s;
        if diff.abs() <= 15.0 * seg.tol || (seg.b - seg.a) < period * 1e-12 {
            acc += sl + sr + diff / 15.0;
            err_acc += diff.abs() / 15.0;
        } else {
            stack.push(Seg {
                a: seg.m,
                fa: seg.fm,
                m: rm,
                fm: frm,
                b: seg.b,
                fb: seg.fb,
                s: sr,
                tol: 0.5 * seg.tol,
            });
            stack.push(Seg {
                a: seg.a,
                fa: seg.fa,
                m: lm,
                fm: flm,
                b: seg.m,
                fb: seg.fm,
                s: sl,
                tol: 0.5 * seg.tol,
            });
        }
    }

    let motion = acc / cfg.omega;
    Ok(QuadratureEnergy {
        total: motion + bg * period / cfg.omega,
        motion,
        error_estimate: err_acc / cfg.omega,
        evaluations: evals,
    })
}

const PI_F: f64 = std::f64::consts::PI;

/// Fixed-grid cross-check of [`quadrature_energy`]: the composite trapezoid
/// rule on a periodic analytic integrand converges faster than any power of
/// the step, so a generous `n` validates the adaptive result. The error
/// estimate compares against the half-resolution grid.
pub fn quadrature_energy_uniform(ev: &DensityEvaluator, n: usize) -> Result<QuadratureEnergy> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need an even sample count of at least 8, got {n}"),
        });
    }
    let cfg = ev.config();
    let period = cfg.period();
    let bg = background_density(cfg.theta);
    let h = period / n as f64;
    let values = maybe_par_map((0..n).collect::<Vec<usize>>(), |i| {
        ev.density_at(i as f64 * h).map(|p| p.e_u - bg)
    });
    let mut full = 0.0;
    let mut half = 0.0;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        full += v;
        if i % 2 == 0 {
            half += v;
        }
    }
    let motion = full * h / cfg.omega;
    let motion_half = half * 2.0 * h / cfg.omega;
    Ok(QuadratureEnergy {
        total: motion + bg * period / cfg.omega,
        motion,
        error_estimate: (motion - motion_half).abs(),
        evaluations: n,
    })
}
