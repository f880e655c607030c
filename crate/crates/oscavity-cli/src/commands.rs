//! The four subcommands: density sampling, budget reporting, self-
//! verification, and parameter sweeps.

use num_complex::Complex;
use oscavity::analysis::{detect_pulses, quadrature_energy, sample_period};
use oscavity::dephasing::{dephasing, mobius_coefficients};
use oscavity::energetics::{energy_budget, photons_per_pulse};
use oscavity::radiation::{background_density, contrast};
use oscavity::units::{theta_to_temperature, Units, HBAR};
use oscavity::{validate_config, validate_config_at_threshold, Error, RawConfig, TruncationPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::errors::CliError;
use crate::input::InputSource;
use crate::output::{emit, num, write_manifest};
use crate::Cli;

fn policy(cli: &Cli) -> TruncationPolicy {
    TruncationPolicy {
        tail_tolerance: cli.tol,
        ..Default::default()
    }
}

pub fn density(cli: &Cli, source: &InputSource) -> Result<(), CliError> {
    let cfg = validate_config(&source.raw)?;
    let pol = policy(cli);
    let series = sample_period(&cfg, cli.samples, &pol)?;

    let om2 = cfg.omega * cfg.omega;
    let mut body = String::from("t_over_period,e_u,background,contrast\n");
    for (t, v) in series.times.iter().zip(&series.values) {
        body.push_str(&format!(
            "{},{},{},{}\n",
            num(t / series.period),
            num(v / om2),
            num(series.background / om2),
            num(contrast(*v, series.background, cfg.omega)),
        ));
    }

    let sha = emit(cli.out.as_deref(), &body)?;
    if let (Some(out), Some(sha)) = (&cli.out, sha) {
        write_manifest(
            out,
            "density",
            source,
            serde_json::to_value(cfg).expect("config serializes"),
            &pol,
            json!({ "samples": cli.samples }),
            &sha,
        )?;
    }
    Ok(())
}

pub fn energy(cli: &Cli, source: &InputSource) -> Result<(), CliError> {
    let cfg = validate_config_at_threshold(&source.raw)?;
    let budget = energy_budget(&cfg)?;
    let estimate = photons_per_pulse(&cfg)?;

    let mut report = json!({
        "config": serde_json::to_value(&cfg).expect("config serializes"),
        "budget": serde_json::to_value(&budget).expect("budget serializes"),
        "photon_estimate": serde_json::to_value(&estimate).expect("estimate serializes"),
        "energy_unit": "hbar*Omega",
        "theta_over_omega": cfg.theta / cfg.omega,
        "theta_squared_convention": "frequency-ratio",
    });
    if source.units == Units::Si {
        let quantum = HBAR * cfg.omega;
        report["si"] = json!({
            "omega_rad_per_s": cfg.omega,
            "frequency_hz": cfg.omega / (2.0 * std::f64::consts::PI),
            "temperature_kelvin": theta_to_temperature(cfg.theta),
            "period_s": cfg.period(),
            "photon_energy_joules": quantum,
            "e_total_joules": budget.e_total * quantum,
            "e_background_joules": budget.e_background * quantum,
            "e_motion_joules": budget.e_motion * quantum,
            "e_intracavity_joules": budget.e_intracavity * quantum,
            "e_intracavity_motion_joules": budget.e_intracavity_motion * quantum,
        });
    }

    let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let sha = emit(cli.out.as_deref(), &body)?;
    if let (Some(out), Some(sha)) = (&cli.out, sha) {
        write_manifest(
            out,
            "energy",
            source,
            serde_json::to_value(cfg).expect("config serializes"),
            &policy(cli),
            json!({}),
            &sha,
        )?;
    }
    Ok(())
}

struct Check {
    name: &'static str,
    error: f64,
    tolerance: f64,
    /// Informational checks report their error but never fail the run.
    asserted: bool,
}

impl Check {
    fn asserted(name: &'static str, error: f64, tolerance: f64) -> Self {
        Check {
            name,
            error,
            tolerance,
            asserted: true,
        }
    }
}

/// Loss-dependent allowance for the quadrature-vs-closed-form comparison:
/// the closed forms are high-finesse (small rho) expressions, so the gap to
/// the exactly summed bounce series grows with the loss per period. Measured
/// gaps are linear in rho with slope 2.1 (vacuum) to 2.6 (thermal) across
/// alpha_eff in 0.5..0.9 before saturating; the constant term absorbs
/// truncation and quadrature noise at very small rho.
fn quadrature_allowance(rho: f64) -> f64 {
    0.02 + 4.0 * rho
}

pub fn verify(cli: &Cli, source: &InputSource) -> Result<(), CliError> {
    let cfg = validate_config(&source.raw)?;
    let pol = policy(cli);
    let mut checks: Vec<Check> = Vec::new();

    // 1. a static cavity at the same temperature radiates the background
    {
        let mut raw = source.raw.clone();
        raw.alpha = None;
        raw.alpha_eff = Some(0.0);
        let static_cfg = validate_config(&raw)?;
        let series = sample_period(&static_cfg, 96, &pol)?;
        let scale = series
            .background
            .max(static_cfg.omega * static_cfg.omega / (48.0 * std::f64::consts::PI));
        let err = series
            .values
            .iter()
            .map(|v| (v - series.background).abs() / scale)
            .fold(0.0, f64::max);
        checks.push(Check::asserted("static_background", err, 1e-9));
    }

    // 2-4. dephasing identities on randomized rays
    {
        let mut rng = ChaCha8Rng::seed_from_u64(0x05CA_71FE);
        let period = cfg.period();
        let p_cap = if cfg.alpha > 0.0 {
            (2.0 / cfg.alpha) as i64
        } else {
            40
        };
        let p_max = p_cap.clamp(1, 40);
        let (mut e_mob, mut e_fd, mut e_per) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..40 {
            let u = rng.gen_range(-2.0..2.0) * period;
            let mut p = rng.gen_range(-p_max..=p_max);
            if p == 0 {
                p = 1;
            }
            let eval = dephasing(u, p, &cfg)?;

            let z = Complex::from_polar(1.0, cfg.omega * u);
            let mapped = mobius_coefficients(p, &cfg).apply(z);
            let direct = Complex::from_polar(1.0, cfg.omega * eval.value);
            e_mob = e_mob.max((mapped - direct).norm());

            let h = 1e-6 / cfg.omega;
            let fd =
                (dephasing(u + h, p, &cfg)?.value - dephasing(u - h, p, &cfg)?.value) / (2.0 * h);
            e_fd = e_fd.max(((eval.derivative - fd) / fd).abs());

            let shifted = dephasing(u + period, p, &cfg)?.value;
            e_per = e_per.max((shifted - eval.value - period).abs() / period.max(1.0));
        }
        checks.push(Check::asserted("mobius_roundtrip", e_mob, 1e-10));
        checks.push(Check::asserted("dephasing_derivative_fd", e_fd, 1e-6));
        checks.push(Check::asserted("quasi_periodicity", e_per, 1e-10));
    }

    // 5. period quadrature against the closed-form budget. The budget's
    // background term counts the thermal flux in both light-cone components,
    // while the sampled density is the outgoing component alone, hence the
    // factor 2 in the static comparison. The motion-induced radiation is
    // carried entirely by the outgoing component (perfect input mirror), so
    // the motion parts compare one-to-one.
    {
        let q = quadrature_energy(&cfg, &pol, cli.quad_tol)?;
        let b = energy_budget(&cfg)?;
        let (err, tolerance) = if cfg.is_static() {
            if b.e_total > 0.0 {
                (((2.0 * q.total - b.e_total) / b.e_total).abs(), 1e-9)
            } else {
                (q.total.abs(), 1e-9)
            }
        } else {
            (
                ((q.motion - b.e_motion) / b.e_motion).abs(),
                quadrature_allowance(cfg.rho),
            )
        };
        // With a transmitting input mirror part of the motion radiation
        // leaves through the other side, which the one-sided density cannot
        // see; the comparison is then reported but not allowed to fail the
        // run.
        let one_sided = cfg.t1 == 0.0 || cfg.is_static();
        checks.push(Check {
            name: "quadrature_vs_closed_form",
            error: err,
            tolerance,
            asserted: one_sided,
        });
    }

    let all_pass = checks.iter().all(|c| !c.asserted || c.error <= c.tolerance);
    let report = json!({
        "pass": all_pass,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "error": c.error,
            "tolerance": c.tolerance,
            "pass": c.error <= c.tolerance,
            "asserted": c.asserted,
        })).collect::<Vec<_>>(),
    });
    let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let sha = emit(cli.out.as_deref(), &body)?;
    if let (Some(out), Some(sha)) = (&cli.out, sha) {
        write_manifest(
            out,
            "verify",
            source,
            serde_json::to_value(cfg).expect("config serializes"),
            &pol,
            json!({ "quad_tol": cli.quad_tol }),
            &sha,
        )?;
    }

    if all_pass {
        Ok(())
    } else {
        let failing: Vec<&str> = checks
            .iter()
            .filter(|c| c.asserted && c.error > c.tolerance)
            .map(|c| c.name)
            .collect();
        Err(CliError::Verification(format!(
            "checks failed: {}",
            failing.join(", ")
        )))
    }
}

const SWEEP_HEADER: &str =
    "param,value,peak_density,pulse_count,pulse_width,e_motion,photons_emitted,photons_intracavity,error\n";

pub fn sweep(cli: &Cli, source: &InputSource, param: &str, values: &str) -> Result<(), CliError> {
    if !matches!(param, "alpha_eff" | "theta" | "r" | "k") {
        return Err(CliError::Config(format!(
            "unsupported sweep parameter {param:?}; expected alpha_eff, theta, r, or k"
        )));
    }
    let parsed: Vec<f64> = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("sweep value is not a number: {s:?}")))
        })
        .collect::<Result<_, _>>()?;

    let pol = policy(cli);
    let rows: Vec<String> = map_points(&parsed, |v| sweep_row(cli, source, param, *v, &pol));

    let mut body = String::from(SWEEP_HEADER);
    for row in &rows {
        body.push_str(row);
        body.push('\n');
    }
    let sha = emit(cli.out.as_deref(), &body)?;
    if let (Some(out), Some(sha)) = (&cli.out, sha) {
        // the base configuration may be unevaluable on its own (that is what
        // the sweep overrides); record the raw input instead
        write_manifest(
            out,
            "sweep",
            source,
            serde_json::to_value(&source.raw).expect("config serializes"),
            &pol,
            json!({ "param": param, "values": parsed, "samples": cli.samples }),
            &sha,
        )?;
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn map_points<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// One sweep point; any failure lands in the error column instead of
/// aborting the table.
fn sweep_row(
    cli: &Cli,
    source: &InputSource,
    param: &str,
    value: f64,
    pol: &TruncationPolicy,
) -> String {
    match sweep_point(cli, source, param, value, pol) {
        Ok(row) => row,
        Err(msg) => format!(
            "{param},{},,,,,,,{}",
            num(value),
            msg.replace(',', ";").replace('\n', " ")
        ),
    }
}

fn sweep_point(
    cli: &Cli,
    source: &InputSource,
    param: &str,
    value: f64,
    pol: &TruncationPolicy,
) -> Result<String, String> {
    let mut raw = source.raw.clone();
    apply_override(&mut raw, param, value)?;
    let cfg = validate_config(&raw).map_err(|e| e.to_string())?;

    let series = sample_period(&cfg, cli.samples, pol).map_err(|e| e.to_string())?;
    let budget = energy_budget(&cfg).map_err(|e| e.to_string())?;
    let om2 = cfg.omega * cfg.omega;
    let bg = background_density(cfg.theta);

    let (peak_density, count, width) = match detect_pulses(&series, 0.5) {
        Ok(train) => {
            let tallest = train
                .pulses
                .iter()
                .max_by(|a, b| a.height.partial_cmp(&b.height).expect("finite heights"))
                .expect("non-empty pulse train");
            (
                (tallest.height + bg) / om2,
                train.pulses.len(),
                Some(tallest.width / series.period),
            )
        }
        Err(Error::NoPulses) => {
            let max = series
                .values
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            (max / om2, 0, None)
        }
        Err(e) => return Err(e.to_string()),
    };

    Ok(format!(
        "{param},{},{},{},{},{},{},{},",
        num(value),
        num(peak_density),
        count,
        width.map(num).unwrap_or_default(),
        num(budget.e_motion),
        num(budget.photons_emitted),
        num(budget.photons_intracavity),
    ))
}

fn apply_override(raw: &mut RawConfig, param: &str, value: f64) -> Result<(), String> {
    match param {
        "alpha_eff" => {
            raw.alpha = None;
            raw.alpha_eff = Some(value);
        }
        "theta" => raw.theta = Some(value),
        "r" => {
            // a plain round-trip reflectivity re-derives the default mirror
            // split (perfect input mirror, r2 = r^2)
            raw.rho = None;
            raw.r1 = None;
            raw.r2 = None;
            raw.r = Some(value);
        }
        "k" => {
            if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
                return Err(format!("K must be a positive integer, got {value}"));
            }
            raw.k = Some(value as u32);
        }
        _ => unreachable!("parameter validated by the caller"),
    }
    Ok(())
}
