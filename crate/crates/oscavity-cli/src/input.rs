//! Configuration ingestion: key=value files, named presets, and checksums.

use std::path::PathBuf;

use oscavity::units::{temperature_to_theta, Units};
use oscavity::RawConfig;
use sha2::{Digest, Sha256};

use crate::errors::CliError;
use crate::Cli;

/// A resolved configuration source plus the provenance recorded in manifests.
pub struct InputSource {
    pub raw: RawConfig,
    pub units: Units,
    pub preset: Option<String>,
    pub config_path: Option<PathBuf>,
    pub input_sha256: Option<String>,
}

pub fn resolve_source(cli: &Cli) -> Result<InputSource, CliError> {
    if cli.preset.as_deref() == Some("list") {
        print!("{}", preset_table());
        std::process::exit(0);
    }
    match (&cli.config, &cli.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let (raw, mut units) = parse_config_text(&text)?;
            if cli.si_units {
                units = Units::Si;
            }
            let digest = Sha256::digest(text.as_bytes());
            Ok(InputSource {
                raw,
                units,
                preset: None,
                config_path: Some(path.clone()),
                input_sha256: Some(hex(&digest)),
            })
        }
        (None, Some(name)) => {
            let (raw, mut units) = preset(name)?;
            if cli.si_units {
                units = Units::Si;
            }
            Ok(InputSource {
                raw,
                units,
                preset: Some(name.clone()),
                config_path: None,
                input_sha256: None,
            })
        }
        (Some(_), Some(_)) => Err(CliError::Config(
            "--config and --preset are mutually exclusive".to_string(),
        )),
        (None, None) => Err(CliError::Config(
            "a configuration is required: pass --config <path> or --preset <name>".to_string(),
        )),
    }
}

/// Parse the flat key=value format. `#` starts a comment, blank lines are
/// skipped, keys match the configuration field names, and each key may be
/// given at most once.
pub fn parse_config_text(text: &str) -> Result<(RawConfig, Units), CliError> {
    let mut raw = RawConfig::default();
    let mut units = Units::Natural;
    let mut seen: Vec<String> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|s| s == key) {
            return Err(CliError::Config(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
        seen.push(key.to_string());

        let parse_f64 = || -> Result<f64, CliError> {
            value.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "line {}: value for {key:?} is not a number: {value:?}",
                    lineno + 1
                ))
            })
        };
        match key {
            "k" => {
                raw.k = Some(value.parse::<u32>().map_err(|_| {
                    CliError::Config(format!(
                        "line {}: value for \"k\" must be a positive integer, got {value:?}",
                        lineno + 1
                    ))
                })?);
            }
            "omega" => raw.omega = Some(parse_f64()?),
            "length" => raw.length = Some(parse_f64()?),
            "alpha" => raw.alpha = Some(parse_f64()?),
            "alpha_eff" => raw.alpha_eff = Some(parse_f64()?),
            "rho" => raw.rho = Some(parse_f64()?),
            "r" => raw.r = Some(parse_f64()?),
            "r1" => raw.r1 = Some(parse_f64()?),
            "r2" => raw.r2 = Some(parse_f64()?),
            "theta" => raw.theta = Some(parse_f64()?),
            "t_kelvin" => {
                if seen.iter().any(|s| s == "theta") {
                    return Err(CliError::Config(format!(
                        "line {}: \"t_kelvin\" conflicts with an explicit \"theta\"",
                        lineno + 1
                    )));
                }
                raw.theta = Some(temperature_to_theta(parse_f64()?)?);
                units = Units::Si; // kelvin only makes sense with omega in rad/s
            }
            other => {
                return Err(CliError::Config(format!(
                    "line {}: unknown key {other:?} (expected one of k, omega, length, alpha, \
                     alpha_eff, rho, r, r1, r2, theta, t_kelvin)",
                    lineno + 1
                )));
            }
        }
        if key == "theta" && seen.iter().any(|s| s == "t_kelvin") {
            return Err(CliError::Config(format!(
                "line {}: \"theta\" conflicts with an explicit \"t_kelvin\"",
                lineno + 1
            )));
        }
    }
    Ok((raw, units))
}

/// Named parameter sets for the reference scenarios.
pub fn preset(name: &str) -> Result<(RawConfig, Units), CliError> {
    let fig = |alpha_eff: f64, theta: f64| RawConfig {
        k: Some(3),
        omega: Some(1.0),
        alpha_eff: Some(alpha_eff),
        r1: Some(1.0),
        r2: Some(0.81),
        theta: Some(theta),
        ..Default::default()
    };
    match name {
        // strongly driven r = 0.9 cavity with a perfect input mirror
        "fig2-vacuum" => Ok((fig(0.9, 0.0), Units::Natural)),
        "fig2-theta02" => Ok((fig(0.9, 0.2), Units::Natural)),
        "fig2-theta1" => Ok((fig(0.9, 1.0), Units::Natural)),
        // same cavity at room temperature for a 10 GHz mode
        "fig3-a05" => Ok((fig(0.5, 3924.0), Units::Natural)),
        "fig3-a09" => Ok((fig(0.9, 3924.0), Units::Natural)),
        // 10 GHz superconducting cavity, 300 K, driven at the threshold
        "room-temp" => {
            let omega = 2.0 * std::f64::consts::PI * 1.0e10;
            Ok((
                RawConfig {
                    k: Some(3),
                    omega: Some(omega),
                    alpha_eff: Some(1.0),
                    rho: Some(1e-5),
                    theta: Some(temperature_to_theta(300.0)?),
                    ..Default::default()
                },
                Units::Si,
            ))
        }
        other => Err(CliError::Config(format!(
            "unknown preset {other:?}; available: fig2-vacuum, fig2-theta02, fig2-theta1, \
             fig3-a05, fig3-a09, room-temp (or \"list\" to print them)"
        ))),
    }
}

fn preset_table() -> String {
    let mut s = String::from("available presets:\n");
    for (name, desc) in [
        ("fig2-vacuum", "K=3, r=0.9, alpha_eff=0.9, theta=0"),
        ("fig2-theta02", "K=3, r=0.9, alpha_eff=0.9, theta=0.2*Omega"),
        ("fig2-theta1", "K=3, r=0.9, alpha_eff=0.9, theta=1*Omega"),
        ("fig3-a05", "K=3, r=0.9, alpha_eff=0.5, theta=3924*Omega"),
        ("fig3-a09", "K=3, r=0.9, alpha_eff=0.9, theta=3924*Omega"),
        (
            "room-temp",
            "K=3, Omega=2*pi*10GHz, rho=1e-5, T=300K, at threshold",
        ),
    ] {
        s.push_str(&format!("  {name:<14} {desc}\n"));
    }
    s
}

pub fn hex(digest: &[u8]) -> String {
    let mut out = String::with_capacity(2 * digest.len());
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
