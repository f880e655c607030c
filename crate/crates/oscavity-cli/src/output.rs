//! Deterministic file output: CSV bodies, JSON reports, and the manifest
//! sidecar that records exactly what produced a file.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use oscavity::units::Units;
use oscavity::TruncationPolicy;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::errors::CliError;
use crate::input::{hex, InputSource};

/// All numeric CSV cells use 17 significant digits so that round-tripping
/// through text preserves the f64 exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `body` to `path`, or to stdout when no path is given. Returns the
/// SHA-256 of the body when it went to a file.
pub fn emit(path: Option<&Path>, body: &str) -> Result<Option<String>, CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, body)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Some(hex(&Sha256::digest(body.as_bytes()))))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
            Ok(None)
        }
    }
}

/// Path of the manifest that accompanies an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Assemble and write the manifest sidecar for a file output. `extra` holds
/// the command-specific settings (sample counts, sweep values, ...).
pub fn write_manifest(
    out: &Path,
    command: &str,
    source: &InputSource,
    config: Value,
    truncation: &TruncationPolicy,
    extra: Value,
    body_sha256: &str,
) -> Result<(), CliError> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "preset": source.preset,
        "config_file": source.config_path.as_ref().map(|p| p.display().to_string()),
        "input_sha256": source.input_sha256,
        "config": config,
        "truncation": serde_json::to_value(truncation).expect("policy serializes"),
        "units": match source.units { Units::Natural => "natural", Units::Si => "si" },
        "density_unit": "hbar*Omega^2",
        "energy_unit": "hbar*Omega",
        "theta_squared_convention": "frequency-ratio",
        "settings": extra,
        "output_sha256": body_sha256,
        "timestamp_unix": timestamp,
    });
    let path = manifest_path(out);
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
