//! Output plumbing: deterministic JSON/CSV emission, atomic file writes,
//! and the per-invocation run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Round to 10 significant digits so emitted doubles are identical across
/// runs and platforms regardless of how they were computed.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("scientific notation round-trips")
}

/// Decimal text of a double after the 10-significant-digit rounding;
/// extreme magnitudes switch to scientific notation to stay readable.
pub fn sig10_str(x: f64) -> String {
    let r = sig10(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Walk a JSON value and round every floating-point number in place.
pub fn round_doubles(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("checked is_f64");
                if let Some(r) = serde_json::Number::from_f64(sig10(x)) {
                    *v = Value::Number(r);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_doubles),
        Value::Object(map) => map.values_mut().for_each(round_doubles),
        _ => {}
    }
}

/// Serialize with sorted keys and rounded doubles; the byte output depends
/// only on the value, never on the run.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).context("serializing result")?;
    round_doubles(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", to_json_string(value)?);
    Ok(())
}

/// Write bytes via a temporary sibling and rename, so a reader never sees
/// a half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// A record of one invocation: what ran, with which parameters and code
/// versions, how long it took, and which files it wrote.
///
/// The hash covers only the fields that determine the output bytes
/// (subcommand, parameters, versions) so identical invocations stamp
/// identical hashes on their artifacts, while the manifest itself still
/// records the variable wall time.  The completed record goes to stderr,
/// keeping stdout byte-identical across runs.
#[derive(Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub wall_time_ms: u64,
    pub outputs: Vec<String>,
    pub hash: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: &[(&str, String)]) -> RunManifest {
        let parameters: BTreeMap<String, String> = parameters
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        let mut versions = BTreeMap::new();
        versions.insert("spatialmix".to_string(), spatialmix::VERSION.to_string());
        versions.insert(
            "spatialmix-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        );
        let mut hasher = Sha256::new();
        hasher.update(subcommand.as_bytes());
        for (k, v) in &parameters {
            hasher.update(b"\n");
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
        }
        for (k, v) in &versions {
            hasher.update(b"\n");
            hasher.update(k.as_bytes());
            hasher.update(b"@");
            hasher.update(v.as_bytes());
        }
        let digest = hasher.finalize();
        let hash: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            versions,
            wall_time_ms: 0,
            outputs: Vec::new(),
            hash,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Stamp the wall time and emit the completed record to stderr.
    pub fn finish(mut self, started: Instant) -> Result<()> {
        self.wall_time_ms = started.elapsed().as_millis() as u64;
        let mut v = serde_json::to_value(&self)?;
        round_doubles(&mut v);
        eprintln!("{}", serde_json::to_string(&v)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_ten_digits() {
        assert_eq!(sig10_str(2.807354922057604), "2.807354922");
        assert_eq!(sig10_str(0.5), "0.5");
        assert_eq!(sig10_str(-1.23456789012345e-7), "-1.23456789e-7");
        assert_eq!(sig10_str(0.0), "0");
        assert_eq!(sig10(0.0), 0.0);
    }

    #[test]
    fn manifest_hash_ignores_timing() {
        let a = RunManifest::new("count", &[("cons", "hs".into()), ("m", "4".into())]);
        let mut b = RunManifest::new("count", &[("m", "4".into()), ("cons", "hs".into())]);
        b.wall_time_ms = 999;
        assert_eq!(a.hash, b.hash);
        let c = RunManifest::new("count", &[("cons", "hh".into()), ("m", "4".into())]);
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn doubles_inside_nested_values_are_rounded() {
        let mut v = serde_json::json!({
            "a": [1.0000000000123456, {"b": 2.718281828459045}],
            "n": 7,
        });
        round_doubles(&mut v);
        assert_eq!(v["a"][0], serde_json::json!(1.0));
        assert_eq!(v["a"][1]["b"], serde_json::json!(2.718281828));
        assert_eq!(v["n"], serde_json::json!(7));
    }
}
