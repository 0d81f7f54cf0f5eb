//! Versioned, checksummed text encoding of a trained model.
//!
//! ```text
//! TCLF1
//! version 1
//! config <ModelConfig as one-line JSON>
//! feature_scaler <names JSON> <means b64> <stds b64>
//! target_scaler none | <names JSON> <means b64> <stds b64>
//! metadata <TrainingMetadata as one-line JSON>
//! param <name> <rows> <cols> <values b64>      (one line per parameter, network order)
//! checksum sha256 <hex digest of every preceding byte>
//! ```
//!
//! Vectors of `f64` are base64 (standard alphabet, padded) of their
//! little-endian bytes, so values round-trip bit-exactly. Readers check the
//! magic and version line first, then the checksum, then the body.

use std::fmt::Write as _;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use sha2::{Digest, Sha256};
use tclf_core::models::{ModelConfig, TrainedModel, TrainingMetadata};
use tclf_core::nn::Network;
use tclf_core::preprocess::Scaler;

use crate::error::{Error, Result};

pub const MAGIC: &str = "TCLF1";
pub const VERSION: u32 = 1;

fn encode_f64(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode_f64(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD.decode(text).map_err(|e| Error::Corrupt(format!("bad base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Corrupt("payload length is not a multiple of 8".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Internal(e.to_string()))
}

fn scaler_line(s: &Scaler) -> Result<String> {
    Ok(format!("{} {} {}", json(&s.names())?, encode_f64(s.means()), encode_f64(s.stds())))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn save_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let mut body = String::new();
    let mut line = |s: String| {
        body.push_str(&s);
        body.push('\n');
    };
    line(MAGIC.into());
    line(format!("version {VERSION}"));
    line(format!("config {}", json(&model.config)?));
    line(format!("feature_scaler {}", scaler_line(&model.feature_scaler)?));
    line(match &model.target_scaler {
        Some(s) => format!("target_scaler {}", scaler_line(s)?),
        None => "target_scaler none".into(),
    });
    line(format!("metadata {}", json(&model.metadata)?));
    let names = model.network.param_names();
    for (name, p) in names.iter().zip(model.network.params()) {
        let (rows, cols) = p.shape();
        line(format!("param {name} {rows} {cols} {}", encode_f64(&p.values)));
    }
    let digest = sha256_hex(body.as_bytes());
    body.push_str(&format!("checksum sha256 {digest}\n"));
    Ok(body.into_bytes())
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Corrupt(format!("missing '{key}' line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Corrupt(format!("expected '{key}' line")))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Corrupt(format!("bad {what}: {e}")))
}

fn parse_scaler(text: &str) -> Result<Scaler> {
    let mut parts = text.rsplitn(3, ' ');
    let (stds, means, names) = match (parts.next(), parts.next(), parts.next()) {
        (Some(s), Some(m), Some(n)) => (s, m, n),
        _ => return Err(Error::Corrupt("scaler line needs names, means and stds".into())),
    };
    let names: Vec<String> = parse_json(names, "scaler names")?;
    Scaler::from_parts(names, decode_f64(means)?, decode_f64(stds)?).map_err(|e| Error::Corrupt(e.to_string()))
}

pub fn load_model(bytes: &[u8]) -> Result<TrainedModel> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Corrupt("not UTF-8 text".into()))?;
    let mut lines = text.split('\n');
    if lines.next() != Some(MAGIC) {
        return Err(Error::Corrupt(format!("missing '{MAGIC}' magic line")));
    }
    let version = field(lines.next(), "version")?;
    if version != VERSION.to_string() {
        return Err(Error::Version(format!("file has version {version}, this build reads {VERSION}")));
    }
    let body_end = text
        .rfind("checksum sha256 ")
        .filter(|&i| i > 0 && text.as_bytes()[i - 1] == b'\n')
        .ok_or_else(|| Error::Corrupt("missing checksum line (truncated file?)".into()))?;
    let stated = text[body_end..].strip_prefix("checksum sha256 ").unwrap_or("").trim_end_matches('\n');
    if stated != sha256_hex(&bytes[..body_end]) {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let mut lines = text[..body_end].lines().skip(2);
    let config: ModelConfig = parse_json(field(lines.next(), "config")?, "config")?;
    config.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
    let feature_scaler = parse_scaler(field(lines.next(), "feature_scaler")?)?;
    let target_scaler = match field(lines.next(), "target_scaler")? {
        "none" => None,
        s => Some(parse_scaler(s)?),
    };
    let metadata: TrainingMetadata = parse_json(field(lines.next(), "metadata")?, "metadata")?;
    let mut network = Network::zeros(&config.layers).map_err(|e| Error::Corrupt(e.to_string()))?;
    let names = network.param_names();
    for (name, p) in names.iter().zip(network.params_mut()) {
        let rest = field(lines.next(), "param")?;
        let parts: Vec<&str> = rest.split(' ').collect();
        let [n, rows, cols, payload] = parts[..] else {
            return Err(Error::Corrupt(format!("malformed param line for {name}")));
        };
        if n != name || rows != p.shape().0.to_string() || cols != p.shape().1.to_string() {
            return Err(Error::Corrupt(format!("expected param {name} {:?}, found {n} {rows}x{cols}", p.shape())));
        }
        let values = decode_f64(payload)?;
        if values.len() != p.len() {
            return Err(Error::Corrupt(format!("param {name} has {} values, expected {}", values.len(), p.len())));
        }
        p.values = values;
    }
    if lines.next().is_some() {
        return Err(Error::Corrupt("unexpected trailing content".into()));
    }
    Ok(TrainedModel { config, network, feature_scaler, target_scaler, metadata })
}

/// Digest of the parameter values alone, for comparing training runs.
pub fn parameter_digest(model: &TrainedModel) -> String {
    let mut h = Sha256::new();
    for p in model.network.params() {
        for v in &p.values {
            h.update(v.to_le_bytes());
        }
    }
    hex(&h.finalize())
}
