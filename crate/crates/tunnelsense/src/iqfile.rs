//! Raw IQ recordings: interleaved little-endian `f32` I/Q pairs in
//! `<name>.iq`, described by a JSON sidecar `<name>.iq.json`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tunnelsense_core::IqRecording;

#[derive(Debug, Error)]
pub enum IqFileError {
    #[error("missing metadata sidecar {}", .0.display())]
    MissingSidecar(PathBuf),
    #[error("invalid metadata in {}: {field}", path.display())]
    InvalidMetadata { path: PathBuf, field: String },
    #[error("{}: {bytes} bytes is not a whole number of I/Q pairs", path.display())]
    TruncatedRecording { path: PathBuf, bytes: u64 },
    #[error("{}: non-finite value in sample {index}", path.display())]
    NonFiniteSample { path: PathBuf, index: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IqFileError {
    pub fn kind(&self) -> &'static str {
        match self {
            IqFileError::MissingSidecar(_) => "missing_sidecar",
            IqFileError::InvalidMetadata { .. } => "invalid_metadata",
            IqFileError::TruncatedRecording { .. } => "truncated_recording",
            IqFileError::NonFiniteSample { .. } => "non_finite_sample",
            IqFileError::Io { .. } => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqMetadata {
    pub sample_rate: f64,
    pub center_frequency: f64,
    pub start_time_unix: f64,
    pub description: String,
}

/// `<path>.json`, next to the sample file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_iq(rec: &IqRecording, description: &str, path: &Path) -> Result<(), IqFileError> {
    let io = |source| IqFileError::Io { path: path.to_owned(), source };
    let file = fs::File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    for s in &rec.samples {
        out.write_all(&s.re.to_le_bytes()).map_err(io)?;
        out.write_all(&s.im.to_le_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)?;

    let meta = IqMetadata {
        sample_rate: rec.sample_rate,
        center_frequency: rec.center_frequency,
        start_time_unix: rec.start_time,
        description: description.to_owned(),
    };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&side, json + "\n").map_err(|source| IqFileError::Io { path: side, source })
}

pub fn read_metadata(path: &Path) -> Result<IqMetadata, IqFileError> {
    let side = sidecar_path(path);
    let text = match fs::read_to_string(&side) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(IqFileError::MissingSidecar(side)),
        Err(source) => return Err(IqFileError::Io { path: side, source }),
    };
    let invalid = |field: &str| IqFileError::InvalidMetadata {
        path: side.clone(),
        field: field.to_owned(),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| invalid(&format!("not JSON ({e})")))?;
    let number = |key: &str| value.get(key).and_then(serde_json::Value::as_f64).ok_or_else(|| invalid(key));
    let meta = IqMetadata {
        sample_rate: number("sample_rate")?,
        center_frequency: number("center_frequency")?,
        start_time_unix: number("start_time_unix")?,
        description: value
            .get("description")
            .and_then(serde_json::Value::as_str)
            .unwrap_or_default()
            .to_owned(),
    };
    if !(meta.sample_rate > 0.0) || !meta.sample_rate.is_finite() {
        return Err(invalid("sample_rate"));
    }
    if !meta.center_frequency.is_finite() {
        return Err(invalid("center_frequency"));
    }
    Ok(meta)
}

pub fn read_iq(path: &Path) -> Result<(IqRecording, IqMetadata), IqFileError> {
    let meta = read_metadata(path)?;
    let bytes = fs::read(path).map_err(|source| IqFileError::Io { path: path.to_owned(), source })?;
    if bytes.len() % 8 != 0 {
        return Err(IqFileError::TruncatedRecording {
            path: path.to_owned(),
            bytes: bytes.len() as u64,
        });
    }
    let mut samples = Vec::with_capacity(bytes.len() / 8);
    for (index, pair) in bytes.chunks_exact(8).enumerate() {
        let re = f32::from_le_bytes(pair[..4].try_into().expect("4 bytes"));
        let im = f32::from_le_bytes(pair[4..].try_into().expect("4 bytes"));
        if !re.is_finite() || !im.is_finite() {
            return Err(IqFileError::NonFiniteSample { path: path.to_owned(), index });
        }
        samples.push(Complex32::new(re, im));
    }
    let rec = IqRecording::from_samples(meta.sample_rate, meta.center_frequency, meta.start_time_unix, samples);
    Ok((rec, meta))
}
