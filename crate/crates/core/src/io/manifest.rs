//! Sweep manifests as pretty-printed JSON with fixed key order.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::config::parse_error;
use crate::sweep::{FrameManifest, FrameRecord, SweepSpec};

pub fn manifest_to_string(manifest: &FrameManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

/// Writes through a temporary file so a failed write leaves no partial
/// manifest behind.
pub fn write_manifest(manifest: &FrameManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, manifest_to_string(manifest)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn parse_manifest(text: &str) -> Result<FrameManifest> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error("manifest", &e))?;
    let Value::Object(mut top) = value else {
        return Err(manifest_error("document", "expected a JSON object"));
    };
    if let Some(key) = top.keys().find(|k| *k != "sweep" && *k != "frames") {
        return Err(manifest_error("document", &format!("unknown key `{key}`")));
    }
    let sweep: SweepSpec = serde_json::from_value(top.remove("sweep").ok_or_else(|| manifest_error("document", "missing `sweep`"))?)
        .map_err(|e| manifest_error("sweep", &e.to_string()))?;
    let Some(Value::Array(raw_frames)) = top.remove("frames") else {
        return Err(manifest_error("document", "missing `frames` array"));
    };

    let mut frames: Vec<FrameRecord> = Vec::with_capacity(raw_frames.len());
    for (i, raw) in raw_frames.into_iter().enumerate() {
        let record: FrameRecord =
            serde_json::from_value(raw).map_err(|e| manifest_error(&format!("frame record {i}"), &e.to_string()))?;
        if record.index != i {
            return Err(manifest_error(
                &format!("frame record {i}"),
                &format!("index {} breaks the contiguous sequence", record.index),
            ));
        }
        if let Some(prev) = frames.last() {
            if record.s.is_nan() || record.s <= prev.s {
                return Err(manifest_error(&format!("frame record {i}"), "s values must be strictly increasing"));
            }
        }
        frames.push(record);
    }
    Ok(FrameManifest { sweep, frames })
}

fn manifest_error(context: &str, message: &str) -> Error {
    Error::Manifest {
        context: context.into(),
        message: message.into(),
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<FrameManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}
