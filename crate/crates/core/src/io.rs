//! File formats shared by the library and the command-line front end.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{GcaError, Result};

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// JSON for `.json` paths, bincode otherwise.
pub fn save_bundle<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let bytes = if is_json(path) {
        let mut s = serde_json::to_vec_pretty(value)?;
        s.push(b'\n');
        s
    } else {
        bincode::serialize(value)?
    };
    fs::write(path, bytes).map_err(|e| GcaError::io(path, e))
}

pub fn load_bundle<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| GcaError::io(path, e))?;
    if is_json(path) {
        Ok(serde_json::from_slice(&bytes)?)
    } else {
        Ok(bincode::deserialize(&bytes)?)
    }
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    fs::write(path, s).map_err(|e| GcaError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| GcaError::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}
