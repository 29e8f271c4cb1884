//! Deterministic JSON serialization.
//!
//! All JSON artifacts written by this crate format floating-point numbers
//! with 17 significant digits (`{:.16e}`), which round-trips every `f64`
//! exactly and keeps output byte-stable across runs and platforms.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// JSON formatter that writes every float with 17 significant digits.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes `value` as compact JSON with 17-significant-digit floats.
///
/// # Errors
///
/// Returns an error if `value` fails to serialize (e.g. a map with
/// non-string keys).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json output is UTF-8"))
}

/// Writes `value` to `path` as compact JSON with a trailing newline.
///
/// # Errors
///
/// Returns an error if serialization or the file write fails.
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a JSON file into `T`.
///
/// # Errors
///
/// Returns an error if the file cannot be read or does not parse as `T`.
pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Formats a float with 17 significant digits, matching the JSON encoding.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Rejects non-finite floats before they reach a serializer.
///
/// # Errors
///
/// Returns [`Error::NonFinite`] tagged with `context` if `value` is NaN or
/// infinite.
pub fn ensure_finite(value: f64, context: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { context })
    }
}
