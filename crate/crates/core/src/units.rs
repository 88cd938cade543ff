// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Angular-frequency and complex-number text grammar shared by device files
//! and the command line.
//!
//! ```text
//! angular := ["2pi*" | "2*pi*"] number [suffix]
//! suffix  := "k" | "M" | "G"          (×1e3, ×1e6, ×1e9)
//! ```
//!
//! With the `2pi*` prefix the number is a frequency in Hz and is converted to
//! rad/s; without it the value is taken as rad/s directly.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("cannot parse angular frequency '{0}' (expected e.g. 2pi*10k or 62831.85)")]
    Angular(String),
    #[error("cannot parse complex number '{0}' (expected e.g. 0.5+0.5j)")]
    Complex(String),
}

pub fn parse_angular(text: &str) -> Result<f64, UnitError> {
    let err = || UnitError::Angular(text.to_string());
    let compact: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    let (is_hz, rest) = ["2pi*", "2*pi*", "2π*", "2*π*"]
        .iter()
        .find_map(|p| lower.strip_prefix(p).map(|r| (true, &compact[compact.len() - r.len()..])))
        .unwrap_or((false, compact.as_str()));
    if rest.is_empty() {
        return Err(err());
    }
    let (number, mult) = match rest.chars().last() {
        Some('k') | Some('K') => (&rest[..rest.len() - 1], 1e3),
        Some('M') => (&rest[..rest.len() - 1], 1e6),
        Some('G') => (&rest[..rest.len() - 1], 1e9),
        _ => (rest, 1.0),
    };
    let value: f64 = number.parse().map_err(|_| err())?;
    let scaled = value * mult;
    Ok(if is_hz { TAU * scaled } else { scaled })
}

/// Parses `re`, `re+imj`, `re-imj`, or `imj` (`i` is accepted in place of `j`).
/// Non-finite components parse; rejecting them is the caller's job.
pub fn parse_complex(text: &str) -> Result<Complex64, UnitError> {
    let err = || UnitError::Complex(text.to_string());
    let s: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix('j').or_else(|| s.strip_suffix('i')) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is not part of an exponent or leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| err())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| err())?;
    Ok(Complex64::new(re, im))
}
