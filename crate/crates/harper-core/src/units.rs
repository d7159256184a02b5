//! Unit-suffixed quantity parsing for configuration input.
//!
//! Dimensioned config values are strings with explicit suffixes
//! (`"7.9 nH"`, `"91 fF"`, `"0.25 Phi0"`, `"4 MHz"`, `"0.4 pi"`).
//! Frequencies in ordinary-frequency units (Hz…GHz) convert to angular
//! rad/s on input; `rad/s` is accepted verbatim. Internally everything is SI.

use crate::constants::PHI0;
use crate::error::CoreError;

fn split(s: &str) -> Result<(f64, &str), CoreError> {
    let t = s.trim();
    let idx = t
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E')))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, suffix) = t.split_at(idx);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| CoreError::domain("units", format!("unparseable number in {s:?}")))?;
    Ok((value, suffix.trim()))
}

/// Inductance in henries.
pub fn parse_inductance(s: &str) -> Result<f64, CoreError> {
    let (v, u) = split(s)?;
    let scale = match u {
        "H" => 1.0,
        "mH" => 1e-3,
        "uH" | "µH" => 1e-6,
        "nH" => 1e-9,
        "pH" => 1e-12,
        _ => {
            return Err(CoreError::domain(
                "units",
                format!("unknown inductance unit {u:?} in {s:?}"),
            ))
        }
    };
    Ok(v * scale)
}

/// Capacitance in farads.
pub fn parse_capacitance(s: &str) -> Result<f64, CoreError> {
    let (v, u) = split(s)?;
    let scale = match u {
        "F" => 1.0,
        "uF" | "µF" => 1e-6,
        "nF" => 1e-9,
        "pF" => 1e-12,
        "fF" => 1e-15,
        _ => {
            return Err(CoreError::domain(
                "units",
                format!("unknown capacitance unit {u:?} in {s:?}"),
            ))
        }
    };
    Ok(v * scale)
}

/// Magnetic flux in webers; `Phi0` suffix scales by the flux quantum.
pub fn parse_flux(s: &str) -> Result<f64, CoreError> {
    let (v, u) = split(s)?;
    let scale = match u {
        "Wb" => 1.0,
        "Phi0" | "phi0" => PHI0,
        _ => {
            return Err(CoreError::domain(
                "units",
                format!("unknown flux unit {u:?} in {s:?}"),
            ))
        }
    };
    Ok(v * scale)
}

/// Angular frequency in rad/s. Ordinary-frequency suffixes multiply by 2π.
pub fn parse_frequency(s: &str) -> Result<f64, CoreError> {
    let (v, u) = split(s)?;
    let tau = std::f64::consts::TAU;
    let scale = match u {
        "rad/s" => 1.0,
        "Hz" => tau,
        "kHz" => tau * 1e3,
        "MHz" => tau * 1e6,
        "GHz" => tau * 1e9,
        _ => {
            return Err(CoreError::domain(
                "units",
                format!("unknown frequency unit {u:?} in {s:?}"),
            ))
        }
    };
    Ok(v * scale)
}

/// Angle in radians; bare numbers are radians, `pi` suffix scales by π.
pub fn parse_angle(s: &str) -> Result<f64, CoreError> {
    let (v, u) = split(s)?;
    let scale = match u {
        "" | "rad" => 1.0,
        "pi" => std::f64::consts::PI,
        _ => {
            return Err(CoreError::domain(
                "units",
                format!("unknown angle unit {u:?} in {s:?}"),
            ))
        }
    };
    Ok(v * scale)
}
