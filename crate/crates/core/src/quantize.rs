//! Decimal measurements to 16-bit fixed point and back.
//!
//! Each channel carries a number of decimal places; a measurement is scaled
//! by `10^decimal_places`, rounded half away from zero and stored as an
//! `i16`. Household defaults are two places for voltage and current and
//! none for active and reactive power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The codec's payload unit.
pub type QuantizedValue = i16;

pub const MAX_DECIMAL_PLACES: u8 = 4;

/// Per-channel precision policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub decimal_places: u8,
    /// Round to multiples of 5 after scaling.
    pub lca: bool,
}

impl ChannelSpec {
    pub fn new(name: impl Into<String>, decimal_places: u8, lca: bool) -> Result<Self> {
        if decimal_places > MAX_DECIMAL_PLACES {
            return Err(Error::usage(format!(
                "decimal places {decimal_places} outside [0, {MAX_DECIMAL_PLACES}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            decimal_places,
            lca,
        })
    }

    /// Voltage, current, active power, reactive power at 2, 2, 0, 0 places.
    pub fn household_defaults(lca: bool) -> Vec<ChannelSpec> {
        [("V", 2), ("I", 2), ("P", 0), ("Q", 0)]
            .into_iter()
            .map(|(name, dp)| ChannelSpec {
                name: name.to_string(),
                decimal_places: dp,
                lca,
            })
            .collect()
    }

    pub fn scale(&self) -> f64 {
        10f64.powi(i32::from(self.decimal_places))
    }

    /// Scale as an integer; used for exact fixed-point formatting.
    pub fn int_scale(&self) -> i64 {
        10i64.pow(u32::from(self.decimal_places))
    }
}

/// What to do when a scaled value falls outside the `i16` range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeMode {
    #[default]
    Strict,
    /// Saturate to `[-32768, 32767]`.
    Clamp,
}

/// Scales, rounds and range-checks one measurement; applies [`lca_round`]
/// when the channel asks for it.
pub fn quantize(x: f64, spec: &ChannelSpec, mode: RangeMode) -> Result<QuantizedValue> {
    if !x.is_finite() {
        return Err(Error::usage(format!(
            "non-finite measurement {x} on channel {}",
            spec.name
        )));
    }
    let scaled = round_half_away(x * spec.scale());
    let v = if scaled < f64::from(i16::MIN) || scaled > f64::from(i16::MAX) {
        match mode {
            RangeMode::Strict => {
                return Err(Error::OutOfRange {
                    channel: spec.name.clone(),
                    value: x,
                    scaled,
                })
            }
            RangeMode::Clamp => scaled.clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16,
        }
    } else {
        scaled as i16
    };
    Ok(if spec.lca { lca_round(v) } else { v })
}

/// Rounds to the nearest integer, ties away from zero. A product such as
/// `1.005 * 100` lands a hair below the decimal tie, so values within a
/// few ulps of `.5` are treated as ties.
fn round_half_away(s: f64) -> f64 {
    let frac = (s - s.trunc()).abs();
    let tol = 1e-9 * s.abs().max(1.0);
    if (frac - 0.5).abs() <= tol {
        s.trunc() + s.signum()
    } else {
        s.round()
    }
}

pub fn dequantize(v: QuantizedValue, spec: &ChannelSpec) -> f64 {
    f64::from(v) / spec.scale()
}

/// Nearest multiple of 5. Integer residues never tie, so no tie rule is
/// needed. `-32768` would round to `-32770`, which does not fit; it maps to
/// `-32765` instead.
pub fn lca_round(v: QuantizedValue) -> QuantizedValue {
    let v = i32::from(v);
    let r = v.rem_euclid(5);
    let rounded = if r <= 2 { v - r } else { v + (5 - r) };
    if rounded < i32::from(i16::MIN) {
        (rounded + 5) as i16
    } else {
        rounded as i16
    }
}

/// Quantizes a whole channel, reporting the first failing sample.
pub fn quantize_channel(
    values: &[f64],
    spec: &ChannelSpec,
    mode: RangeMode,
) -> Result<Vec<QuantizedValue>> {
    values.iter().map(|&x| quantize(x, spec, mode)).collect()
}
