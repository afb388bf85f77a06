//! Fixed-precision float serialization.
//!
//! Every float written by this crate goes through [`Num17`], which emits 17
//! significant digits in scientific notation. That is enough to round-trip
//! any finite `f64` bit-exactly and makes output independent of the
//! shortest-representation heuristics of the JSON writer.

use std::fmt;

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// `x` with 17 significant digits, e.g. `2.1600000000000001e1`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Num17(pub f64);

impl fmt::Display for Num17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt17(self.0))
    }
}

impl From<f64> for Num17 {
    fn from(x: f64) -> Self {
        Num17(x)
    }
}

impl Serialize for Num17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Num17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Num17)
    }
}

/// Serializes a value to pretty JSON followed by a newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
