//! JSON documents: strict parsers for the inputs and a canonical writer.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::inverse::FixedPhi;
use crate::model::{BaseSpectrum, PerturbationCoefficients, TargetSpectrum};

pub fn parse_base(text: &str) -> Result<BaseSpectrum> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_coefficients(text: &str) -> Result<PerturbationCoefficients> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_target(text: &str) -> Result<TargetSpectrum> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_fixed_phi(text: &str) -> Result<FixedPhi> {
    Ok(serde_json::from_str(text)?)
}

fn sorted(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and shortest round-trip floats, ending in a
/// newline. Identical values give identical bytes.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&sorted(serde_json::to_value(value)?))?;
    text.push('\n');
    Ok(text)
}

/// Serializes non-finite bounds as `null` and reads `null` back as infinity.
pub(crate) mod bound {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
