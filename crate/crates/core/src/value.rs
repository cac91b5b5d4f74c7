//! Values carried by world-state entries and semantic sensors.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A single observed or derived value.
///
/// Values of different variants never compare equal. In JSON, booleans,
/// numbers and `null` map directly; strings always decode as [`SensorValue::Label`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SensorValue {
    Bool(bool),
    Label(String),
    Number(f64),
    Text(String),
    #[default]
    None,
}

impl SensorValue {
    pub fn label(s: impl Into<String>) -> Self {
        SensorValue::Label(s.into())
    }

    pub fn is_none(&self) -> bool {
        matches!(self, SensorValue::None)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            SensorValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            SensorValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// String content of a label or text value.
    pub fn as_str(&self) -> Option<&str> {
        match self {
            SensorValue::Label(s) | SensorValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            SensorValue::Bool(b) => serde_json::Value::Bool(*b),
            SensorValue::Label(s) | SensorValue::Text(s) => serde_json::Value::String(s.clone()),
            SensorValue::Number(n) => serde_json::Number::from_f64(*n)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            SensorValue::None => serde_json::Value::Null,
        }
    }

    /// Decodes a scalar JSON value; arrays and objects are rejected.
    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::Null => Some(SensorValue::None),
            serde_json::Value::Bool(b) => Some(SensorValue::Bool(*b)),
            serde_json::Value::Number(n) => n.as_f64().map(SensorValue::Number),
            serde_json::Value::String(s) => Some(SensorValue::Label(s.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for SensorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensorValue::Bool(b) => write!(f, "{b}"),
            SensorValue::Label(s) | SensorValue::Text(s) => f.write_str(s),
            SensorValue::Number(n) => write!(f, "{n}"),
            SensorValue::None => f.write_str("none"),
        }
    }
}

impl From<bool> for SensorValue {
    fn from(b: bool) -> Self {
        SensorValue::Bool(b)
    }
}

impl From<f64> for SensorValue {
    fn from(n: f64) -> Self {
        SensorValue::Number(n)
    }
}

impl From<&str> for SensorValue {
    fn from(s: &str) -> Self {
        SensorValue::Label(s.to_string())
    }
}

impl Serialize for SensorValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SensorValue::Bool(b) => serializer.serialize_bool(*b),
            SensorValue::Label(s) | SensorValue::Text(s) => serializer.serialize_str(s),
            SensorValue::Number(n) => serializer.serialize_f64(*n),
            SensorValue::None => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for SensorValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl<'de> Visitor<'de> for ValueVisitor {
            type Value = SensorValue;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a boolean, number, string or null")
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> Result<SensorValue, E> {
                Ok(SensorValue::Bool(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SensorValue, E> {
                Ok(SensorValue::Number(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SensorValue, E> {
                Ok(SensorValue::Number(v as f64))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<SensorValue, E> {
                Ok(SensorValue::Number(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<SensorValue, E> {
                Ok(SensorValue::Label(v.to_string()))
            }
            fn visit_string<E: de::Error>(self, v: String) -> Result<SensorValue, E> {
                Ok(SensorValue::Label(v))
            }
            fn visit_none<E: de::Error>(self) -> Result<SensorValue, E> {
                Ok(SensorValue::None)
            }
            fn visit_unit<E: de::Error>(self) -> Result<SensorValue, E> {
                Ok(SensorValue::None)
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
