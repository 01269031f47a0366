//! Run reports and serialization helpers for extended reals.
//!
//! JSON has no infinities, so `±inf` are written as the strings `"inf"` and
//! `"-inf"`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Structured record of one command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the canonical inputs, hex encoded.
    pub inputs_digest: String,
    pub outputs: serde_json::Value,
    pub wall_time_secs: f64,
    pub tool_version: String,
    pub seed: u64,
}

impl RunReport {
    pub fn new(command: &str, inputs: &serde_json::Value, outputs: serde_json::Value, wall_time_secs: f64, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest: digest(inputs),
            outputs,
            wall_time_secs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Hex SHA-256 of the compact JSON rendering of `v`.
pub fn digest(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("values always serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// JSON value for an extended real.
pub fn ext_value(v: f64) -> serde_json::Value {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        v.into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Ext {
    Num(f64),
    Text(String),
}

fn from_ext<E: serde::de::Error>(e: Ext) -> Result<f64, E> {
    match e {
        Ext::Num(v) => Ok(v),
        Ext::Text(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("expected a number or inf, got `{other}`"))),
        },
    }
}

fn to_ext(v: f64) -> Ext {
    if v.is_finite() {
        Ext::Num(v)
    } else {
        Ext::Text(if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        })
    }
}

/// `#[serde(with = "ext_f64")]` for a possibly infinite `f64`.
pub mod ext_f64 {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_ext(*v).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_ext(Ext::deserialize(d)?)
    }
}

/// `#[serde(with = "ext_pair")]` for a pair of extended reals.
pub mod ext_pair {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (to_ext(v.0), to_ext(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Ext, Ext)>::deserialize(d)?;
        Ok((from_ext(a)?, from_ext(b)?))
    }
}

/// `#[serde(with = "ext_vec")]` for a vector of extended reals.
pub mod ext_vec {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| to_ext(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Ext>::deserialize(d)?.into_iter().map(from_ext).collect()
    }
}
