//! Machine-readable report envelope.
//!
//! The envelope is flat JSON with `schema_version: 1`. `canonical_hash` is the
//! SHA-256 of the envelope with `timestamp`, `wall_time_us` and the hash
//! itself removed, serialized with sorted keys; two runs with the same
//! configuration therefore hash identically.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::BoundReport;
use crate::dimension::{DimensionEstimate, FillingVerdict};
use crate::search::{MinimalFillingSet, UnimodalityViolation};
use crate::tables::{DimTableReport, FillingTableReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Serde adapter writing integers as decimal strings.
pub mod decimal {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// [`decimal`] for optional values.
pub mod decimal_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

/// Echo of the run configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arch: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub degree: Option<u32>,
    pub method: String,
    pub trials: usize,
    pub seed: u64,
    /// Fixed modulus, or absent for fresh random primes.
    #[serde(with = "decimal_opt", skip_serializing_if = "Option::is_none", default)]
    pub prime: Option<u64>,
    pub format: String,
    pub extended: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dh: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimReport {
    pub estimate: DimensionEstimate,
    pub bounds: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingReport {
    pub widths: Vec<usize>,
    pub degree: u32,
    pub verdict: FillingVerdict,
    pub dim: u64,
    pub ambient: u64,
    pub thm2_filling_guaranteed: bool,
    pub bottleneck_hits: Vec<usize>,
    pub estimate: DimensionEstimate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub set: MinimalFillingSet,
    pub violations: Vec<UnimodalityViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Dim(DimReport),
    Filling(FillingReport),
    Bounds { widths: Vec<usize>, degree: u32, report: BoundReport },
    Search(SearchReport),
    DimTable(DimTableReport),
    FillingTable(FillingTableReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    pub timestamp: String,
    pub wall_time_us: u64,
    pub status: String,
    pub payload: Payload,
    pub canonical_hash: String,
}

impl ReportEnvelope {
    pub fn new(config: ConfigEcho, payload: Payload, status: &str, timestamp: String, wall_time_us: u64) -> Self {
        let mut env = Self {
            schema_version: SCHEMA_VERSION,
            tool: "polynet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            timestamp,
            wall_time_us,
            status: status.into(),
            payload,
            canonical_hash: String::new(),
        };
        env.canonical_hash = env.compute_hash();
        env
    }

    /// Hash over everything except timing fields and the hash itself.
    pub fn compute_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            for k in ["timestamp", "wall_time_us", "canonical_hash"] {
                obj.remove(k);
            }
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{bound_report, dimension, Architecture, DimensionConfig};

    fn sample(ts: &str, wall: u64) -> ReportEnvelope {
        let arch = Architecture::parse("2,2,3", 2).unwrap();
        let estimate = dimension(&arch, &DimensionConfig::default()).unwrap();
        let bounds = bound_report(&arch).unwrap();
        let config = ConfigEcho { command: "dim".into(), arch: Some(vec![2, 2, 3]), degree: Some(2), prime: Some(2_147_483_647), ..Default::default() };
        ReportEnvelope::new(config, Payload::Dim(DimReport { estimate, bounds }), "ok", ts.into(), wall)
    }

    #[test]
    fn round_trip_and_hash() {
        let a = sample("2026-01-01T00:00:00Z", 10);
        let b = sample("2027-06-01T12:00:00Z", 99);
        assert_eq!(a.canonical_hash, b.canonical_hash);
        assert_eq!(a.canonical_hash.len(), 64);
        let back = ReportEnvelope::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.compute_hash(), a.canonical_hash);
    }

    #[test]
    fn primes_are_strings() {
        let v: serde_json::Value = serde_json::from_str(&sample("t", 0).to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["prime"], "2147483647");
        let field = &v["payload"]["estimate"]["trials"][0]["field"];
        assert!(field["p"].is_string(), "{field}");
    }
}
