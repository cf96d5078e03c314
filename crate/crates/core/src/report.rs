//! Structured verification records and the JSON report envelope.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "ultranorm/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Combined status: any fail wins, then any inconclusive.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A float that survives JSON: non-finite values are written as the
/// strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured(pub f64);

impl Serialize for Measured {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Measured {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Measured(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(Measured(f64::INFINITY)),
                "-inf" => Ok(Measured(f64::NEG_INFINITY)),
                "nan" => Ok(Measured(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// One certified inequality or identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The inequality or identity being checked, as a formula.
    pub anchor: String,
    pub status: Status,
    #[serde(default)]
    pub measured: BTreeMap<String, Measured>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, Measured>,
    #[serde(default)]
    pub grid: BTreeMap<String, Measured>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, status: Status) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            grid: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn measure(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.to_string(), Measured(v));
        self
    }

    pub fn tol(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), Measured(v));
        self
    }

    pub fn grid_meta(mut self, key: &str, v: f64) -> Self {
        self.grid.insert(key.to_string(), Measured(v));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// Downgrades the status; never upgrades it.
    pub fn with_status(mut self, s: Status) -> Self {
        self.status = self.status.and(s);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub status: Status,
}

impl Summary {
    pub fn of(checks: &[CheckRecord]) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        let (pass, fail, inconclusive) = (count(Status::Pass), count(Status::Fail), count(Status::Inconclusive));
        let status = if fail > 0 {
            Status::Fail
        } else if inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        Self {
            pass,
            fail,
            inconclusive,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub command: String,
    /// The resolved configuration, defaults included.
    pub config: serde_json::Value,
    /// Names of the test functions the checks range over.
    pub family: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(
        command: impl Into<String>,
        config: serde_json::Value,
        family: Vec<String>,
        checks: Vec<CheckRecord>,
    ) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config_hash: config_hash(&config),
            generated_at: None,
            command: command.into(),
            config,
            family,
            summary: Summary::of(&checks),
            checks,
        }
    }

    /// Recomputes the summary from the records.
    pub fn is_consistent(&self) -> bool {
        self.summary == Summary::of(&self.checks) && self.schema == SCHEMA
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.summary.status)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// 0 pass, 1 any fail, 3 inconclusive without failures.
pub fn exit_code(s: Status) -> i32 {
    match s {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 3,
    }
}

/// SHA-256 of the compact JSON encoding.
pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_combination() {
        assert_eq!(Status::Pass.and(Status::Inconclusive), Status::Inconclusive);
        assert_eq!(Status::Inconclusive.and(Status::Fail), Status::Fail);
        assert_eq!(Status::Pass.and(Status::Pass), Status::Pass);
    }

    #[test]
    fn non_finite_round_trip() {
        let r = CheckRecord::new("c", "a <= b", Status::Pass)
            .measure("x", f64::INFINITY)
            .measure("y", f64::NEG_INFINITY)
            .measure("z", 0.1 + 0.2);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"inf\""));
        let back: CheckRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn summary_and_exit_codes() {
        let checks = vec![
            CheckRecord::new("a", "", Status::Pass),
            CheckRecord::new("b", "", Status::Inconclusive),
        ];
        let rep = VerificationReport::new("verify", serde_json::json!({"k": 1}), vec![], checks);
        assert_eq!(rep.exit_code(), 3);
        assert!(rep.is_consistent());
        let text = rep.to_json().unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(rep.config_hash.len(), 64);
    }
}
