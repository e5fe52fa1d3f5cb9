//! Versioned JSON document envelope shared by every file format.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

pub(crate) fn current_version() -> String {
    SCHEMA_VERSION.to_string()
}

/// Rejects documents whose top-level `schema_version` is missing or not the current one.
pub fn check_version(value: &Value) -> Result<()> {
    let found = match value.get("schema_version") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(other) => other.to_string(),
        None => {
            return Err(Error::SchemaVersion {
                found: "<missing>".into(),
                expected: SCHEMA_VERSION,
                hint: "add a top-level \"schema_version\": \"1\" field".into(),
            })
        }
    };
    if found == SCHEMA_VERSION {
        return Ok(());
    }
    let hint = match found.parse::<u64>() {
        Ok(n) if n > 1 => format!(
            "document was written by a newer release (schema {n}); upgrade the toolkit to read it"
        ),
        _ => "re-export the document with this release or set \"schema_version\": \"1\" after checking its fields".into(),
    };
    Err(Error::SchemaVersion {
        found,
        expected: SCHEMA_VERSION,
        hint,
    })
}

/// Parses a versioned document. Serde errors keep their line/column positions.
pub fn parse_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: Value = serde_json::from_str(text)?;
    check_version(&value)?;
    Ok(serde_json::from_str(text)?)
}

pub fn from_value<T: DeserializeOwned>(value: Value) -> Result<T> {
    check_version(&value)?;
    Ok(serde_json::from_value(value)?)
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Key-sorted, whitespace-free serialization used for content hashing.
pub fn canonical_json(value: &Value) -> String {
    fn sort(value: &Value) -> Value {
        match value {
            Value::Object(map) => {
                let sorted: std::collections::BTreeMap<&String, Value> =
                    map.iter().map(|(k, v)| (k, sort(v))).collect();
                let mut out = serde_json::Map::new();
                for (k, v) in sorted {
                    out.insert(k.clone(), v);
                }
                Value::Object(out)
            }
            Value::Array(items) => Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn missing_version_is_rejected_with_hint() {
        let err = check_version(&json!({"a": 1})).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }

    #[test]
    fn newer_version_mentions_upgrade() {
        let err = check_version(&json!({"schema_version": "2"})).unwrap_err();
        assert!(err.to_string().contains("newer release"), "{err}");
    }

    #[test]
    fn canonical_json_ignores_key_order() {
        let a = json!({"b": 1, "a": {"y": 2, "x": [3, {"q": 1, "p": 2}]}});
        let b = json!({"a": {"x": [3, {"p": 2, "q": 1}], "y": 2}, "b": 1});
        assert_eq!(canonical_json(&a), canonical_json(&b));
    }
}
