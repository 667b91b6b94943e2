//! JSON envelopes, the `--format table` view and run manifests.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "patstat/1";

/// Prepends `"schema"` to a serialized object.
pub fn envelope<T: Serialize>(body: &T) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), Value::String(SCHEMA.into()));
    match serde_json::to_value(body).expect("output types serialize") {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    Value::Object(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Table,
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Table => table(value),
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some("-".into()),
        Value::Object(o) if o.len() == 2 && o.contains_key("num") && o.contains_key("den") => {
            let (num, den) = (o["num"].as_str()?, o["den"].as_str()?);
            Some(if den == "1" { num.to_string() } else { format!("{num}/{den}") })
        }
        Value::Array(items) if items.iter().all(|i| i.is_number()) => Some(
            items
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ),
        Value::Array(items) => items
            .iter()
            .map(scalar)
            .collect::<Option<Vec<_>>>()
            .map(|parts| parts.join(", ")),
        Value::Object(_) => None,
    }
}

fn table(value: &Value) -> String {
    let mut out = String::new();
    write_table(&mut out, "", value);
    out
}

fn write_table(out: &mut String, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0) + prefix.len();
            for (key, v) in map {
                let name = format!("{prefix}{key}");
                match scalar(v) {
                    Some(text) => {
                        let _ = writeln!(out, "{name:<width$}  {text}");
                    }
                    None => write_table(out, &format!("{name}."), v),
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                write_table(out, &format!("{prefix}{i}."), item);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix}  {}", scalar(other).unwrap_or_default());
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Written next to every output file.
pub fn manifest(subcommand: &str, params: &Value, seed: Option<u64>, outputs: &[(String, &[u8])]) -> Value {
    let checksums: Map<String, Value> = outputs
        .iter()
        .map(|(name, bytes)| (name.clone(), Value::String(sha256_hex(bytes))))
        .collect();
    json!({
        "schema": SCHEMA,
        "tool": "patstat",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "sha256": checksums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_puts_schema_first() {
        let v = envelope(&json!({"a": 1}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"schema":"patstat/1","a":1}"#);
    }

    #[test]
    fn table_view_flattens() {
        let v = json!({"k": 3, "c_k": {"num": "13", "den": "7200"}, "rows": [{"x": true}], "p": [1, 3, 2]});
        let t = table(&v);
        assert!(t.contains("c_k"));
        assert!(t.contains("13/7200"));
        assert!(t.contains("rows.0.x"));
        assert!(t.contains("1 3 2"));
    }

    #[test]
    fn sha_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
