//! `--config FILE`: a JSON object whose keys are flag names. Its flags are
//! spliced in right after the subcommand, ahead of the explicit ones, so
//! explicit flags win.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::CliError;

pub fn expand_config(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let value = iter
                .next()
                .ok_or_else(|| CliError::usage("--config needs a file argument"))?;
            path = Some(value);
        } else if let Some(value) = text.strip_prefix("--config=") {
            path = Some(OsString::from(value));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let body = fs::read_to_string(&path).map_err(|e| {
        CliError::usage(format!("cannot read config {}: {e}", path.to_string_lossy()))
    })?;
    let flags = config_flags(&body)?;
    let at = rest
        .iter()
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, flags);
    Ok(rest)
}

fn config_flags(body: &str) -> Result<Vec<OsString>, CliError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| CliError::usage(format!("config is not valid JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::usage("config must be a JSON object"));
    };
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            Value::Bool(true) => {
                out.push(flag.into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(" "),
            Value::Object(_) => {
                return Err(CliError::usage(format!("config key {key:?} has an object value")))
            }
        };
        out.push(flag.into());
        out.push(text.into());
    }
    Ok(out)
}
