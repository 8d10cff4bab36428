//! `--config file.json` support.
//!
//! The file holds a JSON object whose keys are long flag names. Its entries
//! are turned into `--key=value` arguments and spliced in right after the
//! subcommand name, ahead of the user's own flags. Every argument is declared
//! as overriding itself, so a flag given on the command line wins over the
//! same flag from the file.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::CliError;

pub const SUBCOMMANDS: [&str; 5] = ["basis", "bounds", "seminorms", "hstar", "laws"];

/// Path given with `--config`, if any.
fn config_path(args: &[OsString]) -> Result<Option<String>, CliError> {
    let mut found = None;
    let mut iter = args.iter().skip(1);
    while let Some(arg) = iter.next() {
        let Some(arg) = arg.to_str() else { continue };
        if arg == "--" {
            break;
        }
        if arg == "--config" {
            let value = iter
                .next()
                .and_then(|v| v.to_str())
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            found = Some(value.to_string());
        } else if let Some(value) = arg.strip_prefix("--config=") {
            found = Some(value.to_string());
        }
    }
    Ok(found)
}

fn flag_value(key: &str, value: &Value) -> Result<Option<String>, CliError> {
    let text = match value {
        Value::Null | Value::Bool(false) => return Ok(None),
        Value::Bool(true) => return Ok(Some(format!("--{key}"))),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .map(|v| match v {
                Value::Number(n) => Ok(n.to_string()),
                Value::String(s) => Ok(s.clone()),
                _ => Err(CliError::Usage(format!("config key {key:?}: unsupported list item {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        Value::Object(_) => {
            return Err(CliError::Usage(format!("config key {key:?}: nested objects are not flags")))
        }
    };
    Ok(Some(format!("--{key}={text}")))
}

/// Returns `args` with the flags from the config file spliced in.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {path} is not valid JSON: {e}")))?;
    let Value::Object(map) = doc else {
        return Err(CliError::Usage(format!("config {path} must hold a JSON object")));
    };

    let mut position = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)));
    let mut args = args;
    let mut extra = Vec::new();
    for (key, value) in &map {
        if key == "command" {
            let Value::String(name) = value else {
                return Err(CliError::Usage("config key \"command\" must be a string".into()));
            };
            if position.is_none() {
                args.insert(1, OsString::from(name));
                position = Some(1);
            }
            continue;
        }
        if key == "config" {
            continue;
        }
        if let Some(flag) = flag_value(key, value)? {
            extra.push(OsString::from(flag));
        }
    }
    let at = position.map_or(1, |p| p + 1);
    args.splice(at..at, extra);
    Ok(args)
}
