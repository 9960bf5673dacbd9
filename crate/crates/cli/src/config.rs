//! Flat `key = value` config files and the effective-config echo.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value
//! ```
//!
//! Keys are long flag names (`field`, `field-file`, `resolution`, ...; `_`
//! and `-` are interchangeable, a leading `--` is allowed). Boolean flags take
//! `true` or `false`. `set` and `tol` may repeat. Keys that belong to another
//! subcommand are ignored; keys no subcommand knows are an error.

use std::collections::BTreeSet;

use clap::CommandFactory;
use serde_json::{Map, Value};

use crate::args::Cli;
use crate::error::CliError;

/// Flags that are alternatives to each other; a config value is dropped when
/// the command line sets any member of its group.
const EXCLUSIVE: &[&[&str]] = &[&["field", "expr", "field-file"], &["point", "auto"], &["helmholtz", "wave"]];
/// Repeatable flags; config entries go before the command-line ones.
const REPEATABLE: &[&str] = &["set", "tol"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage(format!("config line {}: config files cannot include others", n + 1)));
        }
        out.push(Entry { key, value: v.trim().to_string() });
    }
    Ok(out)
}

fn global_value_flags() -> Vec<String> {
    Cli::command().get_arguments().filter(|a| a.get_action().takes_values()).filter_map(|a| a.get_long().map(|l| format!("--{l}"))).collect()
}

/// Index of the subcommand token in `argv`.
fn subcommand_index(argv: &[String]) -> Option<usize> {
    let with_value = global_value_flags();
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if with_value.iter().any(|f| f == a) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Path given by `--config`, if any.
pub fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}=")))
}

/// Splices config entries into `argv` right after the subcommand name so that
/// flags on the command line take precedence.
pub fn inject(argv: Vec<String>, entries: &[Entry]) -> Result<Vec<String>, CliError> {
    let Some(at) = subcommand_index(&argv) else { return Ok(argv) };
    let root = Cli::command();
    let mut known = BTreeSet::new();
    for a in root.get_arguments() {
        known.extend(a.get_long().map(str::to_string));
    }
    let sub = root.get_subcommands().find(|s| s.get_name() == argv[at]);
    let mut local = BTreeSet::new();
    let mut flags = BTreeSet::new();
    for s in root.get_subcommands() {
        for a in s.get_arguments() {
            if let Some(l) = a.get_long() {
                known.insert(l.to_string());
            }
        }
    }
    let all_args = root.get_arguments().chain(sub.into_iter().flat_map(|s| s.get_arguments()));
    for a in all_args {
        if let Some(l) = a.get_long() {
            local.insert(l.to_string());
            if !a.get_action().takes_values() {
                flags.insert(l.to_string());
            }
        }
    }
    let mut extra = Vec::new();
    for e in entries {
        if !known.contains(&e.key) {
            return Err(CliError::Usage(format!("config key '{}' is not a known option", e.key)));
        }
        if !local.contains(&e.key) {
            continue;
        }
        let family: &[&str] = EXCLUSIVE.iter().find(|g| g.contains(&e.key.as_str())).copied().unwrap_or(&[]);
        let overridden = if REPEATABLE.contains(&e.key.as_str()) {
            false
        } else {
            given(&argv, &e.key) || family.iter().any(|k| given(&argv, k))
        };
        if overridden {
            continue;
        }
        if flags.contains(&e.key) {
            match e.value.as_str() {
                "true" => extra.push(format!("--{}", e.key)),
                "false" => {}
                v => return Err(CliError::Usage(format!("config key '{}' takes true or false, got '{v}'", e.key))),
            }
        } else {
            extra.push(format!("--{}={}", e.key, e.value));
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, extra);
    Ok(out)
}

fn flatten(prefix: Option<&str>, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(Some(k), v, out);
            }
        }
        Value::Array(items) => {
            for item in items {
                flatten(prefix, item, out);
            }
        }
        Value::Null => {}
        Value::String(s) => out.extend(prefix.map(|k| (k.replace('_', "-"), s.clone()))),
        other => out.extend(prefix.map(|k| (k.replace('_', "-"), other.to_string()))),
    }
}

/// Every effective setting as `key = value` pairs, in config-file form.
pub fn effective(command: &str, args: &Value, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = vec![("command".to_string(), command.to_string())];
    out.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    flatten(None, args, &mut out);
    // a later `--set a=..` replaces an earlier one
    let name = |kv: &(String, String)| REPEATABLE.contains(&kv.0.as_str()).then(|| (kv.0.clone(), kv.1.split('=').next().unwrap_or("").trim().to_string()));
    let mut keep = vec![true; out.len()];
    for i in 0..out.len() {
        if let Some(n) = name(&out[i]) {
            keep[i] = !out[i + 1..].iter().any(|o| name(o).as_ref() == Some(&n));
        }
    }
    let mut it = keep.into_iter();
    out.retain(|_| it.next().unwrap_or(true));
    out
}

/// The same pairs as a JSON object; repeated keys become arrays.
pub fn to_json(pairs: &[(String, String)]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        match m.get_mut(k) {
            Some(Value::Array(a)) => a.push(Value::String(v.clone())),
            Some(prev) => *prev = Value::Array(vec![prev.clone(), Value::String(v.clone())]),
            None => {
                let val = if REPEATABLE.contains(&k.as_str()) { Value::Array(vec![Value::String(v.clone())]) } else { Value::String(v.clone()) };
                m.insert(k.clone(), val);
            }
        }
    }
    Value::Object(m)
}
