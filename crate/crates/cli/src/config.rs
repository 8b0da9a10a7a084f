//! `key = value` config files supplying default flags.
//!
//! The file's entries become flags inserted right after the subcommand
//! name, ahead of anything typed on the command line. Repeated flags
//! override earlier ones, so explicit flags win.

use std::path::Path;

pub const SUBCOMMANDS: [&str; 4] = ["expand", "bound", "freq", "verify"];

/// Parses config text into flags. Keys may be written with or without the
/// leading `--` and with `_` or `-`; `true` stands for a bare switch and
/// `false` drops it.
pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected `key = value`, got {line:?}", i + 1));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        if key == "config" {
            return Err(format!("config line {}: config files cannot include other config files", i + 1));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            "true" => out.push(flag),
            "false" => {}
            v => {
                out.push(flag);
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Finds a `--config` value in raw arguments.
fn config_path(args: &[String]) -> Option<&str> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            return None;
        }
        if a == "--config" {
            return it.next().map(String::as_str);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p);
        }
    }
    None
}

/// Returns `args` with the flags of the referenced config file spliced in
/// after the subcommand, or unchanged when there is no `--config`.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(path)).map_err(|e| format!("cannot read config file {path:?}: {e}"))?;
    let flags = parse_config(&text)?;
    let at = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map_or(args.len(), |i| i + 2);
    let mut out = args;
    out.splice(at..at, flags);
    Ok(out)
}
