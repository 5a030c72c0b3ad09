//! Config files and seed resolution.
//!
//! A config file holds flag defaults, either as `key = value` lines (`#`
//! starts a comment) or as a flat JSON object. Keys are long flag names;
//! underscores and dashes are interchangeable. Entries are spliced into the
//! argument list ahead of the user's own flags, so explicit flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::{Cli, Command};
use crate::CliError;

pub const SEED_ENV: &str = "CVCLONE_SEED";
pub const DEFAULT_SEED: u64 = 42;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let trimmed = text.trim_start();
    let entries = if trimmed.starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("config: invalid JSON: {e}")))?;
        let object = value.as_object().ok_or_else(|| CliError::Usage("config: expected a JSON object".into()))?;
        object
            .iter()
            .map(|(k, v)| {
                let text = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => n.to_string(),
                    serde_json::Value::Bool(b) => b.to_string(),
                    _ => return Err(CliError::Usage(format!("config: unsupported value for `{k}`"))),
                };
                Ok((k.clone(), text))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            out.push((k.trim().to_string(), v.trim().trim_matches('"').to_string()));
        }
        out
    };
    Ok(entries.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect())
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn long_flags(sub: &clap::Command) -> Vec<String> {
    sub.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect()
}

/// Returns `argv` with config-file entries inserted right after the subcommand.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse_config(&text)?;
    let Some(pos) = argv.iter().position(|a| Command::NAMES.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let root = Cli::command();
    let sub_name = argv[pos].to_string_lossy().into_owned();
    let sub = root.find_subcommand(&sub_name).expect("subcommand exists");
    let mut accepted = long_flags(sub);
    accepted.extend(long_flags(&root));
    let known_elsewhere: Vec<String> = root.get_subcommands().flat_map(long_flags).collect();

    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" || key == "help" || key == "version" {
            return Err(CliError::Usage(format!("config: key `{key}` is not allowed")));
        }
        if accepted.contains(&key) {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        } else if !known_elsewhere.contains(&key) {
            return Err(CliError::Usage(format!("config: unknown key `{key}`")));
        }
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

/// Flag (or config) seed, then `CVCLONE_SEED`, then the default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{SEED_ENV}={s} is not a valid seed: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn key_value_and_json_configs() {
        let kv = parse_config("# comment\nseed = 7\nnoise_b=0.5  # trailing\n\n").unwrap();
        assert_eq!(kv, vec![("seed".into(), "7".into()), ("noise-b".into(), "0.5".into())]);
        let js = parse_config(r#"{"rounds": 1000, "v": 0.25}"#).unwrap();
        assert!(js.contains(&("rounds".into(), "1000".into())));
        assert!(parse_config("no equals sign").is_err());
        assert!(parse_config("[1, 2]").is_err());
    }

    #[test]
    fn flags_follow_config_entries() {
        let dir = std::env::temp_dir().join(format!("cvclone-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "seed = 7\nv = 0.25\ngrid = 32\n").unwrap();
        let argv = os(&["cvclone", "--config", path.to_str().unwrap(), "qkd", "--seed", "9"]);
        let merged = merge_config(argv).unwrap();
        let text: Vec<String> = merged.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(&text[3..], ["qkd", "--seed", "7", "--v", "0.25", "--seed", "9"]);

        fs::write(&path, "bogus = 1\n").unwrap();
        let argv = os(&["cvclone", "--config", path.to_str().unwrap(), "qkd"]);
        assert!(merge_config(argv).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
