//! `--config FILE` support. The file holds `key = value` lines whose keys are
//! long flag names of the chosen subcommand; they are spliced into the
//! argument list ahead of the user's own flags, so explicit flags win.

use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use clap::Command;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got '{line}'", n + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"').to_owned();
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

/// The value of `--config` in `args`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(OsString::from(v));
        }
    }
    None
}

/// Returns `args` with the settings in `text` inserted right after the
/// subcommand name. Malformed lines and unknown keys are errors; clap still
/// validates the values.
pub fn splice_config(command: &Command, args: Vec<OsString>, text: &str) -> Result<Vec<OsString>> {
    let pairs = parse_config(text)?;
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| command.find_subcommand(a.to_string_lossy().as_ref()).map(|c| (i, c)))
    else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(command.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .with_context(|| format!("config key '{key}' is not an option of '{}'", sub.get_name()))?;
        let given = args[pos + 1..].iter().any(|a| {
            let a = a.to_string_lossy();
            let long = format!("--{key}");
            a == long || a.starts_with(&format!("{long}=")) || arg.get_short().is_some_and(|c| a == format!("-{c}"))
        });
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" | "" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" | "off" => {}
                other => bail!("config key '{key}' is a switch; expected true or false, got '{other}'"),
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let pairs = parse_config("# defaults\nk = 5\nkernel_sigma=0.5\n\n--metric = \"euclidean\"\n").unwrap();
        assert_eq!(
            pairs,
            [
                ("k".to_string(), "5".to_string()),
                ("kernel-sigma".to_string(), "0.5".to_string()),
                ("metric".to_string(), "euclidean".to_string())
            ]
        );
        assert!(parse_config("k 5").is_err());
    }
}
