//! Optional flat `key = value` config files.
//!
//! Each entry becomes a `--key value` flag spliced in right after the
//! subcommand, so the config fills in anything not given on the command
//! line. Keys given on the command line win. `key = true` becomes a bare
//! switch and `key = false` is dropped.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::CliError;

/// A parsed config file: `(key, value)` pairs in file order, keys in
/// `kebab-case`.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("line {}: bad key `{key}`", i + 1)));
        }
        let value = value.trim().trim_matches('"').to_string();
        entries.push((key, value));
    }
    Ok(entries)
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(k, _)| k))
}

/// Removes `--config <path>` from `args` and splices the file's entries in
/// after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg.to_str() {
            Some("--config") => {
                let p = it
                    .next()
                    .ok_or_else(|| CliError::Config("--config needs a path".into()))?;
                path = Some(p);
            }
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(arg),
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let entries = parse(&text)?;

    // the subcommand is the first non-flag argument after the program name
    let Some(sub) = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(rest);
    };
    let sub = sub + 1;
    let given: Vec<String> = rest[sub + 1..]
        .iter()
        .filter_map(|a| a.to_str().and_then(flag_name).map(str::to_string))
        .collect();
    let mut spliced = Vec::new();
    for (key, value) in entries {
        if given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => spliced.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                spliced.push(OsString::from(format!("--{key}")));
                spliced.push(OsString::from(value));
            }
        }
    }
    rest.splice(sub + 1..sub + 1, spliced);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_flat_pairs() {
        let e = parse("# comment\nh_max = 3\n\nrefit=true\noutput = \"a b.csv\"\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("h-max".to_string(), "3".to_string()),
                ("refit".to_string(), "true".to_string()),
                ("output".to_string(), "a b.csv".to_string()),
            ]
        );
        assert!(parse("no equals sign").is_err());
        assert!(parse("config = x").is_err());
    }

    #[test]
    fn command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        fs::write(&cfg, "k = 2\nseed = 9\nverbose = false\nrefit = true\n").unwrap();
        let args = os(&["shapecode", "sweep", "--config", cfg.to_str().unwrap(), "--k=5"]);
        let out = expand(args).unwrap();
        assert_eq!(out, os(&["shapecode", "sweep", "--seed", "9", "--refit", "--k=5"]));
    }

    #[test]
    fn no_config_is_identity() {
        let args = os(&["shapecode", "train", "--corpus", "x"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
