//! Flat `key = value` configuration with dotted keys.
//!
//! Layers apply in order defaults < file < flags < `--set`; every key must
//! be known to the command. The echo lists `command` and every key, sorted.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Default,
    File { path: String, line: usize },
    Flag(String),
    Set,
    Resolved,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag(flag) => write!(f, "flag {flag}"),
            Origin::Set => write!(f, "--set"),
            Origin::Resolved => write!(f, "resolved"),
        }
    }
}

/// One user-supplied assignment, before the command's keys are known.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
}

/// Parses a config file; the optional `command` entry is returned separately.
pub fn parse_file(text: &str, path: &str) -> Result<(Option<String>, Vec<Assignment>), CliError> {
    let mut command = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = Origin::File { path: path.to_string(), line: i + 1 };
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{origin}: expected 'key = value', got '{line}'")));
        };
        let (k, v) = (k.trim(), v.trim());
        if !valid_key(k) {
            return Err(CliError::Usage(format!("{origin}: malformed key '{k}'")));
        }
        if k == "command" {
            command = Some(v.to_string());
        } else {
            out.push(Assignment { key: k.into(), value: v.into(), origin });
        }
    }
    Ok((command, out))
}

pub fn parse_set(s: &str) -> Result<Assignment, CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{s}'")))?;
    let k = k.trim();
    if !valid_key(k) {
        return Err(CliError::Usage(format!("--set: malformed key '{k}'")));
    }
    Ok(Assignment { key: k.into(), value: v.trim().into(), origin: Origin::Set })
}

/// Reads `--config` (checking its `command`) and appends flags and `--set`.
pub fn gather(
    command: &str,
    file: Option<&Path>,
    flags: Vec<(&str, Option<String>, &str)>,
    sets: &[String],
) -> Result<Vec<Assignment>, CliError> {
    let mut out = Vec::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let (cmd, entries) = parse_file(&text, &path.display().to_string())?;
        if let Some(cmd) = cmd {
            if cmd != command {
                return Err(CliError::Usage(format!("{} is a '{cmd}' config, not '{command}'", path.display())));
            }
        }
        out.extend(entries);
    }
    for (key, value, flag) in flags {
        if let Some(value) = value {
            out.push(Assignment { key: key.into(), value, origin: Origin::Flag(flag.into()) });
        }
    }
    for s in sets {
        out.push(parse_set(s)?);
    }
    Ok(out)
}

/// Value of `key` after all layers, if it was assigned at all.
pub fn last_value<'a>(layers: &'a [Assignment], key: &str) -> Option<&'a str> {
    layers.iter().rev().find(|a| a.key == key).map(|a| a.value.as_str())
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

#[derive(Debug, Clone)]
pub struct Config {
    command: String,
    entries: BTreeMap<String, Entry>,
}

impl Config {
    pub fn resolve(command: &str, defaults: &[(&str, String)], layers: &[Assignment]) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Entry> = defaults
            .iter()
            .map(|(k, v)| (k.to_string(), Entry { value: v.clone(), origin: Origin::Default }))
            .collect();
        for a in layers {
            match entries.get_mut(&a.key) {
                Some(e) => *e = Entry { value: a.value.clone(), origin: a.origin.clone() },
                None => return Err(CliError::Usage(format!("{}: unknown key '{}' for '{command}'", a.origin, a.key))),
            }
        }
        Ok(Self { command: command.into(), entries })
    }

    pub fn str(&self, key: &str) -> &str {
        &self.entry(key).value
    }

    fn entry(&self, key: &str) -> &Entry {
        self.entries.get(key).unwrap_or_else(|| panic!("key '{key}' has no default"))
    }

    fn invalid(&self, key: &str, what: &str) -> CliError {
        let e = self.entry(key);
        CliError::Usage(format!("{}: {key} = '{}': expected {what}", e.origin, e.value))
    }

    pub fn get<T: FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        self.str(key).parse().map_err(|_| self.invalid(key, what))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.get(key, "a number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid(key, "a finite number"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key, "a nonnegative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        self.get(key, "true or false")
    }

    /// `auto` gives `None`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    /// Comma-separated numbers; an empty value is an empty list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self.str(key);
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.invalid(key, "a comma-separated list of numbers"))
    }

    /// Parses with the type's own `FromStr`, keeping its message.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let e = self.entry(key);
        e.value.parse().map_err(|err: T::Err| CliError::Usage(format!("{}: {key}: {err}", e.origin)))
    }

    /// Replaces a value (e.g. `auto`) by what was actually used.
    pub fn set_resolved(&mut self, key: &str, value: String) {
        self.entries.insert(key.into(), Entry { value, origin: Origin::Resolved });
    }

    pub fn set(&mut self, key: &str, value: String, origin: Origin) {
        self.entries.insert(key.into(), Entry { value, origin });
    }

    pub fn with_command(&self, command: &str) -> Self {
        Self { command: command.into(), entries: self.entries.clone() }
    }

    /// Keeps only the keys accepted by `pred`.
    pub fn retain(&mut self, pred: impl Fn(&str) -> bool) {
        self.entries.retain(|k, _| pred(k));
    }

    pub fn echo(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        for (k, e) in &self.entries {
            out.push_str(&format!("{k} = {}\n", e.value));
        }
        out
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }
}

/// Shortest round-trip representation, so an echoed value parses back exactly.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Vec<(&'static str, String)> {
        vec![("solver.alpha", "0.5".into()), ("grid.n", "64".into()), ("sweep.alpha", String::new())]
    }

    #[test]
    fn layers_apply_in_order() {
        let (cmd, mut layers) = parse_file("# c\ncommand = simulate\nsolver.alpha = 0.25 # x\n\ngrid.n=32\n", "f").unwrap();
        assert_eq!(cmd.as_deref(), Some("simulate"));
        layers.push(Assignment { key: "grid.n".into(), value: "16".into(), origin: Origin::Flag("--n".into()) });
        layers.push(parse_set("solver.alpha=0.3").unwrap());
        let c = Config::resolve("simulate", &defaults(), &layers).unwrap();
        assert_eq!(c.f64("solver.alpha").unwrap(), 0.3);
        assert_eq!(c.usize("grid.n").unwrap(), 16);
        assert!(c.f64_list("sweep.alpha").unwrap().is_empty());
        assert_eq!(c.echo(), "command = simulate\ngrid.n = 16\nsolver.alpha = 0.3\nsweep.alpha = \n");
    }

    #[test]
    fn diagnostics_name_the_line_and_key() {
        let e = parse_file("solver.alpha = 1\nnonsense\n", "cfg.txt").unwrap_err();
        assert_eq!(e.code(), 2);
        assert!(e.to_string().contains("cfg.txt:2"), "{e}");
        let (_, layers) = parse_file("solver.alpah = 1\n", "cfg.txt").unwrap();
        let e = Config::resolve("simulate", &defaults(), &layers).unwrap_err();
        assert!(e.to_string().contains("cfg.txt:1") && e.to_string().contains("solver.alpah"), "{e}");
        let (_, layers) = parse_file("grid.n = many\n", "cfg.txt").unwrap();
        let c = Config::resolve("simulate", &defaults(), &layers).unwrap();
        let e = c.usize("grid.n").unwrap_err();
        assert!(e.to_string().contains("cfg.txt:1") && e.to_string().contains("grid.n"), "{e}");
        assert!(parse_set("novalue").is_err());
    }

    #[test]
    fn numbers_round_trip_through_the_echo() {
        for v in [0.1, 1.0 / 3.0, 1e-5, 2.0, std::f64::consts::TAU] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
