//! Keyed-text run configuration.
//!
//! A config file holds `key = value` lines, optionally grouped under `[run]` (experiment,
//! seed, out, format) and `[params]`. Keys outside any section go to `[run]` when they
//! are run keys and to `[params]` otherwise. Lines starting with `#` or `;` are comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

const RUN_KEYS: [&str; 4] = ["experiment", "seed", "out", "format"];

/// Keys read from a config file, before defaults are applied.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub params: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = FileConfig::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = n + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Config(format!("line {lineno}: unterminated section header")))?
                    .trim();
                if name != "run" && name != "params" {
                    return Err(CliError::Config(format!("line {lineno}: unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {lineno}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::Config(format!("line {lineno}: empty key")));
            }
            let is_run = match section.as_deref() {
                Some("run") => {
                    if !RUN_KEYS.contains(&key) {
                        return Err(CliError::Config(format!("line {lineno}: unknown run key {key:?}")));
                    }
                    true
                }
                Some(_) => false,
                None => RUN_KEYS.contains(&key),
            };
            let slot = if is_run { format!("run.{key}") } else { format!("params.{key}") };
            if !seen.insert(slot) {
                return Err(CliError::Config(format!("line {lineno}: duplicate key {key:?}")));
            }
            if !is_run {
                cfg.params.insert(key.to_string(), value.to_string());
                continue;
            }
            match key {
                "experiment" => cfg.experiment = Some(value.to_string()),
                "seed" => {
                    cfg.seed = Some(
                        value
                            .parse()
                            .map_err(|_| CliError::Config(format!("line {lineno}: seed must be an unsigned integer")))?,
                    )
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(Format::parse(value)?),
                _ => unreachable!("run keys are checked above"),
            }
        }
        Ok(cfg)
    }
}

/// Splits a `key=value` command-line override.
pub fn parse_override(arg: &str) -> Result<(String, String), CliError> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Config(format!("expected key=value, got {arg:?}"))),
    }
}

/// One declared experiment parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

/// Parameters resolved against an experiment's declared keys.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Fills defaults and rejects keys the experiment does not declare.
    pub fn resolve(specs: &[ParamSpec], given: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(key) = given.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            let known: Vec<&str> = specs.iter().map(|s| s.name).collect();
            return Err(CliError::Config(format!("unknown key {key:?} (accepted: {})", known.join(", "))));
        }
        let values = specs
            .iter()
            .map(|s| (s.name.to_string(), given.get(s.name).cloned().unwrap_or_else(|| s.default.to_string())))
            .collect();
        Ok(Params { values })
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("undeclared parameter {key}"))
    }

    fn bad(key: &str, value: &str, what: &str) -> CliError {
        CliError::Config(format!("{key} = {value:?} is not {what}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = self.raw(key);
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Self::bad(key, v, "a finite number"))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let x = self.f64(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Self::bad(key, self.raw(key), "a positive number"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let v = self.raw(key);
        v.parse().map_err(|_| Self::bad(key, v, "a non-negative integer"))
    }

    pub fn string(&self, key: &str) -> &str {
        self.raw(key)
    }

    fn list_items(&self, key: &str) -> Result<Vec<String>, CliError> {
        let v = self.raw(key);
        let inner = v
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Self::bad(key, v, "a bracketed list like [a,b]"))?;
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.list_items(key)?
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Self::bad(key, s, "a finite number")))
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        self.list_items(key)?
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| Self::bad(key, s, "a non-negative integer")))
            .collect()
    }

    /// Parses `[a/b, c/d, ...]`; a bare integer `n` means `n/1`.
    pub fn ratio_list(&self, key: &str) -> Result<Vec<(u64, u64)>, CliError> {
        self.list_items(key)?
            .iter()
            .map(|s| {
                let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
                match (num.trim().parse::<u64>(), den.trim().parse::<u64>()) {
                    (Ok(a), Ok(b)) if b > 0 => Ok((a, b)),
                    _ => Err(Self::bad(key, s, "a ratio like 3/2")),
                }
            })
            .collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub params: Params,
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ParamSpec] = &[
        ParamSpec { name: "depth", default: "0.25", help: "" },
        ParamSpec { name: "ratios", default: "[1/1,3/1]", help: "" },
    ];

    #[test]
    fn sections_and_top_level_keys() {
        let cfg = FileConfig::parse("seed = 7\n# note\n[params]\ndepth = 0.5\n[run]\nformat = json\n").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.params.get("depth").map(String::as_str), Some("0.5"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(FileConfig::parse("[extra]\n").is_err());
        assert!(FileConfig::parse("depth\n").is_err());
        assert!(FileConfig::parse("depth = 1\ndepth = 2\n").is_err());
        assert!(FileConfig::parse("[run]\ndepth = 1\n").is_err());
        assert!(FileConfig::parse("seed = -1\n").is_err());
    }

    #[test]
    fn defaults_and_unknown_keys() {
        let mut given = BTreeMap::new();
        let p = Params::resolve(SPECS, &given).unwrap();
        assert_eq!(p.f64("depth").unwrap(), 0.25);
        assert_eq!(p.ratio_list("ratios").unwrap(), vec![(1, 1), (3, 1)]);
        given.insert("width".to_string(), "3".to_string());
        assert!(matches!(Params::resolve(SPECS, &given), Err(CliError::Config(_))));
    }

    #[test]
    fn typed_accessors_reject_garbage() {
        let mut given = BTreeMap::new();
        given.insert("depth".to_string(), "abc".to_string());
        given.insert("ratios".to_string(), "[1/0]".to_string());
        let p = Params::resolve(SPECS, &given).unwrap();
        assert!(p.f64("depth").is_err());
        assert!(p.ratio_list("ratios").is_err());
        assert_eq!(parse_override("a=b").unwrap(), ("a".to_string(), "b".to_string()));
        assert!(parse_override("=b").is_err());
    }
}
