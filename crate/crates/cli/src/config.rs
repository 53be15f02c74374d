//! Flat `key = value` configuration files.
//!
//! Keys are long flag names; `_` and `-` are interchangeable. Blank lines and
//! lines starting with `#` are skipped. A flag given on the command line
//! always wins over the file.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "input", "output", "column", "kernel", "sigma", "ridge", "level", "d", "method", "variant",
    "boot-reps", "smooth", "seed", "runs", "oracle-size", "table", "current", "generate", "n0", "n",
    "q", "law", "step", "full-scale", "serial",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("line {}: unknown key '{key}'", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `flag` if given, else the parsed file value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Comma-separated list; an empty `flag` falls through to the file.
    pub fn pick_list<T>(&self, flag: Vec<T>, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(Some(flag));
        }
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Boolean switch: set by the flag, or by `key = true` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cfg = FileConfig::parse("# comment\nsigma = 0.8\nboot_reps=500\n\nlevel = 0.9").unwrap();
        assert_eq!(cfg.pick(None::<f64>, "sigma").unwrap(), Some(0.8));
        assert_eq!(cfg.pick(Some(0.4), "sigma").unwrap(), Some(0.4));
        assert_eq!(cfg.pick(None::<usize>, "boot-reps").unwrap(), Some(500));
        assert_eq!(cfg.pick_or(None::<f64>, "ridge", 0.0).unwrap(), 0.0);
    }

    #[test]
    fn lists_and_switches() {
        let cfg = FileConfig::parse("d = 0.2, 0.1\nfull-scale = true").unwrap();
        assert_eq!(cfg.pick_list(Vec::<f64>::new(), "d").unwrap(), Some(vec![0.2, 0.1]));
        assert_eq!(cfg.pick_list(vec![0.3], "d").unwrap(), Some(vec![0.3]));
        assert!(cfg.switch(false, "full-scale").unwrap());
        assert!(!cfg.switch(false, "serial").unwrap());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(FileConfig::parse("sigma 0.8").is_err());
        assert!(FileConfig::parse("bandwidth = 0.8").is_err());
        let cfg = FileConfig::parse("sigma = wide").unwrap();
        assert!(cfg.pick(None::<f64>, "sigma").is_err());
    }
}
