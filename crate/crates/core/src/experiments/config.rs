use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Flat `key = value` configuration; `#` starts a comment.
///
/// Every lookup records the value actually used, defaults included, so the
/// resolved configuration can be written next to the results.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: Mutex<BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {k}", lineno + 1)));
            }
        }
        Ok(Self { values, resolved: Mutex::default() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.lock().unwrap().insert(key.to_string(), value);
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let v = match self.values.get(key) {
            Some(s) => parse_number(s).ok_or_else(|| Error::Parse(format!("{key}: not a number: {s}")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        let v = match self.values.get(key) {
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("{key}: not a nonnegative integer: {s}")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = match self.values.get(key) {
            Some(s) => s
                .split(',')
                .map(|t| parse_number(t.trim()).ok_or_else(|| Error::Parse(format!("{key}: bad list entry {t}"))))
                .collect::<Result<Vec<_>>>()?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(Error::InvalidArgument(format!("{key} must not be empty")));
        }
        self.record(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    pub fn choice<T: FromStr<Err = Error> + fmt::Display>(&self, key: &str, default: T) -> Result<T> {
        let v = match self.values.get(key) {
            Some(s) => s.parse()?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Fails on keys that no lookup has consumed.
    pub fn ensure_consumed(&self) -> Result<()> {
        let used = self.resolved.lock().unwrap();
        let unknown: Vec<&str> = self.values.keys().filter(|k| !used.contains_key(*k)).map(|k| k.as_str()).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    /// `key = value` lines for every value looked up so far.
    pub fn resolved(&self) -> String {
        self.resolved.lock().unwrap().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Decimal numbers and simple fractions such as `1/24`.
fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn parses_and_resolves() {
        let cfg =
            Config::parse("# header\nh = 1/24\nn_max=3 # trailing\nradii = 0.5, 1\nboundary = dirichlet\n").unwrap();
        assert!((cfg.f64("h", 0.1).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(cfg.usize("n_max", 1).unwrap(), 3);
        assert_eq!(cfg.list("radii", &[1.0]).unwrap(), vec![0.5, 1.0]);
        assert_eq!(cfg.choice("boundary", Boundary::Neumann).unwrap(), Boundary::Dirichlet);
        assert_eq!(cfg.f64("tol", 1e-3).unwrap(), 1e-3);
        cfg.ensure_consumed().unwrap();
        assert!(cfg.resolved().contains("tol = 0.001\n"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Config::parse("novalue\n").is_err());
        assert!(Config::parse("a = 1\na = 2\n").is_err());
        let cfg = Config::parse("h = abc\ntypo = 1\n").unwrap();
        assert!(cfg.f64("h", 0.1).is_err());
        assert!(cfg.ensure_consumed().is_err());
        assert!(Config::parse("h = -1").unwrap().positive("h", 1.0).is_err());
    }
}
