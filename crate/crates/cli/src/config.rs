//! Flat `key = value` configuration with command-line overrides. Every lookup
//! is recorded so the resolved configuration can be hashed and unused keys
//! rejected.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use deconv_core::{Error, KernelFamily, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Default)]
pub struct Params {
    raw: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn norm_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

impl Params {
    pub fn parse_file_text(text: &str) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            out.insert(norm_key(k), v.trim().to_string());
        }
        Ok(out)
    }

    /// File values first, then `--key value` / `--key=value` overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut raw = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Self::parse_file_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut it = overrides.iter();
        while let Some(a) = it.next() {
            let Some(key) = a.strip_prefix("--") else {
                return Err(Error::Config(format!("unexpected argument '{a}'")));
            };
            let (k, v) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| Error::Config(format!("--{key} needs a value")))?;
                    (key.to_string(), v.clone())
                }
            };
            raw.insert(norm_key(&k), v);
        }
        Ok(Params { raw, resolved: RefCell::new(BTreeMap::new()) })
    }

    fn record(&self, key: &str, v: String) {
        self.resolved.borrow_mut().insert(key.to_string(), v);
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T> {
        let v = match self.raw.get(key) {
            Some(s) => s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn opt<T: FromStr + ToString>(&self, key: &str) -> Result<Option<T>> {
        match self.raw.get(key) {
            Some(s) => {
                let v = s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        let v = self.raw.get(key).cloned();
        if let Some(s) = &v {
            self.record(key, s.clone());
        }
        v
    }

    pub fn family(&self) -> Result<KernelFamily> {
        let s = self.raw.get("kernel").map(String::as_str).unwrap_or("gaussian");
        let f = KernelFamily::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        self.record("kernel", f.name().to_string());
        Ok(f)
    }

    /// Comma list (`1,2,3`) or `lo:hi:n` for n evenly spaced values.
    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = match self.raw.get(key) {
            Some(s) => parse_list(s).map_err(|m| Error::Config(format!("{key}: {m}")))?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(Error::Config(format!("{key}: list must be non-empty")));
        }
        self.record(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let d: Vec<f64> = default.iter().map(|&x| x as f64).collect();
        let v = self.list(key, &d)?;
        v.iter()
            .map(|&x| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(Error::Config(format!("{key}: '{x}' is not a non-negative integer")))
                }
            })
            .collect()
    }

    /// Keys present in the input but never read.
    pub fn unused(&self) -> Vec<String> {
        let r = self.resolved.borrow();
        self.raw.keys().filter(|k| !r.contains_key(*k)).cloned().collect()
    }

    /// SHA-256 over the sorted resolved `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.resolved.borrow().iter() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad range '{s}'"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad range '{s}'"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad range '{s}'"))?;
        return Ok(match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect()
}
