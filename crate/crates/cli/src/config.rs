//! Run configuration: `key=value` files merged with command-line flags.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use spilab_core::measure::{Measure1D, Potential};

use crate::error::{config_err, CliError};

/// Keys accepted in config files and as flags.
pub const KNOWN_KEYS: &[&str] = &[
    "preset",
    "params",
    "expr",
    "domain",
    "nodes",
    "tail-tol",
    "seed",
    "out",
    "format",
    "kappa-grid",
    "k",
    "p-set",
    "r-grid",
    "trials",
    "ess",
    "pipeline",
    "input",
    "r0",
    "c-mc",
    "c-poincare",
    "b-star",
    "psi",
    "n-max",
    "pr-n",
    "phi-grid",
    "d",
    "c-const",
    "c-lsi",
];

/// Keys that do not change results and stay out of the config hash.
const UNHASHED: &[&str] = &["out"];

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("config line {}: expected key=value", i + 1));
        };
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return config_err(format!("config line {}: unknown key '{key}'", i + 1));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Settings {
    /// File values first, then flags on top.
    pub fn merge(command: &str, file: BTreeMap<String, String>, flags: BTreeMap<String, String>) -> Self {
        let mut values = file;
        values.extend(flags);
        Self {
            command: command.to_string(),
            values,
        }
    }

    /// SHA-256 of the subcommand and the sorted effective settings.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.values {
            if UNHASHED.contains(&k.as_str()) {
                continue;
            }
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => parse_f64(key, s),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|s| parse_f64(key, s)).transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .or_else(|_| config_err(format!("{key}: expected a non-negative integer, got '{s}'"))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        match self.get("seed") {
            None => Ok(0),
            Some(s) => s.parse().or_else(|_| config_err(format!("seed: expected an unsigned integer, got '{s}'"))),
        }
    }

    /// Ascending grid: a comma list or `geom:lo:hi:count`.
    pub fn grid_or(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        parse_grid(key, self.get(key).unwrap_or(default))
    }

    pub fn u32_list_or(&self, key: &str, default: &str) -> Result<Vec<u32>, CliError> {
        let src = self.get(key).unwrap_or(default);
        let v: Result<Vec<u32>, CliError> = src
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .or_else(|_| config_err(format!("{key}: expected integers, got '{t}'")))
            })
            .collect();
        let v = v?;
        check_sorted(key, &v.iter().map(|&x| x as f64).collect::<Vec<_>>())?;
        Ok(v)
    }

    pub fn out_dir(&self) -> &str {
        self.get("out").unwrap_or("out")
    }

    pub fn formats(&self) -> Result<Formats, CliError> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for t in self.get("format").unwrap_or("csv,json").split(',') {
            match t.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return config_err(format!("format: unknown format '{other}' (csv, json, svg)")),
            }
        }
        Ok(f)
    }

    /// Potential from `expr` or `preset` + `params`.
    pub fn potential(&self, default_preset: &str) -> Result<Potential, CliError> {
        match (self.get("expr"), self.get("preset")) {
            (Some(_), Some(_)) => config_err("give either expr or preset, not both"),
            (Some(src), None) => Ok(Potential::expression(src)?),
            (None, preset) => {
                let params = match self.get("params") {
                    None => Vec::new(),
                    Some(s) => parse_list("params", s)?,
                };
                Ok(Potential::preset(preset.unwrap_or(default_preset), &params)?)
            }
        }
    }

    pub fn domain(&self) -> Result<(f64, f64), CliError> {
        let s = self.get("domain").unwrap_or("-10:10");
        let Some((a, b)) = s.split_once(':') else {
            return config_err(format!("domain: expected lo:hi, got '{s}'"));
        };
        let (lo, hi) = (parse_f64("domain", a)?, parse_f64("domain", b)?);
        if !(lo < hi) {
            return config_err(format!("domain: need lo < hi, got {lo}:{hi}"));
        }
        Ok((lo, hi))
    }

    pub fn measure(&self, default_preset: &str) -> Result<Measure1D, CliError> {
        let potential = self.potential(default_preset)?;
        let domain = self.domain()?;
        let nodes = self.usize_or("nodes", 2001)?;
        let tail_tol = self.f64_or("tail-tol", 1e-10)?;
        Ok(Measure1D::build(potential, domain, nodes, tail_tol)?)
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .map_or_else(|| config_err(format!("{key}: expected a number, got '{t}'")), Ok),
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| parse_f64(key, t)).collect()
}

fn check_sorted(key: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return config_err(format!("{key}: empty grid"));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return config_err(format!("{key}: grid must be strictly ascending"));
    }
    Ok(())
}

pub fn parse_grid(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let v = if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return config_err(format!("{key}: expected geom:lo:hi:count"));
        }
        let lo = parse_f64(key, parts[0])?;
        let hi = parse_f64(key, parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .or_else(|_| config_err(format!("{key}: bad point count '{}'", parts[2])))?;
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return config_err(format!("{key}: need 0 < lo < hi and count >= 2"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else if i == 0 {
                    lo
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    } else {
        parse_list(key, s)?
    };
    check_sorted(key, &v)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let m = parse_config_text("# run\npreset = gaussian\nnodes=500 # fine\n\n").unwrap();
        assert_eq!(m["preset"], "gaussian");
        assert_eq!(m["nodes"], "500");
        assert!(parse_config_text("bogus=1").is_err());
        assert!(parse_config_text("nodes").is_err());
    }

    #[test]
    fn flags_win_and_hash_ignores_out() {
        let file = parse_config_text("nodes=500\nseed=1\nout=a").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("nodes".to_string(), "800".to_string());
        let s = Settings::merge("analyze", file.clone(), flags.clone());
        assert_eq!(s.get("nodes"), Some("800"));
        let mut other = s.clone();
        other.values.insert("out".into(), "b".into());
        assert_eq!(s.hash(), other.hash());
        other.values.insert("seed".into(), "2".into());
        assert_ne!(s.hash(), other.hash());
        assert_ne!(s.hash(), Settings::merge("spectrum", file, flags).hash());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("g", "0.1, 0.5,1").unwrap(), vec![0.1, 0.5, 1.0]);
        let g = parse_grid("g", "geom:1e-4:1:5").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[4], 1.0);
        assert!(parse_grid("g", "1,0.5").is_err());
        assert!(parse_grid("g", "").is_err());
        assert!(parse_grid("g", "geom:0:1:5").is_err());
    }
}
