//! `key = value` run configuration: built-in defaults, then an optional
//! config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use qarray_core::C64;

use crate::CliError;

/// A recognized key with its default value.
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

pub const ENCODE_KEYS: &[Key] = &[
    key("m", "16", "time bins per integration window"),
    key("r", "4", "frequency bands"),
    key("n", "2", "array sites"),
    key("eps", "0.01", "mean photon number per time bin"),
    key("layout", "both", "sequential | parallel | both"),
    key("branching", "enumerate", "enumerate | sample (measurement outcomes)"),
    key("seed", "1", "RNG seed for sampled branching"),
    key("out", "", "per-roundtrip CSV path (none when empty)"),
];

pub const IMAGING_KEYS: &[Key] = &[
    key("n", "4", "array sites"),
    key("d", "1", "maximum baseline"),
    key("eps", "0.01", "mean photon number per time bin"),
    key("source", "flat", "flat | point | file | baselines"),
    key("point", "0", "grid index of the point source"),
    key("intensity", "", "two-column (y, I) file for source = file"),
    key("g", "0.6", "comma-separated baseline visibilities g(1..N-1) for source = baselines"),
    key("l", "100000", "shots per estimate"),
    key("trials", "200", "independent seeds per pipeline"),
    key("classical", "classical", "classical | classical-direct"),
    key("seed", "7", "base RNG seed"),
    key("out", "imaging.csv", "CSV path"),
];

pub const TRANSFER_KEYS: &[Key] = &[
    key("alpha_min", "0", "first coherent amplitude"),
    key("alpha_max", "4", "last coherent amplitude"),
    key("alpha_step", "0.05", "amplitude step"),
    key("eta", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", "detector transmissions"),
    key("ports", "3", "largest P in the multiport comparison"),
    key("seed", "0", "unused; recorded for uniform headers"),
    key("check", "true", "assert the operating points (exit 3 on failure)"),
    key("out", "transfer", "output prefix: <out>_alpha.csv, <out>_eta.csv, <out>_multiport.csv"),
];

pub const FORMULAS_KEYS: &[Key] = &[
    key("n", "8", "largest array size"),
    key("f2", "0.82", "two-site deterministic fidelity"),
    key("p1", "0.469041575982343", "per-site heralding probability"),
    key("trials", "100000", "Monte Carlo trials per array size"),
    key("seed", "11", "RNG seed"),
    key("check", "true", "compare Monte Carlo with the closed forms at 3 sigma (exit 3 on failure)"),
    key("out", "formulas.csv", "CSV path"),
];

pub fn keys_for(command: &str) -> &'static [Key] {
    match command {
        "encode" => ENCODE_KEYS,
        "imaging" => IMAGING_KEYS,
        "transfer" => TRANSFER_KEYS,
        "formulas" => FORMULAS_KEYS,
        _ => &[],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines. Keys are case-insensitive; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", no + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        Self {
            command: command.to_string(),
            values: keys_for(command)
                .iter()
                .map(|k| (k.name.to_string(), k.default.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let k = key.to_ascii_lowercase().replace('-', "_");
        if !self.values.contains_key(&k) {
            let known: Vec<&str> = keys_for(&self.command).iter().map(|k| k.name).collect();
            return Err(CliError::Config(format!(
                "unknown key `{key}` for {} (known: {})",
                self.command,
                known.join(", ")
            )));
        }
        self.values.insert(k, value.to_string());
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in parse_pairs(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = self.raw(key);
        v.parse()
            .map_err(|e| CliError::Config(format!("{key} = `{v}`: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| CliError::Config(format!("{key}: `{s}`: {e}")))
            })
            .collect()
    }

    pub fn complex_list(&self, key: &str) -> Result<Vec<C64>, CliError> {
        self.list::<C64>(key)
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key).to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            v => Err(CliError::Config(format!("{key} = `{v}` is not a boolean"))),
        }
    }

    /// Sorted resolved pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut cfg = RunConfig::defaults("encode");
        for (k, v) in parse_pairs("# comment\nM = 5\n  r=2  \n\nLayout = sequential\n").unwrap() {
            cfg.set(&k, &v).unwrap();
        }
        assert_eq!(cfg.get::<usize>("m").unwrap(), 5);
        assert_eq!(cfg.get::<usize>("r").unwrap(), 2);
        assert_eq!(cfg.raw("layout"), "sequential");
        assert_eq!(cfg.raw("eps"), "0.01");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut cfg = RunConfig::defaults("imaging");
        assert!(matches!(cfg.set("bogus", "1"), Err(CliError::Config(_))));
        assert!(parse_pairs("n 4").is_err());
        assert!(parse_pairs(" = 4").is_err());
        cfg.set("l", "ten").unwrap();
        assert!(cfg.get::<u64>("l").is_err());
    }

    #[test]
    fn lists_and_flags() {
        let mut cfg = RunConfig::defaults("imaging");
        cfg.set("g", "0.6, 0.1+0.2i").unwrap();
        let g = cfg.complex_list("g").unwrap();
        assert_eq!(g, vec![C64::new(0.6, 0.0), C64::new(0.1, 0.2)]);
        let cfg = RunConfig::defaults("transfer");
        assert!(cfg.flag("check").unwrap());
        assert_eq!(cfg.list::<f64>("eta").unwrap().len(), 10);
    }
}
