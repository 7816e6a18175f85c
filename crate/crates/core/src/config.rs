//! Plain key=value configuration files: one pair per line, `#` comments,
//! a fixed key set, strict rejection of anything else.

use std::path::Path;

use num::rational::BigRational;

use crate::arith::{parse_rational, ratio, ratio_string};
use crate::error::{Error, Result};

/// Environment variable naming a config file to load when no explicit path
/// is given.
pub const CONFIG_ENV: &str = "PATTERNSIEVE_CONFIG";

/// Values read from a config file; every field is optional there.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub tuple: Option<Vec<u64>>,
    pub n: Option<u64>,
    pub theta: Option<BigRational>,
    pub epsilon: Option<BigRational>,
    pub d0: Option<u64>,
    pub c1: Option<BigRational>,
    pub f_degree: Option<usize>,
}

/// Fully resolved parameters after applying precedence.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveConfig {
    pub k: usize,
    pub tuple: Vec<u64>,
    pub n: u64,
    pub theta: BigRational,
    pub epsilon: BigRational,
    pub d0: u64,
    pub c1: BigRational,
    pub f_degree: usize,
}

impl EffectiveConfig {
    /// Built-in defaults; tuple and k cover the smallest admissible case.
    pub fn defaults() -> EffectiveConfig {
        EffectiveConfig {
            k: 3,
            tuple: vec![0, 2, 6],
            n: 1_000_000,
            theta: ratio(1, 2),
            epsilon: ratio(1, 20),
            d0: 7,
            c1: ratio(1, 50),
            f_degree: 1,
        }
    }

    /// Overlay file values onto self (file wins over the current values).
    pub fn apply(&mut self, file: &FileConfig) {
        if let Some(v) = file.k {
            self.k = v;
        }
        if let Some(v) = &file.tuple {
            self.tuple = v.clone();
        }
        if let Some(v) = file.n {
            self.n = v;
        }
        if let Some(v) = &file.theta {
            self.theta = v.clone();
        }
        if let Some(v) = &file.epsilon {
            self.epsilon = v.clone();
        }
        if let Some(v) = file.d0 {
            self.d0 = v;
        }
        if let Some(v) = &file.c1 {
            self.c1 = v.clone();
        }
        if let Some(v) = file.f_degree {
            self.f_degree = v;
        }
    }

    /// Render as a config file that parses back to the same values.
    pub fn render(&self) -> String {
        let tuple: Vec<String> = self.tuple.iter().map(|h| h.to_string()).collect();
        format!(
            "k={}\ntuple={}\nN={}\ntheta={}\nepsilon={}\nD0={}\nc1={}\nF_degree={}\n",
            self.k,
            tuple.join(","),
            self.n,
            ratio_string(&self.theta),
            ratio_string(&self.epsilon),
            self.d0,
            ratio_string(&self.c1),
            self.f_degree,
        )
    }
}

fn parse_tuple(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad tuple entry {:?}", part.trim())))
        })
        .collect()
}

fn parse_unsigned(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::Config(format!("key {key} needs an unsigned integer, got {value:?}")))
}

fn parse_positive_rational(key: &str, value: &str) -> Result<BigRational> {
    parse_rational(value).map_err(|_| Error::Config(format!("key {key} has bad rational {value:?}")))
}

/// Parse config file text. Unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let dup = |set: bool| {
            if set {
                Err(Error::Config(format!("line {}: repeated key {key}", lineno + 1)))
            } else {
                Ok(())
            }
        };
        match key {
            "k" => {
                dup(cfg.k.is_some())?;
                cfg.k = Some(parse_unsigned(key, value)? as usize);
            }
            "tuple" => {
                dup(cfg.tuple.is_some())?;
                cfg.tuple = Some(parse_tuple(value)?);
            }
            "N" => {
                dup(cfg.n.is_some())?;
                cfg.n = Some(parse_unsigned(key, value)?);
            }
            "theta" => {
                dup(cfg.theta.is_some())?;
                cfg.theta = Some(parse_positive_rational(key, value)?);
            }
            "epsilon" => {
                dup(cfg.epsilon.is_some())?;
                cfg.epsilon = Some(parse_positive_rational(key, value)?);
            }
            "D0" => {
                dup(cfg.d0.is_some())?;
                cfg.d0 = Some(parse_unsigned(key, value)?);
            }
            "c1" => {
                dup(cfg.c1.is_some())?;
                cfg.c1 = Some(parse_positive_rational(key, value)?);
            }
            "F_degree" => {
                dup(cfg.f_degree.is_some())?;
                cfg.f_degree = Some(parse_unsigned(key, value)? as usize);
            }
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )));
            }
        }
    }
    Ok(cfg)
}

/// Load a config file from an explicit path, else from the environment
/// variable, else return the empty config.
pub fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let chosen = match path {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV).map(std::path::PathBuf::from),
    };
    match chosen {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse_config(&text)
        }
        None => Ok(FileConfig::default()),
    }
}
