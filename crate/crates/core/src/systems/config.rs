//! Flat `key = value` system configuration files.
//!
//! ```text
//! # Fig. 1 translation
//! system = translation
//! omega = golden
//! k = 1
//! q = 2
//! l = 1
//! p = 2
//! ```
//!
//! Values are decimal literals (optional sign, digits, optional fraction and
//! exponent). The only non-numeric value is the token `golden` for `omega`.

use std::path::Path;

use serde::Serialize;

use super::catalog::{catalog, Params};
use super::{spot_check, QpfSystem, SpotCheck};
use crate::error::{Error, Result};
use crate::numerics::GOLDEN;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub system: String,
    pub omega: f64,
    pub params: Params,
}

pub struct LoadedSystem {
    pub system: Box<dyn QpfSystem>,
    pub config: SystemConfig,
    pub spot_check: SpotCheck,
}

fn is_decimal_literal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

/// Parse configuration text into a [`SystemConfig`] (no system is built).
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut system: Option<String> = None;
    let mut omega: Option<f64> = None;
    let mut params = Params::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: line_no,
            detail: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Config {
                line: line_no,
                detail: "empty key".into(),
            });
        }
        let duplicate = match key {
            "system" => system.replace(value.to_string()).is_some(),
            "omega" => {
                let w = if value == "golden" {
                    GOLDEN
                } else if is_decimal_literal(value) {
                    value.parse::<f64>().map_err(|e| Error::Config {
                        line: line_no,
                        detail: e.to_string(),
                    })?
                } else {
                    return Err(Error::Config {
                        line: line_no,
                        detail: format!("omega must be a decimal literal or `golden`, got `{value}`"),
                    });
                };
                omega.replace(w).is_some()
            }
            _ => {
                if !is_decimal_literal(value) {
                    return Err(Error::Config {
                        line: line_no,
                        detail: format!("`{key}` must be a decimal literal, got `{value}`"),
                    });
                }
                let v: f64 = value.parse().map_err(|e: std::num::ParseFloatError| Error::Config {
                    line: line_no,
                    detail: e.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Config {
                        line: line_no,
                        detail: format!("`{key}` overflows"),
                    });
                }
                params.insert(key.to_string(), v).is_some()
            }
        };
        if duplicate {
            return Err(Error::Config {
                line: line_no,
                detail: format!("duplicate key `{key}`"),
            });
        }
    }
    let system = system.ok_or_else(|| Error::Config {
        line: 0,
        detail: "missing `system` key".into(),
    })?;
    Ok(SystemConfig {
        system,
        omega: omega.unwrap_or(GOLDEN),
        params,
    })
}

impl SystemConfig {
    /// Build and spot-check the named catalog system. The returned config has
    /// all defaults filled in.
    pub fn build(&self) -> Result<LoadedSystem> {
        let entry = catalog()
            .iter()
            .find(|e| e.name == self.system)
            .ok_or_else(|| Error::Parameter(format!("unknown system '{}'", self.system)))?;
        let (system, params) = entry.build(self.omega, &self.params)?;
        let spot_check = spot_check(&system, 64)?;
        Ok(LoadedSystem {
            system,
            config: SystemConfig {
                system: self.system.clone(),
                omega: self.omega,
                params,
            },
            spot_check,
        })
    }
}

/// Read, build and spot-check a system from a config file.
pub fn load_system(path: impl AsRef<Path>) -> Result<LoadedSystem> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)?.build()
}
