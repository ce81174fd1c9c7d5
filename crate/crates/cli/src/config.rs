//! JSON run configuration. Keys mirror the long flag names with `_` for `-`;
//! a flag given on the command line always wins.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::output::Format;
use crate::Failure;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub ny: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub s_max: Option<f64>,
    pub terms: Option<usize>,
    pub tail_subtraction: Option<bool>,
    pub panels_per_period: Option<usize>,
    pub crossover: Option<f64>,
    pub problem: Option<String>,
    pub f: Option<String>,
    #[serde(rename = "F")]
    pub forcing: Option<String>,
    pub singular: Option<bool>,
    pub method: Option<String>,
    pub s: Option<Vec<f64>>,
    pub x: Option<f64>,
    pub s_lo: Option<f64>,
    pub s_hi: Option<f64>,
    pub ns: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flag, then config value, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
