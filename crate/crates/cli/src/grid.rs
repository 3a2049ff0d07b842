//! Parameter grids: a single value, `start:stop:count`, or a comma-separated
//! list of either.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Grid as written in a config file: a number, a spec string or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Value(f64),
    List(Vec<f64>),
    Spec(String),
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let values = match self {
            GridSpec::Value(v) => vec![*v],
            GridSpec::List(v) => v.clone(),
            GridSpec::Spec(s) => parse_grid(s)?,
        };
        if values.is_empty() {
            return Err(CliError::Invalid("empty grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Invalid(format!("non-finite grid value {v}")));
        }
        Ok(values)
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(CliError::Invalid(format!("empty entry in grid `{s}`")));
        }
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(number(v)?),
            [start, stop, count] => {
                let (start, stop) = (number(start)?, number(stop)?);
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("bad point count in `{part}`")))?;
                out.extend(linspace(start, stop, count)?);
            }
            _ => {
                return Err(CliError::Invalid(format!(
                    "grid entry `{part}` is neither a value nor start:stop:count"
                )))
            }
        }
    }
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Invalid(format!("non-finite grid value {v}")));
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("`{s}` is not a number")))
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(CliError::Invalid(
            "grid point count must be positive".into(),
        )),
        1 => Ok(vec![start]),
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect())
        }
    }
}

/// Site counts from a numeric grid: positive even integers only.
pub fn sites(values: &[f64]) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            if v.fract() != 0.0 || v < 2.0 || v % 2.0 != 0.0 {
                Err(CliError::Invalid(format!(
                    "site count {v} is not an even integer >= 2"
                )))
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}
