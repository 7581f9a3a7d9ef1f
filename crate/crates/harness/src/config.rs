//! Parsing and validation of experiment parameters.

use std::path::Path;

use num::BigRational;
use wks_core::{Point, Universe, Weights};

use crate::error::{HarnessError, Result};

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}

/// `"1,10,1/2"`-style weight lists.
pub fn parse_weights(s: &str) -> Result<Weights> {
    let ws = s
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<BigRational>()
                .map_err(|_| invalid(format!("bad weight {w:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Weights::new(ws).map_err(|e| invalid(e.to_string()))
}

/// Weights from an explicit list or from `--beta` with `k`.
pub fn resolve_weights(weights: Option<&str>, beta: Option<u64>, k: Option<usize>) -> Result<Weights> {
    let w = match (weights, beta) {
        (Some(_), Some(_)) => return Err(invalid("give either --weights or --beta, not both")),
        (Some(s), None) => parse_weights(s)?,
        (None, Some(b)) => {
            let k = k.ok_or_else(|| invalid("--beta needs --k"))?;
            if b < 1 {
                return Err(invalid("--beta must be positive"));
            }
            Weights::geometric(k, b).map_err(|e| invalid(e.to_string()))?
        }
        (None, None) => return Err(invalid("one of --weights or --beta is required")),
    };
    if let Some(k) = k {
        if w.k() != k {
            return Err(invalid(format!("{} weights given for k = {k}", w.k())));
        }
    }
    Ok(w)
}

pub fn universe(size: u32) -> Result<Universe> {
    Universe::new(size).map_err(|e| invalid(e.to_string()))
}

/// Point indices separated by whitespace or commas.
pub fn parse_requests(text: &str, universe: Universe) -> Result<Vec<Point>> {
    let reqs = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Point>().map_err(|_| invalid(format!("bad request {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if let Some(&p) = reqs.iter().find(|&&p| !universe.contains(p)) {
        return Err(invalid(format!("request {p} outside a universe of {}", universe.size())));
    }
    if reqs.is_empty() {
        return Err(invalid("empty request sequence"));
    }
    Ok(reqs)
}

pub fn read_requests(path: &Path, universe: Universe) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_requests(&text, universe)
}

pub fn require_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}
