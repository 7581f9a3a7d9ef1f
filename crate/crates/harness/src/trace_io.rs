//! Line-delimited JSON traces: a `meta` record, then one record per step.
//!
//! ```text
//! {"kind":"meta","k":2,"universe":3,"seed":7,"weights":["1","10"]}
//! {"t":1,"sigma":0,"ell":2,"positions":[2,0],"kinds":["forced","forced"]}
//! ```
//!
//! `positions` and `kinds` list servers lightest first.

use std::io::Write;
use std::path::Path;

use num::BigRational;
use serde::{Deserialize, Serialize};
use wks_core::feasibility::is_feasible;
use wks_core::{ExtensionTrace, Level, MoveKind, Point, RspEngine, StepOutcome, Universe, Weights};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub kind: String,
    pub k: usize,
    pub universe: u32,
    pub seed: u64,
    pub weights: Vec<String>,
}

impl TraceMeta {
    pub fn new(k: usize, universe: Universe, seed: u64, weights: &Weights) -> Self {
        Self {
            kind: "meta".into(),
            k,
            universe: universe.size(),
            seed,
            weights: weights.as_slice().iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn weights(&self) -> Result<Weights> {
        let ws = self
            .weights
            .iter()
            .map(|w| w.parse::<BigRational>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| HarnessError::Validation("bad weight in trace meta".into()))?;
        Ok(Weights::new(ws)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub sigma: Point,
    pub ell: Level,
    pub positions: Vec<Point>,
    pub kinds: Vec<String>,
}

impl From<&StepOutcome> for TraceRecord {
    fn from(step: &StepOutcome) -> Self {
        Self {
            t: step.t,
            sigma: step.sigma,
            ell: step.ell,
            positions: step.positions(),
            kinds: step.levels.iter().map(|l| l.kind.as_str().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFile {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

pub fn to_jsonl(meta: &TraceMeta, records: &[TraceRecord]) -> String {
    let mut out = serde_json::to_string(meta).expect("meta serializes");
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, meta: &TraceMeta, records: &[TraceRecord]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(to_jsonl(meta, records).as_bytes())
        .map_err(|e| HarnessError::io(path, e))
}

pub fn parse_trace(text: &str, path: &str) -> Result<TraceFile> {
    let bad = |line: usize, reason: String| HarnessError::Format {
        path: path.to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let meta: TraceMeta = serde_json::from_str(first).map_err(|e| bad(1, e.to_string()))?;
    if meta.kind != "meta" {
        return Err(bad(1, "first record is not a meta record".into()));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let r: TraceRecord = serde_json::from_str(line).map_err(|e| bad(i + 1, e.to_string()))?;
        if r.t != records.len() + 1 {
            return Err(bad(i + 1, format!("expected t = {}, found {}", records.len() + 1, r.t)));
        }
        records.push(r);
    }
    Ok(TraceFile { meta, records })
}

pub fn read_trace(path: &Path) -> Result<TraceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_trace(&text, &path.display().to_string())
}

/// Re-checks feasibility of the recorded pattern and re-runs the engine with
/// the recorded seed, requiring identical positions and move kinds.
pub fn replay(file: &TraceFile) -> Result<()> {
    let meta = &file.meta;
    let universe = Universe::new(meta.universe)?;
    let ells: Vec<Level> = file.records.iter().map(|r| r.ell).collect();
    let reqs: Vec<Point> = file.records.iter().map(|r| r.sigma).collect();
    let trace = ExtensionTrace::from_levels(meta.k, &ells)?;
    if !is_feasible(&trace, &reqs, universe)? {
        return Err(HarnessError::SuiteFailed("recorded pattern is infeasible".into()));
    }
    let mut engine = RspEngine::new(universe, meta.k, meta.seed)?;
    for r in &file.records {
        let out = engine.step(r.sigma, r.ell)?;
        let replayed = TraceRecord::from(&out);
        if replayed != *r {
            return Err(HarnessError::SuiteFailed(format!("replay diverges at t = {}", r.t)));
        }
        if r.kinds.iter().any(|k| MoveKind::parse(k).is_none()) {
            return Err(HarnessError::Validation(format!("unknown move kind at t = {}", r.t)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_replay() {
        let u = Universe::new(3).unwrap();
        let w = Weights::from_integers(&[1, 10]).unwrap();
        let mut e = RspEngine::new(u, 2, 7).unwrap();
        let recs: Vec<TraceRecord> = [(0, 2), (1, 0), (0, 0), (1, 0)]
            .iter()
            .map(|&(s, l)| TraceRecord::from(&e.step(s, l).unwrap()))
            .collect();
        let meta = TraceMeta::new(2, u, 7, &w);
        let text = to_jsonl(&meta, &recs);
        assert!(text.starts_with("{\"kind\":\"meta\",\"k\":2,\"universe\":3,\"seed\":7,\"weights\":[\"1\",\"10\"]}\n"));
        let parsed = parse_trace(&text, "mem").unwrap();
        assert_eq!(parsed.records, recs);
        assert_eq!(parsed.meta.weights().unwrap(), w);
        replay(&parsed).unwrap();

        let mut tampered = parsed.clone();
        tampered.records[1].positions[0] = (tampered.records[1].positions[0] + 1) % 3;
        assert!(replay(&tampered).is_err());
    }

    #[test]
    fn malformed_files() {
        assert!(parse_trace("", "x").is_err());
        assert!(parse_trace("{\"t\":1}", "x").is_err());
        let meta = "{\"kind\":\"meta\",\"k\":1,\"universe\":2,\"seed\":0,\"weights\":[\"1\"]}";
        let skip = format!("{meta}\n{{\"t\":2,\"sigma\":0,\"ell\":1,\"positions\":[0],\"kinds\":[\"forced\"]}}");
        assert!(matches!(parse_trace(&skip, "x"), Err(HarnessError::Format { line: 2, .. })));
    }
}
