//! CSV serialization of iteration traces.
//!
//! Columns: `k,grad_norm,lambda_sq,step,halvings,exit_condition,energy`.
//! Floats are written in Rust's shortest round-trip form, so parsing a file
//! back reproduces the in-memory trace bit for bit; the energy field is
//! empty for iterations without one.

use crate::error::{Error, Result};
use crate::solver::{ExitCondition, IterationRecord};

pub const CSV_HEADER: &str = "k,grad_norm,lambda_sq,step,halvings,exit_condition,energy";

pub fn write_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            r.grad_norm,
            r.newton_decrement_sq,
            r.step,
            r.halvings,
            r.exit_condition,
            r.energy.map(|e| e.to_string()).unwrap_or_default()
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad trace header: expected {CSV_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut trace = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "trace line {}: expected 7 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Parse(format!("trace line {}: bad {what}", lineno + 2));
        trace.push(IterationRecord {
            k: fields[0].parse().map_err(|_| bad("iteration index"))?,
            grad_norm: fields[1].parse().map_err(|_| bad("grad_norm"))?,
            newton_decrement_sq: fields[2].parse().map_err(|_| bad("lambda_sq"))?,
            step: fields[3].parse().map_err(|_| bad("step"))?,
            halvings: fields[4].parse().map_err(|_| bad("halvings"))?,
            exit_condition: ExitCondition::parse(fields[5])?,
            energy: if fields[6].is_empty() {
                None
            } else {
                Some(fields[6].parse().map_err(|_| bad("energy"))?)
            },
        });
    }
    Ok(trace)
}
