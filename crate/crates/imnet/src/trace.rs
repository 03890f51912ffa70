//! Line-oriented trace files: one record per snapshot, diffable by line and
//! parseable back into structured records for structural comparison.
//!
//! ```text
//! == state 0 :: init
//! sigma = {}
//! gamma x = {(srcport(80), sendall, _), (inport(1), sendcontroller, _)}
//! gamma z = {id1, id2}
//! ir = {}
//! ```
//!
//! Records are blank-line separated. A failed run ends with an error record:
//!
//! ```text
//! == error :: y := MakeRule(x)
//! message = unbound variable `x`
//! ```

use std::fmt::Write as _;

use crate::exec::TraceStep;
use crate::model::{Binding, RuleList, SwitchId, Value};
use crate::syntax::values::parse_binding;

/// A parsed trace record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceRecord {
    State {
        label: String,
        sigma: Vec<(SwitchId, RuleList)>,
        gamma: Vec<(String, Binding)>,
        ir: Vec<(SwitchId, RuleList)>,
    },
    Error {
        label: String,
        message: String,
    },
}

/// Renders snapshots (and an optional trailing error record) in the canonical
/// trace format. Output is byte-deterministic for equal inputs.
pub fn write_trace(steps: &[TraceStep], error: Option<(&str, &str)>) -> String {
    let mut out = String::new();
    for (index, step) in steps.iter().enumerate() {
        if index > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "== state {index} :: {}", step.label);
        let _ = writeln!(out, "sigma = {}", step.state.sigma);
        for (name, binding) in step.state.gamma.iter() {
            let _ = writeln!(out, "gamma {name} = {binding}");
        }
        let _ = writeln!(out, "ir = {}", step.state.ir);
    }
    if let Some((label, message)) = error {
        if !steps.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "== error :: {label}");
        let _ = writeln!(out, "message = {message}");
    }
    out
}

fn pairs_of(text: &str, line: usize) -> Result<Vec<(SwitchId, RuleList)>, String> {
    let binding = parse_binding(text).map_err(|e| format!("line {line}: {e}"))?;
    let Binding::Event(event) = binding else {
        return Err(format!("line {line}: expected a brace form"));
    };
    let mut out = Vec::with_capacity(event.len());
    for item in event.iter() {
        let Value::Tuple(items) = item else {
            return Err(format!("line {line}: expected (switch-id, rule-list) pairs"));
        };
        let [Value::SwitchId(id), Value::Rules(rules)] = items.as_slice() else {
            return Err(format!("line {line}: expected (switch-id, rule-list) pairs"));
        };
        out.push((id.clone(), rules.clone()));
    }
    Ok(out)
}

/// Parses a trace file into records.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, String> {
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut current: Option<(String, bool)> = None; // (label, is_error)
    let mut sigma = Vec::new();
    let mut gamma = Vec::new();
    let mut ir = Vec::new();
    let mut message = String::new();
    let mut saw_sigma = false;
    let mut saw_ir = false;

    let finish = |current: &mut Option<(String, bool)>,
                      sigma: &mut Vec<(SwitchId, RuleList)>,
                      gamma: &mut Vec<(String, Binding)>,
                      ir: &mut Vec<(SwitchId, RuleList)>,
                      message: &mut String,
                      saw: (bool, bool)|
     -> Result<Option<TraceRecord>, String> {
        let Some((label, is_error)) = current.take() else { return Ok(None) };
        if is_error {
            Ok(Some(TraceRecord::Error { label, message: std::mem::take(message) }))
        } else {
            if !saw.0 || !saw.1 {
                return Err(format!("record `{label}` is missing sigma or ir"));
            }
            Ok(Some(TraceRecord::State {
                label,
                sigma: std::mem::take(sigma),
                gamma: std::mem::take(gamma),
                ir: std::mem::take(ir),
            }))
        }
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix("== ") {
            if let Some(rec) =
                finish(&mut current, &mut sigma, &mut gamma, &mut ir, &mut message, (saw_sigma, saw_ir))?
            {
                records.push(rec);
            }
            saw_sigma = false;
            saw_ir = false;
            let (kind, label) = header
                .split_once(" :: ")
                .ok_or_else(|| format!("line {line}: malformed record header"))?;
            let is_error = match kind.split_whitespace().next() {
                Some("state") => false,
                Some("error") => true,
                _ => return Err(format!("line {line}: unknown record kind `{kind}`")),
            };
            current = Some((label.to_string(), is_error));
            continue;
        }
        if current.is_none() {
            return Err(format!("line {line}: content outside a record"));
        }
        if let Some(rest) = trimmed.strip_prefix("sigma = ") {
            sigma = pairs_of(rest, line)?;
            saw_sigma = true;
        } else if let Some(rest) = trimmed.strip_prefix("gamma ") {
            let (name, value) = rest
                .split_once(" = ")
                .ok_or_else(|| format!("line {line}: malformed gamma line"))?;
            let binding = parse_binding(value).map_err(|e| format!("line {line}: {e}"))?;
            gamma.push((name.to_string(), binding));
        } else if let Some(rest) = trimmed.strip_prefix("ir = ") {
            ir = pairs_of(rest, line)?;
            saw_ir = true;
        } else if let Some(rest) = trimmed.strip_prefix("message = ") {
            message = rest.to_string();
        } else {
            return Err(format!("line {line}: unrecognized trace line"));
        }
    }
    if let Some(rec) =
        finish(&mut current, &mut sigma, &mut gamma, &mut ir, &mut message, (saw_sigma, saw_ir))?
    {
        records.push(rec);
    }
    Ok(records)
}

/// First divergence between two record sequences, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDiff {
    pub index: usize,
    pub left: Option<TraceRecord>,
    pub right: Option<TraceRecord>,
}

pub fn diff_traces(left: &[TraceRecord], right: &[TraceRecord]) -> Option<TraceDiff> {
    let len = left.len().max(right.len());
    for index in 0..len {
        let l = left.get(index);
        let r = right.get(index);
        if l != r {
            return Some(TraceDiff { index, left: l.cloned(), right: r.cloned() });
        }
    }
    None
}
