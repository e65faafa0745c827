//! Canonical JSON serialization of pulse schedules.
//!
//! One neutral artifact format carries the compiled schedule: per-line timed
//! executions with named parameters, the global-variable valuation, block
//! timings for semantic reconstruction, and the compile metadata. Emission
//! is canonical - object keys sorted, floats printed with 17 significant
//! digits - so identical schedules serialize to identical bytes and parsing
//! back is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;
use thiserror::Error;

use crate::sched::{BlockTiming, SignalLineSchedule, TimedExecution};

pub const SCHEMA_VERSION: &str = "1";

/// Compile parameters and results recorded alongside the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseMetadata {
    pub epsilon: f64,
    pub delta: f64,
    pub trotter: u32,
    pub disc: u32,
    pub residual: f64,
    /// Target-site to device-site map of the accepted layout.
    pub layout: Vec<u32>,
    pub seed: u64,
    pub tool_version: String,
    /// Nominal duration of every block in execution order, including blocks
    /// with no executions (pure system evolution).
    pub blocks: Vec<BlockTiming>,
}

#[derive(Debug, Error)]
#[error("schema error at {path}: {message}")]
pub struct EmitError {
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> EmitError {
    EmitError { path: path.into(), message: message.into() }
}

/// 17 significant digits: round-trips every finite f64 exactly.
fn fmt_float(v: f64) -> String {
    debug_assert!(v.is_finite(), "schedules never contain non-finite numbers");
    format!("{v:.16e}")
}

fn push_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Serializes a schedule and its metadata as canonical JSON.
pub fn emit_json(schedule: &SignalLineSchedule, meta: &PulseMetadata) -> String {
    let mut out = String::new();
    out.push_str("{\"aais\":");
    push_string(&mut out, &schedule.aais_name);

    out.push_str(",\"global_vars\":{");
    let mut ordered: Vec<(&String, f64)> = schedule
        .global_names
        .iter()
        .zip(schedule.globals.iter().copied())
        .collect();
    ordered.sort_by(|a, b| a.0.cmp(b.0));
    for (i, (name, value)) in ordered.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_string(&mut out, name);
        out.push(':');
        out.push_str(&fmt_float(*value));
    }
    out.push('}');

    out.push_str(",\"lines\":[");
    for (i, (line, executions)) in schedule.lines.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"executions\":[");
        for (j, execution) in executions.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{{\"block\":{}", execution.block);
            out.push_str(",\"end_s\":");
            out.push_str(&fmt_float(execution.end_s));
            out.push_str(",\"instruction\":");
            push_string(&mut out, &execution.instruction);
            out.push_str(",\"nominal_duration\":");
            out.push_str(&fmt_float(execution.nominal_duration));
            out.push_str(",\"params\":{");
            let mut params: Vec<(&String, f64)> =
                execution.params.iter().map(|(n, v)| (n, *v)).collect();
            params.sort_by(|a, b| a.0.cmp(b.0));
            for (k, (name, value)) in params.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                push_string(&mut out, name);
                out.push(':');
                out.push_str(&fmt_float(*value));
            }
            out.push_str("},\"start_s\":");
            out.push_str(&fmt_float(execution.start_s));
            out.push('}');
        }
        let _ = write!(out, "],\"line\":{line}}}");
    }
    out.push(']');

    out.push_str(",\"metadata\":{\"blocks\":[");
    for (i, block) in meta.blocks.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"duration\":{},\"index\":{}}}", fmt_float(block.duration), block.block);
    }
    out.push_str("],\"delta\":");
    out.push_str(&fmt_float(meta.delta));
    let _ = write!(out, ",\"disc\":{}", meta.disc);
    out.push_str(",\"epsilon\":");
    out.push_str(&fmt_float(meta.epsilon));
    out.push_str(",\"layout\":[");
    for (i, v) in meta.layout.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push_str("],\"residual\":");
    out.push_str(&fmt_float(meta.residual));
    let _ = write!(out, ",\"seed\":{}", meta.seed);
    out.push_str(",\"tool_version\":");
    push_string(&mut out, &meta.tool_version);
    let _ = write!(out, ",\"trotter\":{}}}", meta.trotter);

    out.push_str(",\"schema_version\":");
    push_string(&mut out, SCHEMA_VERSION);
    out.push_str(",\"total_duration_s\":");
    out.push_str(&fmt_float(schedule.total_duration_s));
    out.push('}');
    out
}

fn get<'a>(value: &'a Value, key: &str, path: &str) -> Result<&'a Value, EmitError> {
    value
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?
        .get(key)
        .ok_or_else(|| err(&format!("{path}/{key}"), "missing required field"))
}

fn as_f64(value: &Value, path: &str) -> Result<f64, EmitError> {
    value.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn as_u64(value: &Value, path: &str) -> Result<u64, EmitError> {
    value.as_u64().ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn as_str<'a>(value: &'a Value, path: &str) -> Result<&'a str, EmitError> {
    value.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn as_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, EmitError> {
    value.as_array().ok_or_else(|| err(path, "expected an array"))
}

/// Parses and validates a pulse-schedule document.
///
/// Besides structural checks this enforces the schedule invariants: per-line
/// intervals are disjoint, executions in one block start together with the
/// block's nominal duration, and the total duration matches the latest end.
pub fn parse_schedule(text: &str) -> Result<(SignalLineSchedule, PulseMetadata), EmitError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    let version = as_str(get(&root, "schema_version", "")?, "/schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(err("/schema_version", format!("unsupported version `{version}`")));
    }
    let aais_name = as_str(get(&root, "aais", "")?, "/aais")?.to_string();

    let globals_obj = get(&root, "global_vars", "")?
        .as_object()
        .ok_or_else(|| err("/global_vars", "expected an object"))?;
    let mut global_names = Vec::new();
    let mut globals = Vec::new();
    for (name, value) in globals_obj {
        global_names.push(name.clone());
        globals.push(as_f64(value, &format!("/global_vars/{name}"))?);
    }

    let meta_value = get(&root, "metadata", "")?;
    let blocks_value = as_array(get(meta_value, "blocks", "/metadata")?, "/metadata/blocks")?;
    let mut blocks = Vec::with_capacity(blocks_value.len());
    for (i, entry) in blocks_value.iter().enumerate() {
        let path = format!("/metadata/blocks/{i}");
        let index = as_u64(get(entry, "index", &path)?, &format!("{path}/index"))? as usize;
        let duration = as_f64(get(entry, "duration", &path)?, &format!("{path}/duration"))?;
        if index != i {
            return Err(err(&format!("{path}/index"), "block indices must be dense and ordered"));
        }
        blocks.push(BlockTiming { block: index, duration });
    }
    let meta = PulseMetadata {
        epsilon: as_f64(get(meta_value, "epsilon", "/metadata")?, "/metadata/epsilon")?,
        delta: as_f64(get(meta_value, "delta", "/metadata")?, "/metadata/delta")?,
        trotter: as_u64(get(meta_value, "trotter", "/metadata")?, "/metadata/trotter")? as u32,
        disc: as_u64(get(meta_value, "disc", "/metadata")?, "/metadata/disc")? as u32,
        residual: as_f64(get(meta_value, "residual", "/metadata")?, "/metadata/residual")?,
        layout: as_array(get(meta_value, "layout", "/metadata")?, "/metadata/layout")?
            .iter()
            .enumerate()
            .map(|(i, v)| as_u64(v, &format!("/metadata/layout/{i}")).map(|x| x as u32))
            .collect::<Result<_, _>>()?,
        seed: as_u64(get(meta_value, "seed", "/metadata")?, "/metadata/seed")?,
        tool_version: as_str(get(meta_value, "tool_version", "/metadata")?, "/metadata/tool_version")?
            .to_string(),
        blocks,
    };

    let lines_value = as_array(get(&root, "lines", "")?, "/lines")?;
    let mut lines: BTreeMap<usize, Vec<TimedExecution>> = BTreeMap::new();
    let mut max_end = 0.0f64;
    for (i, line_value) in lines_value.iter().enumerate() {
        let path = format!("/lines/{i}");
        let line = as_u64(get(line_value, "line", &path)?, &format!("{path}/line"))? as usize;
        if lines.contains_key(&line) {
            return Err(err(&format!("{path}/line"), format!("duplicate line {line}")));
        }
        let executions_value =
            as_array(get(line_value, "executions", &path)?, &format!("{path}/executions"))?;
        let mut executions = Vec::with_capacity(executions_value.len());
        for (j, execution_value) in executions_value.iter().enumerate() {
            let epath = format!("{path}/executions/{j}");
            let instruction =
                as_str(get(execution_value, "instruction", &epath)?, &format!("{epath}/instruction"))?
                    .to_string();
            let params_obj = get(execution_value, "params", &epath)?
                .as_object()
                .ok_or_else(|| err(&format!("{epath}/params"), "expected an object"))?;
            let mut params = Vec::new();
            for (name, value) in params_obj {
                params.push((name.clone(), as_f64(value, &format!("{epath}/params/{name}"))?));
            }
            let start_s = as_f64(get(execution_value, "start_s", &epath)?, &format!("{epath}/start_s"))?;
            let end_s = as_f64(get(execution_value, "end_s", &epath)?, &format!("{epath}/end_s"))?;
            let nominal_duration = as_f64(
                get(execution_value, "nominal_duration", &epath)?,
                &format!("{epath}/nominal_duration"),
            )?;
            let block =
                as_u64(get(execution_value, "block", &epath)?, &format!("{epath}/block"))? as usize;
            if end_s < start_s {
                return Err(err(&epath, "execution ends before it starts"));
            }
            if block >= meta.blocks.len() {
                return Err(err(&format!("{epath}/block"), "block index out of range"));
            }
            let expected = meta.blocks[block].duration;
            if (nominal_duration - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                return Err(err(
                    &format!("{epath}/nominal_duration"),
                    "does not match the owning block's duration",
                ));
            }
            max_end = max_end.max(end_s);
            executions.push(TimedExecution {
                instruction,
                params,
                start_s,
                end_s,
                nominal_duration,
                block,
            });
        }
        // Interval disjointness per line, half-open intervals.
        for pair in executions.windows(2) {
            if pair[1].start_s < pair[0].end_s {
                return Err(err(&path, "overlapping executions on one signal line"));
            }
        }
        lines.insert(line, executions);
    }

    let total = as_f64(get(&root, "total_duration_s", "")?, "/total_duration_s")?;
    if (total - max_end).abs() > 1e-12 * max_end.max(1.0) {
        return Err(err("/total_duration_s", "does not match the latest execution end"));
    }

    // Executions of one block must start simultaneously.
    let mut block_start: BTreeMap<usize, f64> = BTreeMap::new();
    for executions in lines.values() {
        for execution in executions {
            match block_start.get(&execution.block) {
                None => {
                    block_start.insert(execution.block, execution.start_s);
                }
                Some(&s) if s == execution.start_s => {}
                Some(_) => {
                    return Err(err(
                        "/lines",
                        format!("executions of block {} have differing starts", execution.block),
                    ))
                }
            }
        }
    }

    let schedule = SignalLineSchedule {
        aais_name,
        global_names,
        globals,
        lines,
        blocks: meta.blocks.clone(),
        total_duration_s: total,
    };
    Ok((schedule, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_schedule() -> (SignalLineSchedule, PulseMetadata) {
        let mut lines = BTreeMap::new();
        lines.insert(
            0,
            vec![TimedExecution {
                instruction: "eta_0".into(),
                params: vec![("delta".into(), 2.032), ("omega".into(), 2.0), ("phi".into(), 0.0)],
                start_s: 0.0,
                end_s: 5e-8,
                nominal_duration: 1.0,
                block: 0,
            }],
        );
        lines.insert(
            2,
            vec![TimedExecution {
                instruction: "eta_2".into(),
                params: vec![("delta".into(), 2.032), ("omega".into(), 2.0), ("phi".into(), 0.0)],
                start_s: 0.0,
                end_s: 5e-8,
                nominal_duration: 1.0,
                block: 0,
            }],
        );
        let schedule = SignalLineSchedule {
            aais_name: "ideal_rydberg".into(),
            global_names: vec!["x0".into(), "x1".into(), "x2".into()],
            globals: vec![0.0, 10.52, 21.04],
            lines,
            blocks: vec![BlockTiming { block: 0, duration: 1.0 }],
            total_duration_s: 5e-8,
        };
        let meta = PulseMetadata {
            epsilon: 0.05,
            delta: 0.01,
            trotter: 4,
            disc: 10,
            residual: 0.0186,
            layout: vec![0, 1, 2],
            seed: 0,
            tool_version: "0.1.0".into(),
            blocks: vec![BlockTiming { block: 0, duration: 1.0 }],
        };
        (schedule, meta)
    }

    #[test]
    fn round_trip_is_exact() {
        let (schedule, meta) = sample_schedule();
        let json = emit_json(&schedule, &meta);
        let (parsed_schedule, parsed_meta) = parse_schedule(&json).unwrap();
        assert_eq!(parsed_schedule, schedule);
        assert_eq!(parsed_meta, meta);
        // Emission after parsing is byte-identical.
        assert_eq!(emit_json(&parsed_schedule, &parsed_meta), json);
    }

    #[test]
    fn emission_is_canonical() {
        let (schedule, meta) = sample_schedule();
        let a = emit_json(&schedule, &meta);
        let b = emit_json(&schedule, &meta);
        assert_eq!(a, b);
        // Keys are sorted at the top level.
        let positions: Vec<usize> = ["\"aais\"", "\"global_vars\"", "\"lines\"", "\"metadata\"", "\"schema_version\"", "\"total_duration_s\""]
            .iter()
            .map(|k| a.find(k).unwrap())
            .collect();
        for pair in positions.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn empty_schedule_emits_empty_lines() {
        let schedule = SignalLineSchedule {
            aais_name: "heisenberg".into(),
            global_names: vec![],
            globals: vec![],
            lines: BTreeMap::new(),
            blocks: vec![],
            total_duration_s: 0.0,
        };
        let meta = PulseMetadata {
            epsilon: 0.05,
            delta: 0.01,
            trotter: 4,
            disc: 10,
            residual: 0.0,
            layout: vec![],
            seed: 0,
            tool_version: "0.1.0".into(),
            blocks: vec![],
        };
        let json = emit_json(&schedule, &meta);
        assert!(json.contains("\"lines\":[]"));
        assert!(json.contains("\"total_duration_s\":0.0000000000000000e0"));
        let (parsed, _) = parse_schedule(&json).unwrap();
        assert_eq!(parsed, schedule);
    }

    #[test]
    fn missing_schema_version_reports_pointer() {
        let e = parse_schedule("{}").unwrap_err();
        assert_eq!(e.path, "/schema_version");
    }

    #[test]
    fn overlapping_intervals_rejected() {
        let (schedule, meta) = sample_schedule();
        let json = emit_json(&schedule, &meta);
        // Stretch the first execution so it overlaps a forged second one on
        // the same line.
        let (mut schedule, meta) = parse_schedule(&json).unwrap();
        let line0 = schedule.lines.get_mut(&0).unwrap();
        let mut second = line0[0].clone();
        second.start_s = 1e-8;
        second.end_s = 6e-8;
        line0.push(second);
        schedule.total_duration_s = 6e-8;
        let bad = emit_json(&schedule, &meta);
        let e = parse_schedule(&bad).unwrap_err();
        assert!(e.message.contains("overlapping"), "{e}");
    }

    #[test]
    fn mismatched_total_duration_rejected() {
        let (schedule, meta) = sample_schedule();
        let mut wrong = schedule.clone();
        wrong.total_duration_s = 1.0;
        let json = emit_json(&wrong, &meta);
        let e = parse_schedule(&json).unwrap_err();
        assert_eq!(e.path, "/total_duration_s");
    }

    #[test]
    fn float_format_round_trips_extremes() {
        for v in [1.0, -1.0, 0.1, 1e-18, 5.42e6, std::f64::consts::PI, 2.0f64.powi(-40)] {
            let s = fmt_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
    }
}
