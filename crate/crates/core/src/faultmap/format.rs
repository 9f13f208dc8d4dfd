//! The v1 fault-map text format.
//!
//! ```text
//! # sram-fault-map v1
//! sram_id=<token>
//! voltage_mv=<int>
//! rows=<int>
//! cols=<int>
//! fault <row> <col> <stuck0|stuck1|flip> <permanent|transient:<tick>|intermittent:<start>:<dur>> [onset_mv=<int>]
//! ```
//!
//! LF line endings. Faults are written in ascending linear-index order.

use super::{
    BitLocation, CorruptionKind, FaultMap, FaultMapError, FaultSpec, FaultTiming, SramGeometry,
};
use std::fmt::Write as _;
use std::str::FromStr;

const MAGIC: &str = "# sram-fault-map v1";
const HEADER_KEYS: [&str; 4] = ["sram_id", "voltage_mv", "rows", "cols"];

fn err(line: usize, msg: impl Into<String>) -> FaultMapError {
    FaultMapError::Parse {
        line,
        msg: msg.into(),
    }
}

fn number<T: FromStr>(line: usize, what: &str, s: &str) -> Result<T, FaultMapError> {
    s.parse()
        .map_err(|_| err(line, format!("invalid {what} `{s}`")))
}

pub fn parse_fault_map(text: &str) -> Result<FaultMap, FaultMapError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(err(1, format!("expected `{MAGIC}`"))),
    }

    let mut header = [""; 4];
    for (slot, key) in header.iter_mut().zip(HEADER_KEYS) {
        let (no, line) = lines
            .next()
            .ok_or_else(|| err(1, format!("missing `{key}=` header")))?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| err(no, format!("expected `{key}=<value>`")))?;
        *slot = value;
    }
    let sram_id = header[0];
    if sram_id.is_empty() || sram_id.chars().any(char::is_whitespace) {
        return Err(err(2, "sram_id must be a non-empty token"));
    }
    let voltage_mv: u32 = number(3, "voltage_mv", header[1])?;
    let rows: u32 = number(4, "rows", header[2])?;
    let cols: u32 = number(5, "cols", header[3])?;
    let geometry = SramGeometry::new(rows, cols).map_err(|e| err(4, e.to_string()))?;

    let mut faults = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fault = parse_fault_line(no, line, geometry)?;
        if !seen.insert(fault.location) {
            return Err(err(
                no,
                format!(
                    "duplicate fault at ({}, {})",
                    fault.location.row, fault.location.col
                ),
            ));
        }
        faults.push(fault);
    }

    // Locations were validated line by line; construction only sorts.
    FaultMap::new(sram_id, voltage_mv, geometry, faults)
}

fn parse_fault_line(
    no: usize,
    line: &str,
    geometry: SramGeometry,
) -> Result<FaultSpec, FaultMapError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.first() != Some(&"fault") {
        return Err(err(no, format!("unexpected line `{line}`")));
    }
    if !(5..=6).contains(&fields.len()) {
        return Err(err(no, "fault line needs 4 or 5 fields after `fault`"));
    }
    let row: u32 = number(no, "row", fields[1])?;
    let col: u32 = number(no, "col", fields[2])?;
    let location = BitLocation::new(row, col);
    if !geometry.contains(location) {
        return Err(err(
            no,
            format!(
                "bit ({row}, {col}) outside {}x{} array",
                geometry.rows, geometry.cols
            ),
        ));
    }
    let kind = match fields[3] {
        "stuck0" => CorruptionKind::StuckAt0,
        "stuck1" => CorruptionKind::StuckAt1,
        "flip" => CorruptionKind::BitFlip,
        other => return Err(err(no, format!("unknown corruption kind `{other}`"))),
    };
    let timing = parse_timing(no, fields[4])?;
    let onset_voltage_mv = match fields.get(5) {
        None => None,
        Some(tok) => {
            let v = tok
                .strip_prefix("onset_mv=")
                .ok_or_else(|| err(no, format!("expected `onset_mv=<int>`, got `{tok}`")))?;
            let mv: u32 = number(no, "onset_mv", v)?;
            if !(super::MIN_VOLTAGE_MV..=super::MAX_VOLTAGE_MV).contains(&mv) {
                return Err(err(no, format!("onset_mv {mv} outside 540..=600")));
            }
            Some(mv)
        }
    };
    Ok(FaultSpec {
        location,
        timing,
        kind,
        onset_voltage_mv,
    })
}

fn parse_timing(no: usize, tok: &str) -> Result<FaultTiming, FaultMapError> {
    let mut parts = tok.split(':');
    let timing = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("permanent"), None, None, None) => FaultTiming::Permanent,
        (Some("transient"), Some(t), None, None) => FaultTiming::Transient {
            fire_tick: number(no, "tick", t)?,
        },
        (Some("intermittent"), Some(s), Some(d), None) => FaultTiming::Intermittent {
            start_tick: number(no, "start tick", s)?,
            duration: number(no, "duration", d)?,
        },
        _ => return Err(err(no, format!("invalid timing `{tok}`"))),
    };
    Ok(timing)
}

pub fn serialize_fault_map(map: &FaultMap) -> String {
    let g = map.geometry();
    let mut out = String::with_capacity(80 + 40 * map.len());
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "sram_id={}", map.sram_id());
    let _ = writeln!(out, "voltage_mv={}", map.voltage_mv());
    let _ = writeln!(out, "rows={}", g.rows);
    let _ = writeln!(out, "cols={}", g.cols);
    for f in map.faults() {
        let _ = write!(
            out,
            "fault {} {} {} {}",
            f.location.row,
            f.location.col,
            f.kind.token(),
            f.timing
        );
        if let Some(mv) = f.onset_voltage_mv {
            let _ = write!(out, " onset_mv={mv}");
        }
        out.push('\n');
    }
    out
}
