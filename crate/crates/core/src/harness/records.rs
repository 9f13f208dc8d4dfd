//! Results CSV.

use super::{ExperimentRecord, MetricKind, Outcome, QualityValue};
use thiserror::Error;

pub const RESULTS_HEADER: &str =
    "benchmark,method,sram_id,voltage_mv,fault_count,outcome,metric,quality";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct RecordError {
    pub line: usize,
    pub msg: String,
}

/// Positional decimal with 9 significant digits.
pub fn format_quality(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0.00000000".into();
    }
    let mut decimals = (8 - v.abs().log10().floor() as i32).max(0);
    loop {
        let s = format!("{:.*}", decimals as usize, v);
        let digits = s.trim_start_matches('-').replace('.', "");
        let significant = digits.trim_start_matches('0').len();
        if significant > 9 && decimals > 0 {
            decimals -= 1;
        } else {
            return s;
        }
    }
}

pub fn write_results(records: &[ExperimentRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let quality = r.quality.map(|q| format_quality(q.value)).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.benchmark,
            r.method,
            r.sram_id,
            r.voltage_mv,
            r.fault_count,
            r.outcome,
            MetricKind::for_benchmark(r.benchmark).name(),
            quality
        ));
    }
    out
}

pub fn parse_results(text: &str) -> Result<Vec<ExperimentRecord>, RecordError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RESULTS_HEADER => {}
        _ => {
            return Err(RecordError {
                line: 1,
                msg: "missing or malformed header".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        records.push(parse_row(line).map_err(|msg| RecordError { line: i + 1, msg })?);
    }
    Ok(records)
}

fn parse_row(line: &str) -> Result<ExperimentRecord, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 8 {
        return Err(format!("expected 8 fields, found {}", f.len()));
    }
    let benchmark = f[0].parse()?;
    let method = f[1].parse()?;
    let voltage_mv = f[3]
        .parse()
        .map_err(|_| format!("bad voltage `{}`", f[3]))?;
    let fault_count = f[4]
        .parse()
        .map_err(|_| format!("bad fault count `{}`", f[4]))?;
    let outcome: Outcome = f[5].parse()?;
    let kind: MetricKind = f[6].parse()?;
    if kind != MetricKind::for_benchmark(benchmark) {
        return Err(format!("metric `{}` does not belong to {benchmark}", f[6]));
    }
    let quality = match (outcome, f[7]) {
        (Outcome::Sdc, "") => return Err("SDC row without quality".into()),
        (Outcome::Sdc, q) => Some(QualityValue {
            kind,
            value: q.parse().map_err(|_| format!("bad quality `{q}`"))?,
        }),
        (_, "") => None,
        (_, _) => return Err("quality given for a non-SDC row".into()),
    };
    Ok(ExperimentRecord {
        benchmark,
        method,
        sram_id: f[2].to_string(),
        voltage_mv,
        fault_count,
        outcome,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Method;
    use crate::workloads::Benchmark;

    #[test]
    fn quality_formatting() {
        assert_eq!(format_quality(0.25), "0.250000000");
        assert_eq!(format_quality(36.123599479), "36.1235995");
        assert_eq!(format_quality(100.0), "100.000000");
        assert_eq!(format_quality(9.9999999999), "10.0000000");
        assert_eq!(format_quality(1.0), "1.00000000");
        assert_eq!(format_quality(0.0), "0.00000000");
        assert_eq!(format_quality(1e-5), "0.0000100000000");
        assert_eq!(format_quality(123456789012.0), "123456789012");
        assert_eq!(format_quality(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            ExperimentRecord {
                benchmark: Benchmark::Sobel,
                method: Method::HwFi,
                sram_id: "sram-00001".into(),
                voltage_mv: 540,
                fault_count: 2,
                outcome: Outcome::Sdc,
                quality: Some(QualityValue {
                    kind: MetricKind::PsnrDb,
                    value: 36.25,
                }),
            },
            ExperimentRecord {
                benchmark: Benchmark::Mc,
                method: Method::RndFi,
                sram_id: "sram-00002".into(),
                voltage_mv: 560,
                fault_count: 4,
                outcome: Outcome::Crash,
                quality: None,
            },
        ];
        let text = write_results(&records);
        assert_eq!(
            text,
            "benchmark,method,sram_id,voltage_mv,fault_count,outcome,metric,quality\n\
             sobel,HW_FI,sram-00001,540,2,SDC,PSNR_dB,36.2500000\n\
             mc,RND_FI,sram-00002,560,4,Crash,AvgRelativeError,\n"
        );
        assert_eq!(parse_results(&text).unwrap(), records);
    }

    #[test]
    fn malformed_rows_report_line() {
        let bad = format!("{RESULTS_HEADER}\nsobel,HW_FI,s,540,2,Correct,PSNR_dB,\nsobel,HW_FI,s,540\n");
        assert_eq!(parse_results(&bad).unwrap_err().line, 3);
        let bad = format!("{RESULTS_HEADER}\nsobel,HW_FI,s,540,2,SDC,PSNR_dB,\n");
        assert_eq!(parse_results(&bad).unwrap_err().line, 2);
        assert_eq!(parse_results("nope\n").unwrap_err().line, 1);
    }
}
