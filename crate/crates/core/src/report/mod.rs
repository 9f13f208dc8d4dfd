//! Report artifacts: CSV tables, SVG charts and PGM images.

pub mod svg;

use crate::faultmap::Heatmap;
use crate::harness::{AggregateReport, MetricKind, Method, Outcome, OutcomeCounts, COUNT_CUTOFF};
use crate::workloads::Benchmark;
use std::collections::BTreeMap;
use std::fmt::Write;
use svg::Svg;

/// Binary P5 PGM with maxval 255.
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel count must match dimensions");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// One line per SRAM row, comma-separated per-bit probabilities.
pub fn heatmap_csv(h: &Heatmap) -> String {
    let cols = h.geometry.cols as usize;
    let mut out = String::new();
    for row in h.values().chunks(cols) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Heatmap as grayscale, scaled so the most frequent bit is 255.
pub fn heatmap_pgm(h: &Heatmap) -> Vec<u8> {
    let max = h.max();
    let pixels: Vec<u8> = h
        .values()
        .iter()
        .map(|&v| if max > 0.0 { (v / max * 255.0).round() as u8 } else { 0 })
        .collect();
    pgm(h.geometry.cols as usize, h.geometry.rows as usize, &pixels)
}

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    pub max: f64,
}

/// Quantile by linear interpolation between closest ranks.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        n: v.len(),
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        max: v[v.len() - 1],
    })
}

fn frac(x: f64) -> String {
    format!("{x:.6}")
}

fn num(x: f64) -> String {
    crate::harness::format_quality(x)
}

const OUTCOME_COLORS: [&str; 3] = ["#4caf50", "#ff9800", "#e53935"];
const METHOD_COLORS: [&str; 2] = ["#1565c0", "#8e24aa"];

pub fn classification_csv(report: &AggregateReport) -> String {
    let mut out = String::from("benchmark,method,experiments,correct,sdc,crash,correct_frac,sdc_frac,crash_frac\n");
    for (&(b, m), c) in &report.classification {
        let _ = writeln!(
            out,
            "{b},{m},{},{},{},{},{},{},{}",
            c.total(),
            c.correct,
            c.sdc,
            c.crash,
            frac(c.fraction(Outcome::Correct)),
            frac(c.fraction(Outcome::Sdc)),
            frac(c.fraction(Outcome::Crash))
        );
    }
    out
}

/// Stacked 100% bars, one per (benchmark, method).
pub fn classification_svg(report: &AggregateReport) -> String {
    let bars: Vec<(&(Benchmark, Method), &OutcomeCounts)> = report.classification.iter().collect();
    let (left, top, plot_h, bar_w, gap) = (60.0, 40.0, 300.0, 28.0, 10.0);
    let width = left + bars.len() as f64 * (bar_w + gap) + 140.0;
    let mut s = Svg::new(width.max(300.0), top + plot_h + 110.0);
    s.text(left, 24.0, 14.0, "start", "Outcome classification per benchmark and method");
    for i in 0..=4 {
        let y = top + plot_h * (1.0 - i as f64 / 4.0);
        s.line(left - 4.0, y, left, y, "black");
        s.text(left - 8.0, y + 4.0, 10.0, "end", &format!("{}%", i * 25));
    }
    s.line(left, top, left, top + plot_h, "black");
    for (i, (&(b, m), c)) in bars.iter().enumerate() {
        let x = left + gap + i as f64 * (bar_w + gap);
        let mut y = top + plot_h;
        for (o, color) in Outcome::ALL.iter().zip(OUTCOME_COLORS) {
            let h = plot_h * c.fraction(*o);
            y -= h;
            s.rect(x, y, bar_w, h, color);
        }
        let lx = x + bar_w / 2.0;
        s.text(lx, top + plot_h + 14.0, 9.0, "middle", b.name());
        s.text(lx, top + plot_h + 26.0, 9.0, "middle", m.name());
    }
    let lx = width - 120.0;
    for (i, (o, color)) in Outcome::ALL.iter().zip(OUTCOME_COLORS).enumerate() {
        let y = top + 10.0 + i as f64 * 18.0;
        s.rect(lx, y - 9.0, 10.0, 10.0, color);
        s.text(lx + 16.0, y, 11.0, "start", o.name());
    }
    s.finish()
}

/// Per-count rows per benchmark, followed by rows pooled over all benchmarks
/// (benchmark column `all`).
fn count_series(report: &AggregateReport) -> Vec<(String, Method, usize, OutcomeCounts)> {
    let mut rows: Vec<_> = report
        .by_count
        .iter()
        .map(|(&(b, m, n), &c)| (b.name().to_string(), m, n, c))
        .collect();
    let mut pooled: BTreeMap<(Method, usize), OutcomeCounts> = BTreeMap::new();
    for (&(_, m, n), c) in &report.by_count {
        let p = pooled.entry((m, n)).or_default();
        p.correct += c.correct;
        p.sdc += c.sdc;
        p.crash += c.crash;
    }
    rows.extend(pooled.into_iter().map(|((m, n), c)| ("all".to_string(), m, n, c)));
    rows
}

pub fn fault_count_csv(report: &AggregateReport) -> String {
    let mut out = String::from("benchmark,method,fault_count,experiments,correct_frac,sdc_frac,crash_frac\n");
    for (b, m, n, c) in count_series(report) {
        let _ = writeln!(
            out,
            "{b},{m},{n},{},{},{},{}",
            c.total(),
            frac(c.fraction(Outcome::Correct)),
            frac(c.fraction(Outcome::Sdc)),
            frac(c.fraction(Outcome::Crash))
        );
    }
    out
}

/// One panel per benchmark (plus the pooled panel): outcome share against
/// fault count, solid lines for HW_FI and dashed for RND_FI.
pub fn fault_count_svg(report: &AggregateReport) -> String {
    let mut panels: BTreeMap<String, BTreeMap<Method, Vec<(usize, OutcomeCounts)>>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (b, m, n, c) in count_series(report) {
        if !order.contains(&b) {
            order.push(b.clone());
        }
        panels.entry(b).or_default().entry(m).or_default().push((n, c));
    }
    let (pw, ph, margin) = (260.0, 180.0, 50.0);
    let per_row = 3usize;
    let rows = order.len().div_ceil(per_row).max(1);
    let mut s = Svg::new(
        margin + per_row as f64 * (pw + margin),
        60.0 + rows as f64 * (ph + margin + 20.0),
    );
    s.text(margin, 24.0, 14.0, "start", "Outcome share by number of faulty bits (HW_FI solid, RND_FI dashed)");
    for (i, name) in order.iter().enumerate() {
        let x0 = margin + (i % per_row) as f64 * (pw + margin);
        let y0 = 50.0 + (i / per_row) as f64 * (ph + margin + 20.0);
        s.text(x0 + pw / 2.0, y0 + 2.0, 12.0, "middle", name);
        let (top, bottom) = (y0 + 10.0, y0 + 10.0 + ph);
        s.line(x0, top, x0, bottom, "black");
        s.line(x0, bottom, x0 + pw, bottom, "black");
        s.text(x0 - 4.0, top + 4.0, 9.0, "end", "100%");
        s.text(x0 - 4.0, bottom, 9.0, "end", "0%");
        let xat = |n: usize| x0 + pw * n as f64 / COUNT_CUTOFF as f64;
        for n in (0..=COUNT_CUTOFF).step_by(4) {
            s.text(xat(n), bottom + 12.0, 9.0, "middle", &n.to_string());
        }
        for (method, series) in &panels[name] {
            for (o, color) in Outcome::ALL.iter().zip(OUTCOME_COLORS) {
                let pts: Vec<(f64, f64)> = series
                    .iter()
                    .map(|(n, c)| (xat(*n), bottom - ph * c.fraction(*o)))
                    .collect();
                s.polyline(&pts, color, *method == Method::RndFi);
            }
        }
    }
    s.finish()
}

pub fn quality_summary_csv(report: &AggregateReport) -> String {
    let mut out = String::from("benchmark,method,metric,n,min,q1,median,q3,mean,max\n");
    for (&(b, m), values) in &report.quality {
        if let Some(q) = summarize(values) {
            let _ = writeln!(
                out,
                "{b},{m},{},{},{},{},{},{},{},{}",
                MetricKind::for_benchmark(b).name(),
                q.n,
                num(q.min),
                num(q.q1),
                num(q.median),
                num(q.q3),
                num(q.mean),
                num(q.max)
            );
        }
    }
    out
}

pub fn quality_values_csv(report: &AggregateReport) -> String {
    let mut out = String::from("benchmark,method,metric,quality\n");
    for (&(b, m), values) in &report.quality {
        let metric = MetricKind::for_benchmark(b).name();
        for &v in values {
            let _ = writeln!(out, "{b},{m},{metric},{}", num(v));
        }
    }
    out
}

const VIOLIN_BINS: usize = 20;

/// Per-benchmark panels with one violin per method, drawn from a histogram
/// of the raw SDC quality values mirrored about the method's axis.
pub fn quality_svg(report: &AggregateReport) -> String {
    let mut benches: Vec<Benchmark> = report.quality.keys().map(|k| k.0).collect();
    benches.dedup();
    let (pw, ph, margin) = (200.0, 220.0, 60.0);
    let per_row = 3usize;
    let rows = benches.len().div_ceil(per_row).max(1);
    let mut s = Svg::new(
        margin + per_row as f64 * (pw + margin),
        60.0 + rows as f64 * (ph + margin + 20.0),
    );
    s.text(margin, 24.0, 14.0, "start", "Quality of SDC outputs");
    for (i, &b) in benches.iter().enumerate() {
        let x0 = margin + (i % per_row) as f64 * (pw + margin);
        let y0 = 50.0 + (i / per_row) as f64 * (ph + margin + 20.0);
        let (top, bottom) = (y0 + 10.0, y0 + 10.0 + ph);
        let finite: Vec<f64> = Method::ALL
            .iter()
            .filter_map(|&m| report.quality.get(&(b, m)))
            .flatten()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if finite.is_empty() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        let yat = |v: f64| bottom - ph * ((v.clamp(lo, hi) - lo) / (hi - lo));
        s.text(x0 + pw / 2.0, y0 + 2.0, 12.0, "middle", &format!("{b} ({})", MetricKind::for_benchmark(b).name()));
        s.line(x0, top, x0, bottom, "black");
        s.text(x0 - 4.0, top + 4.0, 9.0, "end", &format!("{hi:.3}"));
        s.text(x0 - 4.0, bottom, 9.0, "end", &format!("{lo:.3}"));
        for (mi, m) in Method::ALL.iter().enumerate() {
            let cx = x0 + pw * (mi as f64 + 0.5) / 2.0;
            s.text(cx, bottom + 14.0, 10.0, "middle", m.name());
            let Some(values) = report.quality.get(&(b, *m)) else {
                continue;
            };
            let mut bins = [0usize; VIOLIN_BINS];
            for &v in values {
                let t = ((v.clamp(lo, hi) - lo) / (hi - lo) * VIOLIN_BINS as f64) as usize;
                bins[t.min(VIOLIN_BINS - 1)] += 1;
            }
            let peak = *bins.iter().max().unwrap_or(&1) as f64;
            let half = pw / 4.0 - 8.0;
            let bin_h = ph / VIOLIN_BINS as f64;
            let mut right = Vec::with_capacity(2 * VIOLIN_BINS);
            for (k, &c) in bins.iter().enumerate() {
                let w = half * c as f64 / peak.max(1.0);
                let yb = bottom - k as f64 * bin_h;
                right.push((cx + w, yb));
                right.push((cx + w, yb - bin_h));
            }
            let mut outline = right.clone();
            outline.extend(right.iter().rev().map(|&(x, y)| (2.0 * cx - x, y)));
            s.polygon(&outline, METHOD_COLORS[mi], "black");
            if let Some(q) = summarize(values) {
                if q.mean.is_finite() {
                    s.line(cx - half / 2.0, yat(q.mean), cx + half / 2.0, yat(q.mean), "black");
                }
            }
        }
    }
    s.finish()
}

/// All report artifacts as (file name, contents), in a fixed order.
pub fn render(report: &AggregateReport) -> Vec<(&'static str, String)> {
    vec![
        ("classification.csv", classification_csv(report)),
        ("classification.svg", classification_svg(report)),
        ("fault_count.csv", fault_count_csv(report)),
        ("fault_count.svg", fault_count_svg(report)),
        ("quality_summary.csv", quality_summary_csv(report)),
        ("quality_values.csv", quality_values_csv(report)),
        ("quality.svg", quality_svg(report)),
    ]
}
