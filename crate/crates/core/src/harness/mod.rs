//! Fault-injection campaigns: golden runs, faulty runs, classification,
//! quality metrics and aggregation.

pub mod metrics;
mod records;

pub use metrics::{avg_relative_error, cluster_accuracy, psnr, MetricError, REL_ERROR_EPSILON};
pub use records::{format_quality, parse_results, write_results, RecordError, RESULTS_HEADER};

use crate::cachesim::{CacheError, CacheGeometry};
use crate::faultmap::FaultMap;
use crate::workloads::{self, Benchmark, Crash, Output, OutputView, SimMemory, WorkloadConfig, WorkloadResult};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Only per-count rows up to this many faulty bits are reported.
pub const COUNT_CUTOFF: usize = 16;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("golden run of {benchmark} crashed: {crash}")]
    GoldenCrash { benchmark: Benchmark, crash: Crash },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Correct,
    Sdc,
    Crash,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Correct, Outcome::Sdc, Outcome::Crash];

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Correct => "Correct",
            Outcome::Sdc => "SDC",
            Outcome::Crash => "Crash",
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    HwFi,
    RndFi,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::HwFi, Method::RndFi];

    pub fn name(&self) -> &'static str {
        match self {
            Method::HwFi => "HW_FI",
            Method::RndFi => "RND_FI",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    PsnrDb,
    AvgRelativeError,
    ClusterAccuracyPercent,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::PsnrDb,
        MetricKind::AvgRelativeError,
        MetricKind::ClusterAccuracyPercent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::PsnrDb => "PSNR_dB",
            MetricKind::AvgRelativeError => "AvgRelativeError",
            MetricKind::ClusterAccuracyPercent => "ClusterAccuracyPercent",
        }
    }

    pub fn for_benchmark(b: Benchmark) -> Self {
        match b {
            Benchmark::Dct | Benchmark::Sobel => MetricKind::PsnrDb,
            Benchmark::Jacobi | Benchmark::Blackscholes | Benchmark::Mc => {
                MetricKind::AvgRelativeError
            }
            Benchmark::KMeans => MetricKind::ClusterAccuracyPercent,
        }
    }

    /// Whether a larger value means better output.
    pub fn higher_is_better(&self) -> bool {
        !matches!(self, MetricKind::AvgRelativeError)
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityValue {
    pub kind: MetricKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub benchmark: Benchmark,
    pub method: Method,
    pub sram_id: String,
    pub voltage_mv: u32,
    pub fault_count: usize,
    pub outcome: Outcome,
    /// Present iff `outcome` is `Sdc`.
    pub quality: Option<QualityValue>,
}

impl ExperimentRecord {
    fn sort_key(&self) -> (Benchmark, Method, &str, u32) {
        (self.benchmark, self.method, &self.sram_id, self.voltage_mv)
    }
}

/// Sorts records into the canonical emission order.
pub fn canonicalize(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Fault-free run. A crash here means the configuration is broken.
pub fn golden_run(config: &WorkloadConfig, geometry: CacheGeometry) -> Result<Output, HarnessError> {
    let mut mem = SimMemory::new(geometry);
    match workloads::run(config, &mut mem) {
        WorkloadResult::Output(o) => Ok(o),
        WorkloadResult::Crash(crash) => Err(HarnessError::GoldenCrash {
            benchmark: config.benchmark(),
            crash,
        }),
    }
}

pub fn classify(result: &WorkloadResult, golden: &Output) -> Outcome {
    match result {
        WorkloadResult::Crash(_) => Outcome::Crash,
        WorkloadResult::Output(o) if o == golden => Outcome::Correct,
        WorkloadResult::Output(_) => Outcome::Sdc,
    }
}

/// Quality of an SDC output against the golden one. Outputs of different
/// shape get the metric's worst value.
pub fn quality(benchmark: Benchmark, golden: &Output, faulty: &Output) -> QualityValue {
    let kind = MetricKind::for_benchmark(benchmark);
    let value = match (kind, golden.view == faulty.view) {
        (MetricKind::PsnrDb, true) => psnr(&golden.bytes, &faulty.bytes).unwrap_or(f64::INFINITY),
        (MetricKind::AvgRelativeError, true) => {
            avg_relative_error(&golden.f64_values(), &faulty.f64_values()).unwrap_or(1.0)
        }
        (MetricKind::ClusterAccuracyPercent, true) => {
            cluster_accuracy(&golden.bytes, &faulty.bytes).unwrap_or(0.0)
        }
        (MetricKind::PsnrDb, false) => 0.0,
        (MetricKind::AvgRelativeError, false) => 1.0,
        (MetricKind::ClusterAccuracyPercent, false) => 0.0,
    };
    QualityValue { kind, value }
}

/// Runs one benchmark against one fault map and classifies the result.
pub fn run_experiment(
    config: &WorkloadConfig,
    geometry: CacheGeometry,
    golden: &Output,
    map: &FaultMap,
    method: Method,
) -> Result<ExperimentRecord, HarnessError> {
    let mut mem = SimMemory::with_faults(geometry, map)?;
    let result = workloads::run(config, &mut mem);
    let outcome = classify(&result, golden);
    let benchmark = config.benchmark();
    let quality = match (&result, outcome) {
        (WorkloadResult::Output(o), Outcome::Sdc) => Some(quality(benchmark, golden, o)),
        _ => None,
    };
    Ok(ExperimentRecord {
        benchmark,
        method,
        sram_id: map.sram_id().to_string(),
        voltage_mv: map.voltage_mv(),
        fault_count: map.len(),
        outcome,
        quality,
    })
}

/// Every configured benchmark against every map, on `jobs` worker threads
/// (0 means one per core). Records come back in canonical order.
pub fn run_campaign(
    configs: &[WorkloadConfig],
    geometry: CacheGeometry,
    maps: &[(Method, FaultMap)],
    jobs: usize,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| {
        let goldens = configs
            .par_iter()
            .map(|c| golden_run(c, geometry))
            .collect::<Result<Vec<_>, _>>()?;
        let work: Vec<(usize, usize)> = (0..configs.len())
            .flat_map(|c| (0..maps.len()).map(move |m| (c, m)))
            .collect();
        let mut records = work
            .par_iter()
            .map(|&(c, m)| {
                let (method, map) = &maps[m];
                run_experiment(&configs[c], geometry, &goldens[c], map, *method)
            })
            .collect::<Result<Vec<_>, _>>()?;
        canonicalize(&mut records);
        Ok(records)
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub correct: usize,
    pub sdc: usize,
    pub crash: usize,
}

impl OutcomeCounts {
    pub fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Correct => self.correct += 1,
            Outcome::Sdc => self.sdc += 1,
            Outcome::Crash => self.crash += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.correct + self.sdc + self.crash
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        match outcome {
            Outcome::Correct => self.correct,
            Outcome::Sdc => self.sdc,
            Outcome::Crash => self.crash,
        }
    }

    /// Share of `outcome`; 0 for an empty cell.
    pub fn fraction(&self, outcome: Outcome) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.count(outcome) as f64 / t as f64,
        }
    }
}

impl FromIterator<Outcome> for OutcomeCounts {
    fn from_iter<I: IntoIterator<Item = Outcome>>(iter: I) -> Self {
        let mut c = Self::default();
        for o in iter {
            c.add(o);
        }
        c
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateReport {
    /// Outcome counts per (benchmark, method).
    pub classification: BTreeMap<(Benchmark, Method), OutcomeCounts>,
    /// Outcome counts per (benchmark, method, fault count), counts up to
    /// [`COUNT_CUTOFF`] only.
    pub by_count: BTreeMap<(Benchmark, Method, usize), OutcomeCounts>,
    /// Raw SDC quality values per (benchmark, method), in record order.
    pub quality: BTreeMap<(Benchmark, Method), Vec<f64>>,
}

pub fn aggregate(records: &[ExperimentRecord]) -> AggregateReport {
    let mut report = AggregateReport::default();
    for r in records {
        let key = (r.benchmark, r.method);
        report.classification.entry(key).or_default().add(r.outcome);
        if r.fault_count <= COUNT_CUTOFF {
            report
                .by_count
                .entry((r.benchmark, r.method, r.fault_count))
                .or_default()
                .add(r.outcome);
        }
        if let Some(q) = r.quality {
            report.quality.entry(key).or_default().push(q.value);
        }
    }
    report
}

/// Expected output layout of a benchmark, without running it.
pub fn output_view(config: &WorkloadConfig) -> OutputView {
    use crate::workloads::WorkloadParams as P;
    match config.params {
        P::Jacobi { n, .. } => OutputView::Vector { len: n },
        P::Blackscholes { options } => OutputView::Vector { len: options },
        P::Dct { side } | P::Sobel { side } => OutputView::Image {
            width: side,
            height: side,
        },
        P::Mc { points, .. } => OutputView::Vector { len: points },
        P::KMeans { points, k, .. } => OutputView::Labels { len: points, k },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faultmap::SramGeometry;

    fn rec(b: Benchmark, m: Method, count: usize, outcome: Outcome) -> ExperimentRecord {
        ExperimentRecord {
            benchmark: b,
            method: m,
            sram_id: "sram-00000".into(),
            voltage_mv: 540,
            fault_count: count,
            outcome,
            quality: (outcome == Outcome::Sdc).then_some(QualityValue {
                kind: MetricKind::for_benchmark(b),
                value: 0.5,
            }),
        }
    }

    #[test]
    fn classify_cases() {
        let golden = Output {
            bytes: vec![1, 2, 3],
            view: OutputView::Vector { len: 0 },
        };
        let same = WorkloadResult::Output(golden.clone());
        assert_eq!(classify(&same, &golden), Outcome::Correct);
        let mut other = golden.clone();
        other.bytes[1] = 9;
        assert_eq!(classify(&WorkloadResult::Output(other), &golden), Outcome::Sdc);
        let mut shorter = golden.clone();
        shorter.bytes.pop();
        assert_eq!(classify(&WorkloadResult::Output(shorter), &golden), Outcome::Sdc);
        let crash = WorkloadResult::Crash(Crash::OutOfRange { addr: 0 });
        assert_eq!(classify(&crash, &golden), Outcome::Crash);
    }

    #[test]
    fn aggregate_fixture() {
        use Outcome::*;
        let (j, hw, rnd) = (Benchmark::Jacobi, Method::HwFi, Method::RndFi);
        let records = vec![
            rec(j, hw, 2, Correct),
            rec(j, hw, 2, Correct),
            rec(j, hw, 2, Sdc),
            rec(j, hw, 4, Crash),
            rec(j, hw, 600, Crash),
            rec(j, rnd, 2, Correct),
            rec(j, rnd, 2, Sdc),
            rec(j, rnd, 4, Sdc),
            rec(j, rnd, 20, Crash),
            rec(j, rnd, 20, Crash),
        ];
        let report = aggregate(&records);
        let hw_counts = report.classification[&(j, hw)];
        assert_eq!(hw_counts.fraction(Correct), 0.4);
        assert_eq!(hw_counts.fraction(Sdc), 0.2);
        assert_eq!(hw_counts.fraction(Crash), 0.4);
        let rnd_counts = report.classification[&(j, rnd)];
        assert_eq!(rnd_counts.fraction(Crash), 0.4);
        assert_eq!(report.by_count[&(j, hw, 2)].fraction(Correct), 2.0 / 3.0);
        assert!(!report.by_count.contains_key(&(j, hw, 600)));
        assert!(!report.by_count.contains_key(&(j, rnd, 20)));
        assert_eq!(report.quality[&(j, rnd)], vec![0.5, 0.5]);
        for c in report.classification.values().chain(report.by_count.values()) {
            let s: f64 = Outcome::ALL.iter().map(|&o| c.fraction(o)).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn all_correct_aggregate() {
        let records: Vec<_> = Benchmark::ALL
            .iter()
            .map(|&b| rec(b, Method::HwFi, 2, Outcome::Correct))
            .collect();
        let report = aggregate(&records);
        assert!(report
            .classification
            .values()
            .all(|c| c.fraction(Outcome::Correct) == 1.0));
    }

    #[test]
    fn empty_map_is_correct() {
        let geometry = CacheGeometry::default();
        let config = WorkloadConfig::default_for(Benchmark::Sobel);
        let golden = golden_run(&config, geometry).unwrap();
        assert_eq!(golden.view, output_view(&config));
        let map = FaultMap::empty("sram-00000", 540, SramGeometry::default());
        let r = run_experiment(&config, geometry, &golden, &map, Method::HwFi).unwrap();
        assert_eq!(r.outcome, Outcome::Correct);
        assert_eq!(r.quality, None);
    }

    #[test]
    fn names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        for o in Outcome::ALL {
            assert_eq!(o.name().parse::<Outcome>().unwrap(), o);
        }
        for k in MetricKind::ALL {
            assert_eq!(k.name().parse::<MetricKind>().unwrap(), k);
        }
    }
}
