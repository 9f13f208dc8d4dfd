//! Command-line front end.
//!
//! Layout under the output directory:
//!
//! ```text
//! corpus/index.csv        method,sram_id,voltage_mv,fault_count,path
//! corpus/hw/*.fmap        one map per (SRAM, voltage)
//! corpus/rnd/*.fmap       one matched random map per faulty hardware map
//! results.csv             one row per (benchmark, faulty map)
//! report/                 classification, fault-count and quality tables and charts
//! heatmap/                per-bit fault probability as CSV and PGM
//! ```

use crate::config::{CampaignConfig, ConfigError};
use crate::faultmap::{generate_corpus, parse_fault_map, probability_heatmap, serialize_fault_map, FaultMap};
use crate::harness::{self, aggregate, parse_results, run_campaign, write_results, Method};
use crate::report;
use crate::workloads::WorkloadConfig;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const INDEX_HEADER: &str = "method,sram_id,voltage_mv,fault_count,path";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Data { path: PathBuf, msg: String },
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, data).map_err(io_err(path))
}

#[derive(Debug, Parser)]
#[command(name = "sramfi", version, about = "Hardware-guided vs. random fault injection for undervolted SRAM caches")]
pub struct Cli {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Corpus seed; overrides `corpus.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core); overrides `campaign.jobs`.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the hardware-like and matched random fault-map corpus.
    Genmaps,
    /// Run every configured benchmark against every faulty map.
    Run,
    /// Aggregate a results CSV into report tables and charts.
    Report {
        /// Results CSV; defaults to `<out>/results.csv`.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Per-bit fault probability of the corpus.
    Heatmap {
        /// Corpus directory; defaults to `<out>/corpus`.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// Loads the config file (if any) and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<CampaignConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => CampaignConfig::parse(&read(path).map_err(|e| CliError::Usage(e.to_string()))?)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    config.validate()?;
    Ok(config)
}

pub fn corpus_dir(config: &CampaignConfig) -> PathBuf {
    config.out_dir.join("corpus")
}

pub fn results_path(config: &CampaignConfig) -> PathBuf {
    config.out_dir.join("results.csv")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenmapsSummary {
    pub hw_maps: usize,
    pub rnd_maps: usize,
    pub faulty_srams: usize,
}

fn map_file(method: Method, map: &FaultMap) -> String {
    let dir = match method {
        Method::HwFi => "hw",
        Method::RndFi => "rnd",
    };
    format!("{dir}/{}_{}.fmap", map.sram_id(), map.voltage_mv())
}

/// Writes the corpus and its index, replacing any previous corpus.
pub fn cmd_genmaps(config: &CampaignConfig) -> Result<GenmapsSummary, CliError> {
    let corpus = generate_corpus(config.n_srams, &config.corpus, config.seed).map_err(|e| {
        CliError::Config(ConfigError::Invalid(e.to_string()))
    })?;
    let dir = corpus_dir(config);
    for sub in ["hw", "rnd"] {
        let d = dir.join(sub);
        if d.exists() {
            fs::remove_dir_all(&d).map_err(io_err(&d))?;
        }
        fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let entries: Vec<(Method, &FaultMap)> = corpus
        .hw_maps
        .iter()
        .map(|m| (Method::HwFi, m))
        .chain(corpus.rnd_maps.iter().map(|m| (Method::RndFi, m)))
        .collect();
    entries
        .par_iter()
        .try_for_each(|(method, map)| write(&dir.join(map_file(*method, map)), serialize_fault_map(map)))?;
    let mut index = String::from(INDEX_HEADER);
    index.push('\n');
    for (method, map) in &entries {
        index.push_str(&format!(
            "{},{},{},{},{}\n",
            method,
            map.sram_id(),
            map.voltage_mv(),
            map.len(),
            map_file(*method, map)
        ));
    }
    write(&dir.join("index.csv"), index)?;
    Ok(GenmapsSummary {
        hw_maps: corpus.hw_maps.len(),
        rnd_maps: corpus.rnd_maps.len(),
        faulty_srams: corpus.srams.iter().filter(|s| !s.faults.is_empty()).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub method: Method,
    pub sram_id: String,
    pub voltage_mv: u32,
    pub fault_count: usize,
    pub path: String,
}

pub fn read_index(corpus: &Path) -> Result<Vec<IndexEntry>, CliError> {
    let path = corpus.join("index.csv");
    let text = read(&path)?;
    let bad = |line: usize, msg: &str| CliError::Data {
        path: path.clone(),
        msg: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines().enumerate();
    if lines.next().map(|l| l.1) != Some(INDEX_HEADER) {
        return Err(bad(1, "missing or malformed header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(i + 1, "expected 5 fields"));
        }
        out.push(IndexEntry {
            method: f[0].parse().map_err(|e: String| bad(i + 1, &e))?,
            sram_id: f[1].to_string(),
            voltage_mv: f[2].parse().map_err(|_| bad(i + 1, "bad voltage"))?,
            fault_count: f[3].parse().map_err(|_| bad(i + 1, "bad fault count"))?,
            path: f[4].to_string(),
        });
    }
    Ok(out)
}

fn load_maps(corpus: &Path, entries: &[&IndexEntry]) -> Result<Vec<FaultMap>, CliError> {
    entries
        .par_iter()
        .map(|e| {
            let path = corpus.join(&e.path);
            let map = parse_fault_map(&read(&path)?).map_err(|err| CliError::Data {
                path: path.clone(),
                msg: err.to_string(),
            })?;
            if map.len() != e.fault_count {
                return Err(CliError::Data {
                    path,
                    msg: format!("index says {} faults, file has {}", e.fault_count, map.len()),
                });
            }
            Ok(map)
        })
        .collect()
}

/// Runs the campaign over every faulty map of the configured methods and
/// writes the results CSV. Returns the number of data rows.
pub fn cmd_run(config: &CampaignConfig) -> Result<usize, CliError> {
    let corpus = corpus_dir(config);
    let index = read_index(&corpus)?;
    let selected: Vec<&IndexEntry> = index
        .iter()
        .filter(|e| e.fault_count > 0 && config.methods.contains(&e.method))
        .collect();
    let maps = load_maps(&corpus, &selected)?;
    let plan: Vec<(Method, FaultMap)> = selected.iter().map(|e| e.method).zip(maps).collect();
    let configs: Vec<WorkloadConfig> = config
        .benchmarks
        .iter()
        .map(|&b| WorkloadConfig::default_for(b))
        .collect();
    let records = run_campaign(&configs, config.cache, &plan, config.jobs)?;
    write(&results_path(config), write_results(&records))?;
    Ok(records.len())
}

/// Writes the report artifacts for `results` into `<out>/report`.
pub fn cmd_report(config: &CampaignConfig, results: &Path) -> Result<Vec<PathBuf>, CliError> {
    let records = parse_results(&read(results)?).map_err(|e| CliError::Data {
        path: results.to_path_buf(),
        msg: e.to_string(),
    })?;
    let summary = aggregate(&records);
    let dir = config.out_dir.join("report");
    let mut written = Vec::new();
    for (name, contents) in report::render(&summary) {
        let path = dir.join(name);
        write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `heatmap_hw` and, when the corpus has random maps, `heatmap_rnd`
/// as CSV and PGM into `<out>/heatmap`.
pub fn cmd_heatmap(config: &CampaignConfig, corpus: &Path) -> Result<Vec<PathBuf>, CliError> {
    let index = read_index(corpus)?;
    if index.is_empty() {
        return Err(CliError::Data {
            path: corpus.to_path_buf(),
            msg: "corpus holds no maps".into(),
        });
    }
    let dir = config.out_dir.join("heatmap");
    let mut written = Vec::new();
    for (method, stem) in [(Method::HwFi, "heatmap_hw"), (Method::RndFi, "heatmap_rnd")] {
        let entries: Vec<&IndexEntry> = index.iter().filter(|e| e.method == method).collect();
        if entries.is_empty() {
            continue;
        }
        let maps = load_maps(corpus, &entries)?;
        let h = probability_heatmap(maps.iter()).map_err(|e| CliError::Data {
            path: corpus.to_path_buf(),
            msg: e.to_string(),
        })?;
        for (ext, data) in [("csv", report::heatmap_csv(&h).into_bytes()), ("pgm", report::heatmap_pgm(&h))] {
            let path = dir.join(format!("{stem}.{ext}"));
            write(&path, data)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config = resolve_config(cli)?;
    match &cli.command {
        Command::Genmaps => {
            let s = cmd_genmaps(&config)?;
            println!(
                "{} hardware-like maps ({} faulty SRAMs), {} random maps in {}",
                s.hw_maps,
                s.faulty_srams,
                s.rnd_maps,
                corpus_dir(&config).display()
            );
        }
        Command::Run => {
            let rows = cmd_run(&config)?;
            println!("{rows} experiments in {}", results_path(&config).display());
        }
        Command::Report { results } => {
            let results = results.clone().unwrap_or_else(|| results_path(&config));
            for p in cmd_report(&config, &results)? {
                println!("{}", p.display());
            }
        }
        Command::Heatmap { corpus } => {
            let corpus = corpus.clone().unwrap_or_else(|| corpus_dir(&config));
            for p in cmd_heatmap(&config, &corpus)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
