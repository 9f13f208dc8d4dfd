//! Campaign configuration file.
//!
//! One `section.key = value` per line; `#` starts a comment, blank lines are
//! ignored. Lists are comma-separated. Every key is optional:
//!
//! | key                      | default                                  |
//! |--------------------------|------------------------------------------|
//! | `corpus.n_srams`         | `2060`                                   |
//! | `corpus.seed`            | `1`                                      |
//! | `corpus.rows`            | `128`                                    |
//! | `corpus.cols`            | `128`                                    |
//! | `corpus.faulty_fraction` | `0.150762829` (2174 / 14420)             |
//! | `corpus.voltages`        | `540,550,560,570,580,590,600`            |
//! | `corpus.mean_run_length` | `4`                                      |
//! | `corpus.gap_prob`        | `0.2`                                    |
//! | `corpus.outlier_prob`    | `0.05`                                   |
//! | `cache.sets`             | `16`                                     |
//! | `cache.ways`             | `2`                                      |
//! | `cache.line_bytes`       | `64`                                     |
//! | `campaign.benchmarks`    | `jacobi,blackscholes,dct,mc,sobel,kmeans`|
//! | `campaign.methods`       | `HW_FI,RND_FI`                           |
//! | `campaign.jobs`          | `0` (one worker per core)                |
//! | `output.dir`             | `out`                                    |

use crate::cachesim::CacheGeometry;
use crate::faultmap::{is_modeled_voltage, CorpusParams, SramGeometry};
use crate::harness::Method;
use crate::workloads::Benchmark;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub n_srams: usize,
    pub seed: u64,
    pub corpus: CorpusParams,
    pub cache: CacheGeometry,
    pub benchmarks: Vec<Benchmark>,
    pub methods: Vec<Method>,
    pub out_dir: PathBuf,
    /// Worker threads for `run`; 0 means one per core.
    pub jobs: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            n_srams: 2060,
            seed: 1,
            corpus: CorpusParams::default(),
            cache: CacheGeometry::default(),
            benchmarks: Benchmark::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            out_dir: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::Parse {
        line,
        msg: format!("bad value `{raw}` for `{key}`"),
    })
}

fn list<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value(line, key, s))
        .collect()
}

impl CampaignConfig {
    /// Defaults overridden by the entries of `text`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        let (mut rows, mut cols) = (c.corpus.geometry.rows, c.corpus.geometry.cols);
        let (mut sets, mut ways, mut line_bytes) =
            (c.cache.num_sets, c.cache.associativity, c.cache.line_bytes);
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, val)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: n,
                    msg: "expected `section.key = value`".into(),
                });
            };
            let (key, val) = (key.trim(), val.trim());
            match key {
                "corpus.n_srams" => c.n_srams = value(n, key, val)?,
                "corpus.seed" => c.seed = value(n, key, val)?,
                "corpus.rows" => rows = value(n, key, val)?,
                "corpus.cols" => cols = value(n, key, val)?,
                "corpus.faulty_fraction" => c.corpus.faulty_fraction = value(n, key, val)?,
                "corpus.voltages" => c.corpus.voltages = list(n, key, val)?,
                "corpus.mean_run_length" => c.corpus.spatial.mean_run_length = value(n, key, val)?,
                "corpus.gap_prob" => c.corpus.spatial.gap_prob = value(n, key, val)?,
                "corpus.outlier_prob" => c.corpus.spatial.outlier_prob = value(n, key, val)?,
                "cache.sets" => sets = value(n, key, val)?,
                "cache.ways" => ways = value(n, key, val)?,
                "cache.line_bytes" => line_bytes = value(n, key, val)?,
                "campaign.benchmarks" => {
                    c.benchmarks = val
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|msg| ConfigError::Parse { line: n, msg }))
                        .collect::<Result<_, _>>()?
                }
                "campaign.methods" => {
                    c.methods = val
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|msg| ConfigError::Parse { line: n, msg }))
                        .collect::<Result<_, _>>()?
                }
                "campaign.jobs" => c.jobs = value(n, key, val)?,
                "output.dir" => c.out_dir = PathBuf::from(val),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: n,
                        key: key.to_string(),
                    })
                }
            }
        }
        c.corpus.geometry =
            SramGeometry::new(rows, cols).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        c.cache = CacheGeometry::new(sets, ways, line_bytes)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.n_srams == 0 {
            return invalid("corpus.n_srams must be >= 1");
        }
        if self.corpus.voltages.is_empty() {
            return invalid("corpus.voltages must not be empty");
        }
        if let Some(v) = self.corpus.voltages.iter().find(|&&v| !is_modeled_voltage(v)) {
            return Err(ConfigError::Invalid(format!(
                "voltage {v} mV is not in 540..=600 step 10"
            )));
        }
        let mut seen = self.corpus.voltages.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.corpus.voltages.len() {
            return invalid("corpus.voltages has duplicates");
        }
        if !(0.0..=1.0).contains(&self.corpus.faulty_fraction) {
            return invalid("corpus.faulty_fraction must be in [0, 1]");
        }
        self.corpus
            .spatial
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.corpus.geometry.capacity() != self.cache.capacity_bits() {
            return Err(ConfigError::Invalid(format!(
                "SRAM holds {} bits but the cache holds {}",
                self.corpus.geometry.capacity(),
                self.cache.capacity_bits()
            )));
        }
        if self.benchmarks.is_empty() {
            return invalid("campaign.benchmarks must not be empty");
        }
        if self.methods.is_empty() {
            return invalid("campaign.methods must not be empty");
        }
        Ok(())
    }
}
