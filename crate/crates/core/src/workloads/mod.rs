//! The six benchmark kernels.
//!
//! Each kernel lays out its own regions in a fresh [`SimMemory`] (tables
//! first, so they sit at the lowest physical addresses), writes its inputs
//! straight to main memory, runs with every data load and store routed
//! through the cache, flushes, and reads its output back from main memory.
//! Pointer-like values (row pointers, block pointers, array bases) live in
//! the tables as full 64-bit virtual addresses.

pub mod blackscholes;
pub mod dct;
pub mod jacobi;
pub mod kmeans;
pub mod mc;
mod memory;
pub mod sobel;

pub use memory::{Region, RegionId, RegionKind, SimMemory, VIRT_BASE};

use std::fmt;
use std::str::FromStr;

/// Why a run failed to terminate normally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crash {
    /// Access outside the region it targets (the sandbox's segfault).
    OutOfRange { addr: u64 },
    StepBudgetExceeded,
    /// A non-finite value reached a loop bound or convergence test.
    NonFiniteControl,
}

impl fmt::Display for Crash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Crash::OutOfRange { addr } => write!(f, "out-of-range access at {addr:#x}"),
            Crash::StepBudgetExceeded => write!(f, "step budget exceeded"),
            Crash::NonFiniteControl => write!(f, "non-finite control value"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Benchmark {
    Jacobi,
    Blackscholes,
    Dct,
    Mc,
    Sobel,
    KMeans,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Jacobi,
        Benchmark::Blackscholes,
        Benchmark::Dct,
        Benchmark::Mc,
        Benchmark::Sobel,
        Benchmark::KMeans,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Jacobi => "jacobi",
            Benchmark::Blackscholes => "blackscholes",
            Benchmark::Dct => "dct",
            Benchmark::Mc => "mc",
            Benchmark::Sobel => "sobel",
            Benchmark::KMeans => "kmeans",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown benchmark `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadParams {
    Jacobi { n: usize, max_iters: usize, tolerance: f64 },
    Blackscholes { options: usize },
    Dct { side: usize },
    Mc { points: usize, walks: usize, max_steps: u64 },
    Sobel { side: usize },
    KMeans { points: usize, k: usize, max_iters: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadConfig {
    pub params: WorkloadParams,
    pub input_seed: u64,
    /// Maximum primitive operations (memory accesses plus charged steps).
    pub step_budget: u64,
}

impl WorkloadConfig {
    pub fn default_for(benchmark: Benchmark) -> Self {
        let (params, step_budget) = match benchmark {
            Benchmark::Jacobi => (
                WorkloadParams::Jacobi {
                    n: 32,
                    max_iters: 500,
                    tolerance: 1e-6,
                },
                2_000_000,
            ),
            Benchmark::Blackscholes => (WorkloadParams::Blackscholes { options: 1024 }, 200_000),
            Benchmark::Dct => (WorkloadParams::Dct { side: 64 }, 1_500_000),
            Benchmark::Mc => (
                WorkloadParams::Mc {
                    points: 128,
                    walks: 256,
                    max_steps: 100_000,
                },
                20_000_000,
            ),
            Benchmark::Sobel => (WorkloadParams::Sobel { side: 64 }, 500_000),
            Benchmark::KMeans => (
                WorkloadParams::KMeans {
                    points: 512,
                    k: 4,
                    max_iters: 50,
                },
                2_000_000,
            ),
        };
        Self {
            params,
            input_seed: 0x5EED_0000 + benchmark as u64,
            step_budget,
        }
    }

    pub fn benchmark(&self) -> Benchmark {
        match self.params {
            WorkloadParams::Jacobi { .. } => Benchmark::Jacobi,
            WorkloadParams::Blackscholes { .. } => Benchmark::Blackscholes,
            WorkloadParams::Dct { .. } => Benchmark::Dct,
            WorkloadParams::Mc { .. } => Benchmark::Mc,
            WorkloadParams::Sobel { .. } => Benchmark::Sobel,
            WorkloadParams::KMeans { .. } => Benchmark::KMeans,
        }
    }
}

/// How to interpret an output buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputView {
    /// 8-bit grayscale, row-major.
    Image { width: usize, height: usize },
    /// Little-endian f64 values.
    Vector { len: usize },
    /// One u8 cluster label per point.
    Labels { len: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub bytes: Vec<u8>,
    pub view: OutputView,
}

impl Output {
    pub fn f64_values(&self) -> Vec<f64> {
        self.bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    }

    /// Text descriptor accompanying the flat binary buffer.
    pub fn descriptor(&self) -> String {
        match self.view {
            OutputView::Image { width, height } => {
                format!("type=u8\nshape={height},{width}\nlayout=row-major\n")
            }
            OutputView::Vector { len } => format!("type=f64le\nshape={len}\n"),
            OutputView::Labels { len, k } => format!("type=u8\nshape={len}\nclasses={k}\n"),
        }
    }

    /// Binary P5 PGM; `None` for non-image outputs.
    pub fn to_pgm(&self) -> Option<Vec<u8>> {
        match self.view {
            OutputView::Image { width, height } => {
                Some(crate::report::pgm(width, height, &self.bytes))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadResult {
    Output(Output),
    Crash(Crash),
}

impl WorkloadResult {
    pub fn output(&self) -> Option<&Output> {
        match self {
            WorkloadResult::Output(o) => Some(o),
            WorkloadResult::Crash(_) => None,
        }
    }
}

/// Runs the configured benchmark in `mem`, which must be freshly created
/// (no regions yet) with the desired faults installed.
pub fn run(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    match config.benchmark() {
        Benchmark::Jacobi => jacobi::run_jacobi(config, mem),
        Benchmark::Blackscholes => blackscholes::run_blackscholes(config, mem),
        Benchmark::Dct => dct::run_dct(config, mem),
        Benchmark::Mc => mc::run_mc(config, mem),
        Benchmark::Sobel => sobel::run_sobel(config, mem),
        Benchmark::KMeans => kmeans::run_kmeans(config, mem),
    }
}

/// Shared driver: lay out, load inputs, execute, flush, read back.
pub(crate) fn drive<L>(
    config: &WorkloadConfig,
    mem: &mut SimMemory,
    setup: impl FnOnce(&mut SimMemory) -> L,
    kernel: impl FnOnce(&L, &mut SimMemory) -> Result<RegionId, Crash>,
    view: OutputView,
) -> WorkloadResult {
    assert!(mem.regions().is_empty(), "SimMemory must be fresh");
    let layout = setup(mem);
    mem.set_step_budget(config.step_budget);
    match kernel(&layout, mem) {
        Ok(out) => {
            mem.flush();
            WorkloadResult::Output(Output {
                bytes: mem.peek(out),
                view,
            })
        }
        Err(crash) => WorkloadResult::Crash(crash),
    }
}

/// Raises `NonFiniteControl` when a control value is NaN or infinite.
pub(crate) fn finite(v: f64) -> Result<f64, Crash> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Crash::NonFiniteControl)
    }
}
