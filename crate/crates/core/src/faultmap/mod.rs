//! SRAM fault maps: types, the v1 text format, random and hardware-like
//! generators, voltage derivation and per-bit statistics.

mod format;
mod generate;
mod stats;

pub use format::{parse_fault_map, serialize_fault_map};
pub use generate::{
    derive_map_at_voltage, generate_corpus, generate_hwlike_sram, generate_random_map,
    match_random_map, sample_fault_count, Corpus, CorpusParams, FaultCountDistribution, HwSram,
    SpatialParams,
};
pub use stats::{probability_heatmap, Heatmap};

use std::fmt;
use thiserror::Error;

/// Lowest modeled supply voltage in millivolts.
pub const MIN_VOLTAGE_MV: u32 = 540;
/// Highest modeled supply voltage in millivolts.
pub const MAX_VOLTAGE_MV: u32 = 600;
pub const VOLTAGE_STEP_MV: u32 = 10;

/// The seven supply voltages of the sweep, lowest first.
pub fn voltage_sweep() -> Vec<u32> {
    (MIN_VOLTAGE_MV..=MAX_VOLTAGE_MV)
        .step_by(VOLTAGE_STEP_MV as usize)
        .collect()
}

pub fn is_modeled_voltage(mv: u32) -> bool {
    (MIN_VOLTAGE_MV..=MAX_VOLTAGE_MV).contains(&mv) && (mv - MIN_VOLTAGE_MV).is_multiple_of(VOLTAGE_STEP_MV)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaultMapError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bit ({row}, {col}) outside {rows}x{cols} array")]
    OutOfRange { row: u32, col: u32, rows: u32, cols: u32 },
    #[error("duplicate fault at ({row}, {col})")]
    Duplicate { row: u32, col: u32 },
    #[error("{requested} faults requested but the array holds {capacity} bits")]
    CapacityExceeded { requested: usize, capacity: usize },
    #[error("voltage {0} mV outside the modeled window 540..=600")]
    VoltageOutOfWindow(u32),
    #[error("invalid geometry {rows}x{cols}")]
    InvalidGeometry { rows: u32, cols: u32 },
    #[error("maps with different geometries cannot be combined")]
    MixedGeometry,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SramGeometry {
    pub rows: u32,
    pub cols: u32,
}

impl SramGeometry {
    pub fn new(rows: u32, cols: u32) -> Result<Self, FaultMapError> {
        if rows == 0 || cols == 0 {
            return Err(FaultMapError::InvalidGeometry { rows, cols });
        }
        Ok(Self { rows, cols })
    }

    pub fn capacity(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn contains(&self, loc: BitLocation) -> bool {
        loc.row < self.rows && loc.col < self.cols
    }

    pub fn linear(&self, loc: BitLocation) -> usize {
        loc.row as usize * self.cols as usize + loc.col as usize
    }

    pub fn location(&self, linear: usize) -> BitLocation {
        let cols = self.cols as usize;
        BitLocation {
            row: (linear / cols) as u32,
            col: (linear % cols) as u32,
        }
    }
}

impl Default for SramGeometry {
    /// 128 x 128 = 16 Kbit.
    fn default() -> Self {
        Self { rows: 128, cols: 128 }
    }
}

/// Row 0 is the top of the array; rows grow toward higher addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitLocation {
    pub row: u32,
    pub col: u32,
}

impl BitLocation {
    pub fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }

    pub fn manhattan(&self, other: &BitLocation) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    StuckAt0,
    StuckAt1,
    BitFlip,
}

impl CorruptionKind {
    pub fn token(&self) -> &'static str {
        match self {
            CorruptionKind::StuckAt0 => "stuck0",
            CorruptionKind::StuckAt1 => "stuck1",
            CorruptionKind::BitFlip => "flip",
        }
    }
}

/// When a fault is active, in units of cache accesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultTiming {
    Permanent,
    /// Fires once, at the first touching access with `tick >= fire_tick`.
    Transient { fire_tick: u64 },
    /// Active for `start_tick <= tick < start_tick + duration`.
    Intermittent { start_tick: u64, duration: u64 },
}

impl FaultTiming {
    pub fn is_active(&self, tick: u64) -> bool {
        match *self {
            FaultTiming::Permanent => true,
            FaultTiming::Transient { fire_tick } => tick >= fire_tick,
            FaultTiming::Intermittent {
                start_tick,
                duration,
            } => tick >= start_tick && tick - start_tick < duration,
        }
    }
}

impl fmt::Display for FaultTiming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultTiming::Permanent => write!(f, "permanent"),
            FaultTiming::Transient { fire_tick } => write!(f, "transient:{fire_tick}"),
            FaultTiming::Intermittent {
                start_tick,
                duration,
            } => write!(f, "intermittent:{start_tick}:{duration}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultSpec {
    pub location: BitLocation,
    pub timing: FaultTiming,
    pub kind: CorruptionKind,
    /// Highest supply voltage at which the bit is faulty.
    pub onset_voltage_mv: Option<u32>,
}

impl FaultSpec {
    /// The fault every generator emits: permanent stuck-at-0.
    pub fn stuck_at_zero(location: BitLocation) -> Self {
        Self {
            location,
            timing: FaultTiming::Permanent,
            kind: CorruptionKind::StuckAt0,
            onset_voltage_mv: None,
        }
    }
}

/// Faults of one SRAM instance at one supply voltage, sorted by linear index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultMap {
    sram_id: String,
    voltage_mv: u32,
    geometry: SramGeometry,
    faults: Vec<FaultSpec>,
}

impl FaultMap {
    pub fn new(
        sram_id: impl Into<String>,
        voltage_mv: u32,
        geometry: SramGeometry,
        mut faults: Vec<FaultSpec>,
    ) -> Result<Self, FaultMapError> {
        for f in &faults {
            if !geometry.contains(f.location) {
                return Err(FaultMapError::OutOfRange {
                    row: f.location.row,
                    col: f.location.col,
                    rows: geometry.rows,
                    cols: geometry.cols,
                });
            }
            if let Some(mv) = f.onset_voltage_mv {
                if !(MIN_VOLTAGE_MV..=MAX_VOLTAGE_MV).contains(&mv) {
                    return Err(FaultMapError::VoltageOutOfWindow(mv));
                }
            }
        }
        faults.sort_by_key(|f| geometry.linear(f.location));
        if let Some(w) = faults.windows(2).find(|w| w[0].location == w[1].location) {
            return Err(FaultMapError::Duplicate {
                row: w[0].location.row,
                col: w[0].location.col,
            });
        }
        Ok(Self {
            sram_id: sram_id.into(),
            voltage_mv,
            geometry,
            faults,
        })
    }

    pub fn empty(sram_id: impl Into<String>, voltage_mv: u32, geometry: SramGeometry) -> Self {
        Self {
            sram_id: sram_id.into(),
            voltage_mv,
            geometry,
            faults: Vec::new(),
        }
    }

    pub fn sram_id(&self) -> &str {
        &self.sram_id
    }

    pub fn voltage_mv(&self) -> u32 {
        self.voltage_mv
    }

    pub fn geometry(&self) -> SramGeometry {
        self.geometry
    }

    pub fn faults(&self) -> &[FaultSpec] {
        &self.faults
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn contains(&self, loc: BitLocation) -> bool {
        let key = self.geometry.linear(loc);
        self.faults
            .binary_search_by_key(&key, |f| self.geometry.linear(f.location))
            .is_ok()
    }

    pub fn locations(&self) -> impl Iterator<Item = BitLocation> + '_ {
        self.faults.iter().map(|f| f.location)
    }

    /// True when every faulty bit of `self` is also faulty in `other`.
    pub fn is_subset_of(&self, other: &FaultMap) -> bool {
        self.geometry == other.geometry && self.locations().all(|l| other.contains(l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_linear_is_bijective() {
        let g = SramGeometry::new(7, 5).unwrap();
        for i in 0..g.capacity() {
            assert_eq!(g.linear(g.location(i)), i);
        }
        assert!(SramGeometry::new(0, 4).is_err());
        assert_eq!(SramGeometry::default().capacity(), 16384);
    }

    #[test]
    fn timing_windows() {
        assert!(FaultTiming::Permanent.is_active(0));
        let t = FaultTiming::Transient { fire_tick: 5 };
        assert!(!t.is_active(4));
        assert!(t.is_active(5));
        let i = FaultTiming::Intermittent {
            start_tick: 10,
            duration: 3,
        };
        assert!(!i.is_active(9));
        assert!(i.is_active(10) && i.is_active(12));
        assert!(!i.is_active(13));
    }

    #[test]
    fn map_rejects_duplicates_and_out_of_range() {
        let g = SramGeometry::default();
        let f = FaultSpec::stuck_at_zero(BitLocation::new(3, 4));
        assert!(matches!(
            FaultMap::new("s", 540, g, vec![f, f]),
            Err(FaultMapError::Duplicate { row: 3, col: 4 })
        ));
        let bad = FaultSpec::stuck_at_zero(BitLocation::new(128, 0));
        assert!(matches!(
            FaultMap::new("s", 540, g, vec![bad]),
            Err(FaultMapError::OutOfRange { .. })
        ));
    }

    #[test]
    fn map_sorts_by_linear_index() {
        let g = SramGeometry::default();
        let m = FaultMap::new(
            "s",
            540,
            g,
            vec![
                FaultSpec::stuck_at_zero(g.location(5)),
                FaultSpec::stuck_at_zero(g.location(3)),
            ],
        )
        .unwrap();
        let idx: Vec<_> = m.locations().map(|l| g.linear(l)).collect();
        assert_eq!(idx, vec![3, 5]);
        assert!(m.contains(g.location(5)));
        assert!(!m.contains(g.location(4)));
    }

    #[test]
    fn sweep_has_seven_settings() {
        assert_eq!(voltage_sweep(), vec![540, 550, 560, 570, 580, 590, 600]);
        assert!(is_modeled_voltage(570));
        assert!(!is_modeled_voltage(575));
        assert!(!is_modeled_voltage(610));
    }
}
