//! Fault-map generators.
//!
//! Two families are produced. Random maps place a given number of permanent
//! stuck-at-0 faults uniformly without replacement. Hardware-like SRAMs place
//! faults in vertical runs anchored near the bottom rows of a few weak
//! columns, and give every faulty bit an onset voltage so that lowering the
//! supply only ever adds faults.

use super::{
    voltage_sweep, BitLocation, FaultMap, FaultMapError, FaultSpec, SramGeometry,
    MAX_VOLTAGE_MV, MIN_VOLTAGE_MV,
};
use crate::rng::{self, Domain, SimRng};
use rand::seq::index;
use rand::Rng;
use std::collections::HashSet;

/// Probability mass over fault counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultCountDistribution {
    /// `(count, mass)` sorted by count, masses summing to one.
    masses: Vec<(usize, f64)>,
}

impl FaultCountDistribution {
    pub fn new(mut masses: Vec<(usize, f64)>) -> Result<Self, FaultMapError> {
        if masses.is_empty() {
            return Err(FaultMapError::InvalidParams("empty distribution".into()));
        }
        if masses.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
            return Err(FaultMapError::InvalidParams("negative mass".into()));
        }
        let total: f64 = masses.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FaultMapError::InvalidParams(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        masses.sort_by_key(|&(c, _)| c);
        if masses.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(FaultMapError::InvalidParams("repeated count".into()));
        }
        Ok(Self { masses })
    }

    pub fn point_mass(count: usize) -> Self {
        Self {
            masses: vec![(count, 1.0)],
        }
    }

    pub fn masses(&self) -> &[(usize, f64)] {
        &self.masses
    }

    pub fn mass_of(&self, count: usize) -> f64 {
        self.masses
            .binary_search_by_key(&count, |&(c, _)| c)
            .map(|i| self.masses[i].1)
            .unwrap_or(0.0)
    }

    pub fn max_count(&self) -> usize {
        self.masses.last().map(|&(c, _)| c).unwrap_or(0)
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(count, p) in &self.masses {
            acc += p;
            if u < acc {
                return count;
            }
        }
        // u landed in the rounding slack above the last cumulative mass.
        self.masses
            .iter()
            .rev()
            .find(|&&(_, p)| p > 0.0)
            .map(|&(c, _)| c)
            .unwrap_or(0)
    }
}

impl Default for FaultCountDistribution {
    /// 2, 4, 6, 8 faults at 37 %, 15 %, 9 %, 5 %; 10-16 at 8/6/5/4 %; the
    /// remaining 11 % spread over even counts 18..=600 with weight `1/count`.
    fn default() -> Self {
        let mut masses = vec![
            (2, 0.37),
            (4, 0.15),
            (6, 0.09),
            (8, 0.05),
            (10, 0.08),
            (12, 0.06),
            (14, 0.05),
            (16, 0.04),
        ];
        let tail: Vec<usize> = (18..=600).step_by(2).collect();
        let norm: f64 = tail.iter().map(|&c| 1.0 / c as f64).sum();
        masses.extend(tail.iter().map(|&c| (c, 0.11 / c as f64 / norm)));
        Self::new(masses).expect("default distribution is normalized")
    }
}

/// Knobs of the weak-column vertical-run placement.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialParams {
    pub count_distribution: FaultCountDistribution,
    pub mean_run_length: f64,
    /// Probability of skipping a row between consecutive bits of a run.
    pub gap_prob: f64,
    /// Probability that a fault is moved to a uniformly random bit.
    pub outlier_prob: f64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            count_distribution: FaultCountDistribution::default(),
            mean_run_length: 4.0,
            gap_prob: 0.2,
            outlier_prob: 0.05,
        }
    }
}

impl SpatialParams {
    pub fn validate(&self) -> Result<(), FaultMapError> {
        if !(self.mean_run_length >= 1.0) || !self.mean_run_length.is_finite() {
            return Err(FaultMapError::InvalidParams(
                "mean_run_length must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.gap_prob) {
            return Err(FaultMapError::InvalidParams("gap_prob must be in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.outlier_prob) {
            return Err(FaultMapError::InvalidParams(
                "outlier_prob must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One hardware-like SRAM instance: every faulty bit with its onset voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct HwSram {
    pub id: String,
    pub geometry: SramGeometry,
    pub faults: Vec<FaultSpec>,
    /// Indices into `faults` of the bits that stayed in each vertical run,
    /// bottom-most first.
    pub runs: Vec<Vec<usize>>,
}

pub fn generate_random_map(
    n_faults: usize,
    geometry: SramGeometry,
    seed: u64,
) -> Result<FaultMap, FaultMapError> {
    let mut rng = rng::stream(seed, Domain::RandomMap, 0);
    random_map_with(n_faults, geometry, &mut rng, "random", MIN_VOLTAGE_MV)
}

fn random_map_with(
    n_faults: usize,
    geometry: SramGeometry,
    rng: &mut SimRng,
    sram_id: &str,
    voltage_mv: u32,
) -> Result<FaultMap, FaultMapError> {
    let capacity = geometry.capacity();
    if n_faults > capacity {
        return Err(FaultMapError::CapacityExceeded {
            requested: n_faults,
            capacity,
        });
    }
    let faults = index::sample(rng, capacity, n_faults)
        .into_iter()
        .map(|i| FaultSpec::stuck_at_zero(geometry.location(i)))
        .collect();
    FaultMap::new(sram_id, voltage_mv, geometry, faults)
}

/// Uniform-random map with the same fault count, geometry, id and voltage.
pub fn match_random_map(hw: &FaultMap, seed: u64) -> FaultMap {
    let mut rng = rng::stream(seed, Domain::RandomMap, 0);
    random_map_with(hw.len(), hw.geometry(), &mut rng, hw.sram_id(), hw.voltage_mv())
        .expect("a valid map never exceeds its own capacity")
}

pub fn sample_fault_count(dist: &FaultCountDistribution, seed: u64) -> usize {
    dist.sample(&mut rng::stream(seed, Domain::CountSample, 0))
}

pub fn generate_hwlike_sram(
    geometry: SramGeometry,
    params: &SpatialParams,
    seed: u64,
) -> Result<HwSram, FaultMapError> {
    params.validate()?;
    let mut rng = rng::stream(seed, Domain::HwSram, 0);
    Ok(hwlike_with(geometry, params, &mut rng, "sram"))
}

fn hwlike_with(
    geometry: SramGeometry,
    params: &SpatialParams,
    rng: &mut SimRng,
    id: &str,
) -> HwSram {
    let n = params.count_distribution.sample(rng).min(geometry.capacity());
    let mut sram = HwSram {
        id: id.to_string(),
        geometry,
        faults: Vec::with_capacity(n),
        runs: Vec::new(),
    };
    if n == 0 {
        return sram;
    }

    let rows = geometry.rows as i64;
    let cols = geometry.cols as usize;
    let k = ((n as f64 / params.mean_run_length).round() as usize).clamp(1, cols);
    let run_columns = index::sample(rng, cols, k).into_vec();
    let base_len = n / k;
    let extra = n % k;
    let anchor_lo = (3 * geometry.rows / 4) as i64;

    let mut occupied: HashSet<BitLocation> = HashSet::with_capacity(n);
    // Bits that ran off the top of the array, placed uniformly afterwards.
    let mut spill: Vec<u32> = Vec::new();

    for (r, &col) in run_columns.iter().enumerate() {
        let len = base_len + usize::from(r < extra);
        let mut row = rng.gen_range(anchor_lo..rows);
        let mut onset = 560 + 10 * rng.gen_range(0..=4u32);
        let mut run = Vec::with_capacity(len);
        for j in 0..len {
            if j > 0 {
                row -= 1;
                while row >= 0 && rng.gen_bool(params.gap_prob) {
                    row -= 1;
                }
                if rng.gen_bool(0.5) {
                    onset = onset.saturating_sub(10).max(MIN_VOLTAGE_MV);
                }
            }
            if row < 0 {
                spill.push(onset);
                continue;
            }
            let loc = BitLocation::new(row as u32, col as u32);
            occupied.insert(loc);
            run.push(sram.faults.len());
            sram.faults.push(FaultSpec {
                onset_voltage_mv: Some(onset),
                ..FaultSpec::stuck_at_zero(loc)
            });
        }
        sram.runs.push(run);
    }

    for onset in spill {
        let loc = free_location(geometry, &occupied, rng);
        occupied.insert(loc);
        sram.faults.push(FaultSpec {
            onset_voltage_mv: Some(onset),
            ..FaultSpec::stuck_at_zero(loc)
        });
    }

    let mut relocated = vec![false; sram.faults.len()];
    for (i, moved) in relocated.iter_mut().enumerate() {
        if rng.gen_bool(params.outlier_prob) {
            let old = sram.faults[i].location;
            occupied.remove(&old);
            let loc = free_location(geometry, &occupied, rng);
            occupied.insert(loc);
            sram.faults[i].location = loc;
            *moved = loc != old;
        }
    }
    for run in &mut sram.runs {
        run.retain(|&i| !relocated[i]);
    }
    sram
}

fn free_location(
    geometry: SramGeometry,
    occupied: &HashSet<BitLocation>,
    rng: &mut SimRng,
) -> BitLocation {
    debug_assert!(occupied.len() < geometry.capacity());
    loop {
        let loc = geometry.location(rng.gen_range(0..geometry.capacity()));
        if !occupied.contains(&loc) {
            return loc;
        }
    }
}

/// The faults of `sram` that are active at `voltage_mv`: exactly those whose
/// onset voltage is at or above it.
pub fn derive_map_at_voltage(sram: &HwSram, voltage_mv: u32) -> Result<FaultMap, FaultMapError> {
    if !(MIN_VOLTAGE_MV..=MAX_VOLTAGE_MV).contains(&voltage_mv) {
        return Err(FaultMapError::VoltageOutOfWindow(voltage_mv));
    }
    let faults = sram
        .faults
        .iter()
        .filter(|f| f.onset_voltage_mv.is_some_and(|v| v >= voltage_mv))
        .copied()
        .collect();
    FaultMap::new(sram.id.clone(), voltage_mv, sram.geometry, faults)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusParams {
    pub geometry: SramGeometry,
    pub spatial: SpatialParams,
    /// Share of SRAMs that are faulty at the lowest voltage.
    pub faulty_fraction: f64,
    /// Supply voltages to derive maps at.
    pub voltages: Vec<u32>,
}

impl Default for CorpusParams {
    fn default() -> Self {
        Self {
            geometry: SramGeometry::default(),
            spatial: SpatialParams::default(),
            faulty_fraction: 2174.0 / 14420.0,
            voltages: voltage_sweep(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub srams: Vec<HwSram>,
    /// One map per `(sram, voltage)`, SRAM-major, voltages in parameter order.
    pub hw_maps: Vec<FaultMap>,
    /// A matched random map for every non-empty entry of `hw_maps`, in the
    /// same order.
    pub rnd_maps: Vec<FaultMap>,
}

pub fn sram_id(index: usize) -> String {
    format!("sram-{index:05}")
}

pub fn generate_corpus(
    n_srams: usize,
    params: &CorpusParams,
    seed: u64,
) -> Result<Corpus, FaultMapError> {
    if n_srams == 0 {
        return Err(FaultMapError::InvalidParams("n_srams must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&params.faulty_fraction) {
        return Err(FaultMapError::InvalidParams(
            "faulty_fraction must be in [0, 1]".into(),
        ));
    }
    params.spatial.validate()?;

    let mut corpus = Corpus {
        srams: Vec::with_capacity(n_srams),
        hw_maps: Vec::with_capacity(n_srams * params.voltages.len()),
        rnd_maps: Vec::new(),
    };
    for i in 0..n_srams {
        let id = sram_id(i);
        let mut rng = rng::stream(seed, Domain::HwSram, i as u64);
        let sram = if rng.gen_bool(params.faulty_fraction) {
            hwlike_with(params.geometry, &params.spatial, &mut rng, &id)
        } else {
            HwSram {
                id,
                geometry: params.geometry,
                faults: Vec::new(),
                runs: Vec::new(),
            }
        };
        for &mv in &params.voltages {
            let hw = derive_map_at_voltage(&sram, mv)?;
            if !hw.is_empty() {
                let mut rng = rng::stream2(seed, Domain::RandomMap, i as u64, mv as u64);
                let rnd =
                    random_map_with(hw.len(), hw.geometry(), &mut rng, hw.sram_id(), mv)?;
                corpus.rnd_maps.push(rnd);
            }
            corpus.hw_maps.push(hw);
        }
        corpus.srams.push(sram);
    }
    Ok(corpus)
}
