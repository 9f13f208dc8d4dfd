//! Sandboxed address space for the benchmark kernels.
//!
//! Kernels see 64-bit virtual addresses in a user-space-like window starting
//! at [`VIRT_BASE`]. Every load and store names the region it targets and is
//! checked against that region's bounds before it is translated to a
//! physical address and routed through the cache; a failed check is the
//! sandbox's segmentation fault. Regions are laid out in allocation order
//! from physical address 0, so tables allocated first occupy the lowest
//! addresses.

use super::Crash;
use crate::cachesim::{CacheError, CacheGeometry, CacheModel, FlatMemory, MemoryPort};
use crate::faultmap::FaultMap;

/// Virtual address of physical byte 0.
pub const VIRT_BASE: u64 = 0x0000_5555_5555_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// Pointer, index and offset tables.
    Table,
    /// Loop-control state such as step counters.
    Control,
    /// Inputs, outputs and scratch data.
    Bulk,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: &'static str,
    pub kind: RegionKind,
    pub phys_base: u64,
    pub len: u64,
}

impl Region {
    pub fn virt_base(&self) -> u64 {
        VIRT_BASE + self.phys_base
    }

    pub fn phys_end(&self) -> u64 {
        self.phys_base + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegionId(usize);

pub struct SimMemory {
    cache: CacheModel<FlatMemory>,
    regions: Vec<Region>,
    steps: u64,
    step_budget: u64,
}

impl SimMemory {
    pub fn new(geometry: CacheGeometry) -> Self {
        Self {
            cache: CacheModel::new(geometry, FlatMemory::new(0)),
            regions: Vec::new(),
            steps: 0,
            step_budget: u64::MAX,
        }
    }

    pub fn with_faults(geometry: CacheGeometry, map: &FaultMap) -> Result<Self, CacheError> {
        let mut mem = Self::new(geometry);
        mem.cache.install_fault_map(map)?;
        Ok(mem)
    }

    pub fn cache(&self) -> &CacheModel<FlatMemory> {
        &self.cache
    }

    pub fn cache_mut(&mut self) -> &mut CacheModel<FlatMemory> {
        &mut self.cache
    }

    pub fn set_step_budget(&mut self, budget: u64) {
        self.step_budget = budget;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: RegionId) -> &Region {
        &self.regions[id.0]
    }

    /// Appends a line-aligned region of `len` bytes.
    pub fn alloc(&mut self, name: &'static str, kind: RegionKind, len: usize) -> RegionId {
        let lb = self.cache.geometry().line_bytes as u64;
        let start = self
            .regions
            .last()
            .map(|r| r.phys_end().div_ceil(lb) * lb)
            .unwrap_or(0);
        self.regions.push(Region {
            name,
            kind,
            phys_base: start,
            len: len as u64,
        });
        let end = (start + len as u64).div_ceil(lb) * lb;
        self.cache.backing_mut().grow(end as usize);
        RegionId(self.regions.len() - 1)
    }

    /// Virtual address of byte `offset` of region `id`.
    pub fn addr(&self, id: RegionId, offset: u64) -> u64 {
        self.regions[id.0].virt_base() + offset
    }

    fn translate(&self, id: RegionId, vaddr: u64, len: usize) -> Result<u64, Crash> {
        let r = &self.regions[id.0];
        let base = r.virt_base();
        match vaddr.checked_sub(base) {
            Some(off) if off.checked_add(len as u64).is_some_and(|end| end <= r.len) => {
                Ok(r.phys_base + off)
            }
            _ => Err(Crash::OutOfRange { addr: vaddr }),
        }
    }

    fn count_step(&mut self) -> Result<(), Crash> {
        self.steps += 1;
        if self.steps > self.step_budget {
            return Err(Crash::StepBudgetExceeded);
        }
        Ok(())
    }

    /// Charges one primitive operation that does not touch memory.
    pub fn step(&mut self) -> Result<(), Crash> {
        self.count_step()
    }

    fn load<const N: usize>(&mut self, id: RegionId, vaddr: u64) -> Result<[u8; N], Crash> {
        self.count_step()?;
        let phys = self.translate(id, vaddr, N)?;
        let mut buf = [0u8; N];
        self.cache
            .read(phys, &mut buf)
            .map_err(|_| Crash::OutOfRange { addr: vaddr })?;
        Ok(buf)
    }

    fn store<const N: usize>(&mut self, id: RegionId, vaddr: u64, bytes: [u8; N]) -> Result<(), Crash> {
        self.count_step()?;
        let phys = self.translate(id, vaddr, N)?;
        self.cache
            .write(phys, &bytes)
            .map_err(|_| Crash::OutOfRange { addr: vaddr })
    }

    pub fn load_u8(&mut self, id: RegionId, vaddr: u64) -> Result<u8, Crash> {
        Ok(self.load::<1>(id, vaddr)?[0])
    }

    pub fn load_u64(&mut self, id: RegionId, vaddr: u64) -> Result<u64, Crash> {
        Ok(u64::from_le_bytes(self.load(id, vaddr)?))
    }

    pub fn load_f64(&mut self, id: RegionId, vaddr: u64) -> Result<f64, Crash> {
        Ok(f64::from_le_bytes(self.load(id, vaddr)?))
    }

    pub fn store_u8(&mut self, id: RegionId, vaddr: u64, v: u8) -> Result<(), Crash> {
        self.store(id, vaddr, [v])
    }

    pub fn store_u64(&mut self, id: RegionId, vaddr: u64, v: u64) -> Result<(), Crash> {
        self.store(id, vaddr, v.to_le_bytes())
    }

    pub fn store_f64(&mut self, id: RegionId, vaddr: u64, v: f64) -> Result<(), Crash> {
        self.store(id, vaddr, v.to_le_bytes())
    }

    /// Writes initial contents straight into main memory, bypassing the cache.
    pub fn poke(&mut self, id: RegionId, offset: u64, data: &[u8]) {
        let r = &self.regions[id.0];
        assert!(offset + data.len() as u64 <= r.len, "poke outside region {}", r.name);
        let at = (r.phys_base + offset) as usize;
        self.cache.backing_mut().bytes_mut()[at..at + data.len()].copy_from_slice(data);
    }

    pub fn poke_u64s(&mut self, id: RegionId, values: &[u64]) {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.poke(id, 0, &bytes);
    }

    pub fn poke_f64s(&mut self, id: RegionId, values: &[f64]) {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.poke(id, 0, &bytes);
    }

    /// Contents of a region in main memory. Call [`SimMemory::flush`] first
    /// to include dirty cached data.
    pub fn peek(&self, id: RegionId) -> Vec<u8> {
        let r = &self.regions[id.0];
        self.cache.backing().bytes()[r.phys_base as usize..r.phys_end() as usize].to_vec()
    }

    pub fn flush(&mut self) {
        self.cache
            .flush()
            .expect("line-aligned regions keep write-backs inside main memory");
    }
}
