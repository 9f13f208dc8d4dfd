//! Set-associative write-back cache with bit-level fault injection.
//!
//! Every request is intercepted: after the targeted line is resident (and,
//! for writes, after the payload is merged) all faults bound to that
//! physical line which are active at the current tick are applied to the
//! stored bytes. Stuck-at faults re-apply on every touching access; a
//! transient fault is dropped after it fires once. Evicted dirty lines carry
//! their corruption to the backing store.
//!
//! Write-back, write-allocate, LRU replacement. Only data bits are faulty;
//! tags and state bits never are.

use crate::faultmap::{CorruptionKind, FaultMap, FaultTiming};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("access of {len} bytes at {addr:#x} outside backing store of {size} bytes")]
    OutOfBounds { addr: u64, len: usize, size: u64 },
    #[error("request at {addr:#x} of {len} bytes crosses a line boundary")]
    SpansLines { addr: u64, len: usize },
    #[error("empty request")]
    EmptyRequest,
    #[error("bit {bit} outside cache data capacity {capacity}")]
    BitOutOfRange { bit: usize, capacity: usize },
    #[error("fault map holds {map_bits} bits but the cache holds {cache_bits}")]
    GeometryMismatch { map_bits: usize, cache_bits: usize },
    #[error("invalid cache geometry: {0}")]
    InvalidGeometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheGeometry {
    pub num_sets: usize,
    pub associativity: usize,
    pub line_bytes: usize,
}

impl Default for CacheGeometry {
    /// 16 sets x 2 ways x 64 B = 16 Kbit of data.
    fn default() -> Self {
        Self {
            num_sets: 16,
            associativity: 2,
            line_bytes: 64,
        }
    }
}

impl CacheGeometry {
    pub fn new(num_sets: usize, associativity: usize, line_bytes: usize) -> Result<Self, CacheError> {
        if num_sets == 0 || associativity == 0 || line_bytes == 0 {
            return Err(CacheError::InvalidGeometry("all dimensions must be >= 1".into()));
        }
        if !num_sets.is_power_of_two() || !line_bytes.is_power_of_two() {
            return Err(CacheError::InvalidGeometry(
                "num_sets and line_bytes must be powers of two".into(),
            ));
        }
        Ok(Self {
            num_sets,
            associativity,
            line_bytes,
        })
    }

    pub fn lines(&self) -> usize {
        self.num_sets * self.associativity
    }

    pub fn capacity_bytes(&self) -> usize {
        self.lines() * self.line_bytes
    }

    pub fn capacity_bits(&self) -> usize {
        self.capacity_bytes() * 8
    }

    pub fn line_bits(&self) -> usize {
        self.line_bytes * 8
    }

    pub fn set_of(&self, addr: u64) -> usize {
        ((addr / self.line_bytes as u64) % self.num_sets as u64) as usize
    }

    pub fn tag_of(&self, addr: u64) -> u64 {
        addr / (self.line_bytes * self.num_sets) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheBitAddr {
    pub set: usize,
    pub way: usize,
    pub bit_in_line: usize,
}

/// Line-major projection of a linear SRAM bit onto the data array: consecutive
/// lines fill the sets of way 0, then the sets of way 1, and so on.
pub fn map_fault_to_cache(linear_bit: usize, geometry: &CacheGeometry) -> Result<CacheBitAddr, CacheError> {
    let capacity = geometry.capacity_bits();
    if linear_bit >= capacity {
        return Err(CacheError::BitOutOfRange {
            bit: linear_bit,
            capacity,
        });
    }
    let line = linear_bit / geometry.line_bits();
    Ok(CacheBitAddr {
        set: line % geometry.num_sets,
        way: line / geometry.num_sets,
        bit_in_line: linear_bit % geometry.line_bits(),
    })
}

/// Byte-addressed memory that a cache can sit in front of.
pub trait MemoryPort {
    fn size(&self) -> u64;
    fn read(&mut self, addr: u64, buf: &mut [u8]) -> Result<(), CacheError>;
    fn write(&mut self, addr: u64, data: &[u8]) -> Result<(), CacheError>;
}

/// Fault-free main memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatMemory {
    bytes: Vec<u8>,
}

impl FlatMemory {
    pub fn new(size: usize) -> Self {
        Self {
            bytes: vec![0; size],
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.bytes
    }

    /// Extends the memory with zeroed bytes; never shrinks.
    pub fn grow(&mut self, size: usize) {
        if size > self.bytes.len() {
            self.bytes.resize(size, 0);
        }
    }

    fn check(&self, addr: u64, len: usize) -> Result<usize, CacheError> {
        let end = addr.checked_add(len as u64);
        match end {
            Some(end) if end <= self.bytes.len() as u64 => Ok(addr as usize),
            _ => Err(CacheError::OutOfBounds {
                addr,
                len,
                size: self.bytes.len() as u64,
            }),
        }
    }
}

impl MemoryPort for FlatMemory {
    fn size(&self) -> u64 {
        self.bytes.len() as u64
    }

    fn read(&mut self, addr: u64, buf: &mut [u8]) -> Result<(), CacheError> {
        let a = self.check(addr, buf.len())?;
        buf.copy_from_slice(&self.bytes[a..a + buf.len()]);
        Ok(())
    }

    fn write(&mut self, addr: u64, data: &[u8]) -> Result<(), CacheError> {
        let a = self.check(addr, data.len())?;
        self.bytes[a..a + data.len()].copy_from_slice(data);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessRequest {
    pub kind: AccessKind,
    pub address: u64,
    pub length: usize,
    /// Write data; empty for reads.
    pub payload: Vec<u8>,
}

impl AccessRequest {
    pub fn read(address: u64, length: usize) -> Self {
        Self {
            kind: AccessKind::Read,
            address,
            length,
            payload: Vec::new(),
        }
    }

    pub fn write(address: u64, payload: Vec<u8>) -> Self {
        Self {
            kind: AccessKind::Write,
            address,
            length: payload.len(),
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccessResponse {
    Data(Vec<u8>),
    WriteAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BoundFault {
    bit_in_line: usize,
    timing: FaultTiming,
    kind: CorruptionKind,
}

#[derive(Debug, Clone, Copy, Default)]
struct LineState {
    tag: u64,
    valid: bool,
    dirty: bool,
    last_used: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub writebacks: u64,
}

pub struct CacheModel<B: MemoryPort = FlatMemory> {
    geometry: CacheGeometry,
    /// Indexed by `set * associativity + way`.
    lines: Vec<LineState>,
    data: Vec<u8>,
    faults: Vec<Vec<BoundFault>>,
    fills: Vec<u64>,
    backing: B,
    tick: u64,
    stats: CacheStats,
}

impl<B: MemoryPort> CacheModel<B> {
    pub fn new(geometry: CacheGeometry, backing: B) -> Self {
        let n = geometry.lines();
        Self {
            geometry,
            lines: vec![LineState::default(); n],
            data: vec![0; geometry.capacity_bytes()],
            faults: vec![Vec::new(); n],
            fills: vec![0; n],
            backing,
            tick: 0,
            stats: CacheStats::default(),
        }
    }

    pub fn geometry(&self) -> &CacheGeometry {
        &self.geometry
    }

    pub fn backing(&self) -> &B {
        &self.backing
    }

    pub fn backing_mut(&mut self) -> &mut B {
        &mut self.backing
    }

    pub fn into_backing(self) -> B {
        self.backing
    }

    /// Number of accesses served so far; the tick the next access runs at.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    /// How many times each physical line (`set * associativity + way`) was filled.
    pub fn fill_counts(&self) -> &[u64] {
        &self.fills
    }

    pub fn binding_count(&self) -> usize {
        self.faults.iter().map(Vec::len).sum()
    }

    pub fn bindings(&self) -> Vec<(CacheBitAddr, FaultTiming, CorruptionKind)> {
        let ways = self.geometry.associativity;
        let mut out: Vec<_> = self
            .faults
            .iter()
            .enumerate()
            .flat_map(|(slot, list)| {
                list.iter().map(move |f| {
                    let at = CacheBitAddr {
                        set: slot / ways,
                        way: slot % ways,
                        bit_in_line: f.bit_in_line,
                    };
                    (at, f.timing, f.kind)
                })
            })
            .collect();
        out.sort_by_key(|b| b.0);
        out
    }

    /// Replaces all bindings with one per fault of `map`.
    pub fn install_fault_map(&mut self, map: &FaultMap) -> Result<(), CacheError> {
        let g = map.geometry();
        if g.capacity() != self.geometry.capacity_bits() {
            return Err(CacheError::GeometryMismatch {
                map_bits: g.capacity(),
                cache_bits: self.geometry.capacity_bits(),
            });
        }
        self.clear_faults();
        for f in map.faults() {
            let addr = map_fault_to_cache(g.linear(f.location), &self.geometry)?;
            self.bind(addr, f.timing, f.kind);
        }
        Ok(())
    }

    /// Binds a single fault, replacing any existing binding at the same bit.
    pub fn bind(&mut self, at: CacheBitAddr, timing: FaultTiming, kind: CorruptionKind) {
        let slot = at.set * self.geometry.associativity + at.way;
        let list = &mut self.faults[slot];
        list.retain(|f| f.bit_in_line != at.bit_in_line);
        list.push(BoundFault {
            bit_in_line: at.bit_in_line,
            timing,
            kind,
        });
    }

    pub fn clear_faults(&mut self) {
        self.faults.iter_mut().for_each(Vec::clear);
    }

    pub fn access(&mut self, req: &AccessRequest) -> Result<AccessResponse, CacheError> {
        match req.kind {
            AccessKind::Read => {
                let mut buf = vec![0; req.length];
                self.read_line(req.address, &mut buf)?;
                Ok(AccessResponse::Data(buf))
            }
            AccessKind::Write => {
                if req.payload.len() != req.length {
                    return Err(CacheError::EmptyRequest);
                }
                self.write_line(req.address, &req.payload)?;
                Ok(AccessResponse::WriteAck)
            }
        }
    }

    /// Single-line read.
    pub fn read_line(&mut self, addr: u64, buf: &mut [u8]) -> Result<(), CacheError> {
        let (slot, offset) = self.prepare(addr, buf.len())?;
        self.apply_faults(slot);
        let base = slot * self.geometry.line_bytes + offset;
        buf.copy_from_slice(&self.data[base..base + buf.len()]);
        self.tick += 1;
        Ok(())
    }

    /// Single-line write.
    pub fn write_line(&mut self, addr: u64, data: &[u8]) -> Result<(), CacheError> {
        let (slot, offset) = self.prepare(addr, data.len())?;
        let base = slot * self.geometry.line_bytes + offset;
        self.data[base..base + data.len()].copy_from_slice(data);
        self.lines[slot].dirty = true;
        self.apply_faults(slot);
        self.tick += 1;
        Ok(())
    }

    /// Validates the request, makes its line resident and returns
    /// `(slot, offset in line)`.
    fn prepare(&mut self, addr: u64, len: usize) -> Result<(usize, usize), CacheError> {
        if len == 0 {
            return Err(CacheError::EmptyRequest);
        }
        let lb = self.geometry.line_bytes;
        let offset = (addr % lb as u64) as usize;
        if offset + len > lb {
            return Err(CacheError::SpansLines { addr, len });
        }
        let size = self.backing.size();
        if addr.checked_add(len as u64).is_none_or(|end| end > size) {
            return Err(CacheError::OutOfBounds { addr, len, size });
        }

        let set = self.geometry.set_of(addr);
        let tag = self.geometry.tag_of(addr);
        let ways = self.geometry.associativity;
        let first = set * ways;
        let stamp = self.tick + 1;

        for slot in first..first + ways {
            let l = &mut self.lines[slot];
            if l.valid && l.tag == tag {
                l.last_used = stamp;
                self.stats.hits += 1;
                return Ok((slot, offset));
            }
        }

        self.stats.misses += 1;
        let victim = (first..first + ways)
            .find(|&s| !self.lines[s].valid)
            .unwrap_or_else(|| {
                (first..first + ways)
                    .min_by_key(|&s| self.lines[s].last_used)
                    .expect("associativity >= 1")
            });
        self.evict(victim)?;

        let line_addr = addr - offset as u64;
        let base = victim * lb;
        self.backing.read(line_addr, &mut self.data[base..base + lb])?;
        self.lines[victim] = LineState {
            tag,
            valid: true,
            dirty: false,
            last_used: stamp,
        };
        self.fills[victim] += 1;
        Ok((victim, offset))
    }

    fn evict(&mut self, slot: usize) -> Result<(), CacheError> {
        let l = self.lines[slot];
        if l.valid && l.dirty {
            let lb = self.geometry.line_bytes;
            let set = slot / self.geometry.associativity;
            let addr = (l.tag * self.geometry.num_sets as u64 + set as u64) * lb as u64;
            self.backing
                .write(addr, &self.data[slot * lb..(slot + 1) * lb])?;
            self.stats.writebacks += 1;
        }
        self.lines[slot].valid = false;
        self.lines[slot].dirty = false;
        Ok(())
    }

    fn apply_faults(&mut self, slot: usize) {
        let list = &mut self.faults[slot];
        if list.is_empty() {
            return;
        }
        let tick = self.tick;
        let lb = self.geometry.line_bytes;
        let line = &mut self.data[slot * lb..(slot + 1) * lb];
        list.retain(|f| {
            if !f.timing.is_active(tick) {
                return true;
            }
            let byte = &mut line[f.bit_in_line / 8];
            let mask = 1u8 << (f.bit_in_line % 8);
            match f.kind {
                CorruptionKind::StuckAt0 => *byte &= !mask,
                CorruptionKind::StuckAt1 => *byte |= mask,
                CorruptionKind::BitFlip => *byte ^= mask,
            }
            !matches!(f.timing, FaultTiming::Transient { .. })
        });
    }

    /// Writes every dirty line back (faults applied) and invalidates the cache.
    pub fn flush(&mut self) -> Result<(), CacheError> {
        for slot in 0..self.lines.len() {
            if self.lines[slot].valid && self.lines[slot].dirty {
                self.apply_faults(slot);
            }
            self.evict(slot)?;
        }
        Ok(())
    }
}

impl<B: MemoryPort> MemoryPort for CacheModel<B> {
    fn size(&self) -> u64 {
        self.backing.size()
    }

    /// Splits at line boundaries; each piece is one access.
    fn read(&mut self, addr: u64, buf: &mut [u8]) -> Result<(), CacheError> {
        let lb = self.geometry.line_bytes as u64;
        let mut done = 0;
        while done < buf.len() {
            let a = addr + done as u64;
            let n = ((lb - a % lb) as usize).min(buf.len() - done);
            self.read_line(a, &mut buf[done..done + n])?;
            done += n;
        }
        Ok(())
    }

    fn write(&mut self, addr: u64, data: &[u8]) -> Result<(), CacheError> {
        let lb = self.geometry.line_bytes as u64;
        let mut done = 0;
        while done < data.len() {
            let a = addr + done as u64;
            let n = ((lb - a % lb) as usize).min(data.len() - done);
            self.write_line(a, &data[done..done + n])?;
            done += n;
        }
        Ok(())
    }
}
