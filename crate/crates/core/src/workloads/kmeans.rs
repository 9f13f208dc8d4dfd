//! Lloyd's k-means on 2-D points.
//!
//! Points are stored in blocks of [`BLOCK_POINTS`] reached through a block
//! pointer table, centroids through a centroid pointer table, and the
//! per-point labels in a byte table. Labels index the accumulator arrays
//! directly, so a label outside `0..k` faults. Initial centroids are the
//! points at indices `c * n / k`.

use super::{drive, Crash, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};
use crate::rng::{self, Domain};
use rand::Rng;

pub const BLOCK_POINTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansInputs {
    pub points: Vec<(f64, f64)>,
    pub k: usize,
    pub max_iters: usize,
}

pub fn inputs(config: &WorkloadConfig) -> KMeansInputs {
    let WorkloadParams::KMeans {
        points,
        k,
        max_iters,
    } = config.params
    else {
        panic!("not a k-means config");
    };
    assert!((1..=255).contains(&k), "k must fit a byte label");
    let mut rng = rng::stream(config.input_seed, Domain::Workload, 0);
    let centers: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)))
        .collect();
    // Irwin-Hall(4) noise, variance 1/3 per unit of spread.
    let noise = |rng: &mut rand_chacha::ChaCha8Rng| {
        (0..4).map(|_| rng.gen::<f64>()).sum::<f64>() - 2.0
    };
    let pts = (0..points)
        .map(|_| {
            let c = centers[rng.gen_range(0..k)];
            let spread = 3.0;
            (c.0 + spread * noise(&mut rng), c.1 + spread * noise(&mut rng))
        })
        .collect();
    KMeansInputs {
        points: pts,
        k,
        max_iters,
    }
}

pub fn run_kmeans(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let inp = inputs(config);
    let n = inp.points.len();
    let k = inp.k;
    let blocks = n.div_ceil(BLOCK_POINTS);
    drive(
        config,
        mem,
        |mem| {
            let cptr = mem.alloc("centroid_ptrs", RegionKind::Table, k * 8);
            let bptr = mem.alloc("block_ptrs", RegionKind::Table, blocks * 8);
            let labels = mem.alloc("labels", RegionKind::Table, n);
            let pts = mem.alloc("points", RegionKind::Bulk, n * 16);
            let cent = mem.alloc("centroids", RegionKind::Bulk, k * 16);
            let sums = mem.alloc("sums", RegionKind::Bulk, k * 16);
            let counts = mem.alloc("counts", RegionKind::Bulk, k * 8);
            let cp: Vec<u64> = (0..k).map(|c| mem.addr(cent, (c * 16) as u64)).collect();
            let bp: Vec<u64> = (0..blocks)
                .map(|b| mem.addr(pts, (b * BLOCK_POINTS * 16) as u64))
                .collect();
            mem.poke_u64s(cptr, &cp);
            mem.poke_u64s(bptr, &bp);
            let flat: Vec<f64> = inp.points.iter().flat_map(|&(x, y)| [x, y]).collect();
            mem.poke_f64s(pts, &flat);
            (cptr, bptr, labels, pts, cent, sums, counts)
        },
        |&(cptr, bptr, labels, pts, cent, sums, counts), mem| {
            let load_point = |mem: &mut SimMemory, i: usize| -> Result<(f64, f64), Crash> {
                let b = mem.load_u64(bptr, mem.addr(bptr, ((i / BLOCK_POINTS) * 8) as u64))?;
                let at = b + ((i % BLOCK_POINTS) * 16) as u64;
                Ok((mem.load_f64(pts, at)?, mem.load_f64(pts, at + 8)?))
            };

            for c in 0..k {
                let (x, y) = load_point(mem, c * n / k)?;
                let at = mem.load_u64(cptr, mem.addr(cptr, (c * 8) as u64))?;
                mem.store_f64(cent, at, x)?;
                mem.store_f64(cent, at + 8, y)?;
            }

            for iter in 0..inp.max_iters {
                let mut changed = iter == 0;
                for i in 0..n {
                    let (px, py) = load_point(mem, i)?;
                    let mut best = 0u8;
                    let mut best_d = f64::INFINITY;
                    for c in 0..k {
                        let at = mem.load_u64(cptr, mem.addr(cptr, (c * 8) as u64))?;
                        let cx = mem.load_f64(cent, at)?;
                        let cy = mem.load_f64(cent, at + 8)?;
                        let d = (px - cx) * (px - cx) + (py - cy) * (py - cy);
                        if d < best_d {
                            best_d = d;
                            best = c as u8;
                        }
                    }
                    let at = mem.addr(labels, i as u64);
                    if iter == 0 || mem.load_u8(labels, at)? != best {
                        mem.store_u8(labels, at, best)?;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }

                for c in 0..k {
                    mem.store_f64(sums, mem.addr(sums, (c * 16) as u64), 0.0)?;
                    mem.store_f64(sums, mem.addr(sums, (c * 16 + 8) as u64), 0.0)?;
                    mem.store_f64(counts, mem.addr(counts, (c * 8) as u64), 0.0)?;
                }
                for i in 0..n {
                    let label = mem.load_u8(labels, mem.addr(labels, i as u64))? as u64;
                    let (px, py) = load_point(mem, i)?;
                    let sx = mem.addr(sums, label * 16);
                    let v = mem.load_f64(sums, sx)?;
                    mem.store_f64(sums, sx, v + px)?;
                    let v = mem.load_f64(sums, sx + 8)?;
                    mem.store_f64(sums, sx + 8, v + py)?;
                    let cn = mem.addr(counts, label * 8);
                    let v = mem.load_f64(counts, cn)?;
                    mem.store_f64(counts, cn, v + 1.0)?;
                }
                for c in 0..k {
                    let count = mem.load_f64(counts, mem.addr(counts, (c * 8) as u64))?;
                    if count > 0.0 {
                        let sx = mem.load_f64(sums, mem.addr(sums, (c * 16) as u64))?;
                        let sy = mem.load_f64(sums, mem.addr(sums, (c * 16 + 8) as u64))?;
                        let at = mem.load_u64(cptr, mem.addr(cptr, (c * 8) as u64))?;
                        mem.store_f64(cent, at, sx / count)?;
                        mem.store_f64(cent, at + 8, sy / count)?;
                    }
                }
            }
            Ok(labels)
        },
        OutputView::Labels { len: n, k },
    )
}
