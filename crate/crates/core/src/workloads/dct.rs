//! 8x8 block DCT round trip as in baseline JPEG: level shift, separable
//! forward DCT-II, rounding of coefficients, inverse transform, rounding and
//! clamping back to 8-bit pixels.

use super::{drive, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};
use crate::rng::{self, Domain};
use rand::Rng;

pub const BLOCK: usize = 8;

/// `table[u * 8 + x] = alpha(u) * cos((2x + 1) u pi / 16)`.
pub fn cosine_table() -> [f64; 64] {
    let mut t = [0.0; 64];
    for u in 0..BLOCK {
        let alpha = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for x in 0..BLOCK {
            t[u * BLOCK + x] =
                alpha * libm::cos((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0);
        }
    }
    t
}

/// Synthetic grayscale test image: smooth gradients, a bright disc, a dark
/// bar with hard edges, and mild seeded noise.
pub fn synthetic_image(side: usize, seed: u64) -> Vec<u8> {
    let mut rng = rng::stream(seed, Domain::Workload, 0);
    let mut img = vec![0u8; side * side];
    let s = side as f64;
    for y in 0..side {
        for x in 0..side {
            let (fx, fy) = (x as f64 / s, y as f64 / s);
            let mut v = 40.0 + 120.0 * fx + 50.0 * fy;
            let (dx, dy) = (fx - 0.6, fy - 0.4);
            if dx * dx + dy * dy < 0.05 {
                v += 70.0;
            }
            if (0.15..0.3).contains(&fx) && (0.2..0.85).contains(&fy) {
                v -= 60.0;
            }
            v += rng.gen_range(-6.0..6.0);
            img[y * side + x] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    img
}

pub fn run_dct(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let WorkloadParams::Dct { side } = config.params else {
        panic!("not a DCT config");
    };
    assert!(side % BLOCK == 0, "image side must be a multiple of 8");
    let image = synthetic_image(side, config.input_seed);
    let per_row = side / BLOCK;
    let blocks = per_row * per_row;
    drive(
        config,
        mem,
        |mem| {
            let table = mem.alloc("block_ptrs", RegionKind::Table, blocks * 8);
            let cos = mem.alloc("cosines", RegionKind::Bulk, 64 * 8);
            let src = mem.alloc("image", RegionKind::Bulk, side * side);
            let coef = mem.alloc("coefficients", RegionKind::Bulk, side * side * 8);
            let out = mem.alloc("reconstruction", RegionKind::Bulk, side * side);
            let ptrs: Vec<u64> = (0..blocks)
                .map(|b| {
                    let (by, bx) = (b / per_row, b % per_row);
                    mem.addr(src, (by * BLOCK * side + bx * BLOCK) as u64)
                })
                .collect();
            mem.poke_u64s(table, &ptrs);
            mem.poke_f64s(cos, &cosine_table());
            mem.poke(src, 0, &image);
            (table, cos, src, coef, out)
        },
        |&(table, cos, src, coef, out), mem| {
            let cos_at = |mem: &mut SimMemory, u: usize, x: usize| {
                mem.load_f64(cos, mem.addr(cos, ((u * BLOCK + x) * 8) as u64))
            };
            for b in 0..blocks {
                let mut px = [[0.0f64; BLOCK]; BLOCK];
                for (y, row) in px.iter_mut().enumerate() {
                    for (x, p) in row.iter_mut().enumerate() {
                        let base = mem.load_u64(table, mem.addr(table, b as u64 * 8))?;
                        *p = mem.load_u8(src, base + (y * side + x) as u64)? as f64 - 128.0;
                    }
                }
                // Rows: tmp[y][u] = sum_x px[y][x] c(u, x).
                let mut tmp = [[0.0f64; BLOCK]; BLOCK];
                for y in 0..BLOCK {
                    for u in 0..BLOCK {
                        let mut s = 0.0;
                        for x in 0..BLOCK {
                            s += px[y][x] * cos_at(mem, u, x)?;
                        }
                        tmp[y][u] = s;
                    }
                }
                // Columns, then round: F[v][u] = sum_y tmp[y][u] c(v, y).
                let coef_base = mem.addr(coef, (b * 64 * 8) as u64);
                for v in 0..BLOCK {
                    for u in 0..BLOCK {
                        let mut s = 0.0;
                        for y in 0..BLOCK {
                            s += tmp[y][u] * cos_at(mem, v, y)?;
                        }
                        mem.store_f64(coef, coef_base + ((v * BLOCK + u) * 8) as u64, s.round())?;
                    }
                }

                let mut f = [[0.0f64; BLOCK]; BLOCK];
                for (v, row) in f.iter_mut().enumerate() {
                    for (u, c) in row.iter_mut().enumerate() {
                        *c = mem.load_f64(coef, coef_base + ((v * BLOCK + u) * 8) as u64)?;
                    }
                }
                // Inverse columns: g[y][u] = sum_v c(v, y) F[v][u].
                let mut g = [[0.0f64; BLOCK]; BLOCK];
                for y in 0..BLOCK {
                    for u in 0..BLOCK {
                        let mut s = 0.0;
                        for v in 0..BLOCK {
                            s += cos_at(mem, v, y)? * f[v][u];
                        }
                        g[y][u] = s;
                    }
                }
                // Inverse rows: p[y][x] = sum_u c(u, x) g[y][u].
                let (by, bx) = (b / per_row, b % per_row);
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        let mut s = 0.0;
                        for u in 0..BLOCK {
                            s += cos_at(mem, u, x)? * g[y][u];
                        }
                        let pixel = (s + 128.0).round().clamp(0.0, 255.0) as u8;
                        let at = ((by * BLOCK + y) * side + bx * BLOCK + x) as u64;
                        mem.store_u8(out, mem.addr(out, at), pixel)?;
                    }
                }
            }
            Ok(out)
        },
        OutputView::Image {
            width: side,
            height: side,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_table_is_orthonormal() {
        let t = cosine_table();
        for u in 0..8 {
            for v in 0..8 {
                let dot: f64 = (0..8).map(|x| t[u * 8 + x] * t[v * 8 + x]).sum();
                let want = if u == v { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synthetic_image_has_range() {
        let img = synthetic_image(64, 1);
        let (lo, hi) = (img.iter().min().unwrap(), img.iter().max().unwrap());
        assert!(*hi as i32 - *lo as i32 > 150);
    }
}
