//! 3x3 Sobel gradient magnitude. Border pixels of the output stay zero.

use super::dct::synthetic_image;
use super::{drive, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};

pub fn inputs(config: &WorkloadConfig) -> (usize, Vec<u8>) {
    let WorkloadParams::Sobel { side } = config.params else {
        panic!("not a Sobel config");
    };
    (side, synthetic_image(side, config.input_seed))
}

/// `min(255, round(sqrt(gx^2 + gy^2)))`.
pub fn magnitude(gx: i32, gy: i32) -> u8 {
    (((gx * gx + gy * gy) as f64).sqrt().round()).min(255.0) as u8
}

pub fn run_sobel(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let (side, image) = inputs(config);
    run_sobel_on(config, mem, side, &image)
}

/// Runs the kernel on an explicit `side x side` image.
pub fn run_sobel_on(
    config: &WorkloadConfig,
    mem: &mut SimMemory,
    side: usize,
    image: &[u8],
) -> WorkloadResult {
    assert_eq!(image.len(), side * side);
    drive(
        config,
        mem,
        |mem| {
            let rows = mem.alloc("row_ptrs", RegionKind::Table, side * 8);
            let src = mem.alloc("image", RegionKind::Bulk, side * side);
            let out = mem.alloc("gradient", RegionKind::Bulk, side * side);
            let ptrs: Vec<u64> = (0..side).map(|y| mem.addr(src, (y * side) as u64)).collect();
            mem.poke_u64s(rows, &ptrs);
            mem.poke(src, 0, image);
            (rows, src, out)
        },
        |&(rows, src, out), mem| {
            for y in 1..side.saturating_sub(1) {
                for x in 1..side - 1 {
                    let mut p = [[0i32; 3]; 3];
                    for (dy, row) in p.iter_mut().enumerate() {
                        let r = mem.load_u64(rows, mem.addr(rows, ((y + dy - 1) * 8) as u64))?;
                        for (dx, v) in row.iter_mut().enumerate() {
                            if dy == 1 && dx == 1 {
                                continue;
                            }
                            *v = mem.load_u8(src, r + (x + dx - 1) as u64)? as i32;
                        }
                    }
                    let gx = (p[0][2] + 2 * p[1][2] + p[2][2]) - (p[0][0] + 2 * p[1][0] + p[2][0]);
                    let gy = (p[2][0] + 2 * p[2][1] + p[2][2]) - (p[0][0] + 2 * p[0][1] + p[0][2]);
                    mem.store_u8(out, mem.addr(out, (y * side + x) as u64), magnitude(gx, gy))?;
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
