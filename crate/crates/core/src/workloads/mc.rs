//! Monte Carlo estimation of a harmonic function on the boundary of an inner
//! square sub-domain, by walk-on-spheres from each sub-domain boundary point
//! to the boundary of the unit square.
//!
//! The Dirichlet data of the outer boundary is a lookup table of `4 * SEGMENTS`
//! samples (bottom, right, top, left; each side left-to-right or bottom-to-top).
//! A walk stops once it is within `EPSILON` of the outer boundary and reads the
//! sample of the nearest segment. Walk directions come from a per-point
//! counter-based stream and never touch simulated memory; the per-walk step
//! counter does.

use super::{drive, Crash, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};
use crate::rng::{self, Domain, SimRng};
use rand::Rng;

pub const SEGMENTS: usize = 256;
pub const EPSILON: f64 = 1e-3;
/// Inner square is `[LOW, HIGH]^2`.
pub const LOW: f64 = 0.25;
pub const HIGH: f64 = 0.75;

/// Harmonic boundary data `1 + x + 2y + x^2 - y^2`.
pub fn boundary_value(x: f64, y: f64) -> f64 {
    1.0 + x + 2.0 * y + x * x - y * y
}

pub fn boundary_table() -> Vec<f64> {
    let mut t = Vec::with_capacity(4 * SEGMENTS);
    for side in 0..4 {
        for s in 0..SEGMENTS {
            let p = (s as f64 + 0.5) / SEGMENTS as f64;
            let (x, y) = match side {
                0 => (p, 0.0),
                1 => (1.0, p),
                2 => (p, 1.0),
                _ => (0.0, p),
            };
            t.push(boundary_value(x, y));
        }
    }
    t
}

/// `points` locations spaced evenly around the inner square, counter-clockwise
/// from its lower-left corner.
pub fn start_points(points: usize) -> Vec<(f64, f64)> {
    let side = HIGH - LOW;
    (0..points)
        .map(|i| {
            let t = 4.0 * i as f64 / points as f64;
            let (k, f) = (t.floor() as usize, t.fract() * side);
            match k {
                0 => (LOW + f, LOW),
                1 => (HIGH, LOW + f),
                2 => (HIGH - f, HIGH),
                _ => (LOW, HIGH - f),
            }
        })
        .collect()
}

/// Table index of the outer-boundary segment nearest to `(x, y)`.
pub fn segment_index(x: f64, y: f64) -> usize {
    let dists = [y, 1.0 - x, 1.0 - y, x];
    let mut side = 0;
    for s in 1..4 {
        if dists[s] < dists[side] {
            side = s;
        }
    }
    let along = if side % 2 == 0 { x } else { y };
    let seg = ((along * SEGMENTS as f64).floor().max(0.0) as usize).min(SEGMENTS - 1);
    side * SEGMENTS + seg
}

/// Uniform direction on the unit circle by rejection sampling.
pub fn direction(rng: &mut SimRng) -> (f64, f64) {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let r2 = u * u + v * v;
        if r2 > 1e-12 && r2 <= 1.0 {
            let r = r2.sqrt();
            return (u / r, v / r);
        }
    }
}

pub fn walk_stream(seed: u64, point: usize) -> SimRng {
    rng::stream(seed, Domain::Walk, point as u64)
}

pub fn run_mc(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let WorkloadParams::Mc {
        points,
        walks,
        max_steps,
    } = config.params
    else {
        panic!("not an MC config");
    };
    let starts = start_points(points);
    drive(
        config,
        mem,
        |mem| {
            let counter = mem.alloc("step_counter", RegionKind::Control, 8);
            let table = mem.alloc("boundary", RegionKind::Bulk, 4 * SEGMENTS * 8);
            let out = mem.alloc("estimates", RegionKind::Bulk, points * 8);
            mem.poke_f64s(table, &boundary_table());
            (counter, table, out)
        },
        |&(counter, table, out), mem| {
            let counter_at = mem.addr(counter, 0);
            for (p, &(px, py)) in starts.iter().enumerate() {
                let mut rng = walk_stream(config.input_seed, p);
                let mut sum = 0.0;
                for _ in 0..walks {
                    let (mut x, mut y) = (px, py);
                    mem.store_u64(counter, counter_at, 0)?;
                    loop {
                        let steps = mem.load_u64(counter, counter_at)?;
                        if steps >= max_steps {
                            return Err(Crash::StepBudgetExceeded);
                        }
                        mem.store_u64(counter, counter_at, steps + 1)?;
                        let d = x.min(1.0 - x).min(y).min(1.0 - y);
                        if d < EPSILON {
                            break;
                        }
                        let (dx, dy) = direction(&mut rng);
                        x += d * dx;
                        y += d * dy;
                    }
                    let idx = segment_index(x, y);
                    sum += mem.load_f64(table, mem.addr(table, idx as u64 * 8))?;
                }
                mem.store_f64(out, mem.addr(out, p as u64 * 8), sum / walks as f64)?;
            }
            Ok(out)
        },
        OutputView::Vector { len: points },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_data_is_harmonic() {
        // Five-point Laplacian of a quadratic is exact.
        let h = 0.01;
        for &(x, y) in &[(0.3, 0.4), (0.5, 0.5), (0.7, 0.2)] {
            let lap = boundary_value(x + h, y)
                + boundary_value(x - h, y)
                + boundary_value(x, y + h)
                + boundary_value(x, y - h)
                - 4.0 * boundary_value(x, y);
            assert!(lap.abs() < 1e-12);
        }
    }

    #[test]
    fn segment_lookup() {
        assert_eq!(segment_index(0.0005, 0.5), 3 * SEGMENTS + 128);
        assert_eq!(segment_index(0.5, 0.0001), 128);
        assert_eq!(segment_index(0.9999, 0.25), SEGMENTS + 64);
        assert_eq!(segment_index(0.1, 0.9995), 2 * SEGMENTS + 25);
        assert_eq!(segment_index(1.0, 1.0), 2 * SEGMENTS - 1);
    }

    #[test]
    fn start_points_lie_on_inner_square() {
        let pts = start_points(128);
        assert_eq!(pts.len(), 128);
        for (x, y) in pts {
            let on_edge = (x - LOW).abs() < 1e-12
                || (x - HIGH).abs() < 1e-12
                || (y - LOW).abs() < 1e-12
                || (y - HIGH).abs() < 1e-12;
            assert!(on_edge);
            assert!((LOW..=HIGH).contains(&x) && (LOW..=HIGH).contains(&y));
        }
    }

    #[test]
    fn directions_are_unit() {
        let mut rng = walk_stream(1, 0);
        for _ in 0..100 {
            let (dx, dy) = direction(&mut rng);
            assert!((dx * dx + dy * dy - 1.0).abs() < 1e-12);
        }
    }
}
