//! Straight-line reference implementations and brute-force oracles shared by
//! the integration tests. None of these touch the cache or `SimMemory`.

#![allow(dead_code)]

use rand::Rng;
use sramfi::cachesim::{CacheGeometry, CacheModel, FlatMemory, MemoryPort};
use sramfi::rng::{self, Domain};
use sramfi::workloads::{blackscholes, dct, jacobi, kmeans, mc, sobel, Benchmark, WorkloadConfig, WorkloadParams};

pub fn f64_bytes(v: &[f64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

pub fn jacobi_ref(config: &WorkloadConfig) -> Vec<f64> {
    let inp = jacobi::inputs(config);
    let n = inp.n;
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..inp.max_iters {
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let mut sigma = 0.0;
            for j in 0..n {
                if i != j {
                    sigma += inp.a[i * n + j] * cur[j];
                }
            }
            let diag = inp.a[i * n + i];
            let xi = (inp.b[i] - sigma) / diag;
            let r = (diag * (xi - cur[i])).abs();
            if r > residual {
                residual = r;
            }
            next[i] = xi;
        }
        std::mem::swap(&mut cur, &mut next);
        if residual < inp.tolerance {
            break;
        }
    }
    cur
}

/// Dense solve by Gaussian elimination with partial pivoting.
pub fn gauss_solve(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i * n..(i + 1) * n].to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn blackscholes_ref(config: &WorkloadConfig) -> Vec<f64> {
    blackscholes::inputs(config).iter().map(blackscholes::price).collect()
}

/// Closed-form price with an exact normal CDF.
pub fn blackscholes_exact(o: &blackscholes::OptionData) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::new(0.0, 1.0).unwrap();
    let st = o.time.sqrt();
    let d1 = ((o.spot / o.strike).ln() + (o.rate + 0.5 * o.volatility * o.volatility) * o.time)
        / (o.volatility * st);
    let d2 = d1 - o.volatility * st;
    let disc = o.strike * (-o.rate * o.time).exp();
    if o.otype == 0.0 {
        o.spot * n.cdf(d1) - disc * n.cdf(d2)
    } else {
        disc * n.cdf(-d2) - o.spot * n.cdf(-d1)
    }
}

pub fn dct_ref(side: usize, image: &[u8]) -> Vec<u8> {
    let c = dct::cosine_table();
    let b = dct::BLOCK;
    let mut out = vec![0u8; side * side];
    for by in 0..side / b {
        for bx in 0..side / b {
            let px = |y: usize, x: usize| image[(by * b + y) * side + bx * b + x] as f64 - 128.0;
            let mut tmp = [[0.0f64; 8]; 8];
            for y in 0..b {
                for u in 0..b {
                    let mut s = 0.0;
                    for x in 0..b {
                        s += px(y, x) * c[u * b + x];
                    }
                    tmp[y][u] = s;
                }
            }
            let mut f = [[0.0f64; 8]; 8];
            for v in 0..b {
                for u in 0..b {
                    let mut s = 0.0;
                    for y in 0..b {
                        s += tmp[y][u] * c[v * b + y];
                    }
                    f[v][u] = s.round();
                }
            }
            let mut g = [[0.0f64; 8]; 8];
            for y in 0..b {
                for u in 0..b {
                    let mut s = 0.0;
                    for v in 0..b {
                        s += c[v * b + y] * f[v][u];
                    }
                    g[y][u] = s;
                }
            }
            for y in 0..b {
                for x in 0..b {
                    let mut s = 0.0;
                    for u in 0..b {
                        s += c[u * b + x] * g[y][u];
                    }
                    out[(by * b + y) * side + bx * b + x] =
                        (s + 128.0).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    out
}

pub fn mc_ref(config: &WorkloadConfig) -> Vec<f64> {
    let WorkloadParams::Mc { points, walks, .. } = config.params else {
        panic!("not MC");
    };
    let table = mc::boundary_table();
    mc::start_points(points)
        .iter()
        .enumerate()
        .map(|(p, &(px, py))| {
            let mut rng = mc::walk_stream(config.input_seed, p);
            let mut sum = 0.0;
            for _ in 0..walks {
                let (mut x, mut y) = (px, py);
                loop {
                    let d = x.min(1.0 - x).min(y).min(1.0 - y);
                    if d < mc::EPSILON {
                        break;
                    }
                    let (dx, dy) = mc::direction(&mut rng);
                    x += d * dx;
                    y += d * dy;
                }
                sum += table[mc::segment_index(x, y)];
            }
            sum / walks as f64
        })
        .collect()
}

pub fn sobel_ref(side: usize, image: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; side * side];
    let at = |y: usize, x: usize| image[y * side + x] as i32;
    for y in 1..side - 1 {
        for x in 1..side - 1 {
            let gx = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
            out[y * side + x] = sobel::magnitude(gx, gy);
        }
    }
    out
}

pub fn kmeans_ref(config: &WorkloadConfig) -> Vec<u8> {
    let inp = kmeans::inputs(config);
    let (n, k) = (inp.points.len(), inp.k);
    let mut cent: Vec<(f64, f64)> = (0..k).map(|c| inp.points[c * n / k]).collect();
    let mut labels = vec![0u8; n];
    for iter in 0..inp.max_iters {
        let mut changed = iter == 0;
        for (i, &(px, py)) in inp.points.iter().enumerate() {
            let mut best = 0u8;
            let mut best_d = f64::INFINITY;
            for (c, &(cx, cy)) in cent.iter().enumerate() {
                let d = (px - cx) * (px - cx) + (py - cy) * (py - cy);
                if d < best_d {
                    best_d = d;
                    best = c as u8;
                }
            }
            if labels[i] != best {
                changed = true;
            }
            labels[i] = best;
        }
        if !changed {
            break;
        }
        let mut sums = vec![(0.0, 0.0); k];
        let mut counts = vec![0.0; k];
        for (i, &(px, py)) in inp.points.iter().enumerate() {
            let l = labels[i] as usize;
            sums[l].0 += px;
            sums[l].1 += py;
            counts[l] += 1.0;
        }
        for c in 0..k {
            if counts[c] > 0.0 {
                cent[c] = (sums[c].0 / counts[c], sums[c].1 / counts[c]);
            }
        }
    }
    labels
}

/// Expected output bytes of a zero-fault run.
pub fn reference_bytes(config: &WorkloadConfig) -> Vec<u8> {
    match config.benchmark() {
        Benchmark::Jacobi => f64_bytes(&jacobi_ref(config)),
        Benchmark::Blackscholes => f64_bytes(&blackscholes_ref(config)),
        Benchmark::Dct => {
            let WorkloadParams::Dct { side } = config.params else { unreachable!() };
            dct_ref(side, &dct::synthetic_image(side, config.input_seed))
        }
        Benchmark::Mc => f64_bytes(&mc_ref(config)),
        Benchmark::Sobel => {
            let (side, image) = sobel::inputs(config);
            sobel_ref(side, &image)
        }
        Benchmark::KMeans => kmeans_ref(config),
    }
}

pub fn psnr_brute(a: &[u8], b: &[u8]) -> f64 {
    let mut sse = 0.0;
    for i in 0..a.len() {
        let d = a[i] as f64 - b[i] as f64;
        sse += d * d;
    }
    let mse = sse / a.len() as f64;
    20.0 * 255f64.log10() - 10.0 * mse.log10()
}

pub fn rel_error_brute(g: &[f64], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..g.len() {
        let denom = if g[i].abs() > 1e-12 { g[i].abs() } else { 1e-12 };
        let e = (g[i] - f[i]).abs() / denom;
        total += if e.is_nan() || e > 1.0 { 1.0 } else { e };
    }
    total / g.len() as f64
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best accuracy over all `k!` relabelings of `faulty`.
pub fn cluster_accuracy_exhaustive(golden: &[u8], faulty: &[u8], k: usize) -> f64 {
    permutations(k)
        .iter()
        .map(|perm| {
            let hits = golden
                .iter()
                .zip(faulty)
                .filter(|(&g, &f)| perm[f as usize] == g as usize)
                .count();
            100.0 * hits as f64 / golden.len() as f64
        })
        .fold(0.0, f64::max)
}

/// Two-sided Mann-Whitney U test p-value (normal approximation with tie
/// correction).
pub fn mann_whitney_p(a: &[f64], b: &[f64]) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut all: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut rank_sum_a = 0.0;
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_a += rank * all[i..=j].iter().filter(|x| x.1).count() as f64;
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let nn = n1 + n2;
    let sd = (n1 * n2 / 12.0 * ((nn + 1.0) - ties / (nn * (nn - 1.0)))).sqrt();
    let z = (u - n1 * n2 / 2.0).abs() / sd;
    2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z))
}

/// Fresh deterministic stream for test inputs.
pub fn test_rng(index: u64) -> sramfi::rng::SimRng {
    rng::stream(0x7E57, Domain::Workload, index)
}

/// Random mixed-size reads and writes, some crossing lines, against a cache
/// and a plain array side by side.
pub fn transparency_mismatches(geometry: CacheGeometry, size: usize, accesses: usize, seed: u64) -> usize {
    let mut rng = test_rng(seed);
    let init: Vec<u8> = (0..size).map(|_| rng.gen()).collect();
    let mut flat = FlatMemory::new(size);
    flat.bytes_mut().copy_from_slice(&init);
    let mut cache = CacheModel::new(geometry, flat.clone());
    let mut mismatches = 0;
    for _ in 0..accesses {
        let len = rng.gen_range(1..=16usize);
        let addr = rng.gen_range(0..(size - len) as u64);
        if rng.gen_bool(0.5) {
            let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            cache.write(addr, &data).unwrap();
            flat.write(addr, &data).unwrap();
        } else {
            let (mut a, mut b) = (vec![0; len], vec![0; len]);
            cache.read(addr, &mut a).unwrap();
            flat.read(addr, &mut b).unwrap();
            mismatches += usize::from(a != b);
        }
    }
    cache.flush().unwrap();
    mismatches + usize::from(cache.backing().bytes() != flat.bytes())
}
