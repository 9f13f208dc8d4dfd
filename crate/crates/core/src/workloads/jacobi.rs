//! Jacobi iteration on a strictly diagonally dominant dense system.
//!
//! Iterates until the infinity norm of the residual of the previous iterate,
//! `max_i |a_ii (x_new_i - x_i)|`, falls below the tolerance, or the iteration
//! cap is reached. The output is the last iterate.

use super::{drive, finite, Crash, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};
use crate::rng::{self, Domain};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiInputs {
    pub n: usize,
    /// Row-major `n x n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub max_iters: usize,
    pub tolerance: f64,
}

pub fn inputs(config: &WorkloadConfig) -> JacobiInputs {
    let WorkloadParams::Jacobi {
        n,
        max_iters,
        tolerance,
    } = config.params
    else {
        panic!("not a Jacobi config");
    };
    let mut rng = rng::stream(config.input_seed, Domain::Workload, 0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[i * n + j] = v;
                off += v.abs();
            }
        }
        a[i * n + i] = 2.0 * off + 1.0;
    }
    let b = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    JacobiInputs {
        n,
        a,
        b,
        max_iters,
        tolerance,
    }
}

pub fn run_jacobi(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let inp = inputs(config);
    let n = inp.n;
    drive(
        config,
        mem,
        |mem| {
            let rows = mem.alloc("row_ptrs", RegionKind::Table, n * 8);
            let a = mem.alloc("matrix", RegionKind::Bulk, n * n * 8);
            let b = mem.alloc("rhs", RegionKind::Bulk, n * 8);
            let x0 = mem.alloc("x0", RegionKind::Bulk, n * 8);
            let x1 = mem.alloc("x1", RegionKind::Bulk, n * 8);
            let ptrs: Vec<u64> = (0..n).map(|i| mem.addr(a, (i * n * 8) as u64)).collect();
            mem.poke_u64s(rows, &ptrs);
            mem.poke_f64s(a, &inp.a);
            mem.poke_f64s(b, &inp.b);
            (rows, a, b, [x0, x1])
        },
        |&(rows, a, b, xs), mem| {
            let (mut cur, mut next) = (xs[0], xs[1]);
            for _ in 0..inp.max_iters {
                let mut residual: f64 = 0.0;
                for i in 0..n {
                    let row = mem.load_u64(rows, mem.addr(rows, i as u64 * 8))?;
                    let mut sigma = 0.0;
                    let mut diag = 0.0;
                    for j in 0..n {
                        let aij = mem.load_f64(a, row + j as u64 * 8)?;
                        if i == j {
                            diag = aij;
                        } else {
                            sigma += aij * mem.load_f64(cur, mem.addr(cur, j as u64 * 8))?;
                        }
                    }
                    let bi = mem.load_f64(b, mem.addr(b, i as u64 * 8))?;
                    let xi = (bi - sigma) / diag;
                    let old = mem.load_f64(cur, mem.addr(cur, i as u64 * 8))?;
                    let r = (diag * (xi - old)).abs();
                    // NaN must not be swallowed by max().
                    if !(r <= residual) {
                        residual = r;
                    }
                    mem.store_f64(next, mem.addr(next, i as u64 * 8), xi)?;
                }
                std::mem::swap(&mut cur, &mut next);
                if finite(residual)? < inp.tolerance {
                    break;
                }
            }
            Ok::<_, Crash>(cur)
        },
        OutputView::Vector { len: n },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cachesim::CacheGeometry;

    #[test]
    fn inputs_are_diagonally_dominant() {
        let inp = inputs(&WorkloadConfig::default_for(super::super::Benchmark::Jacobi));
        for i in 0..inp.n {
            let off: f64 = (0..inp.n)
                .filter(|&j| j != i)
                .map(|j| inp.a[i * inp.n + j].abs())
                .sum();
            assert!(inp.a[i * inp.n + i] > 2.0 * off);
        }
    }

    #[test]
    fn tables_precede_bulk() {
        let cfg = WorkloadConfig::default_for(super::super::Benchmark::Jacobi);
        let mut mem = SimMemory::new(CacheGeometry::default());
        run_jacobi(&cfg, &mut mem);
        let r = mem.regions();
        assert_eq!(r[0].kind, RegionKind::Table);
        assert_eq!(r[0].phys_base, 0);
        assert!(r[1..].iter().all(|x| x.kind == RegionKind::Bulk));
    }
}
