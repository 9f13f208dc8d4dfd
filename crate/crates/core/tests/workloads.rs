mod common;

use sramfi::cachesim::{CacheBitAddr, CacheGeometry};
use sramfi::faultmap::{CorruptionKind, FaultTiming};
use sramfi::harness::psnr;
use sramfi::workloads::*;

fn run_clean(config: &WorkloadConfig) -> (WorkloadResult, SimMemory) {
    let mut mem = SimMemory::new(CacheGeometry::default());
    let r = run(config, &mut mem);
    (r, mem)
}

/// Memory with `kind` bound at `bit_in_line` of every way of `set`.
fn mem_with_stuck(set: usize, bit_in_line: usize, kind: CorruptionKind) -> SimMemory {
    let g = CacheGeometry::default();
    let mut mem = SimMemory::new(g);
    for way in 0..g.associativity {
        mem.cache_mut()
            .bind(CacheBitAddr { set, way, bit_in_line }, FaultTiming::Permanent, kind);
    }
    mem
}

fn output(r: &WorkloadResult) -> &Output {
    r.output().unwrap_or_else(|| panic!("crashed: {r:?}"))
}

#[test]
fn zero_fault_runs_match_straight_line_references() {
    for b in Benchmark::ALL {
        let config = WorkloadConfig::default_for(b);
        let (r, _) = run_clean(&config);
        assert_eq!(output(&r).bytes, common::reference_bytes(&config), "{b:?}");
    }
}

#[test]
fn runs_are_deterministic() {
    for b in Benchmark::ALL {
        let config = WorkloadConfig::default_for(b);
        let (r1, m1) = run_clean(&config);
        let (r2, m2) = run_clean(&config);
        assert_eq!(r1, r2);
        assert_eq!(m1.steps(), m2.steps());
    }
}

#[test]
fn tables_sit_below_bulk_data() {
    for b in Benchmark::ALL {
        let (_, mem) = run_clean(&WorkloadConfig::default_for(b));
        let regions = mem.regions();
        let table_end = regions
            .iter()
            .filter(|r| r.kind != RegionKind::Bulk)
            .map(|r| r.phys_end())
            .max()
            .unwrap_or(0);
        let bulk_start = regions
            .iter()
            .filter(|r| r.kind == RegionKind::Bulk)
            .map(|r| r.phys_base)
            .min()
            .unwrap();
        assert!(table_end <= bulk_start, "{b:?}");
        assert!(regions.iter().all(|r| r.phys_base % 64 == 0));
    }
}

#[test]
fn golden_runs_stay_well_inside_the_step_budget() {
    for b in Benchmark::ALL {
        let config = WorkloadConfig::default_for(b);
        let (_, mem) = run_clean(&config);
        assert!(mem.steps() * 2 < config.step_budget, "{b:?}: {}", mem.steps());
    }
}

#[test]
fn tiny_step_budget_crashes() {
    let mut config = WorkloadConfig::default_for(Benchmark::Sobel);
    config.step_budget = 100;
    let (r, _) = run_clean(&config);
    assert_eq!(r, WorkloadResult::Crash(Crash::StepBudgetExceeded));
}

#[test]
fn jacobi_agrees_with_gaussian_elimination() {
    let config = WorkloadConfig::default_for(Benchmark::Jacobi);
    let inp = jacobi::inputs(&config);
    let exact = common::gauss_solve(inp.n, &inp.a, &inp.b);
    let (r, _) = run_clean(&config);
    for (x, e) in output(&r).f64_values().iter().zip(&exact) {
        assert!((x - e).abs() < 1e-5, "{x} vs {e}");
    }
}

#[test]
fn blackscholes_agrees_with_exact_normal_cdf() {
    let config = WorkloadConfig::default_for(Benchmark::Blackscholes);
    let (r, _) = run_clean(&config);
    let opts = blackscholes::inputs(&config);
    for (p, o) in output(&r).f64_values().iter().zip(&opts) {
        let e = common::blackscholes_exact(o);
        assert!((p - e).abs() <= 1e-6 * e.abs().max(o.spot), "{p} vs {e}");
    }
}

#[test]
fn dct_round_trip_preserves_the_image() {
    let config = WorkloadConfig::default_for(Benchmark::Dct);
    let WorkloadParams::Dct { side } = config.params else { unreachable!() };
    let source = dct::synthetic_image(side, config.input_seed);
    let (r, _) = run_clean(&config);
    assert!(psnr(&source, &output(&r).bytes).unwrap() >= 40.0);
}

#[test]
fn sobel_single_pixel_change_is_local() {
    let config = WorkloadConfig::default_for(Benchmark::Sobel);
    let (side, mut image) = sobel::inputs(&config);
    let before = common::sobel_ref(side, &image);
    image[20 * side + 30] ^= 0xFF;
    let mut mem = SimMemory::new(CacheGeometry::default());
    let r = sobel::run_sobel_on(&config, &mut mem, side, &image);
    let after = &output(&r).bytes;
    assert_eq!(after, &common::sobel_ref(side, &image));
    let changed: Vec<usize> = (0..side * side).filter(|&i| before[i] != after[i]).collect();
    assert!(!changed.is_empty() && changed.len() <= 9);
    for i in changed {
        let (y, x) = (i / side, i % side);
        assert!(y.abs_diff(20) <= 1 && x.abs_diff(30) <= 1);
    }
}

#[test]
fn stuck_at_matching_value_is_masked() {
    // The high bit of the MC step counter is always zero.
    let config = WorkloadConfig::default_for(Benchmark::Mc);
    let mut mem = mem_with_stuck(0, 63, CorruptionKind::StuckAt0);
    let r = run(&config, &mut mem);
    assert_eq!(output(&r).bytes, common::reference_bytes(&config));
}

#[test]
fn stuck_counter_bit_exhausts_the_walk_limit() {
    let config = WorkloadConfig::default_for(Benchmark::Mc);
    let mut mem = mem_with_stuck(0, 40, CorruptionKind::StuckAt1);
    assert_eq!(run(&config, &mut mem), WorkloadResult::Crash(Crash::StepBudgetExceeded));
}

#[test]
fn corrupted_row_pointer_leaves_its_region() {
    let config = WorkloadConfig::default_for(Benchmark::Sobel);
    // Bit 45 of the second row pointer; clear in every valid address.
    let mut mem = mem_with_stuck(0, 8 * 8 + 45, CorruptionKind::StuckAt1);
    assert!(matches!(
        run(&config, &mut mem),
        WorkloadResult::Crash(Crash::OutOfRange { .. })
    ));
}

#[test]
fn corrupted_label_indexes_past_the_centroids() {
    let config = WorkloadConfig::default_for(Benchmark::KMeans);
    let (_, clean) = run_clean(&config);
    let labels = clean.regions().iter().find(|r| r.name == "labels").unwrap();
    let line = (labels.phys_base / 64) as usize;
    let mut mem = mem_with_stuck(line % 16, 7, CorruptionKind::StuckAt1);
    assert!(matches!(
        run(&config, &mut mem),
        WorkloadResult::Crash(Crash::OutOfRange { .. })
    ));
}

#[test]
fn kmeans_labels_match_reference_assignment() {
    let config = WorkloadConfig::default_for(Benchmark::KMeans);
    let (r, _) = run_clean(&config);
    let out = output(&r);
    let reference = common::kmeans_ref(&config);
    assert_eq!(
        common::cluster_accuracy_exhaustive(&reference, &out.bytes, 4),
        100.0
    );
    assert!(out.bytes.iter().all(|&l| l < 4));
}
