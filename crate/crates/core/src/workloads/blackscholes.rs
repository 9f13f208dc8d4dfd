//! European option pricing with the Black-Scholes closed form, in the style
//! of the PARSEC kernel: structure-of-arrays inputs reached through a table
//! of array base pointers, polynomial normal CDF.

use super::{drive, OutputView, RegionKind, SimMemory, WorkloadConfig, WorkloadParams, WorkloadResult};
use crate::rng::{self, Domain};
use rand::Rng;

/// Input arrays in table order; the price array follows them.
pub const FIELDS: [&str; 6] = ["spot", "strike", "rate", "volatility", "time", "otype"];

#[derive(Debug, Clone, PartialEq)]
pub struct OptionData {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub volatility: f64,
    pub time: f64,
    /// 0 for a call, 1 for a put.
    pub otype: f64,
}

impl OptionData {
    fn field(&self, f: usize) -> f64 {
        [self.spot, self.strike, self.rate, self.volatility, self.time, self.otype][f]
    }
}

pub fn inputs(config: &WorkloadConfig) -> Vec<OptionData> {
    let WorkloadParams::Blackscholes { options } = config.params else {
        panic!("not a Blackscholes config");
    };
    let mut rng = rng::stream(config.input_seed, Domain::Workload, 0);
    (0..options)
        .map(|_| OptionData {
            spot: rng.gen_range(50.0..150.0),
            strike: rng.gen_range(50.0..150.0),
            rate: rng.gen_range(0.01..0.1),
            volatility: rng.gen_range(0.05..0.65),
            time: rng.gen_range(0.1..2.0),
            otype: if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
        })
        .collect()
}

/// Abramowitz-Stegun 26.2.17 approximation of the standard normal CDF.
pub fn cndf(x: f64) -> f64 {
    let neg = x < 0.0;
    let x = x.abs();
    let k = 1.0 / (1.0 + 0.231_641_9 * x);
    let pdf = libm::exp(-0.5 * x * x) * 0.398_942_280_401_432_7;
    let poly = k
        * (0.319_381_530
            + k * (-0.356_563_782 + k * (1.781_477_937 + k * (-1.821_255_978 + k * 1.330_274_429))));
    let n = 1.0 - pdf * poly;
    if neg {
        1.0 - n
    } else {
        n
    }
}

pub fn price(o: &OptionData) -> f64 {
    let sqrt_t = o.time.sqrt();
    let d1 = (libm::log(o.spot / o.strike) + (o.rate + 0.5 * o.volatility * o.volatility) * o.time)
        / (o.volatility * sqrt_t);
    let d2 = d1 - o.volatility * sqrt_t;
    let discounted = o.strike * libm::exp(-o.rate * o.time);
    if o.otype == 0.0 {
        o.spot * cndf(d1) - discounted * cndf(d2)
    } else {
        discounted * cndf(-d2) - o.spot * cndf(-d1)
    }
}

pub fn run_blackscholes(config: &WorkloadConfig, mem: &mut SimMemory) -> WorkloadResult {
    let opts = inputs(config);
    let n = opts.len();
    drive(
        config,
        mem,
        |mem| {
            let table = mem.alloc("array_ptrs", RegionKind::Table, (FIELDS.len() + 1) * 8);
            let arrays: Vec<_> = FIELDS
                .iter()
                .map(|&name| mem.alloc(name, RegionKind::Bulk, n * 8))
                .collect();
            let prices = mem.alloc("price", RegionKind::Bulk, n * 8);
            let mut ptrs: Vec<u64> = arrays.iter().map(|&r| mem.addr(r, 0)).collect();
            ptrs.push(mem.addr(prices, 0));
            mem.poke_u64s(table, &ptrs);
            for (f, &r) in arrays.iter().enumerate() {
                let col: Vec<f64> = opts.iter().map(|o| o.field(f)).collect();
                mem.poke_f64s(r, &col);
            }
            (table, arrays, prices)
        },
        |(table, arrays, prices), mem| {
            for i in 0..n {
                let mut v = [0.0; 6];
                for (f, slot) in v.iter_mut().enumerate() {
                    let base = mem.load_u64(*table, mem.addr(*table, f as u64 * 8))?;
                    *slot = mem.load_f64(arrays[f], base + i as u64 * 8)?;
                }
                let o = OptionData {
                    spot: v[0],
                    strike: v[1],
                    rate: v[2],
                    volatility: v[3],
                    time: v[4],
                    otype: v[5],
                };
                let p = price(&o);
                let base = mem.load_u64(*table, mem.addr(*table, FIELDS.len() as u64 * 8))?;
                mem.store_f64(*prices, base + i as u64 * 8, p)?;
            }
            Ok(*prices)
        },
        OutputView::Vector { len: n },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cndf_symmetry_and_anchors() {
        assert!((cndf(0.0) - 0.5).abs() < 1e-7);
        for x in [0.1, 0.7, 1.5, 3.0] {
            assert!((cndf(x) + cndf(-x) - 1.0).abs() < 1e-12);
        }
        assert!((cndf(1.959_963_985) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn put_call_parity() {
        let call = OptionData {
            spot: 100.0,
            strike: 95.0,
            rate: 0.05,
            volatility: 0.3,
            time: 1.0,
            otype: 0.0,
        };
        let put = OptionData { otype: 1.0, ..call.clone() };
        let parity = call.spot - call.strike * (-call.rate * call.time).exp();
        assert!((price(&call) - price(&put) - parity).abs() < 1e-5);
    }
}
