//! Simulator comparing hardware-guided against random fault injection for
//! undervolted SRAM L1 data caches.
//!
//! Pipeline: [`faultmap`] generates per-SRAM fault maps, [`cachesim`] binds
//! them to a set-associative cache, [`workloads`] runs six benchmark kernels
//! through that cache, [`harness`] classifies and scores the outcomes, and
//! [`report`] and [`cli`] turn campaigns into files.

pub mod cachesim;
pub mod cli;
pub mod config;
pub mod faultmap;
pub mod harness;
pub mod report;
pub mod rng;
pub mod workloads;
