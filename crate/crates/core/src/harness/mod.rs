//! Run configuration, sweeps, verification campaigns and result output.

pub mod config;
pub mod emit;
pub mod sweep;
pub mod system;
pub mod verify;

pub use config::{parse_config, RunConfig};
pub use sweep::{bound_table, run_sweep, SweepOptions, SweepRecord};
pub use system::System;
pub use verify::{verify_all, VerificationReport};

use crate::error::Result;
use crate::lightcone::{empirical_front, FrontRecord};

/// Default front threshold `10^{-3} · 2‖A‖‖B‖`.
pub fn default_front_threshold(system: &System) -> f64 {
    let norm_b = system.placements.iter().map(|p| p.b.norm()).fold(0.0, f64::max);
    1e-3 * 2.0 * system.a.norm() * norm_b
}

/// Empirical front from the measured (full-dynamics) norms of a sweep.
pub fn front_from_sweep(records: &[SweepRecord], epsilon: f64) -> Result<Vec<FrontRecord>> {
    let table: Vec<(f64, f64, f64)> = records.iter().map(|r| (r.t, r.r, r.measured)).collect();
    empirical_front(&table, epsilon)
}
