//! Grid sweeps: exact commutator norms under full and truncated dynamics next
//! to the three-term bound.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{finite_range_bound, theorem_bound, velocity, BoundBreakdown, ConstantMode};
use crate::error::{Error, Result};
use crate::quantum::{commutator_norm, embed, CMat, HilbertSpace, SpectralHamiltonian};

use super::system::System;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub cutoff: f64,
    pub site: usize,
    /// `‖[τ_t(A), B]‖`.
    pub measured: f64,
    /// `‖[τ_t^{(<R)}(A), B]‖`.
    pub truncated: f64,
    pub bound: BoundBreakdown,
    /// `total - measured`.
    pub margin: f64,
    /// Finite-range bound for the truncated dynamics, with `v` from the
    /// truncated family's `C0`.
    pub finite_range: f64,
    /// `Σ_{Z∩X̃_r=∅} ‖[τ_t^{(<R)}(A), h_Z^{(≥R)}]‖` at `r = d(X,Y)`, when requested.
    pub far_sum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub modes: Vec<ConstantMode>,
    /// Also evaluate `far_sum` for the term-wise third-term check.
    pub far_sums: bool,
}

impl SweepOptions {
    pub fn for_config(system: &System) -> Self {
        Self {
            workers: None,
            modes: system.config.bound.mode.modes(),
            far_sums: false,
        }
    }
}

/// Run `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = match workers {
        Some(0) => return Err(Error::invalid("worker count must be positive")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?;
    Ok(pool.install(f))
}

/// A Hamiltonian with `A` and every placement of `B` in its eigenbasis.
struct Frame {
    h: SpectralHamiltonian,
    a: CMat,
    bs: Vec<CMat>,
}

impl Frame {
    fn new(h: SpectralHamiltonian, system: &System, hilbert: &HilbertSpace) -> Result<Self> {
        let a = h.to_eigenbasis(&system.a.embed(hilbert)?)?;
        let bs = system
            .placements
            .par_iter()
            .map(|p| h.to_eigenbasis(&p.b.embed(hilbert)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, a, bs })
    }

    fn norm(&self, placement: usize, t: f64) -> Result<f64> {
        self.h.commutator_norm_eigenbasis(&self.a, &self.bs[placement], t)
    }
}

fn at_point(e: Error, t: f64, r: f64, cutoff: Option<f64>) -> Error {
    let where_ = match cutoff {
        Some(c) => format!("t = {t}, r = {r}, R = {c}"),
        None => format!("t = {t}, r = {r}"),
    };
    match e {
        Error::NumericFailure(m) => Error::NumericFailure(format!("at {where_}: {m}")),
        Error::ResourceLimit(m) => Error::ResourceLimit(format!("at {where_}: {m}")),
        other => other,
    }
}

struct Point {
    t: usize,
    placement: usize,
    cutoff: f64,
}

/// Evaluate every `(t, B placement, R policy)` grid point.
///
/// Rows are ordered by `(t, r, R, site, mode)` whatever the worker count, and
/// every value is computed by the same sequential code, so output is
/// identical across schedules.
pub fn run_sweep(system: &System, options: &SweepOptions) -> Result<Vec<SweepRecord>> {
    with_workers(options.workers, || sweep_inner(system, options))?
}

fn sweep_inner(system: &System, options: &SweepOptions) -> Result<Vec<SweepRecord>> {
    if options.modes.is_empty() {
        return Err(Error::invalid("at least one constant mode is needed"));
    }
    let hilbert = system.hilbert()?;
    let ts = system.times();
    let np = system.placements.len();

    // points grouped by the set of short-range terms their cutoff keeps
    let mut groups: BTreeMap<Vec<usize>, (f64, Vec<Point>)> = BTreeMap::new();
    for (ti, _) in ts.iter().enumerate() {
        for (pi, p) in system.placements.iter().enumerate() {
            for policy in &system.config.sweep.r_policies {
                let cutoff = system.cutoff(policy, p.r)?;
                let key = system.interaction.short_term_indices(cutoff);
                groups
                    .entry(key)
                    .or_insert_with(|| (cutoff, Vec::new()))
                    .1
                    .push(Point {
                        t: ti,
                        placement: pi,
                        cutoff,
                    });
            }
        }
    }

    let full = Frame::new(SpectralHamiltonian::assemble(&system.interaction, &hilbert)?, system, &hilbert)?;
    let measured: Vec<f64> = (0..ts.len() * np)
        .into_par_iter()
        .map(|k| {
            let (ti, pi) = (k / np, k % np);
            full.norm(pi, ts[ti])
                .map_err(|e| at_point(e, ts[ti], system.placements[pi].r, None))
        })
        .collect::<Result<_>>()?;
    drop(full);

    let mut rows = Vec::new();
    for (representative, points) in groups.values() {
        let (short, long) = system.interaction.decompose(*representative)?;
        let frame = Frame::new(SpectralHamiltonian::assemble(&short, &hilbert)?, system, &hilbert)?;
        let short_velocity = velocity(short.compute_c0());
        let long_terms: Vec<(Vec<usize>, CMat)> = if options.far_sums {
            long.terms()
                .par_iter()
                .map(|term| {
                    let m = frame.h.to_eigenbasis(&embed(term.support(), term.matrix(), &hilbert)?)?;
                    Ok((term.support().to_vec(), m))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };

        let chunk: Vec<Vec<SweepRecord>> = points
            .par_iter()
            .map(|pt| {
                let p = &system.placements[pt.placement];
                let t = ts[pt.t];
                let fail = |e| at_point(e, t, p.r, Some(pt.cutoff));
                let at = frame.h.evolve_eigenbasis(&frame.a, t);
                let truncated = commutator_norm(at.as_ref(), frame.bs[pt.placement].as_ref()).map_err(fail)?;
                let far_sum = if options.far_sums {
                    let hood = system.space.neighborhood(system.a.support(), p.r)?;
                    let mut s = 0.0;
                    for (support, m) in &long_terms {
                        if !support.iter().any(|z| hood.contains(z)) {
                            s += commutator_norm(at.as_ref(), m.as_ref()).map_err(fail)?;
                        }
                    }
                    Some(s)
                } else {
                    None
                };
                let inputs = system.bound_inputs(&p.b, t, p.r, pt.cutoff)?;
                let m = measured[pt.t * np + pt.placement];
                let finite_range = finite_range_bound(
                    inputs.norm_a,
                    inputs.norm_b,
                    inputs.size_x,
                    p.r,
                    pt.cutoff,
                    short_velocity,
                    t,
                );
                options
                    .modes
                    .iter()
                    .map(|&mode| {
                        let bound = theorem_bound(&inputs, mode)?;
                        Ok(SweepRecord {
                            t,
                            r: p.r,
                            cutoff: pt.cutoff,
                            site: p.site,
                            measured: m,
                            truncated,
                            margin: bound.total - m,
                            bound,
                            finite_range,
                            far_sum,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk.into_iter().flatten());
    }
    sort_records(&mut rows);
    Ok(rows)
}

pub fn sort_records(rows: &mut [SweepRecord]) {
    rows.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then(a.r.total_cmp(&b.r))
            .then(a.cutoff.total_cmp(&b.cutoff))
            .then(a.site.cmp(&b.site))
            .then(a.bound.mode.cmp(&b.bound.mode))
    });
}

/// Analytic rows of the bound alone, no dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub cutoff: f64,
    pub site: usize,
    pub bound: BoundBreakdown,
}

pub fn bound_table(system: &System, modes: &[ConstantMode]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for t in system.times() {
        for p in &system.placements {
            for policy in &system.config.sweep.r_policies {
                let cutoff = system.cutoff(policy, p.r)?;
                let inputs = system.bound_inputs(&p.b, t, p.r, cutoff)?;
                for &mode in modes {
                    rows.push(BoundRow {
                        t,
                        r: p.r,
                        cutoff,
                        site: p.site,
                        bound: theorem_bound(&inputs, mode)?,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then(a.r.total_cmp(&b.r))
            .then(a.cutoff.total_cmp(&b.cutoff))
            .then(a.site.cmp(&b.site))
            .then(a.bound.mode.cmp(&b.bound.mode))
    });
    Ok(rows)
}
