//! Verification campaign: every inequality and identity of the bound chain,
//! checked on the configured system.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    c3_constant, far_commutator_sum, lemma31_rhs, lemma_b1_bound, series_a_n, ConstantMode,
};
use crate::error::{Error, Result};
use crate::lightcone::{
    asymptotic_check, decay_rates, exponents, fit_power_law, AsymptoticConstants, ConeParameters, FrontRecord,
};
use crate::model::{verify_sr_condition, DecayProfile};
use crate::quantum::{
    c64, commutator_norm, verify_conjugation_identity, CMat, Observable, SpectralHamiltonian,
};

use super::emit::sweep_table;
use super::sweep::{run_sweep, with_workers, SweepOptions, SweepRecord};
use super::system::System;

/// Absolute slack for exact-arithmetic inequalities evaluated in floating point.
pub const DOMINATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub point: String,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`.
    pub margin: f64,
    pub tolerance: f64,
    /// `margin >= -tolerance`.
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check: &str, point: String, measured: f64, bound: f64, tolerance: f64) -> Self {
        let margin = bound - measured;
        Self {
            check: check.to_string(),
            point,
            measured,
            bound,
            margin,
            tolerance,
            pass: margin >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub total: usize,
    pub failed: usize,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub min_margin: f64,
    pub wall_time_s: f64,
    pub checks: Vec<CheckSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
    pub summary: ReportSummary,
}

impl VerificationReport {
    pub fn from_rows(rows: Vec<CheckRow>, wall_time_s: f64) -> Self {
        let mut per: BTreeMap<&str, CheckSummary> = BTreeMap::new();
        for r in &rows {
            let s = per.entry(&r.check).or_insert_with(|| CheckSummary {
                check: r.check.clone(),
                total: 0,
                failed: 0,
                min_margin: f64::INFINITY,
            });
            s.total += 1;
            s.failed += usize::from(!r.pass);
            s.min_margin = s.min_margin.min(r.margin);
        }
        let failed = rows.iter().filter(|r| !r.pass).count();
        let summary = ReportSummary {
            total: rows.len(),
            passed: rows.len() - failed,
            failed,
            min_margin: rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
            wall_time_s,
            checks: per.into_values().collect(),
        };
        Self { rows, summary }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

fn fmt_point(t: f64, r: f64, cutoff: f64, site: usize) -> String {
    format!("t={t} r={r} R={cutoff} site={site}")
}

/// Run every check on `system`.
///
/// The theorem checks always use both constant modes, whatever the config
/// selects for output.
pub fn verify_all(system: &System, workers: Option<usize>) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut rows = Vec::new();
    rows.extend(assumption_checks(system)?);
    rows.extend(series_checks(system)?);
    rows.extend(with_workers(workers, || identity_checks(system))??);
    rows.extend(with_workers(workers, || lemma_checks(system))??);

    let options = SweepOptions {
        workers,
        modes: vec![ConstantMode::PaperForm, ConstantMode::NumericTight],
        far_sums: true,
    };
    let records = run_sweep(system, &options)?;
    rows.extend(theorem_checks(system, &records));
    if system.config.verify.determinism {
        rows.push(determinism_check(system, &options, &records)?);
    }
    if system.config.verify.lightcone {
        rows.extend(lightcone_checks(system)?);
    }
    Ok(VerificationReport::from_rows(rows, start.elapsed().as_secs_f64()))
}

/// `f(R)` dominates the long-range part at every cutoff in use.
fn assumption_checks(system: &System) -> Result<Vec<CheckRow>> {
    let mut cutoffs = system.config.verify.lemma_cutoffs.clone();
    for p in &system.placements {
        for policy in &system.config.sweep.r_policies {
            cutoffs.push(system.cutoff(policy, p.r)?);
        }
    }
    cutoffs.sort_by(f64::total_cmp);
    cutoffs.dedup();
    let mut rows = Vec::new();
    for cutoff in cutoffs {
        let (_, long) = system.interaction.decompose(cutoff)?;
        let tail = long.max_site_norm_sum();
        let f = system.profile.f(cutoff);
        let ok = verify_sr_condition(&long, &system.profile, cutoff);
        let mut row = CheckRow::new("sr_condition", format!("R={cutoff}"), tail, f, 1e-12 * f);
        row.pass = ok;
        rows.push(row);
    }
    if let DecayProfile::PowerLaw { .. } = system.profile {
        let grid: Vec<f64> = system.interaction.space().realized_distances();
        let ok = system.profile.dominates(&system.interaction, &grid);
        let mut row = CheckRow::new("profile_dominates_tail", "realised diameters".into(), 0.0, 0.0, 0.0);
        row.pass = ok;
        rows.push(row);
    }
    Ok(rows)
}

/// `a_n <= C0^n |X|` and `a_n = 0` whenever `nR < d(X,Y)`.
fn series_checks(system: &System) -> Result<Vec<CheckRow>> {
    let v = &system.config.verify;
    let xs = system.a.support();
    let mut rows = Vec::new();
    for &cutoff in &v.series_cutoffs {
        for p in &system.placements {
            for n in 1..=v.series_max_n {
                let a_n = series_a_n(&system.interaction, xs, p.b.support(), cutoff, n, system.config.limits.chain_limit)?;
                let point = format!("n={n} R={cutoff} site={} d={}", p.site, p.r);
                let bound = system.c0.powi(n as i32) * xs.len() as f64;
                rows.push(CheckRow::new("series_a_n_bound", point.clone(), a_n, bound, 1e-12 * bound));
                if (n as f64) * cutoff < p.r {
                    rows.push(CheckRow::new("series_a_n_vanishing", point, a_n, 0.0, 0.0));
                }
            }
        }
    }
    Ok(rows)
}

fn random_single_site(rng: &mut ChaCha8Rng, site: usize) -> Result<Observable> {
    let re = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let off = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c64::new(re[0], 0.0),
        (1, 1) => c64::new(re[1], 0.0),
        (0, 1) => off,
        _ => off.conj(),
    });
    Observable::new(vec![site], m)
}

/// `‖[τ_t(A),B]‖ = ‖[τ_t^{(<R)}(A), 𝒰 B 𝒰†]‖` with `B` at maximal distance,
/// plus one random Hermitian pair drawn from the configured seed.
fn identity_checks(system: &System) -> Result<Vec<CheckRow>> {
    let v = &system.config.verify;
    let hilbert = system.hilbert()?;
    let full = SpectralHamiltonian::assemble(&system.interaction, &hilbert)?;
    let far = system
        .placements
        .iter()
        .max_by(|p, q| p.r.total_cmp(&q.r).then(p.site.cmp(&q.site)))
        .expect("placements are nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(system.config.seed);
    let a_rand = random_single_site(&mut rng, system.a.support()[0])?;
    let b_rand = random_single_site(&mut rng, far.site)?;
    let pairs = [
        (system.a.embed(&hilbert)?, far.b.embed(&hilbert)?, "A,B"),
        (a_rand.embed(&hilbert)?, b_rand.embed(&hilbert)?, "random"),
    ];
    let mut rows = Vec::new();
    for &cutoff in &v.identity_cutoffs {
        let (short, _) = system.interaction.decompose(cutoff)?;
        let short = SpectralHamiltonian::assemble(&short, &hilbert)?;
        let chunk: Vec<CheckRow> = v
            .identity_times
            .par_iter()
            .flat_map_iter(|&t| {
                pairs.iter().map(move |(a, b, label)| (t, a, b, *label))
            })
            .map(|(t, a, b, label)| {
                let residual = verify_conjugation_identity(&short, &full, a, b, t)?;
                Ok(CheckRow::new(
                    "conjugation_identity",
                    format!("{label} t={t} R={cutoff} site={}", far.site),
                    residual,
                    v.identity_tolerance,
                    0.0,
                ))
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

/// Lemma-level checks on the verify grid: the Duhamel comparison against
/// full dynamics and the far-sum bound in both constant modes.
fn lemma_checks(system: &System) -> Result<Vec<CheckRow>> {
    let v = &system.config.verify;
    let hilbert = system.hilbert()?;
    let full = SpectralHamiltonian::assemble(&system.interaction, &hilbert)?;
    let a_full = full.to_eigenbasis(&system.a.embed(&hilbert)?)?;
    let mut rows = Vec::new();
    for &cutoff in &v.lemma_cutoffs {
        let (short_i, long) = system.interaction.decompose(cutoff)?;
        let short = SpectralHamiltonian::assemble(&short_i, &hilbert)?;
        let mut points = Vec::new();
        for &r in &v.lemma_radii {
            for &t in &v.lemma_times {
                for (pi, _) in system.placements.iter().enumerate() {
                    points.push((r, t, pi));
                }
            }
        }
        let lemma31: Vec<CheckRow> = points
            .par_iter()
            .map(|&(r, t, pi)| {
                let p = &system.placements[pi];
                let b_full = full.to_eigenbasis(&p.b.embed(&hilbert)?)?;
                let measured = commutator_norm(full.evolve_eigenbasis(&a_full, t).as_ref(), b_full.as_ref())?;
                let rhs = lemma31_rhs(&short, &long, &hilbert, &system.a, &p.b, r, t, v.quadrature_tolerance)?;
                Ok(CheckRow::new(
                    "lemma31_domination",
                    format!("t={t} r={r} R={cutoff} site={}", p.site),
                    measured,
                    rhs.total,
                    v.lemma_slack,
                ))
            })
            .collect::<Result<_>>()?;
        rows.extend(lemma31);

        let mut rt = Vec::new();
        for &r in &v.lemma_radii {
            for &t in &v.lemma_times {
                rt.push((r, t));
            }
        }
        let b1: Vec<Vec<CheckRow>> = rt
            .par_iter()
            .map(|&(r, t)| {
                let lhs = far_commutator_sum(&short, &long, &hilbert, &system.a, r, t)?;
                let inputs = system.bound_inputs(&system.placements[0].b, t, r, cutoff)?;
                let paper = lemma_b1_bound(&inputs, ConstantMode::PaperForm)?;
                let tight = lemma_b1_bound(&inputs, ConstantMode::NumericTight)?;
                let point = format!("t={t} r={r} R={cutoff}");
                Ok(vec![
                    CheckRow::new("lemma_b1_domination", format!("{point} mode=paper_form"), lhs, paper, DOMINATION_TOL),
                    CheckRow::new("lemma_b1_domination", format!("{point} mode=numeric_tight"), lhs, tight, DOMINATION_TOL),
                    CheckRow::new("lemma_b1_mode_ordering", point, tight, paper, 1e-12 * paper),
                ])
            })
            .collect::<Result<_>>()?;
        rows.extend(b1.into_iter().flatten());
    }
    Ok(rows)
}

/// Total and term-wise domination on every sweep row, and mode ordering.
fn theorem_checks(system: &System, records: &[SweepRecord]) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let norm_b: BTreeMap<usize, f64> = system.placements.iter().map(|p| (p.site, p.b.norm())).collect();
    for rec in records {
        let point = format!("{} mode={}", fmt_point(rec.t, rec.r, rec.cutoff, rec.site), rec.bound.mode);
        rows.push(CheckRow::new("theorem_bound_domination", point.clone(), rec.measured, rec.bound.total, DOMINATION_TOL));
        rows.push(CheckRow::new(
            "theorem_bound_domination:term1",
            point.clone(),
            rec.truncated,
            rec.bound.term1,
            DOMINATION_TOL,
        ));
        // term3 = 2‖B‖ t · (far-sum bound at time t), and the far-sum bound
        // grows with t, so it must dominate 2‖B‖ t · far_sum(t)
        if let (Some(far), false) = (rec.far_sum, system.config.bound.integrated_time) {
            if rec.t > 0.0 {
                let envelope = 2.0 * norm_b[&rec.site] * rec.t * far;
                rows.push(CheckRow::new(
                    "theorem_bound_domination:term3",
                    point.clone(),
                    envelope,
                    rec.bound.term3,
                    DOMINATION_TOL,
                ));
            }
        }
        if rec.bound.mode == ConstantMode::NumericTight {
            rows.push(CheckRow::new(
                "finite_range_bound",
                fmt_point(rec.t, rec.r, rec.cutoff, rec.site),
                rec.truncated,
                rec.finite_range,
                DOMINATION_TOL,
            ));
        }
    }
    // pair rows that differ only in mode
    let mut by_point: BTreeMap<(u64, u64, u64, usize), [Option<f64>; 2]> = BTreeMap::new();
    for rec in records {
        let key = (rec.t.to_bits(), rec.r.to_bits(), rec.cutoff.to_bits(), rec.site);
        let slot = match rec.bound.mode {
            ConstantMode::PaperForm => 0,
            ConstantMode::NumericTight => 1,
        };
        by_point.entry(key).or_default()[slot] = Some(rec.bound.total);
    }
    for ((t, r, c, site), totals) in by_point {
        if let [Some(paper), Some(tight)] = totals {
            rows.push(CheckRow::new(
                "theorem_mode_ordering",
                fmt_point(f64::from_bits(t), f64::from_bits(r), f64::from_bits(c), site),
                tight,
                paper,
                1e-12 * paper,
            ));
        }
    }
    rows
}

/// A single-worker rerun produces the same CSV bytes.
fn determinism_check(system: &System, options: &SweepOptions, records: &[SweepRecord]) -> Result<CheckRow> {
    let serial = run_sweep(system, &SweepOptions { workers: Some(1), ..options.clone() })?;
    let a = sweep_table(records).to_csv();
    let b = sweep_table(&serial).to_csv();
    let differing = a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() + a.lines().count().abs_diff(b.lines().count());
    Ok(CheckRow::new(
        "determinism",
        format!("workers={:?} vs 1, {} rows", options.workers, records.len()),
        differing as f64,
        0.0,
        0.0,
    ))
}

/// Formula-layer checks of the light cone, when the family is power-law with `α > D`.
fn lightcone_checks(system: &System) -> Result<Vec<CheckRow>> {
    let Some(alpha) = system.config.alpha() else {
        return Ok(Vec::new());
    };
    if exponents(system.dimension, alpha).is_err() {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for d in [1.0, 2.0, 3.0] {
        for k in 1..=20 {
            let a = d + 0.5 * k as f64;
            let e = exponents(d, a)?;
            let err = (1.0 / e.eta - (1.0 + e.gamma)).abs();
            rows.push(CheckRow::new("lightcone_exponent_identity", format!("D={d} alpha={a}"), err, 1e-12, 0.0));
        }
    }

    let params = ConeParameters::new(system.dimension, alpha, system.config.bound.lambda, system.velocity)?;
    let front: Vec<FrontRecord> = (1..=100)
        .map(|k| FrontRecord {
            t: k as f64,
            r_star: Some(params.r_max(k as f64)),
            epsilon: 1.0,
            saturated: false,
        })
        .collect();
    let fit = fit_power_law(&front)?;
    rows.push(CheckRow::new(
        "lightcone_front_fit",
        format!("t=1..100 target 1+gamma={}", 1.0 + params.gamma),
        (fit.exponent - (1.0 + params.gamma)).abs(),
        1e-6,
        0.0,
    ));

    let DecayProfile::PowerLaw { c_prime, .. } = DecayProfile::fit_power_law(&system.interaction, alpha)? else {
        return Err(Error::NumericFailure("power-law fit returned another profile".into()));
    };
    let c2 = c3_constant(&system.growth, true)
        .or_else(|_| c3_constant(&system.growth, false))
        .map_or(1.0, |c3| 2.0 * c3);
    let consts = AsymptoticConstants {
        norm_a: system.a.norm(),
        norm_b: system.placements[0].b.norm(),
        size_x: system.a.support().len(),
        growth_c: system.growth.c,
        c_prime,
        c2,
    };
    let target = (params.lambda - 1.0) * params.velocity;
    // term3 carries a 1/t prefactor, adding ln(1 + 1/t) to its rate; start
    // where that is under 1% of the target so slow systems are judged asymptotically.
    let t0 = 10f64.max((100.0 / target).ceil());
    let ts: Vec<f64> = (0..=90).map(|k| t0 + f64::from(k)).collect();
    for (t, r1, r3) in decay_rates(&asymptotic_check(&params, &consts, &ts)?) {
        for (name, rate) in [("term1", r1), ("term3", r3)] {
            rows.push(CheckRow::new(
                "lightcone_asymptotic_rate",
                format!("{name} t={t} target={target}"),
                (rate - target).abs(),
                0.01 * target,
                0.0,
            ));
        }
    }
    Ok(rows)
}
