//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::time::Instant;

use lrcone::bounds::{
    c3_constant, far_commutator_sum, finite_range_bound, lemma31_rhs, lemma_b1_bound, series_a_n, velocity,
    ConstantMode, DEFAULT_CHAIN_LIMIT,
};
use lrcone::geometry::MetricSpace;
use lrcone::harness::emit::sweep_table;
use lrcone::harness::{parse_config, run_sweep, SweepOptions, System};
use lrcone::lightcone::{asymptotic_check, exponents, fit_power_law, AsymptoticConstants, ConeParameters, FrontRecord};
use lrcone::model::{CouplingPattern, DecayProfile, Interaction};
use lrcone::quantum::{verify_conjugation_identity, HilbertSpace, Observable, Pauli, SpectralHamiltonian};
use lrcone::Result;

const CAP: usize = 4096;

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn chain(len: usize, pattern: &str, extra: &str) -> Result<System> {
    let text = format!(
        r#"{{"lattice": {{"kind": "chain", "length": {len}}},
        "interaction": {{"kind": "power_law_two_body", "C1": 1, "alpha": 2, "pattern": "{pattern}"}}{extra}}}"#
    );
    System::build(&parse_config(&text)?)
}

fn power_law(len: usize) -> Result<Interaction> {
    Interaction::power_law_two_body(&MetricSpace::chain(len)?, 1.0, 2.0, 1.0, &CouplingPattern::Xy)
}

fn conjugation_identity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for len in [4, 5, 6] {
        let full = power_law(len)?;
        let hilbert = HilbertSpace::qubits(len, CAP)?;
        let h = SpectralHamiltonian::assemble(&full, &hilbert)?;
        let a = Observable::pauli(0, Pauli::X).embed(&hilbert)?;
        let b = Observable::pauli(len - 1, Pauli::Z).embed(&hilbert)?;
        for cutoff in [1.5, 2.5] {
            let short = SpectralHamiltonian::assemble(&full.decompose(cutoff)?.0, &hilbert)?;
            for t in [0.25, 0.5, 1.0, 2.0] {
                worst = worst.max(verify_conjugation_identity(&short, &h, &a, &b, t)?);
                count += 1;
            }
        }
    }
    outcome(worst < 1e-9, format!("{count} points, max deviation {worst:.3e} (< 1e-9)"))
}

fn finite_range_domination() -> Result<Outcome> {
    let system = chain(
        8,
        "xy",
        r#", "sweep": {"t_grid": {"start": 0, "stop": 2, "step": 0.1}}, "bound": {"c0_source": "truncated"}"#,
    )?;
    let records = run_sweep(&system, &SweepOptions::for_config(&system))?;
    let v = velocity(system.interaction.decompose(1.5)?.0.compute_c0());
    let mut min_margin = f64::INFINITY;
    let mut agree = true;
    for rec in &records {
        let bound = finite_range_bound(1.0, 1.0, 1, rec.r, 1.5, v, rec.t);
        agree &= (bound - rec.finite_range).abs() <= 1e-12 * bound;
        min_margin = min_margin.min(bound - rec.truncated);
    }
    let times = system.times().len();
    outcome(
        agree && min_margin >= 0.0 && records.len() == times * 7,
        format!("{} rows, v = {v:.6}, min margin {min_margin:.3e}", records.len()),
    )
}

/// Shared setup for the two integral criteria: L = 6, R = 1.5, A = X at the left end.
struct LemmaSetup {
    hilbert: HilbertSpace,
    full: SpectralHamiltonian,
    short: SpectralHamiltonian,
    long: Interaction,
    a: Observable,
    system: System,
}

fn lemma_setup() -> Result<LemmaSetup> {
    let system = chain(6, "xy", "")?;
    let hilbert = system.hilbert()?;
    let (short, long) = system.interaction.decompose(1.5)?;
    Ok(LemmaSetup {
        full: SpectralHamiltonian::assemble(&system.interaction, &hilbert)?,
        short: SpectralHamiltonian::assemble(&short, &hilbert)?,
        long,
        a: system.a.clone(),
        hilbert,
        system,
    })
}

fn duhamel_domination(s: &LemmaSetup) -> Result<Outcome> {
    let mut min_slack = f64::INFINITY;
    let mut count = 0;
    let a_full = s.a.embed(&s.hilbert)?;
    for p in &s.system.placements {
        let b_full = p.b.embed(&s.hilbert)?;
        for r in [1.0, 2.0] {
            for t in [0.5, 1.0] {
                let measured = lrcone::quantum::commutator_norm(s.full.evolve(&a_full, t)?.as_ref(), b_full.as_ref())?;
                let rhs = lemma31_rhs(&s.short, &s.long, &s.hilbert, &s.a, &p.b, r, t, 1e-8)?;
                min_slack = min_slack.min(rhs.total + 1e-5 - measured);
                count += 1;
            }
        }
    }
    outcome(min_slack >= 0.0, format!("{count} points, min (rhs + 1e-5 - measured) {min_slack:.3e}"))
}

fn far_sum_domination(s: &LemmaSetup) -> Result<Outcome> {
    let b = &s.system.placements[0].b;
    let mut min_margin = f64::INFINITY;
    let mut ordered = true;
    for r in [1.0, 2.0] {
        for t in [0.5, 1.0] {
            let lhs = far_commutator_sum(&s.short, &s.long, &s.hilbert, &s.a, r, t)?;
            let inputs = s.system.bound_inputs(b, t, r, 1.5)?;
            let tight = lemma_b1_bound(&inputs, ConstantMode::NumericTight)?;
            let paper = lemma_b1_bound(&inputs, ConstantMode::PaperForm)?;
            min_margin = min_margin.min(tight - lhs).min(paper - lhs);
            ordered &= tight <= paper;
        }
    }
    outcome(
        min_margin >= 0.0 && ordered,
        format!("min margin {min_margin:.3e}, numeric_tight <= paper_form: {ordered}"),
    )
}

fn theorem_domination() -> Result<Outcome> {
    let policies = r#""r_policies": [{"kind": "fixed", "value": 1.5}, {"kind": "kappa_rule"}]"#;
    let mut details = Vec::new();
    let mut pass = true;
    for (len, grid) in [
        (6, r#"{"start": 0, "stop": 2, "step": 0.1}"#),
        (8, r#"{"start": 0, "stop": 2, "step": 0.1}"#),
        (10, "[0, 0.5, 1, 1.5, 2]"),
    ] {
        let extra = format!(r#", "sweep": {{"t_grid": {grid}, {policies}}}, "bound": {{"mode": "both"}}"#);
        let system = chain(len, "xy", &extra)?;
        let start = Instant::now();
        let records = run_sweep(&system, &SweepOptions::for_config(&system))?;
        let min_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let min_term1 = records.iter().map(|r| r.bound.term1 - r.truncated).fold(f64::INFINITY, f64::min);
        let cutoffs: std::collections::BTreeSet<u64> = records.iter().map(|r| r.cutoff.to_bits()).collect();
        let expected = system.times().len() * (len - 1) * 2 * 2;
        pass &= min_margin >= 0.0 && min_term1 >= 0.0 && records.len() == expected && cutoffs.len() > 1;
        details.push(format!(
            "L={len}: {} rows, min margin {min_margin:.3e}, min term1 slack {min_term1:.3e}, {:.1} s",
            records.len(),
            start.elapsed().as_secs_f64()
        ));
    }
    outcome(pass, details.join("; "))
}

fn series() -> Result<Outcome> {
    let mut pass = true;
    let mut rows = 0;
    for len in [2usize, 3, 4, 5] {
        let full = power_law(len)?;
        let space = full.space().clone();
        let x_sets: Vec<Vec<usize>> = vec![vec![0], vec![len / 2], vec![0, 1]];
        for xs in x_sets.iter().filter(|xs| xs.iter().all(|&x| x < len)) {
            for y in (0..len).filter(|y| !xs.contains(y)) {
                let d = space.set_distance(xs, &[y])?;
                for cutoff in [1.5, 2.5, 3.5] {
                    let c0 = full.decompose(cutoff)?.0.compute_c0();
                    for n in 1..=3 {
                        let a_n = series_a_n(&full, xs, &[y], cutoff, n, DEFAULT_CHAIN_LIMIT)?;
                        pass &= a_n <= c0.powi(n as i32) * xs.len() as f64 * (1.0 + 1e-12);
                        if (n as f64) * cutoff < d {
                            pass &= a_n == 0.0;
                        }
                        rows += 1;
                    }
                }
            }
        }
    }
    let three = power_law(3)?;
    let worked = [
        series_a_n(&three, &[0], &[2], 2.5, 1, DEFAULT_CHAIN_LIMIT)?,
        series_a_n(&three, &[0], &[2], 1.5, 1, DEFAULT_CHAIN_LIMIT)?,
        series_a_n(&three, &[0], &[2], 1.5, 2, DEFAULT_CHAIN_LIMIT)?,
    ];
    let exact = [1.0 / 27.0, 0.0, 1.0 / 64.0];
    let worked_ok = worked.iter().zip(exact).all(|(g, e)| (g - e).abs() < 1e-12);
    outcome(
        pass && worked_ok,
        format!("{rows} bound/vanishing points; worked example {worked:?}"),
    )
}

/// Straight from the definitions on the raw pair list: `‖h_{xy}‖ = (1+|x-y|)^{-3}`.
fn assumption_oracles() -> Result<Outcome> {
    let len = 5usize;
    let pairs: Vec<(usize, usize, f64)> = (0..len)
        .flat_map(|x| (x + 1..len).map(move |y| (x, y, (1.0 + (y - x) as f64).powi(-3))))
        .collect();
    let f_oracle = |cutoff: f64| {
        (0..len)
            .map(|x| {
                pairs
                    .iter()
                    .filter(|&&(p, q, _)| (p == x || q == x) && (q - p) as f64 >= cutoff)
                    .map(|&(_, _, h)| h)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let c0_oracle = (0..len)
        .map(|x| {
            let mut s = 0.0;
            for y in 0..len {
                for &(p, q, h) in &pairs {
                    let z = [p, q];
                    if z.contains(&x) && z.contains(&y) {
                        s += h;
                    }
                }
            }
            s
        })
        .fold(0.0, f64::max);

    let mut worst = 0.0f64;
    for pattern in [CouplingPattern::Ising, CouplingPattern::Xy, CouplingPattern::Heisenberg] {
        let model = Interaction::power_law_two_body(&MetricSpace::chain(len)?, 1.0, 2.0, 1.0, &pattern)?;
        for cutoff in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 4.5] {
            worst = worst.max((model.empirical_f(cutoff) - f_oracle(cutoff)).abs());
        }
        worst = worst.max((model.compute_c0() - c0_oracle).abs());
    }
    let f2 = f_oracle(2.0);
    let values_ok = (f2 - 0.074074).abs() < 1e-6 && (c0_oracle - 0.648148).abs() < 1e-6;
    outcome(
        worst < 1e-12 && values_ok,
        format!("max deviation {worst:.3e}; f(2) = {f2:.6}, C0 = {c0_oracle:.6}"),
    )
}

fn lightcone_layer() -> Result<Outcome> {
    let mut identity = 0.0f64;
    for d in [1.0, 2.0, 3.0] {
        for k in 1..=40 {
            let e = exponents(d, d + 0.25 * f64::from(k))?;
            identity = identity.max((1.0 / e.eta - (1.0 + e.gamma)).abs());
        }
    }

    let system = chain(8, "xy", "")?;
    let params = ConeParameters::new(1.0, 2.0, 4.0, system.velocity)?;
    let front: Vec<FrontRecord> = (1..=100)
        .map(|k| {
            let t = f64::from(k);
            FrontRecord {
                t,
                r_star: Some(params.r_max(t)),
                epsilon: 0.0,
                saturated: false,
            }
        })
        .collect();
    let fit_err = (fit_power_law(&front)?.exponent - (1.0 + params.gamma)).abs();

    let DecayProfile::PowerLaw { c_prime, .. } = DecayProfile::fit_power_law(&system.interaction, 2.0)? else {
        unreachable!("power-law fit yields a power-law profile")
    };
    let consts = AsymptoticConstants {
        norm_a: 1.0,
        norm_b: 1.0,
        size_x: 1,
        growth_c: system.growth.c,
        c_prime,
        c2: 2.0 * c3_constant(&system.growth, true)?,
    };
    let ts: Vec<f64> = (10..=100).map(f64::from).collect();
    let rows = asymptotic_check(&params, &consts, &ts)?;
    let target = (params.lambda - 1.0) * params.velocity;
    let (mut rate1, mut rate3, mut ratio3) = (0.0f64, 0.0f64, 0.0f64);
    for w in rows.windows(2) {
        rate1 = rate1.max(((w[0].log_term1 - w[1].log_term1) / target - 1.0).abs());
        rate3 = rate3.max(((w[0].log_term3 - w[1].log_term3) / target - 1.0).abs());
        ratio3 = ratio3.max(((w[1].log_term3 - w[0].log_term3) + target).exp_m1().abs());
    }
    outcome(
        identity < 1e-12 && fit_err < 1e-6 && rate1 < 0.01 && rate3 < 0.01,
        format!(
            "identity {identity:.1e}, fit error {fit_err:.1e}, (lambda-1)v = {target:.4}, \
             rate deviation term1 {rate1:.2e} term3 {rate3:.2e} (term3 one-step ratio deviation {ratio3:.2e})"
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let extra = r#", "sweep": {"t_grid": [0, 0.5, 1, 2], "r_policies": [{"kind": "fixed", "value": 1.5}, {"kind": "kappa_rule"}]}, "bound": {"mode": "both"}"#;
    let system = chain(6, "xy", extra)?;
    let dir = tempfile::tempdir().map_err(|e| lrcone::Error::Io {
        path: std::env::temp_dir(),
        source: e,
    })?;
    let mut bytes = Vec::new();
    for (run, workers) in [(0, 1), (1, 1), (2, 4)] {
        let opts = SweepOptions {
            workers: Some(workers),
            ..SweepOptions::for_config(&system)
        };
        let table = sweep_table(&run_sweep(&system, &opts)?);
        let paths = table.write(&dir.path().join(format!("run{run}")), "sweep", &system.config.output.formats)?;
        bytes.push(std::fs::read(&paths[0]).expect("written above"));
    }
    let same = bytes.windows(2).all(|w| w[0] == w[1]);
    outcome(same && !bytes[0].is_empty(), format!("3 runs (workers 1, 1, 4), {} bytes each", bytes[0].len()))
}

fn main() {
    let lemma = lemma_setup();
    let criteria: Vec<Criterion> = vec![
        ("1 conjugation identity", Box::new(conjugation_identity)),
        ("2 finite-range domination", Box::new(finite_range_domination)),
        (
            "3 Duhamel integral domination",
            Box::new(|| duhamel_domination(lemma.as_ref().map_err(|e| lrcone::Error::NumericFailure(e.to_string()))?)),
        ),
        (
            "4 far-sum bound domination",
            Box::new(|| far_sum_domination(lemma.as_ref().map_err(|e| lrcone::Error::NumericFailure(e.to_string()))?)),
        ),
        ("5 three-term bound domination", Box::new(theorem_domination)),
        ("6 series bounds", Box::new(series)),
        ("7 decay and C0 oracles", Box::new(assumption_oracles)),
        ("8 light-cone formulas", Box::new(lightcone_layer)),
        ("9 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
