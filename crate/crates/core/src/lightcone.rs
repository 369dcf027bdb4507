//! Power-law light cone: exponents, the analytic front `r_max(t)`, its group
//! velocity, the large-`t` behaviour of the substituted bound, and empirical
//! fronts extracted from simulated commutator norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `κ = (D+1)/(α+1)`, `η = (α-D)/(α+1)`, `γ = (D+1)/(α-D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub kappa: f64,
    pub eta: f64,
    pub gamma: f64,
    pub kappa_below_one: bool,
}

pub fn exponents(dimension: f64, alpha: f64) -> Result<Exponents> {
    if !(dimension > 0.0 && dimension.is_finite()) {
        return Err(Error::invalid(format!("dimension {dimension} must be positive")));
    }
    if !(alpha > dimension && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "the light cone needs alpha > D, got alpha = {alpha}, D = {dimension}"
        )));
    }
    let kappa = (dimension + 1.0) / (alpha + 1.0);
    Ok(Exponents {
        kappa,
        eta: (alpha - dimension) / (alpha + 1.0),
        gamma: (dimension + 1.0) / (alpha - dimension),
        kappa_below_one: kappa < 1.0,
    })
}

/// `(λ v t)^{1/η}`.
pub fn r_max(t: f64, lambda: f64, velocity: f64, eta: f64) -> f64 {
    (lambda * velocity * t).powf(1.0 / eta)
}

/// Exact `d r_max / dt = (1+γ) (λv)^{1/η} t^γ`.
pub fn v_g(t: f64, lambda: f64, velocity: f64, eta: f64, gamma: f64) -> f64 {
    (1.0 + gamma) * v_g_paper(t, lambda, velocity, eta, gamma)
}

/// `(λv)^{1/η} t^γ`, the group velocity without the `(1+γ)` factor of the
/// derivative. Kept for side-by-side reporting.
pub fn v_g_paper(t: f64, lambda: f64, velocity: f64, eta: f64, gamma: f64) -> f64 {
    (lambda * velocity).powf(1.0 / eta) * t.powf(gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParameters {
    pub dimension: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub eta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub velocity: f64,
}

impl ConeParameters {
    pub fn new(dimension: f64, alpha: f64, lambda: f64, velocity: f64) -> Result<Self> {
        let e = exponents(dimension, alpha)?;
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must exceed 1, got {lambda}")));
        }
        if !(velocity > 0.0 && velocity.is_finite()) {
            return Err(Error::invalid(format!("velocity must be positive, got {velocity}")));
        }
        Ok(Self {
            dimension,
            alpha,
            kappa: e.kappa,
            eta: e.eta,
            gamma: e.gamma,
            lambda,
            velocity,
        })
    }

    pub fn r_max(&self, t: f64) -> f64 {
        r_max(t, self.lambda, self.velocity, self.eta)
    }

    pub fn v_g(&self, t: f64) -> f64 {
        v_g(t, self.lambda, self.velocity, self.eta, self.gamma)
    }

    pub fn v_g_paper(&self, t: f64) -> f64 {
        v_g_paper(t, self.lambda, self.velocity, self.eta, self.gamma)
    }

    /// `R = max(1, r^κ)`.
    pub fn cutoff_for(&self, r: f64) -> f64 {
        r.powf(self.kappa).max(1.0)
    }
}

/// Constants entering the bound after the substitution `r = r_max(t)`,
/// `R = r^κ`, with the decay profile `f(R) = C' R^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub norm_a: f64,
    pub norm_b: f64,
    pub size_x: usize,
    /// Growth constant `C` of `g(r) = C (1+r)^D`.
    pub growth_c: f64,
    /// `C'` of the power-law profile.
    pub c_prime: f64,
    /// `C2` of the third term, shell (`D-1`) form.
    pub c2: f64,
}

/// Substituted terms at one time. Terms 1 and 3 are kept as logarithms since
/// they underflow long before `t = 100`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub t: f64,
    pub r_max: f64,
    pub cutoff: f64,
    /// `ln(2‖A‖‖B‖|X|) - (λ-1) v t`.
    pub log_term1: f64,
    /// `ln 2‖A‖‖B‖|X| + v t - r/R` evaluated directly at `r = r_max`, `R = r^κ`.
    pub log_term1_direct: f64,
    /// `4‖A‖‖B‖|X| C 2^D C' / (λ v)`.
    pub term2: f64,
    /// `4‖A‖‖B‖|X| t C (1+r)^D C' R^{-α}` at `r = r_max`, `R = r^κ`.
    pub term2_direct: f64,
    /// `ln(2 C2 C' ‖A‖‖B‖|X|^2 / ((λv)^2 t)) - (λ-1) v t`.
    pub log_term3: f64,
}

/// `4‖A‖‖B‖|X| C 2^D C' / (λ v)`, the large-`t` value of the second term.
pub fn term2_limit(params: &ConeParameters, c: &AsymptoticConstants) -> f64 {
    4.0 * c.norm_a * c.norm_b * c.size_x as f64 * c.growth_c * 2f64.powf(params.dimension) * c.c_prime
        / (params.lambda * params.velocity)
}

/// Evaluate the substituted terms on `ts` (all `t > 0`, and `r_max(t) >= 1`
/// for the `2^D` majorant to apply).
pub fn asymptotic_check(params: &ConeParameters, c: &AsymptoticConstants, ts: &[f64]) -> Result<Vec<AsymptoticRow>> {
    let x = c.size_x as f64;
    let pref = 2.0 * c.norm_a * c.norm_b * x;
    let lv = params.lambda * params.velocity;
    ts.iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::invalid(format!("asymptotic check needs t > 0, got {t}")));
            }
            let r = params.r_max(t);
            let cutoff = r.powf(params.kappa);
            let decay = -(params.lambda - 1.0) * params.velocity * t;
            Ok(AsymptoticRow {
                t,
                r_max: r,
                cutoff,
                log_term1: pref.ln() + decay,
                log_term1_direct: pref.ln() + params.velocity * t - r / cutoff,
                term2: term2_limit(params, c),
                term2_direct: 2.0 * pref * t * c.growth_c * (1.0 + r).powf(params.dimension) * c.c_prime
                    * cutoff.powf(-params.alpha),
                log_term3: (2.0 * c.c2 * c.c_prime * c.norm_a * c.norm_b * x * x / (lv * lv * t)).ln() + decay,
            })
        })
        .collect()
}

/// Per-unit-time decay rates `-(ln term(t_{i+1}) - ln term(t_i)) / (t_{i+1} - t_i)`
/// of terms 1 and 3 between consecutive rows, keyed by the left time.
pub fn decay_rates(rows: &[AsymptoticRow]) -> Vec<(f64, f64, f64)> {
    rows.windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            (
                w[0].t,
                (w[0].log_term1 - w[1].log_term1) / dt,
                (w[0].log_term3 - w[1].log_term3) / dt,
            )
        })
        .collect()
}

/// Empirical front radius at one time. `r_star = None` means no grid radius
/// is quiet, i.e. the front lies beyond the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontRecord {
    pub t: f64,
    pub r_star: Option<f64>,
    pub epsilon: f64,
    /// `r_star` sits on the first or last grid radius.
    #[serde(skip)]
    pub saturated: bool,
}

/// Least-squares fit of `ln r_star = ln prefactor + exponent · ln t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points_used: usize,
}

fn sorted_distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `r_star(t)`: smallest grid `r` with `norm(t, r') < ε` for every grid
/// `r' >= r`. Several records at the same `(t, r)` are combined by maximum.
pub fn empirical_front(records: &[(f64, f64, f64)], epsilon: f64) -> Result<Vec<FrontRecord>> {
    if records.is_empty() {
        return Err(Error::invalid("front extraction needs a nonempty record table"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("front threshold must be positive, got {epsilon}")));
    }
    let ts = sorted_distinct(records.iter().map(|r| r.0));
    let rs = sorted_distinct(records.iter().map(|r| r.1));
    let mut table = vec![None::<f64>; ts.len() * rs.len()];
    for &(t, r, norm) in records {
        let i = ts.binary_search_by(|x| x.total_cmp(&t)).expect("t is on the grid");
        let j = rs.binary_search_by(|x| x.total_cmp(&r)).expect("r is on the grid");
        let cell = &mut table[i * rs.len() + j];
        *cell = Some(cell.map_or(norm, |c| c.max(norm)));
    }
    if table.iter().any(Option::is_none) {
        return Err(Error::invalid("records do not cover a rectangular (t, r) grid"));
    }
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let row = &table[i * rs.len()..(i + 1) * rs.len()];
            let quiet_from = row.iter().rposition(|n| n.unwrap() >= epsilon).map_or(0, |j| j + 1);
            let r_star = rs.get(quiet_from).copied();
            FrontRecord {
                t,
                r_star,
                epsilon,
                saturated: rs.len() > 1 && (quiet_from == 0 || quiet_from == rs.len() - 1),
            }
        })
        .collect())
}

/// Fit over rows with finite, positive `r_star`, positive `t` and no
/// saturation.
pub fn fit_power_law(front: &[FrontRecord]) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = front
        .iter()
        .filter(|f| !f.saturated && f.t > 0.0)
        .filter_map(|f| f.r_star.filter(|&r| r > 0.0).map(|r| (f.t.ln(), r.ln())))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return Err(Error::invalid("power-law fit needs at least two usable rows at distinct times"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (sse / n).sqrt(),
        points_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(t: f64, r: f64) -> FrontRecord {
        FrontRecord {
            t,
            r_star: Some(r),
            epsilon: 1e-3,
            saturated: false,
        }
    }

    #[test]
    fn exponent_examples() {
        let e = exponents(1.0, 2.0).unwrap();
        assert!((e.kappa - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.eta - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.gamma - 2.0).abs() < 1e-15);
        assert!(e.kappa_below_one);
        let e = exponents(1.0, 3.0).unwrap();
        assert_eq!((e.kappa, e.eta, e.gamma), (0.5, 0.5, 1.0));
        assert!(matches!(exponents(1.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(exponents(2.0, 1.5).is_err());
    }

    #[test]
    fn front_radius_example() {
        let r = r_max(1.0, 2.0, 3.52372, 1.0 / 3.0);
        assert!((r - 7.04744f64.powi(3)).abs() < 1e-9);
        assert!((r - 350.03).abs() < 0.01);
    }

    #[test]
    fn group_velocity_forms() {
        let p = ConeParameters::new(1.0, 2.0, 4.0, 3.0).unwrap();
        for t in [0.5, 1.0, 3.0, 10.0] {
            assert!((p.v_g(t) / p.r_max(t) - (1.0 + p.gamma) / t).abs() < 1e-12 / t);
            assert!((p.v_g(t) - 3.0 * p.v_g_paper(t)).abs() < 1e-9 * p.v_g(t));
            let h = 1e-5 * t;
            let fd = (p.r_max(t + h) - p.r_max(t - h)) / (2.0 * h);
            assert!((fd - p.v_g(t)).abs() < 1e-6 * p.v_g(t));
        }
    }

    #[test]
    fn parameters_validate() {
        assert!(ConeParameters::new(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(ConeParameters::new(1.0, 2.0, 4.0, 0.0).is_err());
        let p = ConeParameters::new(1.0, 2.0, 4.0, 1.0).unwrap();
        assert_eq!(p.cutoff_for(0.5), 1.0);
        assert!((p.cutoff_for(8.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_front_fit_recovers_exponent() {
        let p = ConeParameters::new(1.0, 2.0, 4.0, 3.52372).unwrap();
        let front: Vec<_> = (1..=100).map(|k| rec(k as f64, p.r_max(k as f64))).collect();
        let fit = fit_power_law(&front).unwrap();
        assert!((fit.exponent - (1.0 + p.gamma)).abs() < 1e-9);
        assert!((fit.prefactor - (4.0 * 3.52372f64).powf(3.0)).abs() < 1e-6 * fit.prefactor);
        assert!(fit.residual < 1e-9);
        assert_eq!(fit.points_used, 100);
    }

    #[test]
    fn two_point_fit() {
        let fit = fit_power_law(&[rec(1.0, 1.0), rec(2.0, 4.0)]).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-15);
        assert!((fit.prefactor - 1.0).abs() < 1e-15);
        assert!(fit_power_law(&[rec(1.0, 1.0)]).is_err());
        let mut inf = rec(3.0, 1.0);
        inf.r_star = None;
        let fit = fit_power_law(&[rec(1.0, 1.0), rec(2.0, 4.0), inf]).unwrap();
        assert_eq!(fit.points_used, 2);
    }

    #[test]
    fn front_extraction() {
        let mut records = Vec::new();
        for t in [0.0, 1.0, 2.0] {
            for r in [1.0, 2.0, 3.0, 4.0] {
                records.push((t, r, if r <= t + 1.0 { 1.0 } else { 1e-6 }));
            }
        }
        let front = empirical_front(&records, 1e-3).unwrap();
        let stars: Vec<_> = front.iter().map(|f| f.r_star).collect();
        assert_eq!(stars, vec![Some(2.0), Some(3.0), Some(4.0)]);
        assert!(front[2].saturated && !front[1].saturated);

        let quiet: Vec<_> = records.iter().map(|&(t, r, _)| (t, r, 0.0)).collect();
        assert!(empirical_front(&quiet, 1e-3).unwrap().iter().all(|f| f.r_star == Some(1.0)));
        let loud: Vec<_> = records.iter().map(|&(t, r, _)| (t, r, 1.0)).collect();
        assert!(empirical_front(&loud, 1e-3).unwrap().iter().all(|f| f.r_star.is_none()));

        assert!(empirical_front(&[], 1e-3).is_err());
        assert!(empirical_front(&records, 0.0).is_err());
        assert!(empirical_front(&records[..5], 1e-3).is_err());
    }

    #[test]
    fn asymptotic_rates() {
        let p = ConeParameters::new(1.0, 2.0, 4.0, 4.2).unwrap();
        let c = AsymptoticConstants {
            norm_a: 1.0,
            norm_b: 1.0,
            size_x: 1,
            growth_c: 1.5,
            c_prime: 1.0,
            c2: 50.0,
        };
        let ts: Vec<f64> = (1..=100).map(f64::from).collect();
        let rows = asymptotic_check(&p, &c, &ts).unwrap();
        let target = (p.lambda - 1.0) * p.velocity;
        for &(t, r1, r3) in &decay_rates(&rows) {
            assert!((r1 - target).abs() < 1e-9 * target);
            if t >= 10.0 {
                assert!((r3 - target).abs() < 0.01 * target, "t={t}: {r3} vs {target}");
            }
        }
        for row in &rows {
            assert!((row.log_term1 - row.log_term1_direct).abs() < 1e-6 * row.log_term1.abs());
            assert!(row.term2_direct <= row.term2 * (1.0 + 1e-12));
        }
        // (1+r)^D / (2r)^D -> 2^{-D} as the front moves out
        let last = rows.last().unwrap();
        assert!((2.0 * last.term2_direct / last.term2 - 1.0).abs() < 0.01);

        let p8 = ConeParameters::new(1.0, 2.0, 8.0, 4.2).unwrap();
        assert!((term2_limit(&p8, &c) * 2.0 - term2_limit(&p, &c)).abs() < 1e-12);
        assert!(asymptotic_check(&p, &c, &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn exponent_identity(d in 0.5f64..4.0, gap in 0.5f64..10.0) {
            let e = exponents(d, d + gap).unwrap();
            prop_assert!((1.0 / e.eta - (1.0 + e.gamma)).abs() < 1e-12 * (1.0 + e.gamma));
            prop_assert!(e.kappa < 1.0 && e.kappa_below_one);
        }

        #[test]
        fn front_increasing_and_convex(lambda in 1.1f64..10.0, v in 0.1f64..10.0, gap in 0.5f64..6.0) {
            let p = ConeParameters::new(1.0, 1.0 + gap, lambda, v).unwrap();
            let ts: Vec<f64> = (1..40).map(|k| k as f64 * 0.25).collect();
            let rs: Vec<f64> = ts.iter().map(|&t| p.r_max(t)).collect();
            for w in rs.windows(3) {
                prop_assert!(w[1] > w[0]);
                prop_assert!(w[2] - 2.0 * w[1] + w[0] > 0.0);
            }
        }

        #[test]
        fn larger_threshold_shrinks_front(norms in proptest::collection::vec(0.0f64..1.0, 12), e1 in 0.01f64..0.5, de in 0.0f64..0.5) {
            let records: Vec<_> = norms.iter().enumerate()
                .map(|(k, &n)| ((k / 4) as f64, (k % 4) as f64, n)).collect();
            let lo = empirical_front(&records, e1).unwrap();
            let hi = empirical_front(&records, e1 + de).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                let ra = a.r_star.unwrap_or(f64::INFINITY);
                let rb = b.r_star.unwrap_or(f64::INFINITY);
                prop_assert!(rb <= ra);
            }
        }
    }
}
