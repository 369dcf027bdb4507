//! The shell sum `S(r, R) = Σ_{k≥0} #{z : d(x,z) <= r+k+1} e^{-(r+k)/R}` and its
//! explicit majorant `C3 (r∨R)^D R e^{-r/R}`.
//!
//! The majorant is derived through the chain
//!
//! ```text
//! S <= e^{1/R} ∫_r^∞ g(y+1) e^{-y/R} dy                    (g increasing, R >= 1)
//!   <= e^{1/R} C R^{D+1} ∫_{r/R}^∞ (2+u)^D e^{-u} du       (y = Ru, 2 <= 2R)
//!    = e^{1/R} C R^{D+1} e^2 Γ(D+1, r/R + 2)
//!   <= e^{1/R} C R^{D+1} D! (3 + r/R)^D e^{-r/R}           (Γ(D+1,b) <= D!(1+b)^D e^{-b})
//!   <= e C D! 4^D (r∨R)^D R e^{-r/R}                        (r + 3R <= 4 (r∨R))
//! ```
//!
//! so `C3 = e C D! 4^D`. In the refined variant ball counts become unit-width
//! shell counts bounded by `C_s (1+ρ)^{D-1}`, and the same chain with `D - 1`
//! gives `C3 = e C_s (D-1)! 4^{D-1}` against `(r∨R)^{D-1}`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GrowthCertificate, MetricSpace};

/// `Γ(D+1, a) = ∫_a^∞ y^D e^{-y} dy = D! e^{-a} Σ_{k=0}^{D} a^k / k!`.
pub fn upper_incomplete_gamma(d: u32, a: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=d {
        term *= a / k as f64;
        sum += term;
    }
    factorial(d) * (-a).exp() * sum
}

pub(crate) fn factorial(d: u32) -> f64 {
    (1..=d).map(f64::from).product()
}

/// Where the supremum over `x` in the shell sum is taken.
#[derive(Debug, Clone, Copy)]
pub enum ShellOrigin<'a> {
    Site(usize),
    /// Supremum over the listed sites.
    Sites(&'a [usize]),
    /// Supremum over every site of the space.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellSumMode {
    Numeric,
    ClosedForm,
}

/// `S` evaluated exactly on the finite space.
///
/// Once the ball around `x` covers the whole space every further term is
/// `|Λ| e^{-(r+k)/R}`, and that geometric tail is summed in closed form. With
/// `refined`, shells `r+k < d(x,z) <= r+k+1` replace balls and the sum is finite.
pub fn shell_sum_numeric(
    space: &MetricSpace,
    origin: ShellOrigin<'_>,
    r: f64,
    cutoff: f64,
    refined: bool,
) -> Result<f64> {
    check_radii(r, cutoff)?;
    let per_site = |x: usize| -> Result<f64> {
        let ecc = space.eccentricity(x);
        let mut total = 0.0;
        let mut k = 0u32;
        loop {
            let inner = r + k as f64;
            let weight = (-inner / cutoff).exp();
            if refined {
                if inner >= ecc {
                    return Ok(total);
                }
                total += space.shell_count(x, inner, inner + 1.0)? as f64 * weight;
            } else if inner + 1.0 >= ecc {
                let n = space.len() as f64;
                return Ok(total + n * weight / -(-1.0 / cutoff).exp_m1());
            } else {
                total += space.ball_count(x, inner + 1.0)? as f64 * weight;
            }
            k += 1;
        }
    };
    match origin {
        ShellOrigin::Site(x) => {
            if x >= space.len() {
                return Err(Error::invalid(format!("site {x} is not in the lattice")));
            }
            per_site(x)
        }
        ShellOrigin::Sites(xs) => {
            if xs.is_empty() {
                return Err(Error::invalid("shell sum over an empty site set"));
            }
            xs.iter().map(|&x| {
                if x >= space.len() {
                    Err(Error::invalid(format!("site {x} is not in the lattice")))
                } else {
                    per_site(x)
                }
            })
            .try_fold(0.0, |acc, v| v.map(|v| f64::max(acc, v)))
        }
        ShellOrigin::All => space.sites().map(per_site).try_fold(0.0, |acc, v| v.map(|v| f64::max(acc, v))),
    }
}

fn check_radii(r: f64, cutoff: f64) -> Result<()> {
    if !(cutoff >= 1.0) {
        return Err(Error::invalid(format!("cutoff R = {cutoff} must be at least 1")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius r = {r} must be finite and nonnegative")));
    }
    Ok(())
}

/// Exponent of `(r∨R)` and the growth prefactor entering the chain.
fn chain_parameters(growth: &GrowthCertificate, refined: bool) -> Result<(u32, f64)> {
    let d = growth.integer_dimension().ok_or_else(|| {
        Error::invalid(format!(
            "closed-form constants need an integer dimension, got D = {}",
            growth.dimension
        ))
    })?;
    if refined {
        if d == 0 {
            return Err(Error::invalid("refined exponent needs D >= 1"));
        }
        let cs = growth
            .shell_c
            .ok_or_else(|| Error::invalid("refined exponent needs a shell certificate"))?;
        Ok((d - 1, cs))
    } else {
        Ok((d, growth.c))
    }
}

/// `C3` of the closed-form majorant.
pub fn c3_constant(growth: &GrowthCertificate, refined: bool) -> Result<f64> {
    let (d, c) = chain_parameters(growth, refined)?;
    Ok(E * c * factorial(d) * 4f64.powi(d as i32))
}

/// The exact incomplete-gamma link of the chain,
/// `e^{1/R} C R^{D+1} e^2 Γ(D+1, r/R + 2)`.
pub fn shell_sum_integral_bound(growth: &GrowthCertificate, r: f64, cutoff: f64, refined: bool) -> Result<f64> {
    check_radii(r, cutoff)?;
    let (d, c) = chain_parameters(growth, refined)?;
    let a = r / cutoff;
    Ok((1.0 / cutoff).exp() * c * cutoff.powi(d as i32 + 1) * E * E * upper_incomplete_gamma(d, a + 2.0))
}

/// `C3 (r∨R)^D R e^{-r/R}` (exponent `D - 1` when refined).
pub fn shell_sum_closed_form(growth: &GrowthCertificate, r: f64, cutoff: f64, refined: bool) -> Result<f64> {
    check_radii(r, cutoff)?;
    let (d, _) = chain_parameters(growth, refined)?;
    let c3 = c3_constant(growth, refined)?;
    Ok(c3 * r.max(cutoff).powi(d as i32) * cutoff * (-r / cutoff).exp())
}

/// Dispatch on [`ShellSumMode`].
pub fn shell_sum(
    space: &MetricSpace,
    growth: &GrowthCertificate,
    origin: ShellOrigin<'_>,
    r: f64,
    cutoff: f64,
    mode: ShellSumMode,
    refined: bool,
) -> Result<f64> {
    match mode {
        ShellSumMode::Numeric => shell_sum_numeric(space, origin, r, cutoff, refined),
        ShellSumMode::ClosedForm => shell_sum_closed_form(growth, r, cutoff, refined),
    }
}
