//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Recursion depth after which a subinterval is declared unconverged.
pub const MAX_DEPTH: u32 = 40;

/// Levels of bisection performed before the error test is trusted, so that a
/// coarse Simpson panel cannot accidentally agree with its halves.
const MIN_DEPTH: u32 = 3;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by adaptive
/// Simpson bisection with Richardson correction.
///
/// Fails with [`Error::NumericFailure`] if some subinterval still misses its
/// share of the tolerance at [`MAX_DEPTH`], or if `f` fails.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("quadrature tolerance {tol} must be positive")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    let mut evals = 3;
    let (value, err) = recurse(&mut f, a, b, fa, fm, fb, whole, tol, 0, &mut evals)?;
    Ok(Quadrature {
        value,
        error_estimate: err,
        evaluations: evals,
    })
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    *evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NumericFailure(format!(
            "adaptive Simpson did not converge on [{a}, {b}] (local error {:e}, tolerance {tol:e})",
            delta.abs() / 15.0
        )));
    }
    let (lv, le) = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, evals)?;
    let (rv, re) = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, evals)?;
    Ok((lv + rv, le + re))
}
