//! Dense complex matrix helpers on top of `faer`.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub use faer::c64;

/// Dense complex matrix.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMat {
        let entries: [[c64; 2]; 2] = match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        Mat::from_fn(2, 2, |i, j| entries[i][j])
    }
}

/// Kronecker product `a ⊗ b`, `a` being the most significant factor.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `ab - ba`.
pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b - b * a
}

/// Largest entrywise deviation from Hermiticity, `max |m - m†|`.
pub fn hermitian_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn anti_hermitian_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] + m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

fn max_abs(m: MatRef<'_, c64>) -> f64 {
    m.norm_max()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericFailure(format!("Hermitian eigenvalue solver: {e:?} (dim {})", m.nrows())))
}

/// Spectral norm (largest singular value).
///
/// Normal matrices that are Hermitian or anti-Hermitian up to rounding go
/// through the Hermitian eigenvalue solver, whose eigenvalue moduli are the
/// singular values; everything else goes through a singular value
/// decomposition.
pub fn spectral_norm(m: MatRef<'_, c64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-13 * scale;
    if hermitian_defect(m) <= tol {
        let ev = hermitian_eigenvalues(hermitian_part(m).as_ref())?;
        return Ok(ev.iter().fold(0.0, |acc: f64, e| acc.max(e.abs())));
    }
    if anti_hermitian_defect(m) <= tol {
        let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
            (I * m[(i, j)] + (I * m[(j, i)]).conj()) * 0.5
        });
        let ev = hermitian_eigenvalues(h.as_ref())?;
        return Ok(ev.iter().fold(0.0, |acc: f64, e| acc.max(e.abs())));
    }
    singular_norm(m)
}

/// Spectral norm from a full singular value computation, no shortcuts.
pub fn singular_norm(m: MatRef<'_, c64>) -> Result<f64> {
    let sv = m
        .singular_values()
        .map_err(|e| Error::NumericFailure(format!("singular value solver: {e:?} (dim {})", m.nrows())))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

/// Spectral norm by power iteration on `m† m`.
///
/// Meant for hot loops where an estimate converged to `tol` (relative) is
/// enough. Fails when `max_iter` iterations do not reach the tolerance.
pub fn spectral_norm_power(m: MatRef<'_, c64>, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.ncols();
    if n == 0 || max_abs(m) == 0.0 {
        return Ok(0.0);
    }
    // deterministic start with no special alignment to basis vectors
    let mut v = Mat::from_fn(n, 1, |i, _| c64::new(1.0 + 0.01 * (i as f64).sin(), 0.003 * i as f64));
    let nv = v.norm_l2();
    v = scaled(v.as_ref(), c64::new(1.0 / nv, 0.0));
    let mut sigma_sq = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let next = m.adjoint() * &w;
        let estimate = w.norm_l2().powi(2);
        let nn = next.norm_l2();
        if nn == 0.0 {
            return Ok(0.0);
        }
        if (estimate - sigma_sq).abs() <= tol * estimate {
            return Ok(estimate.sqrt());
        }
        sigma_sq = estimate;
        v = scaled(next.as_ref(), c64::new(1.0 / nn, 0.0));
    }
    Err(Error::NumericFailure(format!(
        "power iteration did not reach relative tolerance {tol} in {max_iter} iterations"
    )))
}

/// `k m`.
pub fn scaled(m: MatRef<'_, c64>, k: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * k)
}

/// `‖ab - ba‖`.
pub fn commutator_norm(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::invalid(format!(
            "commutator of {}x{} and {}x{} matrices",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    spectral_norm(commutator(a, b).as_ref())
}
