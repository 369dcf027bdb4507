//! Duhamel-type comparison between full and truncated dynamics, evaluated by
//! exact simulation of the truncated evolution and quadrature over `s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Interaction;
use crate::quadrature::adaptive_simpson;
use crate::quantum::{commutator_norm, embed, CMat, HilbertSpace, Observable, SpectralHamiltonian};

/// `A` and the long-range terms in the eigenbasis of `H^{(<R)}`, with the
/// terms split by whether their support meets the `r`-neighbourhood of `X`.
pub struct TruncatedFrame<'a> {
    short: &'a SpectralHamiltonian,
    a_eig: CMat,
    near: Vec<CMat>,
    far: Vec<CMat>,
}

impl<'a> TruncatedFrame<'a> {
    pub fn new(
        short: &'a SpectralHamiltonian,
        long: &Interaction,
        hilbert: &HilbertSpace,
        a: &Observable,
        r: f64,
    ) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("r must be positive, got {r}")));
        }
        let neighbourhood = long.space().neighborhood(a.support(), r)?;
        let a_eig = short.to_eigenbasis(&a.embed(hilbert)?)?;
        let mut near = Vec::new();
        let mut far = Vec::new();
        for term in long.terms() {
            let h = short.to_eigenbasis(&embed(term.support(), term.matrix(), hilbert)?)?;
            if term.intersects(&neighbourhood) {
                near.push(h);
            } else {
                far.push(h);
            }
        }
        Ok(Self { short, a_eig, near, far })
    }

    fn sum(&self, terms: &[CMat], t: f64) -> Result<f64> {
        if terms.is_empty() {
            return Ok(0.0);
        }
        let at = self.short.evolve_eigenbasis(&self.a_eig, t);
        terms.iter().map(|h| commutator_norm(at.as_ref(), h.as_ref())).sum()
    }

    /// `Σ_{Z∩X̃_r≠∅} ‖[τ_t^{(<R)}(A), h_Z^{(≥R)}]‖`.
    pub fn near_sum(&self, t: f64) -> Result<f64> {
        self.sum(&self.near, t)
    }

    /// `Σ_{Z∩X̃_r=∅} ‖[τ_t^{(<R)}(A), h_Z^{(≥R)}]‖`.
    pub fn far_sum(&self, t: f64) -> Result<f64> {
        self.sum(&self.far, t)
    }

    pub fn near_count(&self) -> usize {
        self.near.len()
    }

    pub fn far_count(&self) -> usize {
        self.far.len()
    }
}

/// The three pieces of the right-hand side and their combination
/// `truncated + 2‖B‖ (near + far)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Rhs {
    /// `‖[τ_t^{(<R)}(A), B]‖`.
    pub truncated: f64,
    /// `∫_0^t Σ_{Z∩X̃_r≠∅} ‖[τ_{t-s}^{(<R)}(A), h_Z]‖ ds`.
    pub near_integral: f64,
    /// Same integral over the terms with `Z∩X̃_r=∅`.
    pub far_integral: f64,
    pub total: f64,
    /// Sum of the quadrature error estimates, already scaled by `2‖B‖`.
    pub quadrature_error: f64,
}

/// Evaluate `‖[τ_t^{(<R)}(A),B]‖ + 2‖B‖ ∫_0^t Σ_Z ‖[τ_{t-s}^{(<R)}(A), h_Z^{(≥R)}]‖ ds`
/// with the `Z` sum split at the `r`-neighbourhood of `supp A`.
///
/// Each integral is computed to absolute tolerance `tol`.
#[allow(clippy::too_many_arguments)]
pub fn lemma31_rhs(
    short: &SpectralHamiltonian,
    long: &Interaction,
    hilbert: &HilbertSpace,
    a: &Observable,
    b: &Observable,
    r: f64,
    t: f64,
    tol: f64,
) -> Result<Lemma31Rhs> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
    }
    let frame = TruncatedFrame::new(short, long, hilbert, a, r)?;
    let b_eig = short.to_eigenbasis(&b.embed(hilbert)?)?;
    let truncated = short.commutator_norm_eigenbasis(&frame.a_eig, &b_eig, t)?;
    // substitute u = t - s; the integral over [0, t] is unchanged
    let near = if frame.near.is_empty() {
        None
    } else {
        Some(adaptive_simpson(|u| frame.near_sum(u), 0.0, t, tol)?)
    };
    let far = if frame.far.is_empty() {
        None
    } else {
        Some(adaptive_simpson(|u| frame.far_sum(u), 0.0, t, tol)?)
    };
    let near_integral = near.map_or(0.0, |q| q.value);
    let far_integral = far.map_or(0.0, |q| q.value);
    let err = near.map_or(0.0, |q| q.error_estimate) + far.map_or(0.0, |q| q.error_estimate);
    let scale = 2.0 * b.norm();
    Ok(Lemma31Rhs {
        truncated,
        near_integral,
        far_integral,
        total: truncated + scale * (near_integral + far_integral),
        quadrature_error: scale * err,
    })
}

/// Brute-force `Σ_{Z∩X̃_r=∅} ‖[τ_t^{(<R)}(A), h_Z^{(≥R)}]‖`.
pub fn far_commutator_sum(
    short: &SpectralHamiltonian,
    long: &Interaction,
    hilbert: &HilbertSpace,
    a: &Observable,
    r: f64,
    t: f64,
) -> Result<f64> {
    TruncatedFrame::new(short, long, hilbert, a, r)?.far_sum(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricSpace;
    use crate::model::CouplingPattern;
    use crate::quantum::Pauli;

    struct Setup {
        full: SpectralHamiltonian,
        short: SpectralHamiltonian,
        long: Interaction,
        hilbert: HilbertSpace,
    }

    fn setup(len: usize, cutoff: f64, pattern: CouplingPattern) -> Setup {
        let space = MetricSpace::chain(len).unwrap();
        let inter = Interaction::power_law_two_body(&space, 1.0, 2.0, 1.0, &pattern).unwrap();
        let hilbert = HilbertSpace::qubits(len, 4096).unwrap();
        let (short, long) = inter.decompose(cutoff).unwrap();
        Setup {
            full: SpectralHamiltonian::assemble(&inter, &hilbert).unwrap(),
            short: SpectralHamiltonian::assemble(&short, &hilbert).unwrap(),
            long,
            hilbert,
        }
    }

    #[test]
    fn time_zero_is_bare_commutator() {
        let s = setup(4, 1.5, CouplingPattern::Xy);
        let a = Observable::pauli(0, Pauli::X);
        for (site, p, want) in [(0, Pauli::Z, 2.0), (3, Pauli::Z, 0.0), (0, Pauli::X, 0.0)] {
            let b = Observable::pauli(site, p);
            let rhs = lemma31_rhs(&s.short, &s.long, &s.hilbert, &a, &b, 1.0, 0.0, 1e-6).unwrap();
            assert!((rhs.total - want).abs() < 1e-12);
            assert_eq!(rhs.near_integral, 0.0);
            assert_eq!(rhs.far_integral, 0.0);
        }
    }

    #[test]
    fn empty_long_part_gives_truncated_norm() {
        let s = setup(4, 10.0, CouplingPattern::Xy);
        assert!(s.long.is_empty());
        let a = Observable::pauli(0, Pauli::X);
        let b = Observable::pauli(3, Pauli::Z);
        let rhs = lemma31_rhs(&s.short, &s.long, &s.hilbert, &a, &b, 1.0, 0.8, 1e-6).unwrap();
        let direct = commutator_norm(
            s.short.evolve(&a.embed(&s.hilbert).unwrap(), 0.8).unwrap().as_ref(),
            b.embed(&s.hilbert).unwrap().as_ref(),
        )
        .unwrap();
        assert!((rhs.total - direct).abs() < 1e-12);
        assert!(rhs.truncated > 0.0);
    }

    #[test]
    fn dominates_full_dynamics_on_six_sites() {
        let s = setup(6, 1.5, CouplingPattern::Xy);
        let a = Observable::pauli(0, Pauli::X);
        let a_full = a.embed(&s.hilbert).unwrap();
        for site in 1..6 {
            let b = Observable::pauli(site, Pauli::Z);
            let measured = commutator_norm(
                s.full.evolve(&a_full, 1.0).unwrap().as_ref(),
                b.embed(&s.hilbert).unwrap().as_ref(),
            )
            .unwrap();
            let rhs = lemma31_rhs(&s.short, &s.long, &s.hilbert, &a, &b, 2.0, 1.0, 1e-6).unwrap();
            assert!(measured <= rhs.total + 1e-5, "site {site}: {measured} > {}", rhs.total);
        }
    }

    #[test]
    fn neighbourhood_split() {
        let s = setup(6, 1.5, CouplingPattern::Ising);
        let a = Observable::pauli(0, Pauli::X);
        let frame = TruncatedFrame::new(&s.short, &s.long, &s.hilbert, &a, 2.0).unwrap();
        // long terms have diameter >= 2; X̃_2 = {0,1,2}; terms inside {3,4,5} with diameter >= 2: (3,5)
        assert_eq!(frame.far_count(), 1);
        assert_eq!(frame.near_count() + frame.far_count(), s.long.terms().len());
        // A commutes with everything away from site 0
        assert!(frame.far_sum(0.0).unwrap() < 1e-14);
        assert!(TruncatedFrame::new(&s.short, &s.long, &s.hilbert, &a, 0.0).is_err());
    }
}
