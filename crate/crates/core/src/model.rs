//! Interaction families `{h_Z}` and the quantities derived from them.

use std::collections::BTreeSet;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MetricSpace;
use crate::quantum::{hermitian_defect, kron, spectral_norm, c64, CMat, Pauli};

/// Hermiticity tolerance for local terms, relative to the largest entry.
const HERMITIAN_TOL: f64 = 1e-12;

/// A local Hamiltonian term `h_Z` stored over the sites of `Z` only.
#[derive(Debug, Clone)]
pub struct InteractionTerm {
    support: Vec<usize>,
    matrix: CMat,
    norm: f64,
    diameter: f64,
}

impl InteractionTerm {
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Cached `‖h_Z‖`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Cached `diam(Z)`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn contains(&self, x: usize) -> bool {
        self.support.binary_search(&x).is_ok()
    }

    pub fn intersects(&self, sites: &[usize]) -> bool {
        sites.iter().any(|&s| self.contains(s))
    }
}

/// Two-site coupling matrix used by the power-law builder, normalised to unit
/// operator norm before scaling.
#[derive(Debug, Clone)]
pub enum CouplingPattern {
    /// `σᶻ ⊗ σᶻ`.
    Ising,
    /// `(σˣ⊗σˣ + σʸ⊗σʸ) / 2`.
    Xy,
    /// `(σˣ⊗σˣ + σʸ⊗σʸ + σᶻ⊗σᶻ) / 3`.
    Heisenberg,
    /// Any Hermitian 4x4 matrix; rescaled to unit norm.
    Custom(CMat),
}

impl CouplingPattern {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingPattern::Ising => "ising",
            CouplingPattern::Xy => "xy",
            CouplingPattern::Heisenberg => "heisenberg",
            CouplingPattern::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ising" => Some(CouplingPattern::Ising),
            "xy" => Some(CouplingPattern::Xy),
            "heisenberg" => Some(CouplingPattern::Heisenberg),
            _ => None,
        }
    }

    /// Unit-norm two-qubit matrix.
    pub fn matrix(&self) -> Result<CMat> {
        let pp = |p: Pauli| {
            let m = p.matrix();
            kron(m.as_ref(), m.as_ref())
        };
        let raw = match self {
            CouplingPattern::Ising => pp(Pauli::Z),
            CouplingPattern::Xy => pp(Pauli::X) + pp(Pauli::Y),
            CouplingPattern::Heisenberg => pp(Pauli::X) + pp(Pauli::Y) + pp(Pauli::Z),
            CouplingPattern::Custom(m) => {
                if m.nrows() != 4 || m.ncols() != 4 {
                    return Err(Error::invalid("custom coupling pattern must be 4x4"));
                }
                m.clone()
            }
        };
        if hermitian_defect(raw.as_ref()) > HERMITIAN_TOL * raw.norm_max().max(1.0) {
            return Err(Error::invalid("coupling pattern is not Hermitian"));
        }
        let norm = spectral_norm(raw.as_ref())?;
        if norm == 0.0 {
            return Err(Error::invalid("coupling pattern is zero"));
        }
        Ok(Mat::from_fn(4, 4, |i, j| raw[(i, j)] / norm))
    }
}

/// A finite family `{h_Z}` on a metric space with per-site local dimensions.
#[derive(Debug, Clone)]
pub struct Interaction {
    space: MetricSpace,
    local_dims: Vec<usize>,
    terms: Vec<InteractionTerm>,
}

impl Interaction {
    /// Validates supports, dimensions and Hermiticity; supports must be
    /// strictly increasing and pairwise distinct.
    pub fn new(space: MetricSpace, local_dims: Vec<usize>, terms: Vec<(Vec<usize>, CMat)>) -> Result<Self> {
        if local_dims.len() != space.len() {
            return Err(Error::invalid(format!(
                "{} local dimensions given for {} sites",
                local_dims.len(),
                space.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let mut built = Vec::with_capacity(terms.len());
        for (support, matrix) in terms {
            if support.is_empty() {
                return Err(Error::invalid("interaction term with empty support"));
            }
            if support.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("support {support:?} is not strictly increasing")));
            }
            if let Some(&bad) = support.iter().find(|&&s| s >= space.len()) {
                return Err(Error::invalid(format!("support site {bad} is not in the lattice")));
            }
            if !seen.insert(support.clone()) {
                return Err(Error::invalid(format!("duplicate term on support {support:?}")));
            }
            let dim: usize = support.iter().map(|&s| local_dims[s]).product();
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(Error::invalid(format!(
                    "term on {support:?} is {}x{}, expected {dim}x{dim}",
                    matrix.nrows(),
                    matrix.ncols()
                )));
            }
            if hermitian_defect(matrix.as_ref()) > HERMITIAN_TOL * matrix.norm_max().max(1.0) {
                return Err(Error::invalid(format!("term on {support:?} is not Hermitian")));
            }
            let norm = spectral_norm(matrix.as_ref())?;
            let diameter = space.set_diameter(&support)?;
            built.push(InteractionTerm {
                support,
                matrix,
                norm,
                diameter,
            });
        }
        Ok(Self {
            space,
            local_dims,
            terms: built,
        })
    }

    /// One qubit per site and one term per unordered pair,
    /// `h_{x,y} = C1 [1 + d(x,y)]^{-(α+D)} P` with `‖P‖ = 1`.
    pub fn power_law_two_body(
        space: &MetricSpace,
        c1: f64,
        alpha: f64,
        dimension: f64,
        pattern: &CouplingPattern,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!("decay exponent α = {alpha} must be positive")));
        }
        if !(c1 > 0.0) {
            return Err(Error::invalid(format!("coupling strength C1 = {c1} must be positive")));
        }
        if !(dimension > 0.0) {
            return Err(Error::invalid(format!("dimension D = {dimension} must be positive")));
        }
        let base = pattern.matrix()?;
        let n = space.len();
        let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for x in 0..n {
            for y in x + 1..n {
                let scale = c1 * (1.0 + space.dist(x, y)).powf(-(alpha + dimension));
                terms.push((vec![x, y], Mat::from_fn(4, 4, |i, j| base[(i, j)] * scale)));
            }
        }
        Self::new(space.clone(), vec![2; n], terms)
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sup_x Σ_{Z ∋ x, keep(Z)} ‖h_Z‖`.
    fn sup_site_sum(&self, keep: impl Fn(&InteractionTerm) -> bool) -> f64 {
        self.space
            .sites()
            .map(|x| {
                self.terms
                    .iter()
                    .filter(|t| t.contains(x) && keep(t))
                    .map(|t| t.norm)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `sup_x Σ_{Z ∋ x, diam Z >= R} ‖h_Z‖`, the tightest admissible `f(R)`.
    pub fn empirical_f(&self, cutoff: f64) -> f64 {
        self.sup_site_sum(|t| t.diameter >= cutoff)
    }

    /// `sup_x Σ_{Z ∋ x} ‖h_Z‖`.
    pub fn max_site_norm_sum(&self) -> f64 {
        self.sup_site_sum(|_| true)
    }

    /// `C0 = sup_x Σ_y Σ_{Z ∋ x,y} ‖h_Z‖`, the `y = x` slice included.
    ///
    /// A term on `Z ∋ x` is counted once for every `y ∈ Z`, so the double sum
    /// collapses to `Σ_{Z ∋ x} |Z| ‖h_Z‖`.
    pub fn compute_c0(&self) -> f64 {
        self.space
            .sites()
            .map(|x| {
                self.terms
                    .iter()
                    .filter(|t| t.contains(x))
                    .map(|t| t.support.len() as f64 * t.norm)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Split into `(short, long)`: terms with `diam Z < R` and the rest.
    pub fn decompose(&self, cutoff: f64) -> Result<(Interaction, Interaction)> {
        if !(cutoff > 0.0) {
            return Err(Error::invalid(format!("cutoff R = {cutoff} must be positive")));
        }
        let (short, long): (Vec<_>, Vec<_>) = self.terms.iter().cloned().partition(|t| t.diameter < cutoff);
        let part = |terms| Interaction {
            space: self.space.clone(),
            local_dims: self.local_dims.clone(),
            terms,
        };
        Ok((part(short), part(long)))
    }

    /// Largest support diameter, 0 for an empty family.
    pub fn max_diameter(&self) -> f64 {
        self.terms.iter().map(|t| t.diameter).fold(0.0, f64::max)
    }

    /// Indices of the terms that `decompose(cutoff)` puts on the short side.
    pub fn short_term_indices(&self, cutoff: f64) -> Vec<usize> {
        (0..self.terms.len()).filter(|&i| self.terms[i].diameter < cutoff).collect()
    }
}

/// `sup_x Σ_{Z ∋ x} ‖h_Z^{(≥R)}‖ <= f(R)` for a long-range part produced by
/// [`Interaction::decompose`]. Equality is accepted up to a relative `1e-12`.
pub fn verify_sr_condition(long: &Interaction, profile: &DecayProfile, cutoff: f64) -> bool {
    long.max_site_norm_sum() <= profile.f(cutoff) * (1.0 + 1e-12)
}

/// A decreasing majorant `f(R)` of the tail norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayProfile {
    /// The exact tail of a finite family, stored as a step function.
    Empirical(EmpiricalTail),
    /// `f(R) = C' (1 + R)^{-α}`.
    PowerLaw { c_prime: f64, alpha: f64 },
}

impl DecayProfile {
    pub fn empirical(interaction: &Interaction) -> Self {
        DecayProfile::Empirical(EmpiricalTail::new(interaction))
    }

    pub fn power_law(c_prime: f64, alpha: f64) -> Result<Self> {
        if !(c_prime > 0.0) || !(alpha > 0.0) {
            return Err(Error::invalid("power-law profile needs C' > 0 and α > 0"));
        }
        Ok(DecayProfile::PowerLaw { c_prime, alpha })
    }

    /// Smallest `C'` such that `C' (1 + R)^{-α}` dominates the empirical tail.
    ///
    /// The tail is a left-continuous step function that drops just after
    /// each realised diameter, so the binding points are the diameters.
    pub fn fit_power_law(interaction: &Interaction, alpha: f64) -> Result<Self> {
        let tail = EmpiricalTail::new(interaction);
        let c_prime = tail
            .steps
            .iter()
            .map(|&(d, v)| v * (1.0 + d).powf(alpha))
            .fold(0.0, f64::max);
        if c_prime == 0.0 {
            return Self::power_law(f64::MIN_POSITIVE, alpha);
        }
        Self::power_law(c_prime, alpha)
    }

    pub fn f(&self, cutoff: f64) -> f64 {
        match self {
            DecayProfile::Empirical(tail) => tail.f(cutoff),
            DecayProfile::PowerLaw { c_prime, alpha } => c_prime * (1.0 + cutoff.max(0.0)).powf(-alpha),
        }
    }

    /// True when `f(R) >= empirical_f(R)` on every grid point.
    pub fn dominates(&self, interaction: &Interaction, grid: &[f64]) -> bool {
        grid.iter()
            .all(|&r| self.f(r) * (1.0 + 1e-12) >= interaction.empirical_f(r))
    }
}

/// `empirical_f` tabulated at the realised diameters `d_1 < ... < d_m`.
/// `f(R)` is the value at the smallest `d_i >= R`, or 0 past `d_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    steps: Vec<(f64, f64)>,
}

impl EmpiricalTail {
    pub fn new(interaction: &Interaction) -> Self {
        let mut diam: Vec<f64> = interaction.terms().iter().map(|t| t.diameter()).collect();
        diam.sort_by(f64::total_cmp);
        diam.dedup();
        let steps = diam.into_iter().map(|d| (d, interaction.empirical_f(d))).collect();
        Self { steps }
    }

    pub fn f(&self, cutoff: f64) -> f64 {
        self.steps
            .iter()
            .find(|&&(d, _)| d >= cutoff)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

/// Build a term matrix from `(re, im)` rows.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrix rows must all have the same length as the row count"));
    }
    Ok(Mat::from_fn(n, n, |i, j| c64::new(rows[i][j][0], rows[i][j][1])))
}
