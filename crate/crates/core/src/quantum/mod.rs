//! Exact finite-dimensional operator algebra.
//!
//! Every Hamiltonian is diagonalised once; Heisenberg evolution at any time is
//! then a phase twist in the eigenbasis. The full-space basis is the tensor
//! product of the local spaces in site-index order, site 0 most significant.

mod linalg;

use faer::Mat;

pub use linalg::{
    c64, commutator, commutator_norm, hermitian_defect, hermitian_eigenvalues, hermitian_part, kron,
    scaled, singular_norm, spectral_norm, spectral_norm_power, CMat, Pauli, I, ONE, ZERO,
};

use crate::error::{Error, Result};
use crate::model::Interaction;

/// Default cap on the full Hilbert-space dimension (12 qubits).
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Tensor product of per-site spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    total: usize,
    strides: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::invalid("local dimensions must be at least 1"));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or_else(|| Error::ResourceLimit(format!("Hilbert dimension exceeds cap {cap}")))?;
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self { dims, total, strides })
    }

    /// `n` qubits.
    pub fn qubits(n: usize, cap: usize) -> Result<Self> {
        Self::new(vec![2; n], cap)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn support_dim(&self, support: &[usize]) -> usize {
        support.iter().map(|&s| self.dims[s]).product()
    }
}

/// An operator on the sites of `support`, in ascending site order.
#[derive(Debug, Clone)]
pub struct Observable {
    support: Vec<usize>,
    matrix: CMat,
    norm: f64,
}

impl Observable {
    /// `support` must be nonempty and strictly increasing; the matrix factors
    /// follow the same order.
    pub fn new(support: Vec<usize>, matrix: CMat) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("observable support is empty"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("observable support {support:?} is not strictly increasing")));
        }
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("observable matrix is not square"));
        }
        let norm = spectral_norm(matrix.as_ref())?;
        Ok(Self { support, matrix, norm })
    }

    pub fn pauli(site: usize, p: Pauli) -> Self {
        Self::new(vec![site], p.matrix()).expect("Pauli matrices are valid observables")
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Full-space matrix `A ⊗ I`.
    pub fn embed(&self, space: &HilbertSpace) -> Result<CMat> {
        embed(&self.support, &self.matrix, space)
    }
}

/// Embed an operator on `support` into the full space as `A ⊗ I`.
pub fn embed(support: &[usize], matrix: &CMat, space: &HilbertSpace) -> Result<CMat> {
    if let Some(&bad) = support.iter().find(|&&s| s >= space.num_sites()) {
        return Err(Error::invalid(format!("site {bad} is outside the Hilbert space")));
    }
    let sub = space.support_dim(support);
    if matrix.nrows() != sub || matrix.ncols() != sub {
        return Err(Error::invalid(format!(
            "operator is {}x{} but its support has dimension {sub}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = space.dim();
    // offset[σ]: full-index displacement of support configuration σ
    let offsets: Vec<usize> = (0..sub)
        .map(|mut sigma| {
            let mut off = 0;
            for &s in support.iter().rev() {
                let d = space.dims[s];
                off += (sigma % d) * space.strides[s];
                sigma /= d;
            }
            off
        })
        .collect();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        let mut sub_i = 0;
        let mut base = i;
        for &s in support {
            let digit = (i / space.strides[s]) % space.dims[s];
            sub_i = sub_i * space.dims[s] + digit;
            base -= digit * space.strides[s];
        }
        for (sigma, &off) in offsets.iter().enumerate() {
            out[(i, base + off)] = matrix[(sub_i, sigma)];
        }
    }
    Ok(out)
}

/// A Hermitian matrix together with its eigendecomposition `H = V Λ V†`.
#[derive(Debug, Clone)]
pub struct SpectralHamiltonian {
    matrix: CMat,
    eigenvalues: Vec<f64>,
    vectors: CMat,
    symmetrization_defect: f64,
    reconstruction_error: f64,
    orthonormality_error: f64,
}

/// Relative tolerance for the decomposition checks.
const DECOMPOSITION_TOL: f64 = 1e-10;

impl SpectralHamiltonian {
    /// Symmetrise `(H + H†)/2`, diagonalise and validate the decomposition.
    pub fn from_matrix(h: CMat) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::invalid("Hamiltonian matrix is not square"));
        }
        let symmetrization_defect = hermitian_defect(h.as_ref());
        let matrix = hermitian_part(h.as_ref());
        let n = matrix.nrows();
        let evd = matrix
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::NumericFailure(format!("eigensolver did not converge: {e:?} (dim {n})")))?;
        let eigenvalues: Vec<f64> = (0..n).map(|k| evd.S().column_vector()[k].re).collect();
        let vectors = evd.U().to_owned();

        let scale = eigenvalues.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
        let vl = Mat::from_fn(n, n, |i, j| vectors[(i, j)] * eigenvalues[j]);
        let reconstruction_error = (&matrix - &vl * vectors.adjoint()).norm_l2();
        let orthonormality_error = (vectors.adjoint() * &vectors - CMat::identity(n, n)).norm_l2();
        if reconstruction_error > DECOMPOSITION_TOL * scale.max(f64::MIN_POSITIVE)
            || orthonormality_error > DECOMPOSITION_TOL
        {
            return Err(Error::NumericFailure(format!(
                "eigendecomposition check failed (dim {n}): ‖H - VΛV†‖_F = {reconstruction_error:e}, \
                 ‖V†V - I‖_F = {orthonormality_error:e}, ‖H‖ = {scale:e}"
            )));
        }
        Ok(Self {
            matrix,
            eigenvalues,
            vectors,
            symmetrization_defect,
            reconstruction_error,
            orthonormality_error,
        })
    }

    /// `H_Λ = Σ_Z h_Z`, each term embedded into `space`.
    pub fn assemble(interaction: &Interaction, space: &HilbertSpace) -> Result<Self> {
        if space.num_sites() != interaction.space().len() {
            return Err(Error::invalid(format!(
                "Hilbert space has {} sites, interaction has {}",
                space.num_sites(),
                interaction.space().len()
            )));
        }
        let n = space.dim();
        let mut h = CMat::zeros(n, n);
        for term in interaction.terms() {
            h += embed(term.support(), term.matrix(), space)?;
        }
        Self::from_matrix(h)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    /// `max |h - h†|` of the matrix handed to [`Self::from_matrix`].
    pub fn symmetrization_defect(&self) -> f64 {
        self.symmetrization_defect
    }

    /// Frobenius norms of `H - VΛV†` and `V†V - I`.
    pub fn decomposition_errors(&self) -> (f64, f64) {
        (self.reconstruction_error, self.orthonormality_error)
    }

    /// `‖H‖`.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, e| a.max(e.abs()))
    }

    fn check_dim(&self, a: &CMat) -> Result<()> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::invalid(format!(
                "operator is {}x{}, Hamiltonian dimension is {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }

    /// `V† A V`.
    pub fn to_eigenbasis(&self, a: &CMat) -> Result<CMat> {
        self.check_dim(a)?;
        Ok(self.vectors.adjoint() * a * &self.vectors)
    }

    /// `V A' V†`.
    pub fn from_eigenbasis(&self, a: &CMat) -> Result<CMat> {
        self.check_dim(a)?;
        Ok(&self.vectors * a * self.vectors.adjoint())
    }

    /// Heisenberg evolution of an operator already expressed in the eigenbasis:
    /// `(e^{iΛt} A' e^{-iΛt})_{jk} = e^{i(λ_j - λ_k)t} A'_{jk}`.
    pub fn evolve_eigenbasis(&self, a: &CMat, t: f64) -> CMat {
        let phases: Vec<c64> = self
            .eigenvalues
            .iter()
            .map(|&l| c64::from_polar(1.0, l * t))
            .collect();
        Mat::from_fn(a.nrows(), a.ncols(), |j, k| a[(j, k)] * phases[j] * phases[k].conj())
    }

    /// `τ_t(A) = e^{itH} A e^{-itH}`.
    pub fn evolve(&self, a: &CMat, t: f64) -> Result<CMat> {
        let a_eig = self.to_eigenbasis(a)?;
        self.from_eigenbasis(&self.evolve_eigenbasis(&a_eig, t))
    }

    /// `e^{-itH}`.
    pub fn propagator(&self, t: f64) -> CMat {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, j| {
            self.vectors[(i, j)] * c64::from_polar(1.0, -self.eigenvalues[j] * t)
        });
        scaled * self.vectors.adjoint()
    }

    /// `‖[τ_t(A), B]‖` with `A` and `B` given in this Hamiltonian's eigenbasis.
    /// The spectral norm is unitarily invariant, so no change of basis is needed.
    pub fn commutator_norm_eigenbasis(&self, a_eig: &CMat, b_eig: &CMat, t: f64) -> Result<f64> {
        let at = self.evolve_eigenbasis(a_eig, t);
        commutator_norm(at.as_ref(), b_eig.as_ref())
    }
}

/// `𝒰^R(t) = e^{itH^{(<R)}} e^{-itH}`.
pub fn interaction_picture_unitary(
    short: &SpectralHamiltonian,
    full: &SpectralHamiltonian,
    t: f64,
) -> Result<CMat> {
    if short.dim() != full.dim() {
        return Err(Error::invalid("short and full Hamiltonians differ in dimension"));
    }
    Ok(short.propagator(-t) * full.propagator(t))
}

/// `| ‖[τ_t(A), B]‖ - ‖[τ_t^{(<R)}(A), 𝒰 B 𝒰†]‖ |`.
pub fn verify_conjugation_identity(
    short: &SpectralHamiltonian,
    full: &SpectralHamiltonian,
    a: &CMat,
    b: &CMat,
    t: f64,
) -> Result<f64> {
    let lhs = commutator_norm(full.evolve(a, t)?.as_ref(), b.as_ref())?;
    let u = interaction_picture_unitary(short, full, t)?;
    let b_conj = &u * b * u.adjoint();
    let rhs = commutator_norm(short.evolve(a, t)?.as_ref(), b_conj.as_ref())?;
    Ok((lhs - rhs).abs())
}

/// `‖U†U - I‖_F`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    (u.adjoint() * u - CMat::identity(u.nrows(), u.ncols())).norm_l2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricSpace;
    use crate::model::{CouplingPattern, Interaction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scaled(m: &CMat, k: c64) -> CMat {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * k)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        Mat::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn zz() -> SpectralHamiltonian {
        let z = Pauli::Z.matrix();
        SpectralHamiltonian::from_matrix(kron(z.as_ref(), z.as_ref())).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let hs = HilbertSpace::qubits(2, DEFAULT_DIM_CAP).unwrap();
        let x0 = Observable::pauli(0, Pauli::X).embed(&hs).unwrap();
        let expect = kron(Pauli::X.matrix().as_ref(), Pauli::I.matrix().as_ref());
        assert_eq!((x0 - &expect).norm_max(), 0.0);

        let hs3 = HilbertSpace::qubits(3, DEFAULT_DIM_CAP).unwrap();
        let a = Observable::new(vec![0, 2], kron(Pauli::X.matrix().as_ref(), Pauli::Y.matrix().as_ref())).unwrap();
        let full = a.embed(&hs3).unwrap();
        let i2 = Pauli::I.matrix();
        let expect3 = kron(
            kron(Pauli::X.matrix().as_ref(), i2.as_ref()).as_ref(),
            Pauli::Y.matrix().as_ref(),
        );
        assert_eq!((full.clone() - &expect3).norm_max(), 0.0);
        assert!((spectral_norm(full.as_ref()).unwrap() - a.norm()).abs() < 1e-12);

        let id = Observable::new(vec![1], CMat::identity(2, 2)).unwrap();
        let e = id.embed(&hs3).unwrap();
        assert_eq!((e - CMat::identity(8, 8)).norm_max(), 0.0);
    }

    #[test]
    fn embedding_errors() {
        let hs = HilbertSpace::qubits(2, DEFAULT_DIM_CAP).unwrap();
        let bad = Observable::new(vec![0], CMat::identity(3, 3)).unwrap();
        assert!(matches!(bad.embed(&hs), Err(Error::InvalidArgument(_))));
        assert!(matches!(HilbertSpace::qubits(13, DEFAULT_DIM_CAP), Err(Error::ResourceLimit(_))));
        assert!(Observable::new(vec![1, 0], CMat::identity(4, 4)).is_err());
    }

    #[test]
    fn assemble_examples() {
        let space = MetricSpace::chain(3).unwrap();
        let empty = Interaction::new(space, vec![2; 3], vec![]).unwrap();
        let hs = HilbertSpace::qubits(3, DEFAULT_DIM_CAP).unwrap();
        let h = SpectralHamiltonian::assemble(&empty, &hs).unwrap();
        assert!(h.eigenvalues().iter().all(|&e| e == 0.0));

        let spec = zz();
        let ev = spec.eigenvalues();
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        let chain = MetricSpace::chain(5).unwrap();
        let inter = Interaction::power_law_two_body(&chain, 1.0, 2.0, 1.0, &CouplingPattern::Xy).unwrap();
        let hs5 = HilbertSpace::qubits(5, DEFAULT_DIM_CAP).unwrap();
        let h5 = SpectralHamiltonian::assemble(&inter, &hs5).unwrap();
        // trace of an embedded term = trace(h_Z) * 2^(5 - |Z|)
        let oracle: f64 = inter
            .terms()
            .iter()
            .map(|t| {
                let tr: c64 = (0..t.matrix().nrows()).map(|k| t.matrix()[(k, k)]).sum();
                tr.re * f64::powi(2.0, 5 - t.support().len() as i32)
            })
            .sum();
        let tr: f64 = h5.eigenvalues().iter().sum();
        assert!((tr - oracle).abs() < 1e-10);
        assert!(h5.symmetrization_defect() < 1e-15);
    }

    #[test]
    fn zz_heisenberg_closed_form() {
        let h = zz();
        let x = Pauli::X.matrix();
        let y = Pauli::Y.matrix();
        let z = Pauli::Z.matrix();
        let i2 = Pauli::I.matrix();
        let xi = kron(x.as_ref(), i2.as_ref());
        let yz = kron(y.as_ref(), z.as_ref());
        let ix = kron(i2.as_ref(), x.as_ref());
        assert!((h.evolve(&xi, 0.0).unwrap() - &xi).norm_max() < 1e-14);
        for &t in &[0.1, 0.7, 1.3, 2.9] {
            let got = h.evolve(&xi, t).unwrap();
            let want = scaled(&xi, c64::new((2.0 * t).cos(), 0.0)) - scaled(&yz, c64::new((2.0 * t).sin(), 0.0));
            assert!((got - want).norm_max() < 1e-12, "t = {t}");
        }
        let t = std::f64::consts::PI / 8.0;
        let c = commutator_norm(h.evolve(&xi, t).unwrap().as_ref(), ix.as_ref()).unwrap();
        assert!((c - 2.0f64.sqrt()).abs() < 1e-12);
        // disjoint supports at t = 0
        assert!(commutator_norm(xi.as_ref(), ix.as_ref()).unwrap() < 1e-15);
    }

    #[test]
    fn evolution_properties() {
        let chain = MetricSpace::chain(4).unwrap();
        let inter = Interaction::power_law_two_body(&chain, 1.0, 2.0, 1.0, &CouplingPattern::Heisenberg).unwrap();
        let hs = HilbertSpace::qubits(4, DEFAULT_DIM_CAP).unwrap();
        let h = SpectralHamiltonian::assemble(&inter, &hs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_matrix(16, &mut rng);
            let ah = hermitian_part(a.as_ref());
            let s = rng.random_range(0.0..2.0);
            let t = rng.random_range(0.0..2.0);
            for op in [&a, &ah] {
                let na = singular_norm(op.as_ref()).unwrap();
                let ev = h.evolve(op, t).unwrap();
                assert!((singular_norm(ev.as_ref()).unwrap() - na).abs() <= 1e-9 * na);
                let twice = h.evolve(&h.evolve(op, s).unwrap(), t).unwrap();
                let once = h.evolve(op, s + t).unwrap();
                assert!((twice - once).norm_max() < 1e-9);
            }
            let b = Observable::pauli(3, Pauli::Z).embed(&hs).unwrap();
            let c = commutator_norm(h.evolve(&ah, t).unwrap().as_ref(), b.as_ref()).unwrap();
            assert!(c <= 2.0 * singular_norm(ah.as_ref()).unwrap() + 1e-9);
        }
    }

    #[test]
    fn interaction_picture_examples() {
        let chain = MetricSpace::chain(6).unwrap();
        let inter = Interaction::power_law_two_body(&chain, 1.0, 2.0, 1.0, &CouplingPattern::Xy).unwrap();
        let hs = HilbertSpace::qubits(6, DEFAULT_DIM_CAP).unwrap();
        let full = SpectralHamiltonian::assemble(&inter, &hs).unwrap();
        let (short_i, _) = inter.decompose(1.5).unwrap();
        let short = SpectralHamiltonian::assemble(&short_i, &hs).unwrap();

        let u0 = interaction_picture_unitary(&short, &full, 0.0).unwrap();
        assert!((u0 - CMat::identity(64, 64)).norm_max() < 1e-12);
        let u1 = interaction_picture_unitary(&short, &full, 1.0).unwrap();
        assert!(unitarity_defect(&u1) < 1e-9);
        let same = interaction_picture_unitary(&full, &full, 1.7).unwrap();
        assert!((same - CMat::identity(64, 64)).norm_max() < 1e-10);

        let a = Observable::pauli(0, Pauli::X).embed(&hs).unwrap();
        let b = Observable::pauli(5, Pauli::Z).embed(&hs).unwrap();
        assert!(verify_conjugation_identity(&short, &full, &a, &b, 0.0).unwrap() < 1e-12);
        assert!(verify_conjugation_identity(&short, &full, &a, &b, 1.0).unwrap() < 1e-9);
        assert!(verify_conjugation_identity(&full, &full, &a, &b, 1.0).unwrap() < 1e-9);
    }

    #[test]
    fn eigenbasis_commutator_matches_site_basis() {
        let chain = MetricSpace::chain(4).unwrap();
        let inter = Interaction::power_law_two_body(&chain, 1.0, 2.0, 1.0, &CouplingPattern::Xy).unwrap();
        let hs = HilbertSpace::qubits(4, DEFAULT_DIM_CAP).unwrap();
        let h = SpectralHamiltonian::assemble(&inter, &hs).unwrap();
        let a = Observable::pauli(0, Pauli::X).embed(&hs).unwrap();
        let b = Observable::pauli(3, Pauli::Y).embed(&hs).unwrap();
        let ae = h.to_eigenbasis(&a).unwrap();
        let be = h.to_eigenbasis(&b).unwrap();
        for &t in &[0.0, 0.4, 1.9] {
            let direct = commutator_norm(h.evolve(&a, t).unwrap().as_ref(), b.as_ref()).unwrap();
            let eig = h.commutator_norm_eigenbasis(&ae, &be, t).unwrap();
            assert!((direct - eig).abs() < 1e-10);
        }
    }
}
