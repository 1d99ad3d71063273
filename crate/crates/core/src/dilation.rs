//! Finite-dimensional Stinespring dilation of completely positive contractions.
//!
//! A map `κ(a) = Σ K_i a K_i*` from `n×n` to `m×m` matrices is dilated through
//! the isometry `W x = (Σ_i K_i* x ⊗ e_i) ⊕ (1 - κ(1))^{1/2} x`. Completing `W`
//! to a unitary `Ω` gives the *-homomorphism `π(a) = Ω*((a ⊗ 1_r) ⊕ 0_m)Ω`,
//! whose upper-left `m×m` corner is `κ(a)`.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OilError, Result};
use crate::linalg::{self, c, Mat, ZERO};
use crate::spectral::{self, IdealSpec, SingularSpectrum, SummabilityVerdict};

const CONTRACTION_TOL: f64 = 1e-12;
const COMPLETION_TOL: f64 = 1e-8;
const COMPLETION_SEED: u64 = 0x5eed_0f_d11a;

/// Completely positive map in Kraus form, `a ↦ Σ K_i a K_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    kraus: Vec<Mat>,
    n: usize,
    m: usize,
}

impl CpMap {
    pub fn new(kraus: Vec<Mat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| OilError::InvalidParameter("at least one Kraus operator required".into()))?;
        let (m, n) = first.shape();
        if m == 0 || n == 0 {
            return Err(OilError::InvalidParameter("Kraus operators must be nonempty".into()));
        }
        for k in &kraus {
            if k.shape() != (m, n) {
                return Err(OilError::DimensionMismatch { expected: m * n, actual: k.len() });
            }
            if !linalg::is_finite(k) {
                return Err(OilError::NonFinite);
            }
        }
        let map = Self { kraus, n, m };
        let top = linalg::op_norm(&map.image_of_unit());
        if top > 1.0 + CONTRACTION_TOL {
            return Err(OilError::NotContraction(top));
        }
        Ok(map)
    }

    /// The identity map on `n×n` matrices.
    pub fn identity(n: usize) -> Self {
        Self { kraus: vec![linalg::identity(n)], n, m: n }
    }

    /// `a ↦ V* a V` for a single `n×m` matrix `V`.
    pub fn compression(v: &Mat) -> Result<Self> {
        Self::new(vec![v.adjoint()])
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    /// Input dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Output dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn apply(&self, a: &Mat) -> Result<Mat> {
        self.check_input(a)?;
        let mut out = Mat::zeros(self.m, self.m);
        for k in &self.kraus {
            out += k * a * k.adjoint();
        }
        Ok(out)
    }

    /// `κ(1) = Σ K_i K_i*`.
    pub fn image_of_unit(&self) -> Mat {
        let mut out = Mat::zeros(self.m, self.m);
        for k in &self.kraus {
            out += k * k.adjoint();
        }
        out
    }

    fn check_input(&self, a: &Mat) -> Result<()> {
        if a.shape() != (self.n, self.n) {
            return Err(OilError::DimensionMismatch { expected: self.n, actual: a.nrows() });
        }
        Ok(())
    }
}

/// `r` Gaussian Kraus operators of shape `m×n`, rescaled so that
/// `‖Σ K_i K_i*‖ = (1 - 10⁻⁶)²`.
pub fn random_cp_contraction(n: usize, m: usize, r: usize, seed: u64) -> Result<CpMap> {
    if n == 0 || m == 0 || r == 0 {
        return Err(OilError::InvalidParameter("n, m, r must all be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kraus: Vec<Mat> = (0..r).map(|_| linalg::complex_gaussian(m, n, &mut rng)).collect();
    let mut unit = Mat::zeros(m, m);
    for k in &kraus {
        unit += k * k.adjoint();
    }
    let scale = (1.0 - 1e-6) / linalg::op_norm(&unit).sqrt();
    for k in &mut kraus {
        *k *= c(scale);
    }
    CpMap::new(kraus)
}

/// `(1 - h)^{1/2}` for Hermitian `h ≤ 1`, clipping eigenvalues in
/// `[-1e-12, 0)` to zero.
fn defect_root(h: &Mat) -> Result<Mat> {
    let m = h.nrows();
    let defect = linalg::identity(m) - h;
    let herm = (&defect + defect.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut roots = Vec::with_capacity(m);
    for &ev in eig.eigenvalues.iter() {
        if ev < -CONTRACTION_TOL {
            return Err(OilError::NotContraction(1.0 - ev));
        }
        roots.push(c(ev.max(0.0).sqrt()));
    }
    let v = &eig.eigenvectors;
    Ok(v * linalg::diag(roots) * v.adjoint())
}

/// Extends the orthonormal columns of `w` to a unitary by Gram–Schmidt on a
/// seeded Gaussian complement, orthogonalized twice.
fn complete_to_unitary(w: &Mat) -> Result<Mat> {
    let (d, m) = w.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(COMPLETION_SEED);
    let candidates = linalg::complex_gaussian(d, d - m, &mut rng);
    let mut omega = Mat::zeros(d, d);
    omega.view_mut((0, 0), (d, m)).copy_from(w);
    for j in 0..d - m {
        let mut v = candidates.column(j).into_owned();
        let start_norm = v.norm();
        for _ in 0..2 {
            for i in 0..m + j {
                let q = omega.column(i);
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm < COMPLETION_TOL * start_norm {
            return Err(OilError::CompletionFailed(norm / start_norm));
        }
        omega.set_column(m + j, &(v / c(norm)));
    }
    Ok(omega)
}

/// Stinespring data: `π(a) = Ω*((a ⊗ 1_r) ⊕ 0_m)Ω` with `P = diag(1_m, 0)`.
#[derive(Debug, Clone)]
pub struct DilationData {
    map: CpMap,
    omega: Mat,
}

/// Blocks of `π(a)` relative to `P`.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub p11: Mat,
    pub p12: Mat,
    pub p21: Mat,
    pub p22: Mat,
}

pub fn dilation_build(map: &CpMap) -> Result<DilationData> {
    let (n, m, r) = (map.n, map.m, map.kraus.len());
    let d = n * r + m;
    let root = defect_root(&map.image_of_unit())?;
    let mut w = Mat::zeros(d, m);
    for (i, k) in map.kraus.iter().enumerate() {
        let kt = k.adjoint();
        for j in 0..n {
            for l in 0..m {
                w[(j * r + i, l)] = kt[(j, l)];
            }
        }
    }
    w.view_mut((n * r, 0), (m, m)).copy_from(&root);
    let omega = complete_to_unitary(&w)?;
    Ok(DilationData { map: map.clone(), omega })
}

impl DilationData {
    pub fn map(&self) -> &CpMap {
        &self.map
    }

    /// Ambient dimension `n·r + m`.
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// Rank of `P`.
    pub fn projection_dim(&self) -> usize {
        self.map.m
    }

    pub fn unitary(&self) -> &Mat {
        &self.omega
    }

    pub fn projection(&self) -> Mat {
        let m = self.map.m;
        linalg::diag_real((0..self.dim()).map(|i| if i < m { 1.0 } else { 0.0 }))
    }

    /// `π(a)`.
    pub fn represent(&self, a: &Mat) -> Result<Mat> {
        self.map.check_input(a)?;
        let r = self.map.kraus.len();
        let lifted = a.kronecker(&linalg::identity(r));
        let padded = linalg::direct_sum(&lifted, &Mat::zeros(self.map.m, self.map.m));
        Ok(self.omega.adjoint() * padded * &self.omega)
    }

    pub fn blocks(&self, a: &Mat) -> Result<Blocks> {
        let pi = self.represent(a)?;
        let m = self.map.m;
        let rest = self.dim() - m;
        Ok(Blocks {
            p11: pi.view((0, 0), (m, m)).into_owned(),
            p12: pi.view((0, m), (m, rest)).into_owned(),
            p21: pi.view((m, 0), (rest, m)).into_owned(),
            p22: pi.view((m, m), (rest, rest)).into_owned(),
        })
    }

    /// `‖P π(a) P - κ(a) ⊕ 0‖`.
    pub fn compression_residual(&self, a: &Mat) -> Result<f64> {
        let p = self.projection();
        let compressed = &p * self.represent(a)? * &p;
        let target = linalg::direct_sum(&self.map.apply(a)?, &Mat::zeros(self.dim() - self.map.m, self.dim() - self.map.m));
        Ok(linalg::op_norm(&(compressed - target)))
    }

    /// `‖π(ab) - π(a)π(b)‖`.
    pub fn homomorphism_residual(&self, a: &Mat, b: &Mat) -> Result<f64> {
        let lhs = self.represent(&(a * b))?;
        let rhs = self.represent(a)? * self.represent(b)?;
        Ok(linalg::op_norm(&(lhs - rhs)))
    }

    /// `‖π(a*) - π(a)*‖`.
    pub fn adjoint_residual(&self, a: &Mat) -> Result<f64> {
        let lhs = self.represent(&a.adjoint())?;
        Ok(linalg::op_norm(&(lhs - self.represent(a)?.adjoint())))
    }

    /// `[P, π(a)]`.
    pub fn commutator(&self, a: &Mat) -> Result<Mat> {
        let p = self.projection();
        let pi = self.represent(a)?;
        Ok(&p * &pi - &pi * &p)
    }
}

pub fn block_decompose(d: &DilationData, a: &Mat) -> Result<Blocks> {
    d.blocks(a)
}

/// Residuals of the corner identity `κ(ab) - κ(a)κ(b) = π₁₂(a)π₂₁(b)` and of
/// the block form `-[P,π(a)]² = diag(π₁₂(a)π₂₁(a), π₂₁(a)π₁₂(a))`.
pub fn defect_identity_residuals(d: &DilationData, a: &Mat, b: &Mat) -> Result<(f64, f64)> {
    let kappa = d.map();
    let ba = d.blocks(a)?;
    let bb = d.blocks(b)?;
    let lhs = kappa.apply(&(a * b))? - kappa.apply(a)? * kappa.apply(b)?;
    let r1 = linalg::op_norm(&(lhs - &ba.p12 * &bb.p21));

    let comm = d.commutator(a)?;
    let block_form = linalg::direct_sum(&(&ba.p12 * &ba.p21), &(&ba.p21 * &ba.p12));
    let r2 = linalg::op_norm(&(&comm * &comm + block_form));
    Ok((r1, r2))
}

/// Verdicts for `x ∈ √(L^p)` (exponent `2p`) and for `x ∈ L^p`.
pub fn square_root_membership(
    s: &SingularSpectrum,
    p: f64,
    n_max: usize,
) -> Result<(SummabilityVerdict, SummabilityVerdict)> {
    let base = IdealSpec::Schatten(p);
    let root = spectral::summability_classify(s.values(), &IdealSpec::square_root_of(base.clone()), n_max)?;
    let direct = spectral::summability_classify(s.values(), &base, n_max)?;
    Ok((root, direct))
}

/// Finite-scale comparison of `κ(a²) - κ(a)²` at exponent `p` with
/// `[P, π(a)]` at exponent `2p` for self-adjoint `a`.
#[derive(Debug, Clone)]
pub struct SquareRootEquivalence {
    pub defect_spectrum: SingularSpectrum,
    pub commutator_spectrum: SingularSpectrum,
    /// `max_k |μ_{2k}([P,π(a)])² - μ_k(κ(a²) - κ(a)²)|`.
    pub paired_residual: f64,
    /// `max_k |μ_k([P,π(a)])² - μ_k(-[P,π(a)]²)|`.
    pub square_residual: f64,
    pub defect_verdict: SummabilityVerdict,
    pub commutator_verdict: SummabilityVerdict,
}

/// The commutator's spectrum is that of `π₁₂(a)` listed twice, so the
/// evidence window for it is twice the one used for the defect.
pub fn square_root_equivalence(d: &DilationData, a: &Mat, p: f64) -> Result<SquareRootEquivalence> {
    let kappa = d.map();
    let defect = kappa.apply(&(a * a))? - {
        let ka = kappa.apply(a)?;
        &ka * &ka
    };
    let defect_spectrum = spectral::singular_values_of(&defect, "κ(a²) - κ(a)²")?;
    let comm = d.commutator(a)?;
    let commutator_spectrum = spectral::singular_values_of(&comm, "[P, π(a)]")?;
    let neg_square = -(&comm * &comm);
    let square_spectrum = spectral::singular_values_of(&neg_square, "-[P, π(a)]²")?;

    let square_residual = commutator_spectrum
        .values()
        .iter()
        .zip(square_spectrum.values())
        .map(|(s, t)| (s * s - t).abs())
        .fold(0.0, f64::max);
    let paired_residual = defect_spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let s = commutator_spectrum.values().get(2 * k).copied().unwrap_or(0.0);
            (s * s - v).abs()
        })
        .fold(0.0, f64::max);

    let n_defect = prev_power_of_two(defect_spectrum.len());
    let defect_verdict = spectral::summability_classify(defect_spectrum.values(), &IdealSpec::Schatten(p), n_defect)?;
    let commutator_verdict = spectral::summability_classify(
        commutator_spectrum.values(),
        &IdealSpec::Schatten(2.0 * p),
        2 * n_defect,
    )?;
    Ok(SquareRootEquivalence {
        defect_spectrum,
        commutator_spectrum,
        paired_residual,
        square_residual,
        defect_verdict,
        commutator_verdict,
    })
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

/// True when every entry of `m` is exactly zero.
pub fn is_zero(m: &Mat) -> bool {
    m.iter().all(|z| *z == ZERO)
}
