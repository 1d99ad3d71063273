//! Matrix-level arithmetic of extensions: interleaving isometries, the sum of
//! two splittings, and the inverse built from the complementary compression.

use serde::Serialize;

use crate::error::{OilError, Result};
use crate::hardy::{
    complement_projection, hardy_projection, multiplication_operator, projection_commutator, GuardBand, Symbol,
    Window, WindowedOperator,
};
use crate::linalg::{self, Mat, ONE};
use crate::spectral::{self, IdealSpec, SingularSpectrum, SummabilityVerdict};

/// Isometries `V₁ e_k = e_{2k}` and `V₂ e_k = e_{2k+1}` from an `N`-dimensional
/// block into a `2N`-dimensional one.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryPair {
    n: usize,
    v1: Mat,
    v2: Mat,
}

impl IsometryPair {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v1(&self) -> &Mat {
        &self.v1
    }

    pub fn v2(&self) -> &Mat {
        &self.v2
    }

    /// Largest absolute entry among `V₁*V₁ - 1`, `V₂*V₂ - 1`,
    /// `V₁V₁* + V₂V₂* - 1` and `V₁*V₂`. Zero for exact relations.
    pub fn relation_defect(&self) -> f64 {
        let id_n = linalg::identity(self.n);
        let id_2n = linalg::identity(2 * self.n);
        let parts = [
            self.v1.adjoint() * &self.v1 - &id_n,
            self.v2.adjoint() * &self.v2 - &id_n,
            &self.v1 * self.v1.adjoint() + &self.v2 * self.v2.adjoint() - id_2n,
            self.v1.adjoint() * &self.v2,
        ];
        parts.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn interleaving_isometries(n: usize) -> Result<IsometryPair> {
    if n == 0 {
        return Err(OilError::InvalidParameter("isometry block size must be >= 1".into()));
    }
    let mut v1 = Mat::zeros(2 * n, n);
    let mut v2 = Mat::zeros(2 * n, n);
    for k in 0..n {
        v1[(2 * k, k)] = ONE;
        v2[(2 * k + 1, k)] = ONE;
    }
    Ok(IsometryPair { n, v1, v2 })
}

/// Permutation exchanging modes `2k` and `2k+1`, i.e. swapping the roles of
/// `V₁` and `V₂`.
pub fn interleaving_swap(n: usize) -> Mat {
    let mut s = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        s[(2 * k, 2 * k + 1)] = ONE;
        s[(2 * k + 1, 2 * k)] = ONE;
    }
    s
}

/// `V₁ A V₁* + V₂ B V₂*` on the doubled window `[2lo, 2hi+1]`.
pub fn extension_sum(a: &WindowedOperator, b: &WindowedOperator) -> Result<WindowedOperator> {
    if a.window() != b.window() {
        return Err(OilError::WindowMismatch(format!("{} vs {}", a.window(), b.window())));
    }
    let w = a.window();
    let pair = interleaving_isometries(w.dim())?;
    let m = &pair.v1 * a.entries() * pair.v1.adjoint() + &pair.v2 * b.entries() * pair.v2.adjoint();
    let doubled = Window::new(2 * w.lo(), 2 * w.hi() + 1)?;
    Ok(WindowedOperator::from_parts(doubled, m, format!("{} ⊞ {}", a.label(), b.label())))
}

/// `τ'(a) = (1-P) M_a (1-P)`.
pub fn complement_compression(a: &Symbol, w: Window) -> Result<WindowedOperator> {
    if !w.has_negative_modes() {
        return Err(OilError::HardyOnlyWindow { lo: w.lo(), hi: w.hi() });
    }
    let q = complement_projection(w);
    let ma = multiplication_operator(a, w);
    Ok(WindowedOperator::from_parts(
        w,
        q.entries() * ma.entries() * q.entries(),
        format!("τ'[{a}]"),
    ))
}

/// The symmetry `U = [[P, P'], [P', P]]` on the doubled space.
pub fn inverse_symmetry(w: Window) -> Mat {
    let p = hardy_projection(w).into_entries();
    let q = complement_projection(w).into_entries();
    let n = w.dim();
    let mut u = Mat::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&p);
    u.view_mut((0, n), (n, n)).copy_from(&q);
    u.view_mut((n, 0), (n, n)).copy_from(&q);
    u.view_mut((n, n), (n, n)).copy_from(&p);
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseResiduals {
    /// `‖U² - 1‖`.
    pub r_u: f64,
    /// `‖U P₂ U - (1 ⊕ 0)‖`.
    pub r_p: f64,
    /// `‖(M_a ⊕ 0) - U P₂ U (M_a ⊕ M_a) U P₂ U‖` on guarded entries.
    pub r_id: f64,
}

pub fn inverse_identity_residuals(a: &Symbol, w: Window) -> Result<InverseResiduals> {
    let guard = GuardBand::new(w, 3, a.bandwidth())?;
    let n = w.dim();
    let u = inverse_symmetry(w);
    let p = hardy_projection(w).into_entries();
    let q = complement_projection(w).into_entries();
    let p2 = linalg::direct_sum(&p, &q);
    let one_zero = linalg::direct_sum(&linalg::identity(n), &Mat::zeros(n, n));

    let r_u = linalg::op_norm(&(&u * &u - linalg::identity(2 * n)));
    let upu = &u * &p2 * &u;
    let r_p = linalg::op_norm(&(&upu - &one_zero));

    let ma = multiplication_operator(a, w).into_entries();
    let lhs = linalg::direct_sum(&ma, &Mat::zeros(n, n));
    let rhs = &upu * linalg::direct_sum(&ma, &ma) * &upu;
    let diff = lhs - rhs;
    let idx: Vec<usize> = guard.indices().chain(guard.indices().map(|i| i + n)).collect();
    let restricted = diff.select_rows(idx.iter()).select_columns(idx.iter());
    Ok(InverseResiduals { r_u, r_p, r_id: linalg::op_norm(&restricted) })
}

/// Evidence that `(P, M_a)` is a Toeplitz pair summable in `spec`.
#[derive(Debug, Clone, Serialize)]
pub struct InvertibilityReport {
    pub spec: IdealSpec,
    pub commutator_spectrum: SingularSpectrum,
    pub commutator_verdict: SummabilityVerdict,
    /// Verdict for `[1-P, M_a]`, the commutator of the candidate inverse.
    pub complement_verdict: SummabilityVerdict,
    pub residuals: InverseResiduals,
}

pub fn toeplitz_invertibility_report(
    a: &Symbol,
    spec: &IdealSpec,
    w: Window,
    n_max: usize,
) -> Result<InvertibilityReport> {
    let comm = projection_commutator(a, w)?;
    let commutator_spectrum = spectral::singular_values(&comm)?;
    let commutator_verdict = spectral::summability_classify(commutator_spectrum.values(), spec, n_max)?;

    let q = complement_projection(w);
    let ma = multiplication_operator(a, w);
    let comp = q.entries() * ma.entries() - ma.entries() * q.entries();
    let comp_spectrum = spectral::singular_values_of(&comp, "[P', M_a]")?;
    let complement_verdict = spectral::summability_classify(comp_spectrum.values(), spec, n_max)?;

    Ok(InvertibilityReport {
        spec: spec.clone(),
        commutator_spectrum,
        commutator_verdict,
        complement_verdict,
        residuals: inverse_identity_residuals(a, w)?,
    })
}
