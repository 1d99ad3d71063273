//! Linear deformations `P ↦ P + T` of the Hardy-space Toeplitz extension.
//!
//! The diagonal deformations here are built from
//! `λ_{k,ε} = 1 - k^ε (1 + k^{2ε})^{-1/2}`, which behaves like `½ k^{-2ε}` for
//! large `k`, and from the pure power `(1+k)^{-ε}`. The lower-bound trials probe
//! `‖U* P z P U - (P+T) z (P+T)‖_p ≥ ‖T‖_p` against Haar-random unitaries.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OilError, Result};
use crate::hardy::{hardy_projection, multiplication_operator, GuardBand, Symbol, Window, WindowedOperator};
use crate::linalg::{self, c, Mat, C64};
use crate::spectral::{self, IdealSpec, SummabilityVerdict, Verdict};

/// Which λ sequence to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `1 - k^ε (1 + k^{2ε})^{-1/2}`.
    PaperFormula,
    /// `(1 + k)^{-ε}`.
    PurePower,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PaperFormula => write!(f, "paper"),
            Family::PurePower => write!(f, "power"),
        }
    }
}

impl FromStr for Family {
    type Err = OilError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_formula" => Ok(Family::PaperFormula),
            "power" | "pure_power" => Ok(Family::PurePower),
            other => Err(OilError::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(OilError::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    Ok(())
}

/// `1 - k^ε (1 + k^{2ε})^{-1/2}` written as `x / (s (s + 1))` with
/// `x = k^{-2ε}`, `s = √(1 + x)` to avoid cancellation at large `k`.
fn paper_lambda(k: usize, eps: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let x = (k as f64).powf(-2.0 * eps);
    let s = (1.0 + x).sqrt();
    x / (s * (s + 1.0))
}

pub fn lambda_sequence(eps: f64, family: Family, count: usize) -> Result<Vec<f64>> {
    check_eps(eps)?;
    Ok((0..count)
        .map(|k| match family {
            Family::PaperFormula => paper_lambda(k, eps),
            Family::PurePower => (1.0 + k as f64).powf(-eps),
        })
        .collect())
}

fn require_hardy(w: Window) -> Result<()> {
    if !w.is_hardy_only() {
        return Err(OilError::NotHardyWindow { lo: w.lo(), hi: w.hi() });
    }
    Ok(())
}

/// `T e_k = λ_k e_k` on a Hardy window.
pub fn deformation_operator(lambda: &[f64], w: Window) -> Result<WindowedOperator> {
    require_hardy(w)?;
    let needed = w.hi() as usize + 1;
    if lambda.len() < needed {
        return Err(OilError::InvalidParameter(format!(
            "λ sequence has {} entries, window {w} needs {needed}",
            lambda.len()
        )));
    }
    let m = linalg::diag_real(w.modes().map(|k| lambda[k as usize]));
    WindowedOperator::new(w, m, "T")
}

/// `T = P(K(1+K²)^{-1/2} - 1)P` with `K = |d/dθ|^ε`, i.e. `diag(-λ_{k,ε})`.
pub fn signed_deformation_from_order(eps: f64, w: Window) -> Result<WindowedOperator> {
    require_hardy(w)?;
    check_eps(eps)?;
    let m = linalg::diag_real(w.modes().map(|k| -paper_lambda(k as usize, eps)));
    Ok(WindowedOperator::from_parts(w, m, format!("T_ε[{eps}]")))
}

/// `‖(T+P)² - P + (1+K²)^{-1}‖` for `T = signed_deformation_from_order(ε)`.
pub fn quadratic_identity_residual(eps: f64, w: Window) -> Result<f64> {
    let t = signed_deformation_from_order(eps, w)?;
    let p = hardy_projection(w);
    let resolvent = linalg::diag_real(w.modes().map(|k| 1.0 / (1.0 + (k as f64).powf(2.0 * eps))));
    let tp = t.entries() + p.entries();
    let r = linalg::product(&tp, &tp) - p.entries() + resolvent;
    Ok(linalg::op_norm(&r))
}

/// `max_{K ≤ t < K+count} t² (1 - t (1+t²)^{-1/2})`.
pub fn chopping_asymptotic_bound(k: usize, count: usize) -> Result<f64> {
    if k < 1 || count < 1 {
        return Err(OilError::InvalidParameter("need K >= 1 and count >= 1".into()));
    }
    Ok((k..k + count)
        .map(|t| {
            // t² (1 - (1 + t^{-2})^{-1/2}) = 1 / (s (s + 1)), s = √(1 + t^{-2}).
            let s = (1.0 + (t as f64).powi(-2)).sqrt();
            1.0 / (s * (s + 1.0))
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `P + T` on `w`, with `T` zero-extended from its Hardy sub-window.
fn deformed_projection(t: &WindowedOperator, w: Window) -> Result<Mat> {
    require_hardy(t.window())?;
    let te = t.embed(w)?;
    Ok(hardy_projection(w).entries() + te.entries())
}

/// Output of [`deformed_compression`].
#[derive(Debug, Clone)]
pub struct DeformedCompression {
    pub operator: WindowedOperator,
    pub guard: GuardBand,
}

/// `τ_T(a) = (P+T) M_a (P+T)`.
pub fn deformed_compression(t: &WindowedOperator, a: &Symbol, w: Window) -> Result<DeformedCompression> {
    let guard = GuardBand::new(w, 3, a.bandwidth())?;
    let q = deformed_projection(t, w)?;
    let ma = multiplication_operator(a, w);
    let m = linalg::product(&linalg::product(&q, ma.entries()), &q);
    Ok(DeformedCompression {
        operator: WindowedOperator::from_parts(w, m, format!("τ_T[{a}]")),
        guard,
    })
}

/// Coefficient `(1 + λ_{k+1})(1 + λ_k)` of `e_{k+1}` in `τ_T(z) e_k`.
pub fn shift_coefficient(lambda: &[f64], k: usize) -> f64 {
    1.0 + lambda[k + 1] + lambda[k] + lambda[k] * lambda[k + 1]
}

/// Norm, on guarded entries, of `τ_T(ab) - τ_T(a)τ_T(b)` minus its four-term
/// expansion.
pub fn deformation_defect_residuals(t: &WindowedOperator, a: &Symbol, b: &Symbol, w: Window) -> Result<f64> {
    Ok(deformation_defect(t, a, b, w)?.residual)
}

#[derive(Debug, Clone)]
pub struct DeformationDefect {
    /// Guarded norm of `τ_T(ab) - τ_T(a)τ_T(b)`.
    pub defect_norm: f64,
    /// Guarded norm of the defect minus the four-term expansion.
    pub residual: f64,
    pub guard: GuardBand,
}

pub fn deformation_defect(t: &WindowedOperator, a: &Symbol, b: &Symbol, w: Window) -> Result<DeformationDefect> {
    let guard = GuardBand::new(w, 4, a.bandwidth() + b.bandwidth())?;
    let q = deformed_projection(t, w)?;
    let p = hardy_projection(w).into_entries();
    let pa = multiplication_operator(a, w).into_entries();
    let pb = multiplication_operator(b, w).into_entries();
    let pab = multiplication_operator(&a.product(b), w).into_entries();

    let q2 = &q * &q;
    let q3 = &q2 * &q;
    let lhs = &q * &pab * &q - &q * &pa * &q2 * &pb * &q;

    let term1 = &pab * &q2 * (&p - &q2);
    let term2 = (&q * &pab - &pab * &q) * &q;
    let term3 = &q * &pa * (&pb * &q2 - &q2 * &pb) * &q;
    let term4 = (&pab * &q - &q * &pab) * &q3;
    let residual = &lhs - (term1 + term2 + term3 + term4);

    Ok(DeformationDefect {
        defect_norm: guard.norm(&lhs),
        residual: guard.norm(&residual),
        guard,
    })
}

/// Haar-distributed unitary: QR of a seeded complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<WindowedOperator> {
    if dim == 0 {
        return Err(OilError::InvalidParameter("unitary dimension must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linalg::complex_gaussian(dim, dim, &mut rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm()) } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(WindowedOperator::from_parts(Window::hardy(dim), q, format!("Haar[{seed}]")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformationParams {
    pub eps: f64,
    pub p: f64,
    pub family: Family,
    /// Probe dimension `N`.
    pub modes: usize,
    /// Ambient Hardy dimension `M ≥ N + 2`.
    pub ambient: usize,
    pub seed: u64,
}

impl DeformationParams {
    pub fn new(eps: f64, p: f64, family: Family, modes: usize, seed: u64) -> Self {
        Self { eps, p, family, modes, ambient: modes + 2, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(OilError::InvalidParameter(format!("p must be >= 1, got {}", self.p)));
        }
        if self.modes < 1 {
            return Err(OilError::InvalidParameter("need at least one probe mode".into()));
        }
        if self.ambient < self.modes + 2 {
            return Err(OilError::InvalidParameter(format!(
                "ambient dimension {} must be at least modes + 2 = {}",
                self.ambient,
                self.modes + 2
            )));
        }
        Ok(())
    }
}

/// One unitary trial of the lower bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaTrial {
    pub seed: u64,
    /// `⟨L*L e_k, e_k⟩ - λ_k²` for `k < N`.
    pub gaps: Vec<f64>,
    /// `⟨S_j e_k, e_k⟩` for `j = 1, 2, 3`, `k < N`.
    pub s1_diag: Vec<f64>,
    pub s2_diag: Vec<f64>,
    pub s3_diag: Vec<C64>,
    /// Truncated `‖L‖_p`.
    pub lhs_norm: f64,
    /// `max_k |⟨S₁e_k,e_k⟩ - 1|`.
    pub s1_residual: f64,
    /// `max_k |⟨S₂e_k,e_k⟩ - c_k²|` with `c_k` the shift coefficient.
    pub s2_residual: f64,
    /// `max_k |⟨S₃e_k,e_k⟩ - c_k ⟨a f_k, f_{k+1}⟩|`.
    pub s3_residual: f64,
    /// `‖L*L - (S₁ + S₂ - S₃ - S₄)‖`.
    pub expansion_residual: f64,
}

impl LemmaTrial {
    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub params: DeformationParams,
    pub lambda: Vec<f64>,
    /// `(Σ_{k<N} λ_k^p)^{1/p}`.
    pub rhs_norm: f64,
    pub trials: Vec<LemmaTrial>,
}

impl LemmaReport {
    pub fn min_gap(&self) -> f64 {
        self.trials.iter().map(LemmaTrial::min_gap).fold(f64::INFINITY, f64::min)
    }

    /// `min_trial (‖L‖_p - rhs)`.
    pub fn min_norm_margin(&self) -> f64 {
        self.trials
            .iter()
            .map(|t| t.lhs_norm - self.rhs_norm)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_s_residual(&self) -> f64 {
        self.trials
            .iter()
            .map(|t| t.s1_residual.max(t.s2_residual).max(t.s3_residual).max(t.expansion_residual))
            .fold(0.0, f64::max)
    }
}

/// Evaluates one trial for an explicit unitary `u` on the first `N` modes.
/// `lambda` must cover the ambient window.
pub fn lemma_trial(lambda: &[f64], u_probe: &Mat, modes: usize, ambient: usize, p: f64, seed: u64) -> Result<LemmaTrial> {
    if ambient < modes + 2 {
        return Err(OilError::InvalidParameter(format!(
            "ambient dimension {ambient} must be at least modes + 2 = {}",
            modes + 2
        )));
    }
    if u_probe.shape() != (modes, modes) {
        return Err(OilError::DimensionMismatch { expected: modes, actual: u_probe.nrows() });
    }
    let w = Window::hardy(ambient);
    let mut u = linalg::identity(ambient);
    u.view_mut((0, 0), (modes, modes)).copy_from(u_probe);

    let pz = multiplication_operator(&Symbol::z(), w).into_entries();
    let t = deformation_operator(lambda, w)?.into_entries();
    let q = hardy_projection(w).entries() + &t;
    let tz = &q * &pz * &q;
    let uz = u.adjoint() * &pz * &u;
    let l = &uz - &tz;
    let ltl = l.adjoint() * &l;

    let s1 = uz.adjoint() * &uz;
    let s2 = tz.adjoint() * &tz;
    let s3 = tz.adjoint() * &uz;
    let s4 = uz.adjoint() * &tz;
    let expansion_residual = linalg::op_norm(&(&ltl - (&s1 + &s2 - &s3 - &s4)));

    let f = |k: usize| u.column(k).into_owned();
    let mut gaps = Vec::with_capacity(modes);
    let mut s1_diag = Vec::with_capacity(modes);
    let mut s2_diag = Vec::with_capacity(modes);
    let mut s3_diag = Vec::with_capacity(modes);
    let (mut s1_residual, mut s2_residual, mut s3_residual) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..modes {
        gaps.push(ltl[(k, k)].re - lambda[k] * lambda[k]);
        let ck = shift_coefficient(lambda, k);
        s1_diag.push(s1[(k, k)].re);
        s2_diag.push(s2[(k, k)].re);
        s3_diag.push(s3[(k, k)]);
        s1_residual = s1_residual.max((s1[(k, k)] - c(1.0)).norm());
        s2_residual = s2_residual.max((s2[(k, k)] - c(ck * ck)).norm());
        let overlap = f(k + 1).dotc(&(&pz * f(k)));
        s3_residual = s3_residual.max((s3[(k, k)] - c(ck) * overlap).norm());
    }
    let spectrum = spectral::singular_values_of(&l, "L")?;
    let lhs_norm = spectral::schatten_norm(&spectrum, p)?;
    Ok(LemmaTrial {
        seed,
        gaps,
        s1_diag,
        s2_diag,
        s3_diag,
        lhs_norm,
        s1_residual,
        s2_residual,
        s3_residual,
        expansion_residual,
    })
}

/// Runs `trials` Haar trials with seeds `seed ^ i`, in parallel, reported in
/// trial order.
pub fn lemma_lower_bound_report(params: &DeformationParams, trials: usize) -> Result<LemmaReport> {
    params.validate()?;
    let lambda = lambda_sequence(params.eps, params.family, params.ambient)?;
    let rhs_norm = lambda[..params.modes].iter().map(|l| l.powf(params.p)).sum::<f64>().powf(1.0 / params.p);
    let trials = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = params.seed ^ i;
            let u = haar_unitary(params.modes, seed)?;
            lemma_trial(&lambda, u.entries(), params.modes, params.ambient, params.p, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport { params: params.clone(), lambda, rhs_norm, trials })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Fitted `α` in `λ_k ≈ C k^{-α}` over `[N_max/4, N_max/2]`.
    pub decay_exponent: f64,
    /// Rate predicted by expanding the formula: `2ε` for `PaperFormula`,
    /// `ε` for the pure power.
    pub predicted_exponent: f64,
    /// Rate asserted alongside the printed formula, `ε`.
    pub stated_exponent: f64,
    /// `(N, S_N)` at exponent `p` for `N = 16, 32, …, N_max`.
    pub partial_sums: Vec<(usize, f64)>,
    /// `S_{N_max} / S_{N_max/2}` at exponent `p`.
    pub doubling_ratio: f64,
    pub verdict_p: SummabilityVerdict,
    pub verdict_2p: SummabilityVerdict,
    pub lemma: Option<LemmaSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub modes: usize,
    pub trials: usize,
    pub min_gap: f64,
    pub min_norm_margin: f64,
}

/// Pair `(ε, ε + 1/p)` found in the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairEvidence {
    pub eps: f64,
    pub partner: f64,
    /// λ at `ε` divergent at `p` and λ at `ε + 1/p` summable at `p`.
    pub distinct: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub p: f64,
    pub family: Family,
    pub n_max: usize,
    pub points: Vec<SweepPoint>,
    pub pairs: Vec<PairEvidence>,
}

const PAIR_TOL: f64 = 1e-9;
const SWEEP_LEMMA_MODES: usize = 32;
const SWEEP_LEMMA_TRIALS: usize = 4;

pub fn epsilon_sweep(
    p: f64,
    grid: &[f64],
    family: Family,
    n_max: usize,
    with_lemma: bool,
    seed: u64,
) -> Result<SweepReport> {
    if !(p >= 1.0) {
        return Err(OilError::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if !n_max.is_power_of_two() || n_max < 32 {
        return Err(OilError::InvalidParameter(format!("N_max must be a power of two >= 32, got {n_max}")));
    }
    if grid.is_empty() {
        return Err(OilError::InvalidParameter("empty ε grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(OilError::InvalidParameter("ε grid must be strictly increasing".into()));
    }
    if grid.iter().any(|&e| !(e > 0.0 && e < 2.0 / p)) {
        return Err(OilError::InvalidParameter(format!("ε grid must lie in (0, {})", 2.0 / p)));
    }
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| sweep_point(p, eps, family, n_max, with_lemma, seed ^ i as u64))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for a in &points {
        if let Some(b) = points.iter().find(|b| (b.eps - (a.eps + 1.0 / p)).abs() <= PAIR_TOL) {
            pairs.push(PairEvidence {
                eps: a.eps,
                partner: b.eps,
                distinct: a.verdict_p.verdict == Verdict::Divergent && b.verdict_p.verdict == Verdict::Summable,
            });
        }
    }
    Ok(SweepReport { p, family, n_max, points, pairs })
}

fn sweep_point(p: f64, eps: f64, family: Family, n_max: usize, with_lemma: bool, seed: u64) -> Result<SweepPoint> {
    let lambda = lambda_sequence(eps, family, n_max)?;
    let decay_exponent = spectral::decay_exponent(&lambda, n_max / 4, n_max / 2)?;
    let verdict_p = spectral::summability_classify(&lambda, &IdealSpec::Schatten(p), n_max)?;
    let verdict_2p = spectral::summability_classify(&lambda, &IdealSpec::Schatten(2.0 * p), n_max)?;
    let mut partial_sums = Vec::new();
    let mut n = 16;
    while n <= n_max {
        partial_sums.push((n, spectral::partial_sum(&lambda, p, n)));
        n *= 2;
    }
    let doubling_ratio = spectral::tail_doubling_ratio(&lambda, p, n_max / 2)?;
    let lemma = if with_lemma {
        let params = DeformationParams::new(eps, p, family, SWEEP_LEMMA_MODES, seed);
        let rep = lemma_lower_bound_report(&params, SWEEP_LEMMA_TRIALS)?;
        Some(LemmaSummary {
            modes: SWEEP_LEMMA_MODES,
            trials: SWEEP_LEMMA_TRIALS,
            min_gap: rep.min_gap(),
            min_norm_margin: rep.min_norm_margin(),
        })
    } else {
        None
    };
    Ok(SweepPoint {
        eps,
        decay_exponent,
        predicted_exponent: match family {
            Family::PaperFormula => 2.0 * eps,
            Family::PurePower => eps,
        },
        stated_exponent: eps,
        partial_sums,
        doubling_ratio,
        verdict_p,
        verdict_2p,
        lemma,
    })
}
