//! Singular-value analytics: Schatten norms, logarithmic means, decay fits and
//! the partial-sum evidence that stands in for ideal membership.
//!
//! A finite sequence can never prove membership in an operator ideal. What it
//! can show is whether its partial sums keep growing at every doubling of the
//! index or flatten out. [`summability_classify`] turns that into a
//! [`SummabilityVerdict`] and keeps the raw partial sums so the verdict can be
//! re-derived by anyone reading a report.

use serde::{Deserialize, Serialize};

use crate::error::{OilError, Result};
use crate::hardy::WindowedOperator;
use crate::linalg::{self, Mat};

/// Descending nonnegative singular values with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    source_label: String,
}

impl SingularSpectrum {
    /// Sorts `values` descending. Rejects negative or non-finite input.
    pub fn new(mut values: Vec<f64>, source_label: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(OilError::InvalidParameter(
                "singular values must be finite and nonnegative".into(),
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, source_label: source_label.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Spectrum of `x*x`, i.e. the squared singular values.
    pub fn squared(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v * v).collect(),
            source_label: format!("|{}|^2", self.source_label),
        }
    }
}

pub fn singular_values_of(m: &Mat, label: impl Into<String>) -> Result<SingularSpectrum> {
    if !linalg::is_finite(m) {
        return Err(OilError::NonFinite);
    }
    SingularSpectrum::new(linalg::singular_values_desc(m), label)
}

pub fn singular_values(a: &WindowedOperator) -> Result<SingularSpectrum> {
    singular_values_of(a.entries(), format!("{} on {}", a.label(), a.window()))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(OilError::InvalidParameter(format!("Schatten exponent must be positive, got {p}")));
    }
    Ok(())
}

/// `(Σ μ_k^p)^{1/p}`.
pub fn schatten_norm(s: &SingularSpectrum, p: f64) -> Result<f64> {
    check_p(p)?;
    let top = s.values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    // Scale by the largest value so large p does not underflow.
    let sum: f64 = s.values.iter().map(|v| (v / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// `S_N = Σ_{k<N} values_k^power`.
pub fn partial_sum(values: &[f64], power: f64, n: usize) -> f64 {
    values[..n.min(values.len())].iter().map(|v| v.powf(power)).sum()
}

/// Least-squares exponent `α` in `μ_k ≈ C k^{-α}` over `k_lo..=k_hi`.
pub fn decay_exponent(values: &[f64], k_lo: usize, k_hi: usize) -> Result<f64> {
    if k_lo < 1 {
        return Err(OilError::InvalidParameter("fit range must start at k >= 1".into()));
    }
    if k_hi >= values.len() {
        return Err(OilError::InvalidParameter(format!(
            "fit range end {k_hi} outside sequence of length {}",
            values.len()
        )));
    }
    if k_hi < k_lo || k_hi - k_lo + 1 < 8 {
        return Err(OilError::InvalidParameter("fit range needs at least 8 points".into()));
    }
    let mut sx = 0.0;
    let mut sy = 0.0;
    let n = (k_hi - k_lo + 1) as f64;
    for k in k_lo..=k_hi {
        if !(values[k] > 0.0) {
            return Err(OilError::ZeroInFitRange(k));
        }
        sx += (k as f64).ln();
        sy += values[k].ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for k in k_lo..=k_hi {
        let dx = (k as f64).ln() - mx;
        sxy += dx * (values[k].ln() - my);
        sxx += dx * dx;
    }
    Ok(-sxy / sxx)
}

/// `S_{2N} / S_N` at exponent `p`.
pub fn tail_doubling_ratio(values: &[f64], p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if 2 * n > values.len() {
        return Err(OilError::InvalidParameter(format!(
            "2N = {} exceeds sequence length {}",
            2 * n,
            values.len()
        )));
    }
    let s_n = partial_sum(values, p, n);
    if s_n == 0.0 {
        return Err(OilError::VanishingPartialSum(n));
    }
    Ok(partial_sum(values, p, 2 * n) / s_n)
}

/// Logarithmic mean `(Σ_{k<N} μ_k) / ln N`.
pub fn dixmier_estimate(values: &[f64], n: usize) -> Result<f64> {
    if n < 2 || n > values.len() {
        return Err(OilError::InvalidParameter(format!(
            "need 2 <= N <= {}, got {n}",
            values.len()
        )));
    }
    Ok(partial_sum(values, 1.0, n) / (n as f64).ln())
}

/// Operator ideal against which a sequence is tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealSpec {
    Schatten(f64),
    Dixmier(u32),
    SquareRootOf(Box<IdealSpec>),
}

impl IdealSpec {
    pub fn square_root_of(inner: IdealSpec) -> Self {
        IdealSpec::SquareRootOf(Box::new(inner))
    }

    /// Peels square-root layers: `x` is in `√J` iff `|x|²` is in `J`, so each
    /// layer doubles the power applied to the values.
    fn resolve(&self) -> Result<(BaseIdeal, f64)> {
        match self {
            IdealSpec::Schatten(p) => {
                check_p(*p)?;
                Ok((BaseIdeal::Schatten, *p))
            }
            IdealSpec::Dixmier(n) => {
                if *n < 1 {
                    return Err(OilError::InvalidParameter("Dixmier order must be >= 1".into()));
                }
                Ok((BaseIdeal::Dixmier(*n), 1.0))
            }
            IdealSpec::SquareRootOf(inner) => {
                let (base, power) = inner.resolve()?;
                Ok((base, 2.0 * power))
            }
        }
    }

    /// Effective Schatten exponent, when the ideal is a Schatten class.
    pub fn schatten_exponent(&self) -> Option<f64> {
        match self.resolve() {
            Ok((BaseIdeal::Schatten, p)) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BaseIdeal {
    Schatten,
    Dixmier(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Summable,
    Divergent,
    Inconclusive,
}

/// Growth thresholds for the doubling test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum relative growth per doubling counted as divergence.
    pub divergence: f64,
    /// Maximum relative growth over the last doubling counted as convergence.
    pub summable: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { divergence: 0.05, summable: 0.01 }
    }
}

/// Doubling ladder `N_max/4, N_max/2, N_max` with the statistic at each rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub indices: [usize; 3],
    /// Raw partial sums `Σ_{k<N} values_k^power`.
    pub partial_sums: [f64; 3],
    /// Partial sums after normalization (identical for Schatten classes).
    pub statistic: [f64; 3],
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityVerdict {
    pub verdict: Verdict,
    /// `log2(S_{N_max} / S_{N_max/2})`: 0 for a converging series, `1 - pβ`
    /// for a `k^{-β}` tail at exponent `p` with `pβ < 1`.
    pub measured_exponent: f64,
    pub evidence: Evidence,
    pub thresholds: Thresholds,
}

impl SummabilityVerdict {
    /// Re-applies the verdict rule to the recorded evidence.
    pub fn rederive(&self) -> Verdict {
        verdict_from_statistic(&self.evidence.statistic, &self.thresholds)
    }
}

fn verdict_from_statistic(s: &[f64; 3], t: &Thresholds) -> Verdict {
    let grows = |lo: f64, hi: f64| lo > 0.0 && hi / lo >= 1.0 + t.divergence;
    if grows(s[0], s[1]) && grows(s[1], s[2]) {
        return Verdict::Divergent;
    }
    if s[2] - s[1] <= t.summable * s[1] {
        return Verdict::Summable;
    }
    Verdict::Inconclusive
}

pub fn summability_classify(values: &[f64], spec: &IdealSpec, n_max: usize) -> Result<SummabilityVerdict> {
    summability_classify_with(values, spec, n_max, Thresholds::default())
}

/// Classifies `values` against `spec` from partial sums at `N_max/4`,
/// `N_max/2` and `N_max`.
///
/// Divergent when the statistic grows by at least `1 + δ_div` over both
/// doublings; summable when the last doubling adds at most `δ_sum` times the
/// previous value; inconclusive otherwise. Schatten classes use the partial
/// sums directly. Dixmier classes `L^{n+}` normalize `Σ μ_k` by `ln N` for
/// `n = 1` and by `N^{1-1/n}` otherwise, so "summable" reads as "bounded
/// logarithmic mean".
pub fn summability_classify_with(
    values: &[f64],
    spec: &IdealSpec,
    n_max: usize,
    thresholds: Thresholds,
) -> Result<SummabilityVerdict> {
    if !n_max.is_power_of_two() || n_max < 4 || n_max > values.len() {
        return Err(OilError::InvalidParameter(format!(
            "N_max must be a power of two in [4, {}], got {n_max}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(OilError::InvalidParameter("sequence must be finite and nonnegative".into()));
    }
    let (base, power) = spec.resolve()?;
    let indices = [n_max / 4, n_max / 2, n_max];
    let partial_sums = indices.map(|n| partial_sum(values, power, n));
    let statistic = match base {
        BaseIdeal::Schatten => partial_sums,
        BaseIdeal::Dixmier(order) => {
            if n_max < 8 {
                return Err(OilError::InvalidParameter(
                    "Dixmier classification needs N_max >= 8".into(),
                ));
            }
            let mut s = partial_sums;
            for (stat, &n) in s.iter_mut().zip(&indices) {
                let nf = n as f64;
                let norm = if order == 1 { nf.ln() } else { nf.powf(1.0 - 1.0 / order as f64) };
                *stat /= norm;
            }
            s
        }
    };
    let measured_exponent = if partial_sums[1] > 0.0 {
        (partial_sums[2] / partial_sums[1]).log2()
    } else {
        0.0
    };
    Ok(SummabilityVerdict {
        verdict: verdict_from_statistic(&statistic, &thresholds),
        measured_exponent,
        evidence: Evidence { indices, partial_sums, statistic, power },
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{lambda_sequence, Family};
    use crate::linalg::{diag_real, C64};

    fn power_law(beta: f64, len: usize) -> Vec<f64> {
        (0..len).map(|k| (1.0 + k as f64).powf(-beta)).collect()
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values_of(&linalg::identity(5), "I").unwrap();
        assert_eq!(s.values(), &[1.0; 5]);
        let s = singular_values_of(&diag_real([3.0, 1.0, 2.0]), "d").unwrap();
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);

        let u = Mat::from_fn(4, 1, |i, _| C64::new(i as f64, 1.0));
        let v = Mat::from_fn(1, 4, |_, j| C64::new(1.0, -(j as f64)));
        let s = singular_values_of(&(&u * &v), "uv*").unwrap();
        let expected = u.norm() * v.norm();
        assert!((s.values()[0] - expected).abs() < 1e-12);
        assert!(s.values()[1..].iter().all(|x| *x < 1e-12));
    }

    #[test]
    fn singular_values_reject_nan() {
        let mut m = linalg::identity(3);
        m[(1, 2)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(singular_values_of(&m, "bad"), Err(OilError::NonFinite)));
    }

    #[test]
    fn schatten_examples() {
        let m = Mat::from_fn(3, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64));
        let s = singular_values_of(&m, "m").unwrap();
        assert!((schatten_norm(&s, 2.0).unwrap() - m.norm()).abs() < 1e-12);

        let zero = SingularSpectrum::new(vec![0.0; 4], "0").unwrap();
        assert_eq!(schatten_norm(&zero, 3.0).unwrap(), 0.0);

        let d = SingularSpectrum::new(vec![1.0, 1.0], "1").unwrap();
        assert!((schatten_norm(&d, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((schatten_norm(&d, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(schatten_norm(&d, 0.0).is_err());
        assert!(schatten_norm(&d, -1.0).is_err());
    }

    #[test]
    fn decay_exponent_examples() {
        let exact: Vec<f64> = (0..200).map(|k| if k == 0 { 1.0 } else { (k as f64).powi(-2) }).collect();
        assert!((decay_exponent(&exact, 1, 199).unwrap() - 2.0).abs() < 1e-6);

        let lam = lambda_sequence(0.4, Family::PaperFormula, 1 << 12 | 1).unwrap();
        let alpha = decay_exponent(&lam, 1 << 10, 1 << 12).unwrap();
        assert!((alpha - 0.8).abs() < 0.05 * 0.8, "alpha = {alpha}");

        let flat = vec![0.5; 64];
        assert!(decay_exponent(&flat, 1, 63).unwrap().abs() < 1e-12);
    }

    #[test]
    fn decay_exponent_errors() {
        let mut v = power_law(1.0, 64);
        assert!(decay_exponent(&v, 0, 20).is_err());
        assert!(decay_exponent(&v, 1, 5).is_err());
        assert!(decay_exponent(&v, 1, 64).is_err());
        v[10] = 0.0;
        assert!(matches!(decay_exponent(&v, 1, 20), Err(OilError::ZeroInFitRange(10))));
    }

    #[test]
    fn doubling_ratio_examples() {
        // Harmonic oracle: H_{2N} / H_N with H computed term by term.
        let v: Vec<f64> = (0..1 << 17).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let n = 1 << 16;
        let h = |m: usize| (1..=m).map(|j| 1.0 / j as f64).sum::<f64>();
        let r = tail_doubling_ratio(&v, 1.0, n).unwrap();
        assert!((r - h(2 * n) / h(n)).abs() < 1e-12);
        assert!(r > 1.0 && r < 1.07);

        // Integral comparison: Σ_{k<N} (k+1)^{-β p} ~ N^{1-pβ}/(1-pβ).
        let beta = 0.3;
        let v = power_law(beta, 1 << 18);
        let r = tail_doubling_ratio(&v, 1.0, 1 << 17).unwrap();
        assert!((r - 2f64.powf(1.0 - beta)).abs() < 0.01, "r = {r}");

        let g: Vec<f64> = (0..64).map(|k| 0.5f64.powi(k)).collect();
        assert!((tail_doubling_ratio(&g, 1.0, 32).unwrap() - 1.0).abs() < 1e-9);

        assert!(matches!(
            tail_doubling_ratio(&[0.0; 8], 1.0, 4),
            Err(OilError::VanishingPartialSum(4))
        ));
        assert!(tail_doubling_ratio(&g, 1.0, 40).is_err());
    }

    #[test]
    fn dixmier_examples() {
        let harmonic: Vec<f64> = (0..1 << 20).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let d10 = dixmier_estimate(&harmonic, 1 << 10).unwrap();
        let d20 = dixmier_estimate(&harmonic, 1 << 20).unwrap();
        assert!(d20 < d10);
        assert!((d20 - 1.0).abs() < 0.05);

        let trace_class: Vec<f64> = (0..1 << 20).map(|k| (k as f64 + 1.0).powi(-2)).collect();
        let t10 = dixmier_estimate(&trace_class, 1 << 10).unwrap();
        let t20 = dixmier_estimate(&trace_class, 1 << 20).unwrap();
        assert!(t20 < t10 && t20 < 0.12);

        assert_eq!(dixmier_estimate(&[0.0; 16], 16).unwrap(), 0.0);
        assert!(dixmier_estimate(&[1.0; 4], 1).is_err());
    }

    #[test]
    fn classify_examples() {
        let n = 1 << 16;
        let lam = lambda_sequence(0.8, Family::PaperFormula, n).unwrap();
        let v = summability_classify(&lam, &IdealSpec::Schatten(2.0), n).unwrap();
        assert_eq!(v.verdict, Verdict::Summable);

        let slow = power_law(0.3, n);
        let v = summability_classify(&slow, &IdealSpec::Schatten(2.0), n).unwrap();
        assert_eq!(v.verdict, Verdict::Divergent);
        assert!((v.measured_exponent - 0.4).abs() < 0.01);

        let mut finite = vec![0.0; 64];
        finite[..5].copy_from_slice(&[3.0, 2.0, 1.0, 0.5, 0.1]);
        let v = summability_classify(&finite, &IdealSpec::Schatten(1.0), 64).unwrap();
        assert_eq!(v.verdict, Verdict::Summable);

        let zeros = vec![0.0; 16];
        let v = summability_classify(&zeros, &IdealSpec::Schatten(1.0), 16).unwrap();
        assert_eq!(v.verdict, Verdict::Summable);
    }

    #[test]
    fn classify_square_root_matches_doubled_exponent() {
        let v = power_law(0.4, 1 << 14);
        let root = summability_classify(&v, &IdealSpec::square_root_of(IdealSpec::Schatten(1.5)), 1 << 14).unwrap();
        let direct = summability_classify(&v, &IdealSpec::Schatten(3.0), 1 << 14).unwrap();
        assert_eq!(root, direct);
        assert_eq!(IdealSpec::square_root_of(IdealSpec::Schatten(2.0)).schatten_exponent(), Some(4.0));
    }

    #[test]
    fn classify_dixmier() {
        let n = 1 << 16;
        let harmonic: Vec<f64> = (0..n).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let v = summability_classify(&harmonic, &IdealSpec::Dixmier(1), n).unwrap();
        assert_eq!(v.verdict, Verdict::Summable);
        let root = power_law(0.5, n);
        let v = summability_classify(&root, &IdealSpec::Dixmier(1), n).unwrap();
        assert_eq!(v.verdict, Verdict::Divergent);
        let v = summability_classify(&root, &IdealSpec::Dixmier(2), n).unwrap();
        assert_eq!(v.verdict, Verdict::Summable);
    }

    #[test]
    fn classify_preconditions() {
        let v = vec![1.0; 100];
        assert!(summability_classify(&v, &IdealSpec::Schatten(1.0), 96).is_err());
        assert!(summability_classify(&v, &IdealSpec::Schatten(1.0), 128).is_err());
        assert!(summability_classify(&v, &IdealSpec::Schatten(0.0), 64).is_err());
    }

    #[test]
    fn squared_spectrum() {
        let s = SingularSpectrum::new(vec![2.0, 3.0], "x").unwrap();
        assert_eq!(s.squared().values(), &[9.0, 4.0]);
    }
}
