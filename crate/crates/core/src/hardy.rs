//! Finite Fourier-window model of `L²(S¹)` and its Hardy subspace.
//!
//! Operators live on a contiguous window of modes `[lo, hi]`. Truncating the
//! multiplication operator to a window only perturbs rows and columns within
//! one bandwidth of either edge, so a product of depth `m` of symbols with
//! total bandwidth `B` is exact on the modes `[lo + mB, hi - mB]`. That
//! interior is the [`GuardBand`], and every identity check restricts to it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use crate::error::{OilError, Result};
use crate::linalg::{self, C64, Mat, ONE, ZERO};

/// Trigonometric polynomial `a(z) = Σ a_k z^k` with finite support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Symbol {
    coefficients: BTreeMap<i64, C64>,
}

impl Symbol {
    /// Builds a symbol from `(degree, amplitude)` pairs. Zero amplitudes are
    /// dropped; repeated degrees are rejected.
    pub fn new(pairs: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for (k, amp) in pairs {
            if !seen.insert(k) {
                return Err(OilError::DuplicateDegree(k));
            }
            if amp != ZERO {
                coefficients.insert(k, amp);
            }
        }
        Ok(Self { coefficients })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: C64) -> Self {
        Self::monomial(0, value)
    }

    pub fn monomial(degree: i64, amplitude: C64) -> Self {
        let mut coefficients = BTreeMap::new();
        if amplitude != ZERO {
            coefficients.insert(degree, amplitude);
        }
        Self { coefficients }
    }

    /// The coordinate function `a(z) = z`.
    pub fn z() -> Self {
        Self::monomial(1, ONE)
    }

    /// `z̄ = z⁻¹` on the circle.
    pub fn z_bar() -> Self {
        Self::monomial(-1, ONE)
    }

    pub fn coefficient(&self, degree: i64) -> C64 {
        self.coefficients.get(&degree).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coefficients.iter().map(|(&k, &v)| (k, v))
    }

    pub fn support_len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Largest `|k|` with a nonzero coefficient; 0 for the zero symbol.
    pub fn bandwidth(&self) -> usize {
        self.coefficients
            .keys()
            .map(|k| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// True when no strictly negative mode is present.
    pub fn is_analytic(&self) -> bool {
        self.coefficients.keys().all(|&k| k >= 0)
    }

    /// Pointwise product, i.e. convolution of coefficient sequences.
    pub fn product(&self, other: &Symbol) -> Symbol {
        let mut acc: BTreeMap<i64, C64> = BTreeMap::new();
        for (&j, &x) in &self.coefficients {
            for (&k, &y) in &other.coefficients {
                *acc.entry(j + k).or_insert(ZERO) += x * y;
            }
        }
        acc.retain(|_, v| *v != ZERO);
        Symbol { coefficients: acc }
    }

    /// `ā`, with coefficient `conj(a_{-k})` at degree `k`.
    pub fn conjugate(&self) -> Symbol {
        Symbol {
            coefficients: self.coefficients.iter().map(|(&k, &v)| (-k, v.conj())).collect(),
        }
    }

    /// Rotation action `(R_θ a)_k = e^{ikθ} a_k`.
    pub fn rotate(&self, theta: f64) -> Symbol {
        Symbol {
            coefficients: self
                .coefficients
                .iter()
                .map(|(&k, &v)| (k, v * C64::from_polar(1.0, k as f64 * theta)))
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Symbol {
        Symbol::new(self.iter().map(|(k, v)| (k, v * s))).expect("distinct degrees")
    }

    /// Evaluates `a` at `e^{iθ}`.
    pub fn eval(&self, theta: f64) -> C64 {
        self.iter()
            .map(|(k, v)| v * C64::from_polar(1.0, k as f64 * theta))
            .sum()
    }
}

impl std::ops::Add for &Symbol {
    type Output = Symbol;

    fn add(self, rhs: &Symbol) -> Symbol {
        let mut acc = self.coefficients.clone();
        for (&k, &v) in &rhs.coefficients {
            *acc.entry(k).or_insert(ZERO) += v;
        }
        acc.retain(|_, v| *v != ZERO);
        Symbol { coefficients: acc }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .iter()
            .map(|(k, v)| format!("({}{:+}i)z^{}", v.re, v.im, k))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

pub fn make_symbol(pairs: impl IntoIterator<Item = (i64, C64)>) -> Result<Symbol> {
    Symbol::new(pairs)
}

pub fn symbol_product(a: &Symbol, b: &Symbol) -> Symbol {
    a.product(b)
}

pub fn symbol_conjugate(a: &Symbol) -> Symbol {
    a.conjugate()
}

/// Contiguous range of Fourier modes `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(OilError::InvalidParameter(format!(
                "window lower mode {lo} exceeds upper mode {hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Hardy-only window `[0, n-1]`.
    pub fn hardy(n: usize) -> Self {
        assert!(n >= 1, "empty Hardy window");
        Self { lo: 0, hi: n as i64 - 1 }
    }

    /// Symmetric window `[-n, n]`.
    pub fn symmetric(n: usize) -> Self {
        Self { lo: -(n as i64), hi: n as i64 }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, mode: i64) -> bool {
        (self.lo..=self.hi).contains(&mode)
    }

    pub fn index(&self, mode: i64) -> Option<usize> {
        self.contains(mode).then(|| (mode - self.lo) as usize)
    }

    pub fn mode(&self, index: usize) -> i64 {
        self.lo + index as i64
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn is_hardy_only(&self) -> bool {
        self.lo >= 0
    }

    pub fn has_negative_modes(&self) -> bool {
        self.lo < 0
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Interior modes on which a product of given depth is free of truncation
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuardBand {
    window: Window,
    lo: i64,
    hi: i64,
}

impl GuardBand {
    /// Guard `g = depth * bandwidth` on both window edges. Fails when the
    /// interior is empty.
    pub fn new(window: Window, depth: usize, bandwidth: usize) -> Result<Self> {
        let g = (depth * bandwidth) as i64;
        let lo = window.lo + g;
        let hi = window.hi - g;
        if lo > hi {
            return Err(OilError::GuardViolation {
                depth,
                bandwidth,
                required: 2 * depth * bandwidth + 1,
                actual: window.dim(),
            });
        }
        Ok(Self { window, lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, mode: i64) -> bool {
        (self.lo..=self.hi).contains(&mode)
    }

    /// Matrix index range of the guarded modes.
    pub fn indices(&self) -> Range<usize> {
        let start = (self.lo - self.window.lo) as usize;
        let end = (self.hi - self.window.lo) as usize + 1;
        start..end
    }

    /// Copies the guarded principal submatrix of `m`.
    pub fn restrict(&self, m: &Mat) -> Mat {
        let r = self.indices();
        m.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    /// Operator norm of the guarded principal submatrix.
    pub fn norm(&self, m: &Mat) -> f64 {
        linalg::op_norm(&self.restrict(m))
    }
}

/// Dense operator indexed by the modes of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedOperator {
    window: Window,
    entries: Mat,
    label: String,
}

impl WindowedOperator {
    pub fn new(window: Window, entries: Mat, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() != window.dim() || entries.ncols() != window.dim() {
            return Err(OilError::DimensionMismatch {
                expected: window.dim(),
                actual: entries.nrows().max(entries.ncols()),
            });
        }
        if !linalg::is_finite(&entries) {
            return Err(OilError::NonFinite);
        }
        Ok(Self { window, entries, label: label.into() })
    }

    /// Internal constructor for matrices built from finite inputs.
    pub(crate) fn from_parts(window: Window, entries: Mat, label: impl Into<String>) -> Self {
        debug_assert_eq!(entries.nrows(), window.dim());
        Self { window, entries, label: label.into() }
    }

    pub fn zeros(window: Window, label: impl Into<String>) -> Self {
        Self::from_parts(window, Mat::zeros(window.dim(), window.dim()), label)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn into_entries(self) -> Mat {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Entry at modes `(row, col)`; zero outside the window.
    pub fn at(&self, row: i64, col: i64) -> C64 {
        match (self.window.index(row), self.window.index(col)) {
            (Some(i), Some(j)) => self.entries[(i, j)],
            _ => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.window, self.entries.adjoint(), format!("({})*", self.label))
    }

    pub fn compose(&self, rhs: &WindowedOperator) -> Result<Self> {
        self.same_window(rhs)?;
        Ok(Self::from_parts(
            self.window,
            &self.entries * &rhs.entries,
            format!("{}·{}", self.label, rhs.label),
        ))
    }

    pub fn sub(&self, rhs: &WindowedOperator) -> Result<Self> {
        self.same_window(rhs)?;
        Ok(Self::from_parts(
            self.window,
            &self.entries - &rhs.entries,
            format!("{} - {}", self.label, rhs.label),
        ))
    }

    pub fn add(&self, rhs: &WindowedOperator) -> Result<Self> {
        self.same_window(rhs)?;
        Ok(Self::from_parts(
            self.window,
            &self.entries + &rhs.entries,
            format!("{} + {}", self.label, rhs.label),
        ))
    }

    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.entries)
    }

    /// Zero-extends an operator on a sub-window to `target`.
    pub fn embed(&self, target: Window) -> Result<Self> {
        if !target.contains_window(&self.window) {
            return Err(OilError::WindowMismatch(format!(
                "{} does not fit inside {}",
                self.window, target
            )));
        }
        let off = (self.window.lo - target.lo) as usize;
        let mut m = Mat::zeros(target.dim(), target.dim());
        m.view_mut((off, off), (self.dim(), self.dim())).copy_from(&self.entries);
        Ok(Self::from_parts(target, m, self.label.clone()))
    }

    fn same_window(&self, rhs: &WindowedOperator) -> Result<()> {
        if self.window != rhs.window {
            return Err(OilError::WindowMismatch(format!(
                "{} vs {}",
                self.window, rhs.window
            )));
        }
        Ok(())
    }
}

/// `M_a` on `w`: entry `(j, k)` is `a_{j-k}`.
pub fn multiplication_operator(a: &Symbol, w: Window) -> WindowedOperator {
    let n = w.dim();
    let mut m = Mat::zeros(n, n);
    for k in 0..n {
        for (deg, amp) in a.iter() {
            let row = k as i64 + deg;
            if (0..n as i64).contains(&row) {
                m[(row as usize, k)] = amp;
            }
        }
    }
    WindowedOperator::from_parts(w, m, format!("M[{a}]"))
}

/// Orthogonal projection onto the modes `k >= 0`.
pub fn hardy_projection(w: Window) -> WindowedOperator {
    let m = linalg::diag_real(w.modes().map(|k| if k >= 0 { 1.0 } else { 0.0 }));
    WindowedOperator::from_parts(w, m, "P")
}

/// `1 - P`, projection onto the negative modes.
pub fn complement_projection(w: Window) -> WindowedOperator {
    let m = linalg::diag_real(w.modes().map(|k| if k < 0 { 1.0 } else { 0.0 }));
    WindowedOperator::from_parts(w, m, "P'")
}

/// Diagonal unitary `U_θ = diag(e^{ikθ})`.
pub fn rotation_unitary(theta: f64, w: Window) -> WindowedOperator {
    let m = linalg::diag(w.modes().map(|k| C64::from_polar(1.0, k as f64 * theta)));
    WindowedOperator::from_parts(w, m, format!("U[{theta}]"))
}

fn sandwich(left: &Mat, mid: &Mat, right: &Mat) -> Mat {
    left * mid * right
}

/// Toeplitz compression `P M_a P`.
pub fn toeplitz_compress(a: &Symbol, w: Window) -> WindowedOperator {
    let p = hardy_projection(w);
    let ma = multiplication_operator(a, w);
    WindowedOperator::from_parts(
        w,
        sandwich(p.entries(), ma.entries(), p.entries()),
        format!("T[{a}]"),
    )
}

fn require_negative_modes(w: Window) -> Result<()> {
    if !w.has_negative_modes() {
        return Err(OilError::HardyOnlyWindow { lo: w.lo(), hi: w.hi() });
    }
    Ok(())
}

/// Hankel operator `(1 - P) M_a P`.
pub fn hankel_operator(a: &Symbol, w: Window) -> Result<WindowedOperator> {
    require_negative_modes(w)?;
    let p = hardy_projection(w);
    let q = complement_projection(w);
    let ma = multiplication_operator(a, w);
    Ok(WindowedOperator::from_parts(
        w,
        sandwich(q.entries(), ma.entries(), p.entries()),
        format!("H[{a}]"),
    ))
}

/// Commutator `[P, M_a] = P M_a - M_a P`.
pub fn projection_commutator(a: &Symbol, w: Window) -> Result<WindowedOperator> {
    require_negative_modes(w)?;
    let p = hardy_projection(w);
    let ma = multiplication_operator(a, w);
    let m = p.entries() * ma.entries() - ma.entries() * p.entries();
    Ok(WindowedOperator::from_parts(w, m, format!("[P, M[{a}]]")))
}

/// Output of [`splitting_defect`].
#[derive(Debug, Clone)]
pub struct SplittingDefect {
    /// `T_{ab} - T_a T_b`.
    pub defect: WindowedOperator,
    /// `T_{ā} - (T_a)*`.
    pub adjoint_defect: WindowedOperator,
    pub guard: GuardBand,
}

impl SplittingDefect {
    pub fn defect_norm(&self) -> f64 {
        self.guard.norm(self.defect.entries())
    }

    pub fn adjoint_defect_norm(&self) -> f64 {
        self.guard.norm(self.adjoint_defect.entries())
    }
}

/// Multiplicativity and adjoint defects of the Toeplitz splitting.
pub fn splitting_defect(a: &Symbol, b: &Symbol, w: Window) -> Result<SplittingDefect> {
    let guard = GuardBand::new(w, 2, a.bandwidth() + b.bandwidth())?;
    let ab = a.product(b);
    let ta = toeplitz_compress(a, w);
    let tb = toeplitz_compress(b, w);
    let tab = toeplitz_compress(&ab, w);
    let defect = WindowedOperator::from_parts(
        w,
        tab.entries() - ta.entries() * tb.entries(),
        "T[ab] - T[a]T[b]".to_string(),
    );
    let ta_bar = toeplitz_compress(&a.conjugate(), w);
    let adjoint_defect = WindowedOperator::from_parts(
        w,
        ta_bar.entries() - ta.entries().adjoint(),
        "T[ā] - T[a]*",
    );
    Ok(SplittingDefect { defect, adjoint_defect, guard })
}

/// `P M_a (1-P) M_b P`, the Hankel-product form of the Toeplitz defect.
pub fn hankel_product(a: &Symbol, b: &Symbol, w: Window) -> WindowedOperator {
    let p = hardy_projection(w);
    let q = complement_projection(w);
    let ma = multiplication_operator(a, w);
    let mb = multiplication_operator(b, w);
    let m = p.entries() * ma.entries() * q.entries() * mb.entries() * p.entries();
    WindowedOperator::from_parts(w, m, "P M[a] P' M[b] P")
}

/// `‖τ(R_θ a) - U_θ τ(a) U_θ*‖` for the Toeplitz splitting τ.
pub fn rotation_equivariance_residual(a: &Symbol, theta: f64, w: Window) -> f64 {
    let rotated = toeplitz_compress(&a.rotate(theta), w);
    let u = rotation_unitary(theta, w);
    let conj = u.entries() * toeplitz_compress(a, w).entries() * u.entries().adjoint();
    linalg::op_norm(&(rotated.entries() - conj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, numerical_rank};

    fn ci(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn make_symbol_examples() {
        let a = make_symbol([(1, ci(1.0, 0.0))]).unwrap();
        assert_eq!(a.bandwidth(), 1);
        assert_eq!(a.coefficient(1), ONE);

        let zero = make_symbol(std::iter::empty()).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.bandwidth(), 0);

        let b = make_symbol([(-2, ci(0.0, 1.0)), (2, ci(0.0, -1.0))]).unwrap();
        assert_eq!(b.bandwidth(), 2);
    }

    #[test]
    fn make_symbol_rejects_duplicates_and_drops_zeros() {
        match make_symbol([(3, ONE), (3, ONE)]) {
            Err(OilError::DuplicateDegree(3)) => {}
            other => panic!("unexpected {other:?}"),
        }
        let a = make_symbol([(5, ZERO), (1, ONE)]).unwrap();
        assert_eq!(a.bandwidth(), 1);
        assert_eq!(a.support_len(), 1);
    }

    #[test]
    fn product_examples() {
        let z = Symbol::z();
        assert_eq!(symbol_product(&z, &z), Symbol::monomial(2, ONE));
        let a = make_symbol([(-1, ci(2.0, 1.0)), (3, ci(0.5, 0.0))]).unwrap();
        assert_eq!(a.product(&Symbol::constant(ONE)), a);
        assert_eq!(z.product(&Symbol::z_bar()), Symbol::constant(ONE));
    }

    #[test]
    fn product_bandwidth_bound() {
        let a = make_symbol([(-3, ONE), (1, ONE)]).unwrap();
        let b = make_symbol([(2, ONE), (-1, ci(0.0, 1.0))]).unwrap();
        assert!(a.product(&b).bandwidth() <= a.bandwidth() + b.bandwidth());
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(symbol_conjugate(&Symbol::z()), Symbol::z_bar());
        let r = Symbol::constant(c(2.5));
        assert_eq!(r.conjugate(), r);
        let a = Symbol::monomial(2, ci(0.0, 1.0));
        assert_eq!(a.conjugate(), Symbol::monomial(-2, ci(0.0, -1.0)));
    }

    #[test]
    fn conjugate_is_pointwise() {
        let a = make_symbol([(-2, ci(0.3, 1.0)), (0, ci(1.0, -2.0)), (1, ci(0.0, 0.7))]).unwrap();
        for theta in [0.0, 0.4, 2.1] {
            assert!((a.conjugate().eval(theta) - a.eval(theta).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn multiplication_examples() {
        let w = Window::new(-3, 4).unwrap();
        assert_eq!(
            multiplication_operator(&Symbol::constant(ONE), w).entries(),
            &linalg::identity(w.dim())
        );

        let h = Window::hardy(4);
        let mz = multiplication_operator(&Symbol::z(), h);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j + 1 { ONE } else { ZERO };
                assert_eq!(mz.entries()[(i, j)], expected);
            }
        }

        let cosine = &Symbol::z() + &Symbol::z_bar();
        let m = multiplication_operator(&cosine, w);
        for i in 0..w.dim() {
            for j in 0..w.dim() {
                let expected = if i.abs_diff(j) == 1 { ONE } else { ZERO };
                assert_eq!(m.entries()[(i, j)], expected);
            }
        }
    }

    #[test]
    fn hardy_projection_examples() {
        let p = hardy_projection(Window::symmetric(2));
        let d: Vec<f64> = p.entries().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        let h = Window::hardy(6);
        assert_eq!(hardy_projection(h).entries(), &linalg::identity(6));
        let e = p.entries();
        assert_eq!(&(e * e), e);
        assert_eq!(&e.adjoint(), e);
    }

    #[test]
    fn toeplitz_examples() {
        let h = Window::hardy(8);
        let tz = toeplitz_compress(&Symbol::z(), h);
        for k in 0..7 {
            assert_eq!(tz.at(k + 1, k), ONE);
        }
        let w = Window::symmetric(3);
        assert_eq!(
            toeplitz_compress(&Symbol::constant(ONE), w).entries(),
            hardy_projection(w).entries()
        );
        let tzb = toeplitz_compress(&Symbol::z_bar(), h);
        assert!((0..8).all(|j| tzb.at(j, 0) == ZERO));
        for k in 1..8 {
            assert_eq!(tzb.at(k - 1, k), ONE);
        }
    }

    #[test]
    fn hankel_examples() {
        let w = Window::symmetric(4);
        let analytic = make_symbol([(0, ONE), (1, c(2.0)), (3, ci(0.0, 1.0))]).unwrap();
        assert!(hankel_operator(&analytic, w).unwrap().entries().iter().all(|z| *z == ZERO));

        let w1 = Window::new(-1, 1).unwrap();
        let h = hankel_operator(&Symbol::z_bar(), w1).unwrap();
        assert_eq!(h.at(-1, 0), ONE);
        assert_eq!(numerical_rank(h.entries(), 1e-10), 1);

        let a = make_symbol([(-3, ONE), (-1, c(0.5)), (2, c(0.25))]).unwrap();
        let h = hankel_operator(&a, Window::symmetric(10)).unwrap();
        assert!(numerical_rank(h.entries(), 1e-10) <= a.bandwidth());
    }

    #[test]
    fn hankel_rejects_hardy_window() {
        assert!(matches!(
            hankel_operator(&Symbol::z(), Window::hardy(4)),
            Err(OilError::HardyOnlyWindow { .. })
        ));
        assert!(projection_commutator(&Symbol::z(), Window::hardy(4)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let w = Window::symmetric(4);
        let c1 = projection_commutator(&Symbol::constant(ONE), w).unwrap();
        assert!(c1.entries().iter().all(|z| *z == ZERO));

        let cosine = &Symbol::z() + &Symbol::z_bar();
        let cm = projection_commutator(&cosine, w).unwrap();
        assert!(numerical_rank(cm.entries(), 1e-10) <= 2);

        let shifted = &cosine + &Symbol::constant(c(3.0));
        let cs = projection_commutator(&shifted, w).unwrap();
        assert!((cm.op_norm() - cs.op_norm()).abs() < 1e-14);
    }

    #[test]
    fn splitting_defect_examples() {
        let w = Window::symmetric(6);
        let d = splitting_defect(&Symbol::z(), &Symbol::z_bar(), w).unwrap();
        let r = d.guard.indices();
        for i in r.clone() {
            for j in r.clone() {
                let (mi, mj) = (w.mode(i), w.mode(j));
                let expected = if mi == 0 && mj == 0 { ONE } else { ZERO };
                assert!((d.defect.entries()[(i, j)] - expected).norm() < 1e-14);
            }
        }

        let a = make_symbol([(0, c(1.0)), (2, ci(0.0, 1.0))]).unwrap();
        let b = make_symbol([(1, c(-2.0)), (3, c(0.5))]).unwrap();
        let d = splitting_defect(&a, &b, Window::symmetric(20)).unwrap();
        assert!(d.defect_norm() < 1e-14);

        let mixed = make_symbol([(-2, ci(1.0, 1.0)), (1, c(0.3))]).unwrap();
        let d = splitting_defect(&mixed, &Symbol::z(), Window::symmetric(12)).unwrap();
        assert_eq!(d.adjoint_defect_norm(), 0.0);
    }

    #[test]
    fn splitting_defect_guard_violation() {
        let a = Symbol::monomial(4, ONE);
        let err = splitting_defect(&a, &a, Window::symmetric(3)).unwrap_err();
        match err {
            OilError::GuardViolation { required, actual, .. } => {
                assert_eq!(required, 33);
                assert_eq!(actual, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_examples() {
        let w = Window::symmetric(6);
        let cosine = &Symbol::z() + &Symbol::z_bar();
        assert_eq!(rotation_equivariance_residual(&cosine, 0.0, w), 0.0);
        assert!(rotation_equivariance_residual(&Symbol::z(), std::f64::consts::FRAC_PI_3, w) <= 1e-12);
        assert!(rotation_equivariance_residual(&cosine, 1.0, w) <= 1e-12);
    }

    #[test]
    fn embed_zero_extends() {
        let t = WindowedOperator::from_parts(Window::hardy(3), linalg::identity(3), "I");
        let e = t.embed(Window::new(-2, 3).unwrap()).unwrap();
        assert_eq!(e.at(0, 0), ONE);
        assert_eq!(e.at(3, 3), ZERO);
        assert_eq!(e.at(-1, -1), ZERO);
        assert!(t.embed(Window::hardy(2)).is_err());
    }
}
