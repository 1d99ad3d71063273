//! Dense complex matrix helpers shared by the operator modules.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn adjoint(m: &Mat) -> Mat {
    m.adjoint()
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn diag(values: impl IntoIterator<Item = C64>) -> Mat {
    let v: Vec<C64> = values.into_iter().collect();
    Mat::from_diagonal(&nalgebra::DVector::from_vec(v))
}

pub fn diag_real(values: impl IntoIterator<Item = f64>) -> Mat {
    diag(values.into_iter().map(c))
}

/// Block-diagonal `a ⊕ b`.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Mat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `a * b`, scaling rows or columns when a square factor is diagonal.
pub fn product(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.nrows(), "product: inner dimensions differ");
    if a.is_square() && is_diagonal(a) {
        let mut out = b.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= a[(i, i)];
        }
        out
    } else if b.is_square() && is_diagonal(b) {
        let mut out = a.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= b[(j, j)];
        }
        out
    } else {
        a * b
    }
}

fn is_diagonal(m: &Mat) -> bool {
    let (r, c) = m.shape();
    (0..c).all(|j| (0..r).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Singular values in descending order.
pub fn singular_values_desc(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    if m.iter().all(|z| *z == ZERO) {
        return vec![0.0; m.nrows().min(m.ncols())];
    }
    let mut s: Vec<f64> = if m.is_square() && is_diagonal(m) {
        m.diagonal().iter().map(|z| z.norm()).collect()
    } else {
        m.clone().svd(false, false).singular_values.iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &Mat) -> f64 {
    singular_values_desc(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &Mat, rel_tol: f64) -> usize {
    let s = singular_values_desc(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

/// Matrix of i.i.d. standard complex Gaussians (unit variance per entry).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Gaussian Hermitian matrix scaled to unit operator norm.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let g = complex_gaussian(n, n, rng);
    let h = (&g + g.adjoint()) * c(0.5);
    let norm = op_norm(&h);
    if norm > 0.0 {
        h * c(1.0 / norm)
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diag_singular_values_sorted() {
        let m = diag_real([3.0, 1.0, 2.0]);
        assert_eq!(singular_values_desc(&m), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn direct_sum_shape() {
        let a = identity(2);
        let b = Mat::zeros(3, 1);
        let s = direct_sum(&a, &b);
        assert_eq!(s.shape(), (5, 3));
        assert_eq!(s[(1, 1)], ONE);
        assert_eq!(s[(4, 2)], ZERO);
    }

    #[test]
    fn hermitian_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        assert!((op_norm(&h) - 1.0).abs() < 1e-12);
        assert!((&h - h.adjoint()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rank_of_outer_product() {
        let u = Mat::from_fn(5, 1, |i, _| c(i as f64 + 1.0));
        let v = Mat::from_fn(1, 5, |_, j| C64::new(0.0, j as f64 - 2.0));
        assert_eq!(numerical_rank(&(u * v), 1e-10), 1);
    }

    #[test]
    fn diagonal_product_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = complex_gaussian(4, 4, &mut rng);
        let d = diag([C64::new(1.0, 2.0), c(-0.5), ZERO, C64::new(0.0, 3.0)]);
        assert!((product(&d, &g) - &d * &g).iter().all(|z| z.norm() < 1e-15));
        assert!((product(&g, &d) - &g * &d).iter().all(|z| z.norm() < 1e-15));
        assert!((product(&g, &g) - &g * &g).iter().all(|z| z.norm() < 1e-15));
    }
}
