use oil::deformation::{self, Family};
use oil::extension;
use oil::hardy::{self, Symbol, Window, WindowedOperator};
use oil::linalg::{self, numerical_rank, Mat, C64};
use oil::report;
use oil::spectral::{self, IdealSpec, SingularSpectrum, Verdict};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symbol(max_bw: i64) -> impl Strategy<Value = Symbol> {
    prop::collection::btree_map(-max_bw..=max_bw, (-2.0f64..2.0, -2.0f64..2.0), 1..5)
        .prop_map(|m| Symbol::new(m.into_iter().map(|(d, (re, im))| (d, C64::new(re, im)))).unwrap())
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> Mat {
    linalg::complex_gaussian(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn toeplitz_defect_is_hankel_product(a in symbol(4), b in symbol(4)) {
        let w = Window::new(-24, 24).unwrap();
        let d = hardy::splitting_defect(&a, &b, w).unwrap();
        let hp = hardy::hankel_product(&a, &b, w);
        prop_assert!(d.guard.norm(&(d.defect.entries() - hp.entries())) <= 1e-12);
        prop_assert!(d.adjoint_defect_norm() <= 1e-12);
    }

    #[test]
    fn commutator_rank_at_most_twice_bandwidth(a in symbol(5)) {
        let w = Window::new(-20, 20).unwrap();
        let comm = hardy::projection_commutator(&a, w).unwrap();
        prop_assert!(numerical_rank(comm.entries(), 1e-10) <= 2 * a.bandwidth());
    }

    #[test]
    fn analytic_symbols_have_no_hankel(a in symbol(3)) {
        let analytic = Symbol::new(a.iter().map(|(d, v)| (d.abs(), v)).collect::<std::collections::BTreeMap<_, _>>()).unwrap();
        let h = hardy::hankel_operator(&analytic, Window::new(-10, 10).unwrap()).unwrap();
        prop_assert_eq!(h.op_norm(), 0.0);
    }

    #[test]
    fn rotation_equivariance(a in symbol(4), theta in -3.2f64..3.2) {
        let w = Window::new(-12, 12).unwrap();
        prop_assert!(hardy::rotation_equivariance_residual(&a, theta, w) <= 1e-12);
    }

    #[test]
    fn singular_values_unitarily_invariant(seed in any::<u64>(), n in 2usize..12) {
        let x = gaussian(n, n, seed);
        let u = deformation::haar_unitary(n, seed ^ 1).unwrap().into_entries();
        let v = deformation::haar_unitary(n, seed ^ 2).unwrap().into_entries();
        let s = linalg::singular_values_desc(&x);
        let t = linalg::singular_values_desc(&(&u * &x * &v));
        prop_assert!(max_diff(&s, &t) <= 1e-10 * s[0].max(1.0));
    }

    #[test]
    fn squared_spectrum(seed in any::<u64>(), n in 1usize..16) {
        let x = gaussian(n, n, seed);
        let s = linalg::singular_values_desc(&x);
        let s2 = linalg::singular_values_desc(&(x.adjoint() * &x));
        let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
        prop_assert!(max_diff(&sq, &s2) <= 1e-10 * sq[0].max(1.0));
    }

    #[test]
    fn schatten_norm_decreases_in_p(values in prop::collection::vec(0.0f64..10.0, 1..40), p in 1.0f64..6.0, dp in 0.0f64..4.0) {
        let s = SingularSpectrum::new(values, "random").unwrap();
        let lo = spectral::schatten_norm(&s, p).unwrap();
        let hi = spectral::schatten_norm(&s, p + dp).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12));
        prop_assert!(spectral::schatten_norm(&s, 1e3).unwrap() >= s.values()[0] * (1.0 - 1e-12));
    }

    #[test]
    fn lambda_monotone_and_bounded(eps in 0.01f64..3.0, deps in 0.0f64..1.0, power in any::<bool>()) {
        let family = if power { Family::PurePower } else { Family::PaperFormula };
        let l = deformation::lambda_sequence(eps, family, 512).unwrap();
        let m = deformation::lambda_sequence(eps + deps, family, 512).unwrap();
        prop_assert_eq!(l[0], 1.0);
        prop_assert!(l.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(l.iter().all(|&v| v > 0.0 && v <= 1.0));
        prop_assert!(l.iter().zip(&m).all(|(a, b)| b <= a));
    }

    #[test]
    fn verdict_evidence_rederives(beta in 0.05f64..2.0, p in 1.0f64..4.0, log_n in 3u32..12) {
        let n = 1usize << log_n;
        let values: Vec<f64> = (0..n).map(|k| (1.0 + k as f64).powf(-beta)).collect();
        let v = spectral::summability_classify(&values, &IdealSpec::Schatten(p), n).unwrap();
        prop_assert_eq!(v.rederive(), v.verdict);
        prop_assert_eq!(v.evidence.indices, [n / 4, n / 2, n]);
        if beta * p < 0.9 && n >= 64 {
            prop_assert_eq!(v.verdict, Verdict::Divergent);
        }
    }

    #[test]
    fn extension_sum_merges_spectra(seed in any::<u64>(), n in 1usize..10) {
        let w = Window::hardy(n);
        let a = WindowedOperator::new(w, gaussian(n, n, seed), "A").unwrap();
        let b = WindowedOperator::new(w, gaussian(n, n, seed ^ 7), "B").unwrap();
        let s = extension::extension_sum(&a, &b).unwrap();
        let mut merged = linalg::singular_values_desc(a.entries());
        merged.extend(linalg::singular_values_desc(b.entries()));
        merged.sort_by(|x, y| y.total_cmp(x));
        prop_assert!(max_diff(&linalg::singular_values_desc(s.entries()), &merged) <= 1e-10 * merged[0].max(1.0));
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = report::to_json_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }
}

#[test]
fn band_limited_decay_is_schatten_two_summable() {
    // a_k = (1+|k|)^{-3}, |k| <= 64: the Hankel singular values decay fast
    // enough that the Schatten-2 partial sums settle.
    let a = Symbol::new((-64..=64).map(|k: i64| (k, C64::new((1.0 + k.abs() as f64).powi(-3), 0.0)))).unwrap();
    let w = Window::new(-256, 256).unwrap();
    let h = hardy::hankel_operator(&a, w).unwrap();
    let s = spectral::singular_values(&h).unwrap();
    let v = spectral::summability_classify(s.values(), &IdealSpec::Schatten(2.0), 256).unwrap();
    assert_eq!(v.verdict, Verdict::Summable);
}
