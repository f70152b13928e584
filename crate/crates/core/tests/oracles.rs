mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use gprand_core::analytic::{erdos_turan_rhs, fourier_tail, g_eval, g_fourier_coeff, SmoothingParams};
use gprand_core::bounds::{parse_ratio, prop1_exponents, prop2_exponents, prop3_exponents, theorem_eta};
use gprand_core::genpoly::parse;
use gprand_core::measures::{discrepancy, well_distribution};
use gprand_core::sequence::{generate, BinarySequence};

use common::{g1_closed, w_oracle, Kernel};

#[test]
fn g1_integer_tau_matches_direct_convolution() {
    for tau in [-2.0, 1.0, 3.0] {
        let p = SmoothingParams::new(1, 0.01, tau, 64).unwrap();
        for i in 0..50 {
            let x = i as f64 / 50.0 + 0.003;
            let err = (g_eval(x, &p) - g1_closed(x, tau, 0.01)).norm();
            assert!(err < 1e-8, "tau {tau} x {x}: {err}");
        }
    }
}

#[test]
fn g1_fractional_tau_within_tail_budget() {
    let (tau, delta, k) = (0.5, 0.01, 2000u64);
    let p = SmoothingParams::new(1, delta, tau, k).unwrap();
    let tail = fourier_tail(&p).unwrap().tail_sum;
    // |Ĝ_1(k)| <= 1/(2 pi^2 delta k^2) beyond the summed span
    let far = 2.0 / (2.0 * std::f64::consts::PI.powi(2) * delta * (k * 1024) as f64);
    for i in 0..40 {
        let x = i as f64 / 40.0 + 0.0071;
        let err = (g_eval(x, &p) - g1_closed(x, tau, delta)).norm();
        assert!(err <= tail + far + 1e-12, "x {x}: {err} > {}", tail + far);
    }
}

#[test]
fn quadrature_oracle_separates_conventions() {
    // Ĝ(k) and Ĝ(-k) differ for fractional tau, and the oracle must tell
    let p = SmoothingParams::new(2, 0.03, 0.4, 1).unwrap();
    let kern = Kernel::new(2, 0.03, 0.4);
    let q = kern.coeff(3);
    assert!((q - g_fourier_coeff(3, &p)).norm() < 1e-10);
    assert!((q - g_fourier_coeff(-3, &p)).norm() > 1e-3);
    // the kernel integrates to the zeroth coefficient
    assert!((kern.coeff(0) - g_fourier_coeff(0, &p)).norm() < 1e-10);
}

#[test]
fn kernel_at_tau_zero_is_one() {
    let k = Kernel::new(3, 0.05, 0.0);
    for x in [0.0, 0.01, 0.5, 0.99] {
        assert!((k.g(x) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn theorem_sequence_w_matches_brute_force() {
    let e = parse("sqrt(5)*floor(sqrt(3)*floor(sqrt(2)*x^2))").unwrap();
    let s = generate(&e, 600, 256).unwrap();
    assert_eq!(well_distribution(&s, None).w, w_oracle(&s.signs()));
}

fn signs() -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..120)
}

proptest! {
    #[test]
    fn w_is_invariant_under_negation_and_reversal(s in signs()) {
        let seq = BinarySequence::from_signs(&s);
        let w = well_distribution(&seq, None).w;
        prop_assert_eq!(w, well_distribution(&seq.negated(), None).w);
        prop_assert_eq!(w, well_distribution(&seq.reversed(), None).w);
        prop_assert!(w as usize <= s.len());
        prop_assert_eq!(w, w_oracle(&s));
    }

    #[test]
    fn w_grows_with_prefix(s in signs(), cut in 1usize..120) {
        let seq = BinarySequence::from_signs(&s);
        let cut = cut.min(s.len());
        prop_assert!(well_distribution(&seq.prefix(cut), None).w <= well_distribution(&seq, None).w);
    }

    #[test]
    fn discrepancy_range_and_shift(pts in proptest::collection::vec(0.0f64..1.0, 1..200)) {
        let d = discrepancy(&pts).unwrap().d;
        let n = pts.len() as f64;
        prop_assert!(d >= 1.0 / n - 1e-15 && d <= 1.0);
        prop_assert!(d <= erdos_turan_rhs(&pts, 8).unwrap() + 1e-12);
    }

    #[test]
    fn exponents_positive_and_ordered(d in 2u32..12, tn in 1i64..40, td in 1i64..40) {
        let t = parse_ratio(&format!("{tn}/{td}")).unwrap();
        let (p1, p2, p3) = (prop1_exponents(d, &t).unwrap(), prop2_exponents(d, &t).unwrap(), prop3_exponents(d, &t).unwrap());
        prop_assert!(p2.n_exp < p1.n_exp);
        prop_assert!(p3.n_exp < p2.n_exp);
        let eta = theorem_eta(d, &t).unwrap().eta_candidate.unwrap();
        prop_assert!(eta > num_rational::BigRational::from_integer(0.into()));
    }

    #[test]
    fn coefficient_modulus_decays(k in 1i64..500, tau in -3.0f64..3.0, r in 1u32..5, delta in 0.001f64..0.2) {
        let p = SmoothingParams::new(r, delta, tau, 1).unwrap();
        // |Ĝ_r(k)| <= |F̂(k)|
        let f = g_fourier_coeff(k, &SmoothingParams::new(1, 1e-12, tau, 1).unwrap());
        prop_assert!(g_fourier_coeff(k, &p).norm() <= f.norm() + 1e-15);
    }
}
