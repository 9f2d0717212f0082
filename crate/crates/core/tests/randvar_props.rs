use fracavg_core::{
    class_c_alpha_check, class_check_grids, fcf, fcf_decay_scan, fcf_rademacher_closed, FracParams, RandomDiffusivity,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn params(a: f64, b: f64) -> FracParams {
    FracParams::new(a, b).unwrap()
}

#[test]
fn point_mass_at_zero_is_reciprocal_gamma() {
    let xi = RandomDiffusivity::point_mass(0.0).unwrap();
    for b in [0.3, 1.0, 1.7, 2.5] {
        for s in [-10.0, 0.0, 3.0] {
            let v = fcf(&xi, params(0.6, b), s).unwrap();
            assert!((v.re - 1.0 / libm::tgamma(b)).abs() < 1e-15 && v.im == 0.0);
        }
    }
}

#[test]
fn uniform_law_at_unit_order_is_the_sinc_transform() {
    // α = β = 1: E[e^{isξ}] for ξ ~ U(a, b)
    let (a, b) = (-1.0, 2.0);
    let xi = RandomDiffusivity::uniform(a, b).unwrap();
    for s in [-7.0, -1.0, 0.3, 4.0, 25.0] {
        let i = Complex64::new(0.0, 1.0);
        let want = ((i * s * b).exp() - (i * s * a).exp()) / (i * s * (b - a));
        let got = fcf(&xi, params(1.0, 1.0), s).unwrap();
        assert!((got - want).norm() < 1e-10, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn normal_law_at_unit_order_is_gaussian() {
    let (m, sd) = (0.5, 0.8);
    let xi = RandomDiffusivity::normal(m, sd).unwrap();
    for s in [-3.0, 0.7, 2.0, 5.0] {
        let want = Complex64::new(-0.5 * s * s * sd * sd, s * m).exp();
        let got = fcf(&xi, params(1.0, 1.0), s).unwrap();
        assert!((got - want).norm() < 1e-10, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn uniform_is_stable_under_doubling_the_quadrature() {
    let pdf = |_| 1.0 / 3.0;
    let lo = RandomDiffusivity::density("u", pdf, (-1.0, 2.0), 200).unwrap();
    let hi = RandomDiffusivity::density("u", pdf, (-1.0, 2.0), 400).unwrap();
    for (a, s) in [(0.5, 3.0), (0.3, -20.0), (0.8, 60.0)] {
        let p = params(a, a);
        let (x, y) = (fcf(&lo, p, s).unwrap(), fcf(&hi, p, s).unwrap());
        assert!((x - y).norm() <= 1e-10 * y.norm().max(1.0), "{a} {s}: {x} {y}");
    }
}

#[test]
fn quarter_order_rademacher_is_scaled_erfc() {
    // E_{1/2,1}(−x) = e^{x²} erfc(x) with x = s²
    let p = params(0.25, 1.0);
    let xi = RandomDiffusivity::rademacher();
    for s in [0.1, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let x: f64 = s * s;
        let want = (x * x).exp() * libm::erfc(x);
        let closed = fcf_rademacher_closed(p, s).unwrap();
        let avg = fcf(&xi, p, s).unwrap();
        assert!(
            (closed - want).abs() < 1e-12 * want.max(1e-3),
            "s = {s}: {closed} vs {want}"
        );
        assert!((avg.re - want).abs() < 1e-12 * want.max(1e-3) && avg.im.abs() < 1e-13);
    }
}

#[test]
fn point_mass_is_not_in_the_decay_class() {
    let xi = RandomDiffusivity::point_mass(1.0).unwrap();
    let alpha = 0.3;
    let (lg, tg) = class_check_grids(
        std::f64::consts::PI.powi(2),
        100.0 * std::f64::consts::PI.powi(2),
        12,
        0.1,
        1.0,
        16,
    );
    let r = class_c_alpha_check(&xi, alpha, 0.1, 1.0, 1.0, 1.0 / alpha, &lg, &tg).unwrap();
    assert!(!r.pass_decay, "c = {}", r.c);
    assert!(r.failure.is_none());
}

#[test]
fn decay_scan_of_a_point_mass_is_algebraic() {
    // |E_{α,α}(−is)| ~ s^{-2}/|Γ(−α)| for large s
    let alpha = 0.5;
    let xi = RandomDiffusivity::point_mass(1.0).unwrap();
    let scan = fcf_decay_scan(&xi, alpha, 1e4, 20).unwrap();
    assert_eq!(scan.len(), 20);
    assert!(scan.windows(2).all(|w| w[1].0 > w[0].0));
    let (s, v) = scan[19];
    let lead = 1.0 / (s * s * libm::tgamma(-alpha).abs());
    assert!((v / lead - 1.0).abs() < 1e-3, "{v} vs {lead}");
}

#[test]
fn invalid_laws_and_parameters_are_rejected() {
    assert!(RandomDiffusivity::uniform(1.0, 1.0).is_err());
    assert!(RandomDiffusivity::normal(0.0, 0.0).is_err());
    assert!(RandomDiffusivity::atoms("bad", vec![(1.0, 0.4)]).is_err());
    assert!(RandomDiffusivity::atoms("neg", vec![(1.0, 1.2), (2.0, -0.2)]).is_err());
    assert!(fcf(&RandomDiffusivity::rademacher(), params(1.5, 1.0), 1.0).is_err());
    assert!(fcf(&RandomDiffusivity::rademacher(), params(0.5, 1.0), f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounded_and_conjugate_symmetric(
        a in 0.1f64..1.0,
        db in 0.0f64..1.5,
        s in -80.0f64..80.0,
        x1 in -3.0f64..3.0,
        x2 in -3.0f64..3.0,
        w in 0.05f64..0.95,
    ) {
        let b = a + db;
        let p = params(a, b);
        let xi = RandomDiffusivity::atoms("two", vec![(x1, w), (x2, 1.0 - w)]).unwrap();
        let v = fcf(&xi, p, s).unwrap();
        let m = fcf(&xi, p, -s).unwrap();
        prop_assert!(v.norm() <= 1.0 / libm::tgamma(b) + 1e-10);
        prop_assert!((v - m.conj()).norm() <= 1e-11);
    }
}
