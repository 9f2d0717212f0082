mod common;

use fracavg_core::{ml_asymptotic, ml_eval, FracParams};
use num_complex::Complex64;

#[test]
fn oracle_sanity_against_closed_forms() {
    // E_{1,1}(is) = e^{is}, on both sides of the series/asymptotic switch
    for s in [0.5, 3.0, 40.0, 250.0] {
        let v = common::ml_imag_axis(1.0, 1.0, s);
        let e = Complex64::new(s.cos(), s.sin());
        assert!((v - e).norm() < 1e-14, "s = {s}: {v} vs {e}");
    }
}

#[test]
fn eval_matches_oracle_on_sample() {
    for &(a, b, s) in &[(0.3, 0.3, 40.0), (0.5, 1.0, 7.0), (0.9, 0.9, 300.0), (0.1, 1.0, 1.3)] {
        let p = FracParams::new(a, b).unwrap();
        let v = ml_eval(p, Complex64::new(0.0, s)).unwrap();
        let o = common::ml_imag_axis(a, b, s);
        assert!(common::rel_err(v, o) <= 1e-10, "({a},{b},{s}): {v} vs {o}");
    }
}

#[test]
fn asymptotic_low_order_at_moderate_argument() {
    // With α = β = 0.3 at 30i the expansion is optimal near order 9; three
    // terms leave the fourth term as the error.
    let p = FracParams::new(0.3, 0.3).unwrap();
    let z = Complex64::new(0.0, 30.0);
    let o = common::ml_imag_axis(0.3, 0.3, 30.0);
    let three = ml_asymptotic(p, z, 3).unwrap();
    assert!(common::rel_err(three.value, o) < 1e-3);
    assert!(three.est_error >= 0.5 * common::rel_err(three.value, o));
    let best = ml_asymptotic(p, z, 9).unwrap();
    assert!(
        common::rel_err(best.value, o) < 1e-6,
        "{:e}",
        common::rel_err(best.value, o)
    );
}

#[test]
fn eval_matches_oracle_on_full_grid() {
    let grid = common::imag_axis_grid();
    for k in 1..=9 {
        let a = k as f64 / 10.0;
        for b in [a, 1.0] {
            let p = FracParams::new(a, b).unwrap();
            for &s in &grid {
                let v = ml_eval(p, Complex64::new(0.0, s)).unwrap();
                let o = common::ml_imag_axis(a, b, s);
                let r = common::rel_err(v, o);
                assert!(r <= 1e-9, "({a},{b},{s}): {r:e}");
            }
        }
    }
}
