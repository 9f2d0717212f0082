use fracavg_core::{
    adjoint_modes, build_basis, caputo_left, frac_integral_left, frac_integral_right, ibp_residual, ml_eval,
    rl_derivative_right, Domain, FracParams, SpectralField, TimeGrid, TimeSeries,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

fn max_err(a: &TimeSeries, exact: impl Fn(f64) -> f64) -> f64 {
    a.grid()
        .nodes()
        .iter()
        .zip(a.values())
        .map(|(t, v)| (v - exact(*t)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn left_integral_of_linear_matches_beta_formula() {
    let g = TimeGrid::new(1.0, 256).unwrap();
    let f = TimeSeries::from_real_fn(g, |t| t);
    let i = frac_integral_left(&f, 0.5).unwrap();
    let e = max_err(&i, |t| t.powf(1.5) * gamma(2.0) / gamma(2.5));
    assert!(e < 1e-12, "{e:e}");
}

#[test]
fn right_integral_of_decreasing_linear() {
    let g = TimeGrid::new(1.0, 256).unwrap();
    let f = TimeSeries::from_real_fn(g, |t| 1.0 - t);
    let i = frac_integral_right(&f, 0.3).unwrap();
    let e = max_err(&i, |t| (1.0 - t).powf(1.3) * gamma(2.0) / gamma(2.3));
    assert!(e < 1e-12, "{e:e}");
}

#[test]
fn constant_integral_within_two_steps() {
    for n in [16, 64, 256] {
        let g = TimeGrid::new(2.0, n).unwrap();
        let i = frac_integral_left(&TimeSeries::from_real_fn(g, |_| 1.0), 0.5).unwrap();
        assert!(max_err(&i, |t| t.sqrt() / gamma(1.5)) <= 2.0 * g.dt());
    }
}

#[test]
fn semigroup_at_512_steps() {
    let g = TimeGrid::new(1.0, 512).unwrap();
    let f = TimeSeries::from_real_fn(g, f64::sin);
    let twice = frac_integral_left(&frac_integral_left(&f, 0.4).unwrap(), 0.4).unwrap();
    let once = frac_integral_left(&f, 0.8).unwrap();
    let d = twice
        .values()
        .iter()
        .zip(once.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(d <= 1e-3, "{d:e}");
}

#[test]
fn continuity_bound() {
    for n in [128, 512] {
        let g = TimeGrid::new(1.5, n).unwrap();
        let f = TimeSeries::from_real_fn(g, |t| (7.0 * t).cos());
        for a in [0.2, 0.5, 0.9] {
            let i = frac_integral_left(&f, a).unwrap();
            let bound = 1.5f64.powf(a) / gamma(a + 1.0) * f.max_abs() * 1.05;
            assert!(i.max_abs() <= bound);
        }
    }
}

#[test]
fn caputo_eigenrelation() {
    // ∂^α E_{α,1}(λt^α) = λ E_{α,1}(λt^α), λ = −2, α = 0.4
    let p = FracParams::new(0.4, 1.0).unwrap();
    let mut errs = Vec::new();
    for n in [256, 512, 1024] {
        let g = TimeGrid::new(1.0, n).unwrap();
        let f = TimeSeries::new(
            g,
            g.nodes()
                .iter()
                .map(|t| ml_eval(p, Complex64::new(-2.0 * t.powf(0.4), 0.0)).unwrap())
                .collect(),
        )
        .unwrap();
        let d = caputo_left(&f, 0.4).unwrap();
        errs.push(
            (n / 2..=n)
                .map(|k| (d.values()[k] + 2.0 * f.values()[k]).norm())
                .fold(0.0, f64::max),
        );
    }
    assert!(errs[2] < 1e-3, "{errs:?}");
    assert!(errs[0] / errs[2] > 4.0, "{errs:?}");
}

#[test]
fn right_rl_derivative_of_constant_is_the_kernel() {
    let g = TimeGrid::new(1.0, 1024).unwrap();
    let d = rl_derivative_right(&TimeSeries::from_real_fn(g, |_| 1.0), 0.5).unwrap();
    let inner: f64 = (64..=g.steps() - 64)
        .map(|k| {
            let t = g.node(k);
            let exact = (1.0 - t).powf(-0.5) / gamma(0.5);
            (d.values()[k].re - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    assert!(inner < 1e-3, "{inner:e}");
}

#[test]
fn ibp_residual_of_quadratics_shrinks() {
    let mut r = Vec::new();
    for n in [128, 256, 512] {
        let g = TimeGrid::new(1.0, n).unwrap();
        let f = TimeSeries::from_real_fn(g, |t| t * t);
        let h = TimeSeries::from_real_fn(g, |t| (1.0 - t) * (1.0 - t));
        r.push(ibp_residual(&f, &h, 0.3).unwrap());
    }
    assert!(r[0] / r[1] >= 1.5 && r[1] / r[2] >= 1.5, "{r:?}");
    let g = TimeGrid::new(1.0, 256).unwrap();
    let f = TimeSeries::from_real_fn(g, |t| t);
    let h = TimeSeries::from_real_fn(g, |t| 1.0 - t);
    assert!(ibp_residual(&f, &h, 0.5).unwrap() <= 1e-2);
}

#[test]
fn adjoint_state_is_the_derivative_of_its_integral() {
    // z = −d/dt I^α_{t,T}(I^{1−α}_{t,T} z), away from the singular end point
    let alpha = 0.6;
    let basis = build_basis(&Domain::interval(1.0).unwrap(), 2).unwrap();
    let zt = SpectralField::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)]);
    for n in 0..2 {
        let mut errs = Vec::new();
        for steps in [256, 512, 1024] {
            let g = TimeGrid::new(1.0, steps).unwrap();
            let (z, iz) = adjoint_modes(alpha, 0.8, &basis, &zt, g).unwrap();
            let izs = iz.mode_series(n);
            let rebuilt = rl_derivative_right(&izs, 1.0 - alpha).unwrap();
            let zs = z.trajectory.mode_series(n);
            let scale = izs.max_abs();
            let e = (1..=steps / 2)
                .map(|k| (rebuilt.values()[k] - zs.values()[k]).norm())
                .fold(0.0, f64::max);
            errs.push(e / scale);
        }
        assert!(errs[1] < 1e-2, "mode {n}: {errs:?}");
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "mode {n}: {errs:?}");
    }
}

proptest! {
    #[test]
    fn operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, alpha in 0.1f64..0.9) {
        let g = TimeGrid::new(1.0, 64).unwrap();
        let f = TimeSeries::from_real_fn(g, |t| (3.0 * t).sin());
        let h = TimeSeries::from_real_fn(g, |t| t * t - 0.3);
        let mix = TimeSeries::new(
            g,
            f.values().iter().zip(h.values()).map(|(x, y)| a * x + b * y).collect(),
        )
        .unwrap();
        type Op = fn(&TimeSeries, f64) -> fracavg_core::Result<TimeSeries>;
        let ops: [Op; 4] = [frac_integral_left, frac_integral_right, caputo_left, rl_derivative_right];
        for op in ops {
            let (lf, lh, lm) = (op(&f, alpha).unwrap(), op(&h, alpha).unwrap(), op(&mix, alpha).unwrap());
            for k in 0..g.len() {
                let d = lm.values()[k] - a * lf.values()[k] - b * lh.values()[k];
                let scale = 1.0 + lm.values()[k].norm();
                prop_assert!(d.norm() <= 1e-12 * scale);
            }
        }
    }
}
