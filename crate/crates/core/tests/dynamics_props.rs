use fracavg_core::mlf::boundedness_constant;
use fracavg_core::{
    adjoint_at, adjoint_modes, averaged_controlled, averaged_free, biharmonic_free, build_basis, forward_modes,
    ml_eval, ControlSignal, Domain, Error, FracParams, Mode, RandomDiffusivity, SpectralField, TimeGrid,
};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn setup(n: usize) -> (Vec<Mode>, SpectralField) {
    let basis = build_basis(&Domain::interval(1.0).unwrap(), n).unwrap();
    let y0 = SpectralField::new((0..n).map(|k| c(1.0 / (k + 1) as f64, 0.3 * k as f64)).collect());
    (basis, y0)
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn two_atom_average_is_the_weighted_mixture() {
    let (basis, y0) = setup(4);
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let u = ControlSignal::from_fn(grid, 4, |n, t| c((3.0 * t).sin(), 0.1 * n as f64));
    let (x1, x2, w) = (0.7, 1.9, 0.35);
    let law = RandomDiffusivity::atoms("two", vec![(x1, w), (x2, 1.0 - w)]).unwrap();
    let avg = averaged_controlled(0.6, &law, &basis, &y0, &u).unwrap();
    let a = forward_modes(0.6, x1, &basis, &y0, &u).unwrap();
    let b = forward_modes(0.6, x2, &basis, &y0, &u).unwrap();
    for k in 0..grid.len() {
        let mix = SpectralField::new(
            a.states()[k]
                .coeffs()
                .iter()
                .zip(b.states()[k].coeffs())
                .map(|(p, q)| w * p + (1.0 - w) * q)
                .collect(),
        );
        assert!(max_diff(&avg.states()[k], &mix) < 1e-10, "node {k}");
    }
}

#[test]
fn uncontrolled_rademacher_average_is_biharmonic() {
    let (basis, y0) = setup(5);
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let alpha = 0.35;
    let tr = averaged_controlled(
        alpha,
        &RandomDiffusivity::rademacher(),
        &basis,
        &y0,
        &ControlSignal::zeros(grid, 5),
    )
    .unwrap();
    for (k, t) in grid.nodes().iter().enumerate().skip(1) {
        let bi = biharmonic_free(alpha, &basis, &y0, *t).unwrap();
        assert!(max_diff(&tr.states()[k], &bi) < 1e-10, "t = {t}");
    }
    assert!(max_diff(&tr.states()[0], &y0) == 0.0);
}

#[test]
fn free_modes_obey_the_algebraic_decay_bound() {
    // (1+|s|)|E_{α,1}(is)| ≤ C gives |y_n(t)| ≤ C|y0_n|/(1 + ξλ_n t^α)
    let alpha = 0.5;
    let xi = 1.3;
    let (basis, y0) = setup(6);
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let s_max = xi * basis[5].lambda;
    let cst = boundedness_constant(FracParams::new(alpha, 1.0).unwrap(), s_max, 4001).unwrap();
    let tr = forward_modes(alpha, xi, &basis, &y0, &ControlSignal::zeros(grid, 6)).unwrap();
    for (k, t) in grid.nodes().iter().enumerate() {
        for (n, m) in basis.iter().enumerate() {
            let bound = 1.01 * cst * y0.coeffs()[n].norm() / (1.0 + xi * m.lambda * t.powf(alpha));
            assert!(tr.states()[k].coeffs()[n].norm() <= bound, "t = {t}, n = {n}");
        }
    }
}

#[test]
fn duhamel_term_converges_for_a_linear_control() {
    // ∫₀ᵗ (t−s)^{α−1} E_{α,α}(−iξλ(t−s)^α) s ds = t^{α+1} E_{α,α+2}(−iξλt^α)
    let (alpha, xi) = (0.6, 0.9);
    let basis = build_basis(&Domain::interval(1.0).unwrap(), 2).unwrap();
    let zero = SpectralField::zeros(2);
    let p = FracParams::new(alpha, alpha + 2.0).unwrap();
    let mut errs = Vec::new();
    for steps in [64, 256, 1024] {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let u = ControlSignal::from_fn(grid, 2, |_, t| c(t, 0.0));
        let tr = forward_modes(alpha, xi, &basis, &zero, &u).unwrap();
        let mut e: f64 = 0.0;
        for (k, t) in grid.nodes().iter().enumerate().skip(1) {
            for (n, m) in basis.iter().enumerate() {
                let exact = t.powf(alpha + 1.0) * ml_eval(p, c(0.0, -xi * m.lambda * t.powf(alpha))).unwrap();
                e = e.max((tr.states()[k].coeffs()[n] - exact).norm());
            }
        }
        errs.push(e);
    }
    assert!(errs[2] < 1e-3 && errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn adjoint_integral_reaches_the_terminal_datum() {
    let basis = build_basis(&Domain::interval(1.0).unwrap(), 3).unwrap();
    let zt = SpectralField::new(vec![c(1.0, 0.0), c(-0.2, 0.4), c(0.0, 0.7)]);
    for alpha in [0.3, 0.7, 1.0] {
        let grid = TimeGrid::new(2.0, 40).unwrap();
        let (z, iz) = adjoint_modes(alpha, 1.1, &basis, &zt, grid).unwrap();
        assert!(max_diff(iz.final_state(), &zt) < 1e-14, "alpha = {alpha}");
        assert_eq!(z.singular_final, alpha < 1.0);
    }
    assert!(matches!(
        adjoint_at(0.5, 1.0, &basis, &zt, 1.0, 1.0),
        Err(Error::SingularNode { .. })
    ));
    let inner = adjoint_at(0.5, 1.0, &basis, &zt, 1.0, 0.25).unwrap();
    assert!(inner.coeffs().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
}

#[test]
fn averaged_free_at_time_zero_is_the_datum() {
    let (basis, y0) = setup(3);
    for law in [
        RandomDiffusivity::rademacher(),
        RandomDiffusivity::uniform(-1.0, 2.0).unwrap(),
    ] {
        let v = averaged_free(0.5, &law, &basis, &y0, 0.0).unwrap();
        assert!(max_diff(&v, &y0) < 1e-15);
    }
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (basis, y0) = setup(3);
    let grid = TimeGrid::new(1.0, 8).unwrap();
    assert!(forward_modes(0.5, 1.0, &basis, &y0, &ControlSignal::zeros(grid, 2)).is_err());
    assert!(forward_modes(1.5, 1.0, &basis, &y0, &ControlSignal::zeros(grid, 3)).is_err());
    assert!(forward_modes(0.5, 0.0, &basis, &y0, &ControlSignal::zeros(grid, 3)).is_err());
    assert!(ControlSignal::from_cells(grid, vec![vec![c(0.0, 0.0); 7]]).is_err());
}
