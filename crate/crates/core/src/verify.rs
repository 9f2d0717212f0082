//! Self-contained invariant suite.
//!
//! Every check compares a measured quantity with a threshold. The suite uses
//! closed forms and internal cross-checks only, so it runs without external
//! reference data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{exactness_failure_scan, hum_null_control, simultaneous_zero_scan, ControlOptions};
use crate::dynamics::{averaged_free, biharmonic_free, duality_residual, forward_modes, ControlSignal};
use crate::error::Result;
use crate::fraccalc::{caputo_left, ibp_residual, TimeGrid, TimeSeries};
use crate::mlf::{ml_eval, ml_eval_with, ml_imag_parts, FracParams, MlConfig};
use crate::randvar::{class_c_alpha_check, class_check_grids, fcf, RandomDiffusivity};
use crate::special::rgamma;
use crate::spectral::{build_basis, spectral_constant_fit, ConstantSearch, Domain, SensorSet, SpectralField};

/// One row of the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// `measured <= threshold` when true, `measured >= threshold` otherwise.
    pub upper: bool,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            upper: true,
            pass: measured <= threshold,
        }
    }

    fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            upper: false,
            pass: measured >= threshold,
        }
    }
}

/// Suite parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Time steps of the duality and control checks.
    pub steps: usize,
    /// Modes of the control check.
    pub modes: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 42,
            steps: 1024,
            modes: 8,
        }
    }
}

fn alphas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn s_grid(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    let half: Vec<f64> = (0..points / 2)
        .map(|k| lo * (hi / lo).powf(k as f64 / (points / 2 - 1) as f64))
        .collect();
    half.iter().rev().map(|s| -s).chain(half.iter().copied()).collect()
}

fn empirical_order(errs: &[f64]) -> f64 {
    errs.windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Runs every check; numerical failures propagate as errors.
pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let grid_s = s_grid(200, 1e-2, 1e4);

    // closed forms of the Mittag–Leffler function
    let mut worst: f64 = 0.0;
    for &s in &grid_s {
        let e = ml_eval(FracParams::new(1.0, 1.0)?, Complex64::new(0.0, s))?;
        worst = worst.max((e - Complex64::new(0.0, s).exp()).norm());
        if s.abs() <= 10.0 {
            let c = ml_eval(FracParams::new(2.0, 1.0)?, Complex64::new(-s * s, 0.0))?;
            worst = worst.max((c.re - s.cos()).abs());
        }
    }
    out.push(Check::at_most("ml_closed_forms", worst, 1e-9));

    // even/odd split on the imaginary axis
    let mut worst: f64 = 0.0;
    for a in alphas() {
        for b in [a, 1.0] {
            let p = FracParams::new(a, b)?;
            for &s in &grid_s {
                let (re, im) = ml_imag_parts(p, s)?;
                let e = ml_eval(p, Complex64::new(0.0, s))?;
                worst = worst.max((e - Complex64::new(re, im)).norm());
            }
        }
    }
    out.push(Check::at_most("ml_imaginary_split", worst, 1e-10));

    // Rademacher characteristic function
    let rad = RandomDiffusivity::rademacher();
    let tight = MlConfig {
        tol: 1e-12,
        ..MlConfig::default()
    };
    let (mut worst, mut worst_im): (f64, f64) = (0.0, 0.0);
    for a in alphas() {
        for b in [a, 1.0] {
            let p = FracParams::new(a, b)?;
            let q = FracParams::new(2.0 * a, b)?;
            for &s in &grid_s {
                let f = fcf(&rad, p, s)?;
                let e = ml_eval_with(q, Complex64::new(-s * s, 0.0), &tight)?.value;
                worst = worst.max((f - e).norm());
                worst_im = worst_im.max(f.im.abs());
            }
        }
    }
    out.push(Check::at_most("fcf_rademacher_closed_form", worst, 1e-12));
    out.push(Check::at_most("fcf_rademacher_imaginary_part", worst_im, 1e-13));

    // the bound |φ_{α,β}| ≤ 1/Γ(β) for β ≥ α
    let uni = RandomDiffusivity::uniform(-1.0, 1.0)?;
    let mut excess = f64::NEG_INFINITY;
    for (a, b) in [(0.5, 1.0), (0.3, 0.3), (0.7, 1.2)] {
        let p = FracParams::new(a, b)?;
        for s in [-50.0, -5.0, -0.5, 0.5, 5.0, 50.0] {
            excess = excess.max(fcf(&uni, p, s)?.norm() - rgamma(b));
        }
    }
    out.push(Check::at_most("fcf_bound_by_reciprocal_gamma", excess, 1e-10));

    // biharmonic identity
    let domain = Domain::interval(1.0)?;
    let basis8 = build_basis(&domain, 8)?;
    let y0 = SpectralField::from_real(&[1.0, -0.5, 0.25, 0.3, -0.2, 0.1, 0.05, -0.02]);
    let mut worst: f64 = 0.0;
    for a in [0.25, 0.4] {
        for k in 0..10 {
            let t = 0.1 * (k + 1) as f64;
            let avg = averaged_free(a, &rad, &basis8, &y0, t)?;
            let bi = biharmonic_free(a, &basis8, &y0, t)?;
            worst = worst.max(avg.sub(&bi)?.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
    }
    out.push(Check::at_most("biharmonic_identity", worst, 1e-10));

    // Caputo and integration by parts under refinement
    let steps_list = [128usize, 256, 512, 1024];
    let p = FracParams::new(0.5, 1.0)?;
    let mut errs = Vec::new();
    for &n in &steps_list {
        let g = TimeGrid::new(1.0, n)?;
        let f = TimeSeries::new(
            g,
            g.nodes()
                .iter()
                .map(|&t| ml_eval(p, Complex64::new(-2.0 * t.sqrt(), 0.0)))
                .collect::<Result<_>>()?,
        )?;
        let d = caputo_left(&f, 0.5)?;
        let e = (n / 2..=n)
            .map(|k| (d.values()[k] + 2.0 * f.values()[k]).norm())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    out.push(Check::at_least(
        "caputo_order_ml_eigenfunction",
        empirical_order(&errs),
        1.3,
    ));
    let mut res = Vec::new();
    for &n in &steps_list {
        let g = TimeGrid::new(1.0, n)?;
        let f = TimeSeries::from_real_fn(g, |t| t);
        let h = TimeSeries::from_real_fn(g, |t| 1.0 - t);
        res.push(ibp_residual(&f, &h, 0.5)?);
    }
    let ratio = res.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    out.push(Check::at_least("ibp_residual_ratio_per_doubling", ratio, 2.0));

    // linearity of expectation
    let two = RandomDiffusivity::atoms("two_atoms", vec![(0.8, 0.5), (-1.5, 0.5)])?;
    let g64 = TimeGrid::new(1.0, 64)?;
    let u = ControlSignal::from_fn(g64, 8, |n, t| Complex64::new((t + n as f64).sin(), 0.3 * t));
    let avg = crate::dynamics::averaged_controlled(0.5, &two, &basis8, &y0, &u)?;
    let fa = forward_modes(0.5, 0.8, &basis8, &y0, &u)?;
    let fb = forward_modes(0.5, -1.5, &basis8, &y0, &u)?;
    let mut worst: f64 = 0.0;
    for k in 0..g64.len() {
        for n in 0..8 {
            let mix = 0.5 * (fa.states()[k].coeffs()[n] + fb.states()[k].coeffs()[n]);
            worst = worst.max((avg.states()[k].coeffs()[n] - mix).norm());
        }
    }
    out.push(Check::at_most("averaging_commutes_with_mixtures", worst, 1e-10));

    // duality identity with random data
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let basis6 = build_basis(&domain, 6)?;
    let mut draw = |n: usize| -> SpectralField {
        SpectralField::new(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    };
    let yd = draw(6);
    let zd = draw(6);
    let freq: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.5..4.0),
                rng.random_range(0.0..PI),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let uf = |n: usize, t: f64| {
        let (w, ph, c) = freq[n];
        Complex64::new((w * t + ph).sin(), c * (w * t).cos())
    };
    let coarse = duality_residual(0.5, &rad, &basis6, &yd, &zd, uf, TimeGrid::new(1.0, opts.steps / 2)?)?;
    let fine = duality_residual(0.5, &rad, &basis6, &yd, &zd, uf, TimeGrid::new(1.0, opts.steps)?)?;
    out.push(Check::at_most("duality_residual", fine.residual, 5e-4));
    out.push(Check::at_most(
        "duality_residual_refinement_ratio",
        fine.residual / coarse.residual,
        1.0,
    ));

    // class membership evidence
    let (lg, tg) = class_check_grids(PI * PI, 100.0 * PI * PI, 12, 0.1, 1.0, 16);
    let r03 = class_c_alpha_check(&rad, 0.3, 0.1, 1.0, 1.0, 1.0 / 0.3, &lg, &tg)?;
    out.push(Check::at_least("class_rademacher_alpha_0.3_c", r03.c, 1e-3));
    out.push(Check::at_least(
        "class_rademacher_alpha_0.3_ratio_bounded",
        if r03.pass_ratio { 1.0 } else { 0.0 },
        1.0,
    ));
    let r05 = class_c_alpha_check(&rad, 0.5, 0.1, 1.0, 1.0, 2.0, &lg, &tg)?;
    out.push(Check::at_least(
        "class_rademacher_alpha_0.5_ratio_growth",
        r05.ratio_growth,
        10.0,
    ));

    // exactness failure
    let basis30 = build_basis(&domain, 30)?;
    let scan = exactness_failure_scan(0.5, &rad, &basis30, 1.0, false)?;
    let monotone = scan.windows(2).all(|w| w[1].1 < w[0].1);
    out.push(Check::at_most(
        "exactness_integral_ratio",
        scan[scan.len() - 1].1 / scan[0].1,
        0.1,
    ));
    out.push(Check::at_least(
        "exactness_integrals_decreasing",
        monotone as u8 as f64,
        1.0,
    ));

    // null control
    let basis_c = build_basis(&domain, opts.modes)?;
    let sensor = SensorSet::intervals(&domain, &[(0.2, 0.5)])?;
    let y_smooth = SpectralField::from_real(
        &(1..=opts.modes)
            .map(|n| {
                if n % 2 == 1 {
                    4.0 * 2f64.sqrt() / (n as f64 * PI).powi(3)
                } else {
                    0.0
                }
            })
            .collect::<Vec<_>>(),
    );
    let copts = ControlOptions {
        force: true,
        ..Default::default()
    };
    let (_, rep) = hum_null_control(
        0.3,
        &rad,
        &basis_c,
        &y_smooth,
        &sensor,
        TimeGrid::new(1.0, opts.steps)?,
        copts,
    )?;
    out.push(Check::at_most("hum_terminal_residual", rep.terminal_residual, 1e-6));
    out.push(Check::at_least(
        "hum_gramian_min_eigenvalue",
        rep.gramian_min_eigenvalue,
        -1e-10,
    ));

    // isolation of simultaneous-control realizations
    let basis1 = build_basis(&domain, 1)?;
    let g8 = TimeGrid::new(1.0, 8)?;
    let e0 = SpectralField::unit(1, 0);
    let u0 = ControlSignal::zeros(g8, 1);
    let c1 = simultaneous_zero_scan(0.5, &basis1, &e0, &u0, (-10.0, 10.0), 1000, 1e-8)?.len();
    let c2 = simultaneous_zero_scan(0.5, &basis1, &e0, &u0, (-10.0, 10.0), 2000, 1e-8)?.len();
    out.push(Check::at_most(
        "zero_count_change_under_doubling",
        (c1 as f64 - c2 as f64).abs(),
        0.0,
    ));
    let c3 = simultaneous_zero_scan(1.0, &basis1, &e0, &u0, (-10.0, 10.0), 1000, 1e-8)?.len();
    out.push(Check::at_most("zero_count_classical", c3 as f64, 0.0));

    // spectral constant growth
    let sensor03 = SensorSet::intervals(&domain, &[(0.0, 0.3)])?;
    let basis16 = build_basis(&domain, 16)?;
    let cuts: Vec<f64> = basis16.iter().map(|m| m.lambda).collect();
    let fit = spectral_constant_fit(
        &basis16,
        &domain,
        &sensor03,
        &cuts,
        &ConstantSearch {
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    let drops = fit
        .points
        .windows(2)
        .map(|w| w[0].constant - w[1].constant)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("spectral_constant_largest_drop", drops.max(0.0), 0.0));
    out.push(Check::at_least("spectral_constant_slope", fit.slope, 0.0));

    Ok(out)
}
