//! Finite-mode averaged null control and the two negative-result scans.
//!
//! The control is the minimal L²((0,T)×G₀) control, piecewise constant in time
//! and spanned on G₀ by the first N eigenfunctions, that drives the discrete
//! averaged state to zero at T. Writing K_{n,j} for the averaged cell weight
//! that carries cell j of mode n to time T and M for the sensor Gram matrix,
//! the control on cell j is a_j = conj(K_{·,j})∘μ/Δt with
//!
//! (Λ + reg·I) μ = −b,  Λ_{nm} = Σ_j K_{n,j} M_{nm} conj(K_{m,j}) / Δt,  b_n = φ_{α,1}(−λ_n T^α) y_{0,n}.
//!
//! Λ is the discrete counterpart of the averaged observability Gramian.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{averaged_cell_weights, averaged_controlled, forward_terminal, ControlSignal};
use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::mlf::FracParams;
use crate::quad::adaptive_gk_real;
use crate::randvar::{class_c_alpha_check, class_check_grids, fcf, RandomDiffusivity};
use crate::spectral::{build_basis, eigenfunction_eval, sensor_gram, Mode, SensorSet, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default Tikhonov parameter.
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;
/// Largest Gramian condition number accepted without regularization.
pub const DEFAULT_CONDITION_CAP: f64 = 1e14;

/// Discrete Gramian, right-hand side and regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub regularization: f64,
    /// weights[n][j] = K_{n,j}
    weights: Vec<Vec<Complex64>>,
    sensor_gram: DMatrix<f64>,
    grid: TimeGrid,
}

impl GramianSystem {
    /// max |Λ − Λ^H|.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut d: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// λ_max / λ_min of Λ, infinite when λ_min ≤ 0.
    pub fn condition(&self) -> f64 {
        let ev = self.eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// Assembles Λ and b. `y0` may be `None` for a zero right-hand side.
pub fn build_gramian(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    sensor: &SensorSet,
    grid: TimeGrid,
    y0: Option<&SpectralField>,
) -> Result<GramianSystem> {
    let n = basis.len();
    if n == 0 {
        return Err(Error::invalid("modes", "need at least one mode"));
    }
    if let Some(y) = y0 {
        if y.basis_size() != n {
            return Err(Error::invalid(
                "y0",
                format!("{} coefficients for {n} modes", y.basis_size()),
            ));
        }
    }
    let m = sensor_gram(basis, sensor.domain(), sensor)?;
    let steps = grid.steps();
    let dt = grid.dt();
    let weights: Vec<Vec<Complex64>> = basis
        .par_iter()
        .map(|mode| {
            let w = averaged_cell_weights(alpha, xi, mode.lambda, grid)?;
            Ok((0..steps).map(|j| w[steps - j - 1]).collect())
        })
        .collect::<Result<_>>()?;
    let mut lam = DMatrix::from_element(n, n, ZERO);
    for a in 0..n {
        for b in a..n {
            let mut acc = ZERO;
            for j in 0..steps {
                acc += weights[a][j] * weights[b][j].conj();
            }
            let v = acc * m[(a, b)] / dt;
            lam[(a, b)] = v;
            lam[(b, a)] = v.conj();
        }
    }
    let p1 = FracParams::new(alpha, 1.0)?;
    let tf = grid.t_final();
    let mut rhs = DVector::from_element(n, ZERO);
    if let Some(y) = y0 {
        for (k, mode) in basis.iter().enumerate() {
            let c = y.coeffs()[k];
            if c != ZERO {
                rhs[k] = fcf(xi, p1, -mode.lambda * tf.powf(alpha))? * c;
            }
        }
    }
    Ok(GramianSystem {
        matrix: lam,
        rhs,
        regularization: 0.0,
        weights,
        sensor_gram: m,
        grid,
    })
}

/// Solver options for [`hum_null_control`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOptions {
    pub regularization: f64,
    pub condition_cap: f64,
    /// Skip the class check on the law.
    pub force: bool,
    /// Sample points per unit length used for the L∞ cost.
    pub linf_density: usize,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions {
            regularization: DEFAULT_REGULARIZATION,
            condition_cap: DEFAULT_CONDITION_CAP,
            force: false,
            linf_density: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlReport {
    /// ‖E y(T)‖/‖y₀‖ from an independent averaged run.
    pub terminal_residual: f64,
    pub l2_cost: f64,
    pub linf_cost: f64,
    pub gramian_condition: f64,
    pub gramian_min_eigenvalue: f64,
    pub gramian_max_eigenvalue: f64,
    pub hermitian_defect: f64,
    pub regularization: f64,
    /// max |φ_{α,1}(−λ_n T^α)| over the modes N+1..4N; times ‖(I−P_N)y₀‖ it
    /// bounds the free averaged state outside the computed modes.
    pub tail_factor: f64,
    /// None when the class check was skipped with `force`.
    pub class_check_passed: Option<bool>,
}

/// Minimal-norm averaged null control on the first N modes.
///
/// Returns the control mode coefficients u_n = ⟨1_{G₀}u, e_n⟩ and the report.
pub fn hum_null_control(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    y0: &SpectralField,
    sensor: &SensorSet,
    grid: TimeGrid,
    opts: ControlOptions,
) -> Result<(ControlSignal, ControlReport)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    if !(opts.regularization >= 0.0 && opts.regularization.is_finite()) {
        return Err(Error::invalid("regularization", "must be finite and nonnegative"));
    }
    let class_check_passed = if opts.force {
        None
    } else {
        let lambda_star = basis.first().map(|m| m.lambda).unwrap_or(1.0);
        let (lg, tg) = class_check_grids(lambda_star, 100.0 * lambda_star, 12, 0.1, grid.t_final(), 16);
        let rep = class_c_alpha_check(xi, alpha, 0.1, grid.t_final(), 1.0, 1.0 / alpha, &lg, &tg)?;
        if !(rep.pass_decay && rep.pass_ratio) {
            return Err(Error::Precondition(format!(
                "law `{}` fails the class check at alpha = {alpha} (c = {:e}, ratio growth {:e}); use force to override",
                xi.name(),
                rep.c,
                rep.ratio_growth
            )));
        }
        Some(true)
    };
    let mut sys = build_gramian(alpha, xi, basis, sensor, grid, Some(y0))?;
    sys.regularization = opts.regularization;
    let ev = sys.eigenvalues();
    let (ev_lo, ev_hi) = (ev[0], ev[ev.len() - 1]);
    let condition = if ev_lo <= 0.0 { f64::INFINITY } else { ev_hi / ev_lo };
    if opts.regularization == 0.0 && condition > opts.condition_cap {
        return Err(Error::IllConditioned {
            condition,
            cap: opts.condition_cap,
        });
    }
    let n = basis.len();
    let steps = grid.steps();
    let dt = grid.dt();

    let mu = if sys.rhs.iter().all(|c| *c == ZERO) {
        DVector::from_element(n, ZERO)
    } else {
        let a = &sys.matrix + DMatrix::identity(n, n) * Complex64::new(opts.regularization, 0.0);
        a.lu()
            .solve(&(-&sys.rhs))
            .ok_or_else(|| Error::Degenerate("regularized Gramian is singular".into()))?
    };

    // spatial amplitudes a_{m,j} of the control on G₀ and its mode coefficients
    let mut amp = vec![vec![ZERO; steps]; n];
    for (m, row) in amp.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = sys.weights[m][j].conj() * mu[m] / dt;
        }
    }
    let gm = &sys.sensor_gram;
    let mut cells = vec![vec![ZERO; steps]; n];
    for (k, row) in cells.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for m in 0..n {
                acc += gm[(k, m)] * amp[m][j];
            }
            *v = acc;
        }
    }
    let mut l2 = 0.0;
    for j in 0..steps {
        for a in 0..n {
            for b in 0..n {
                l2 += (amp[a][j].conj() * gm[(a, b)] * amp[b][j]).re * dt;
            }
        }
    }
    let control = ControlSignal::from_cells(grid, cells)?;

    let traj = averaged_controlled(alpha, xi, basis, y0, &control)?;
    let y0n = y0.norm();
    let terminal_residual = if y0n == 0.0 {
        traj.final_state().norm()
    } else {
        traj.final_state().norm() / y0n
    };

    let linf_cost = linf_on_sensor(basis, sensor, &amp, opts.linf_density)?;
    let tail_factor = tail_factor(alpha, xi, basis, sensor, grid.t_final())?;

    let report = ControlReport {
        terminal_residual,
        l2_cost: l2.max(0.0).sqrt(),
        linf_cost,
        gramian_condition: condition,
        gramian_min_eigenvalue: ev_lo,
        gramian_max_eigenvalue: ev_hi,
        hermitian_defect: sys.hermitian_defect(),
        regularization: opts.regularization,
        tail_factor,
        class_check_passed,
    };
    Ok((control, report))
}

/// Sample points covering every sensor piece.
fn sensor_samples(sensor: &SensorSet, density: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for piece in sensor.pieces() {
        let axes: Vec<Vec<f64>> = piece
            .lo
            .iter()
            .zip(&piece.hi)
            .map(|(a, b)| {
                let k = ((b - a) * density as f64).ceil().max(2.0) as usize;
                (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
            })
            .collect();
        let mut pts: Vec<Vec<f64>> = vec![vec![]];
        for axis in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out.extend(pts);
    }
    out
}

fn linf_on_sensor(basis: &[Mode], sensor: &SensorSet, amp: &[Vec<Complex64>], density: usize) -> Result<f64> {
    let domain = sensor.domain();
    let pts = sensor_samples(sensor, density.max(2));
    let values: Vec<Vec<f64>> = pts
        .iter()
        .map(|x| basis.iter().map(|m| eigenfunction_eval(m, domain, x)).collect())
        .collect::<Result<_>>()?;
    let steps = amp.first().map_or(0, |a| a.len());
    let best = (0..steps)
        .into_par_iter()
        .map(|j| {
            let mut sup: f64 = 0.0;
            for ev in &values {
                let mut acc = ZERO;
                for (m, e) in ev.iter().enumerate() {
                    acc += amp[m][j] * e;
                }
                sup = sup.max(acc.norm());
            }
            sup
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

fn tail_factor(alpha: f64, xi: &RandomDiffusivity, basis: &[Mode], sensor: &SensorSet, t_final: f64) -> Result<f64> {
    let n = basis.len();
    let wide = build_basis(sensor.domain(), 4 * n)?;
    let p1 = FracParams::new(alpha, 1.0)?;
    let mut sup: f64 = 0.0;
    for mode in &wide[n..] {
        sup = sup.max(fcf(xi, p1, -mode.lambda * t_final.powf(alpha))?.norm());
    }
    Ok(sup)
}

/// I_n = ∫_0^T t^{α−1}|φ_{α,α}(−λ_n t^α)| dt for every mode.
///
/// With v = λ t^α this is F(λ_n T^α)/(αλ_n), F(x) = ∫_0^x |φ_{α,α}(−v)| dv,
/// and F is accumulated across the sorted endpoints. Unless `force` is set,
/// the law must show decay of |φ_{α,α}| over the scanned range.
pub fn exactness_failure_scan(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    t_final: f64,
    force: bool,
) -> Result<Vec<(usize, f64)>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::invalid("t_final", "must be positive"));
    }
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let pa = FracParams::new(alpha, alpha)?;
    let ta = t_final.powf(alpha);
    let mut ends: Vec<(usize, f64)> = basis.iter().enumerate().map(|(i, m)| (i, m.lambda * ta)).collect();
    ends.sort_by(|a, b| a.1.total_cmp(&b.1));

    let s_max = ends[ends.len() - 1].1;
    if !force {
        let head = fcf(xi, pa, 0.0)?.norm();
        let tail = fcf(xi, pa, -s_max)?.norm();
        if !(tail < 0.1 * head) {
            return Err(Error::Precondition(format!(
                "|phi| does not decay over [0, {s_max:.3e}] for law `{}`; use force to override",
                xi.name()
            )));
        }
    }

    let mut failed = None;
    let mut integrand = |v: f64| match fcf(xi, pa, -v) {
        Ok(c) => c.norm(),
        Err(e) => {
            failed.get_or_insert(e);
            0.0
        }
    };
    let mut cumulative = 0.0;
    let mut prev = 0.0;
    let mut out = vec![(0usize, 0.0); basis.len()];
    for &(i, x) in &ends {
        if x > prev {
            // geometric panels resolve the early transient
            let mut breaks = vec![prev];
            let mut b = if prev > 0.0 { prev * 2.0 } else { 1.0 / 64.0 };
            while b < x {
                breaks.push(b);
                b *= 2.0;
            }
            breaks.push(x);
            let (v, _) = adaptive_gk_real(&mut integrand, &breaks, 1e-14, 1e-10, 20_000)?;
            cumulative += v;
            prev = x;
        }
        out[i] = (basis[i].index, cumulative / (alpha * basis[i].lambda));
    }
    if let Some(e) = failed {
        return Err(e);
    }
    Ok(out)
}

/// A local minimum of ξ ↦ ‖y(T; ξ)‖ below the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCandidate {
    pub xi: f64,
    pub residual: f64,
}

/// Scans ξ ↦ ‖y(T; ξ)‖ on a uniform grid of `resolution` points, refines
/// each interior local minimum by golden-section search and keeps those whose
/// refined value is below `tol_rel·‖y₀‖`. ξ = 0 is excluded.
#[allow(clippy::too_many_arguments)]
pub fn simultaneous_zero_scan(
    alpha: f64,
    basis: &[Mode],
    y0: &SpectralField,
    u: &ControlSignal,
    xi_interval: (f64, f64),
    resolution: usize,
    tol_rel: f64,
) -> Result<Vec<ZeroCandidate>> {
    let norm0 = y0.norm();
    if norm0 == 0.0 {
        return Err(Error::Precondition("y0 must be nonzero".into()));
    }
    if resolution < 100 {
        return Err(Error::invalid("resolution", format!("{resolution} < 100")));
    }
    let (a, b) = xi_interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid("xi_interval", format!("[{a}, {b}] is empty")));
    }
    let residual = |x: f64| -> Result<f64> {
        if x == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(forward_terminal(alpha, x, basis, y0, u)?.norm())
    };
    let xs: Vec<f64> = (0..resolution)
        .map(|i| a + (b - a) * i as f64 / (resolution - 1) as f64)
        .collect();
    let fs: Vec<f64> = xs.par_iter().map(|&x| residual(x)).collect::<Result<_>>()?;

    let tol = tol_rel * norm0;
    let mut out = Vec::new();
    for i in 1..resolution - 1 {
        if !(fs[i] <= fs[i - 1] && fs[i] < fs[i + 1]) {
            continue;
        }
        let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
        // never bracket the excluded point
        if lo < 0.0 && hi > 0.0 {
            if xs[i] < 0.0 {
                hi = -f64::MIN_POSITIVE;
            } else {
                lo = f64::MIN_POSITIVE;
            }
        }
        let (x, f) = golden_min(&residual, lo, hi)?;
        if f <= tol {
            out.push(ZeroCandidate { xi: x, residual: f });
        }
    }
    Ok(out)
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + c.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Domain;

    fn unit() -> (Domain, Vec<Mode>) {
        let d = Domain::interval(1.0).unwrap();
        let b = build_basis(&d, 4).unwrap();
        (d, b)
    }

    #[test]
    fn gramian_is_hermitian_psd() {
        let (d, basis) = unit();
        let sensor = SensorSet::intervals(&d, &[(0.1, 0.4)]).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let xi = RandomDiffusivity::atoms("two", vec![(0.5, 0.3), (-1.2, 0.7)]).unwrap();
        let sys = build_gramian(0.6, &xi, &basis, &sensor, grid, None).unwrap();
        assert!(sys.hermitian_defect() <= 1e-12 * sys.matrix.norm());
        assert!(sys.eigenvalues()[0] >= -1e-10);
    }

    #[test]
    fn zero_datum_needs_no_control() {
        let (d, basis) = unit();
        let sensor = SensorSet::intervals(&d, &[(0.2, 0.5)]).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let opts = ControlOptions {
            force: true,
            ..Default::default()
        };
        let (u, rep) = hum_null_control(
            0.5,
            &RandomDiffusivity::rademacher(),
            &basis,
            &SpectralField::zeros(4),
            &sensor,
            grid,
            opts,
        )
        .unwrap();
        assert!(u.cells().iter().flatten().all(|c| *c == ZERO));
        assert_eq!(rep.terminal_residual, 0.0);
        assert_eq!(rep.l2_cost, 0.0);
    }

    #[test]
    fn single_mode_is_solved_exactly() {
        let d = Domain::interval(1.0).unwrap();
        let basis = build_basis(&d, 1).unwrap();
        let sensor = SensorSet::full(&d);
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let opts = ControlOptions {
            force: true,
            regularization: 0.0,
            ..Default::default()
        };
        let y0 = SpectralField::new(vec![Complex64::new(1.0, 0.5)]);
        let (_, rep) = hum_null_control(
            0.7,
            &RandomDiffusivity::uniform(-1.0, 2.0).unwrap(),
            &basis,
            &y0,
            &sensor,
            grid,
            opts,
        )
        .unwrap();
        assert!(rep.terminal_residual < 1e-12, "{}", rep.terminal_residual);
        assert_eq!(rep.gramian_condition, 1.0);
    }

    #[test]
    fn cost_is_linear_in_the_datum() {
        let (d, basis) = unit();
        let sensor = SensorSet::intervals(&d, &[(0.2, 0.5)]).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let opts = ControlOptions {
            force: true,
            ..Default::default()
        };
        let xi = RandomDiffusivity::rademacher();
        let y0 = SpectralField::from_real(&[1.0, -0.5, 0.25, 0.1]);
        let (_, r1) = hum_null_control(0.6, &xi, &basis, &y0, &sensor, grid, opts).unwrap();
        let (_, r2) = hum_null_control(0.6, &xi, &basis, &y0.scaled(2.0), &sensor, grid, opts).unwrap();
        assert!((r2.l2_cost - 2.0 * r1.l2_cost).abs() <= 1e-12 * r2.l2_cost);
    }

    #[test]
    fn unregularized_singular_system_is_refused() {
        let (d, basis) = unit();
        let sensor = SensorSet::intervals(&d, &[(0.2, 0.5)]).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let opts = ControlOptions {
            force: true,
            regularization: 0.0,
            condition_cap: 1.0,
            ..Default::default()
        };
        let y0 = SpectralField::from_real(&[1.0, 0.0, 0.0, 0.0]);
        let r = hum_null_control(0.5, &RandomDiffusivity::rademacher(), &basis, &y0, &sensor, grid, opts);
        assert!(matches!(r, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn classical_flow_has_no_zeros() {
        let d = Domain::interval(1.0).unwrap();
        let basis = build_basis(&d, 1).unwrap();
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let y0 = SpectralField::unit(1, 0);
        let u = ControlSignal::zeros(grid, 1);
        let z = simultaneous_zero_scan(1.0, &basis, &y0, &u, (-10.0, 10.0), 200, 1e-8).unwrap();
        assert!(z.is_empty());
        assert!(simultaneous_zero_scan(1.0, &basis, &SpectralField::zeros(1), &u, (-1.0, 1.0), 200, 1e-8).is_err());
    }

    #[test]
    fn exactness_integrals_decay_for_a_point_mass() {
        let d = Domain::interval(1.0).unwrap();
        let basis = build_basis(&d, 10).unwrap();
        let scan =
            exactness_failure_scan(0.5, &RandomDiffusivity::point_mass(1.0).unwrap(), &basis, 1.0, false).unwrap();
        for w in scan.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
    }
}
