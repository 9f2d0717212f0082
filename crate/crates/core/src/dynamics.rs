//! Mode-wise forward, adjoint and averaged dynamics.
//!
//! For a fixed diffusivity ξ the n-th mode obeys ∂^α y_n = −iξλ_n y_n + u_n,
//! so that
//!
//! y_n(t) = E_{α,1}(−iξλ_n t^α) y_{0,n} + ∫_0^t (t−s)^{α−1} E_{α,α}(−iξλ_n (t−s)^α) u_n(s) ds.
//!
//! Controls are piecewise constant on the grid cells, and the Duhamel integral
//! is evaluated with exact cell weights K(t_k − t_j) − K(t_k − t_{j+1}) where
//! K(τ) = τ^α E_{α,α+1}(−iξλτ^α) is the primitive of the kernel. Averaged
//! dynamics replace every Mittag–Leffler factor by the corresponding
//! fractional characteristic function of ξ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fraccalc::{TimeGrid, TimeSeries};
use crate::mlf::{ml_eval, FracParams};
use crate::quad::{adaptive_gk, GaussLegendre};
use crate::randvar::{fcf, RandomDiffusivity};
use crate::spectral::{Mode, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mode coefficients u_n of the control, constant on each grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    grid: TimeGrid,
    /// cells[n][j] is the value of u_n on [t_j, t_{j+1}]
    cells: Vec<Vec<Complex64>>,
}

impl ControlSignal {
    pub fn zeros(grid: TimeGrid, modes: usize) -> Self {
        ControlSignal {
            grid,
            cells: vec![vec![ZERO; grid.steps()]; modes],
        }
    }

    pub fn from_cells(grid: TimeGrid, cells: Vec<Vec<Complex64>>) -> Result<Self> {
        if cells.iter().any(|c| c.len() != grid.steps()) {
            return Err(Error::GridMismatch(format!(
                "every mode needs {} cell values",
                grid.steps()
            )));
        }
        Ok(ControlSignal { grid, cells })
    }

    /// Cell values from node samples (modes × nodes) by averaging neighbours.
    pub fn from_nodal(grid: TimeGrid, nodal: &[Vec<Complex64>]) -> Result<Self> {
        if nodal.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch(format!(
                "every mode needs {} node values",
                grid.len()
            )));
        }
        let cells = nodal
            .iter()
            .map(|v| v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
            .collect();
        Ok(ControlSignal { grid, cells })
    }

    /// Cell averages of u_n(t) = f(n, t), by 4-point Gauss–Legendre per cell.
    pub fn from_fn<F: Fn(usize, f64) -> Complex64>(grid: TimeGrid, modes: usize, f: F) -> Self {
        let rule = GaussLegendre::cached(4);
        let dt = grid.dt();
        let cells = (0..modes)
            .map(|n| {
                (0..grid.steps())
                    .map(|j| {
                        let (a, b) = (grid.node(j), grid.node(j + 1));
                        let mut acc = ZERO;
                        for (x, w) in rule.mapped(a, b) {
                            acc += w * f(n, x);
                        }
                        acc / dt
                    })
                    .collect()
            })
            .collect();
        ControlSignal { grid, cells }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn modes(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<Complex64>] {
        &self.cells
    }

    /// Node values (modes × nodes): mean of the adjacent cells.
    pub fn nodal(&self) -> Vec<Vec<Complex64>> {
        self.cells
            .iter()
            .map(|c| {
                let last = c.len() - 1;
                (0..=c.len())
                    .map(|k| match k {
                        0 => c[0],
                        k if k > last => c[last],
                        k => 0.5 * (c[k - 1] + c[k]),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ControlSignal {
            grid: self.grid,
            cells: self.cells.iter().map(|c| c.iter().map(|v| v * s).collect()).collect(),
        }
    }
}

/// States at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<SpectralField>,
}

impl Trajectory {
    fn from_modes(grid: TimeGrid, per_mode: Vec<Vec<Complex64>>) -> Self {
        let n = per_mode.len();
        let states = (0..grid.len())
            .map(|k| SpectralField::new((0..n).map(|m| per_mode[m][k]).collect()))
            .collect();
        Trajectory { grid, states }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("grids have at least three nodes")
    }

    /// Time series of one mode coefficient.
    pub fn mode_series(&self, n: usize) -> TimeSeries {
        TimeSeries::new(self.grid, self.states.iter().map(|s| s.coeffs()[n]).collect()).expect("one state per node")
    }
}

/// Adjoint states; the node t = T is singular for α < 1 and stored as infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub trajectory: Trajectory,
    pub singular_final: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("{alpha} not in (0, 1]")))
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_finite() && xi != 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("xi_value", format!("{xi} must be a nonzero real")))
    }
}

fn check_sizes(basis: &[Mode], field: &SpectralField, name: &'static str) -> Result<()> {
    if field.basis_size() != basis.len() {
        return Err(Error::invalid(
            name,
            format!("{} coefficients for {} modes", field.basis_size(), basis.len()),
        ));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("t", format!("{t} must be nonnegative")))
    }
}

/// Cell weights W_m = K(mΔt) − K((m−1)Δt), m = 1..steps, from the kernel primitive.
fn cell_weights<K: Fn(f64) -> Result<Complex64>>(grid: TimeGrid, prim: K) -> Result<Vec<Complex64>> {
    let mut k_prev = ZERO;
    let mut out = Vec::with_capacity(grid.steps());
    for m in 1..=grid.steps() {
        let k = prim(grid.node(m))?;
        out.push(k - k_prev);
        k_prev = k;
    }
    Ok(out)
}

/// Duhamel sums D_k = Σ_{j<k} W_{k−j} c_j at every node.
fn convolve(weights: &[Complex64], cells: &[Complex64]) -> Vec<Complex64> {
    let steps = cells.len();
    let mut out = vec![ZERO; steps + 1];
    if cells.iter().all(|c| *c == ZERO) {
        return out;
    }
    for k in 1..=steps {
        let mut acc = ZERO;
        for j in 0..k {
            acc += weights[k - j - 1] * cells[j];
        }
        out[k] = acc;
    }
    out
}

/// Forward cell weights for a single diffusivity value.
pub fn forward_cell_weights(alpha: f64, xi: f64, lambda: f64, grid: TimeGrid) -> Result<Vec<Complex64>> {
    let p = FracParams::new(alpha, alpha + 1.0)?;
    cell_weights(grid, |tau| {
        let ta = tau.powf(alpha);
        Ok(ta * ml_eval(p, Complex64::new(0.0, -xi * lambda * ta))?)
    })
}

/// Averaged cell weights with K̄(τ) = τ^α φ_{α,α+1}(−λτ^α).
pub fn averaged_cell_weights(
    alpha: f64,
    xi: &RandomDiffusivity,
    lambda: f64,
    grid: TimeGrid,
) -> Result<Vec<Complex64>> {
    let p = FracParams::new(alpha, alpha + 1.0)?;
    cell_weights(grid, |tau| {
        let ta = tau.powf(alpha);
        Ok(ta * fcf(xi, p, -lambda * ta)?)
    })
}

/// Mode-wise solution for one realization ξ ≠ 0.
pub fn forward_modes(
    alpha: f64,
    xi_value: f64,
    basis: &[Mode],
    y0: &SpectralField,
    u: &ControlSignal,
) -> Result<Trajectory> {
    check_alpha(alpha)?;
    check_xi(xi_value)?;
    check_sizes(basis, y0, "y0")?;
    if u.modes() != basis.len() {
        return Err(Error::GridMismatch(format!(
            "control has {} modes, basis {}",
            u.modes(),
            basis.len()
        )));
    }
    let grid = u.grid;
    let p1 = FracParams::new(alpha, 1.0)?;
    let per_mode: Vec<Vec<Complex64>> = basis
        .par_iter()
        .enumerate()
        .map(|(n, mode)| {
            let lam = mode.lambda;
            let w = forward_cell_weights(alpha, xi_value, lam, grid)?;
            let mut y = convolve(&w, &u.cells[n]);
            let y0n = y0.coeffs()[n];
            for (k, yk) in y.iter_mut().enumerate() {
                let t = grid.node(k);
                let free = if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    ml_eval(p1, Complex64::new(0.0, -xi_value * lam * t.powf(alpha)))?
                };
                *yk += free * y0n;
            }
            Ok(y)
        })
        .collect::<Result<_>>()?;
    Ok(Trajectory::from_modes(grid, per_mode))
}

/// State at the final node only, for one realization.
pub fn forward_terminal(
    alpha: f64,
    xi_value: f64,
    basis: &[Mode],
    y0: &SpectralField,
    u: &ControlSignal,
) -> Result<SpectralField> {
    check_alpha(alpha)?;
    check_xi(xi_value)?;
    check_sizes(basis, y0, "y0")?;
    if u.modes() != basis.len() {
        return Err(Error::GridMismatch(format!(
            "control has {} modes, basis {}",
            u.modes(),
            basis.len()
        )));
    }
    let grid = u.grid;
    let tf = grid.t_final();
    let p1 = FracParams::new(alpha, 1.0)?;
    let coeffs = basis
        .iter()
        .enumerate()
        .map(|(n, mode)| {
            let lam = mode.lambda;
            let mut y = ml_eval(p1, Complex64::new(0.0, -xi_value * lam * tf.powf(alpha)))? * y0.coeffs()[n];
            let cells = &u.cells[n];
            if cells.iter().any(|c| *c != ZERO) {
                let w = forward_cell_weights(alpha, xi_value, lam, grid)?;
                let steps = grid.steps();
                for (j, c) in cells.iter().enumerate() {
                    y += w[steps - j - 1] * c;
                }
            }
            Ok(y)
        })
        .collect::<Result<_>>()?;
    Ok(SpectralField::new(coeffs))
}

/// Adjoint state z and its right integral I^{1−α}_{t,T} z for terminal data z_T.
///
/// Mode n: z_n(t) = (T−t)^{α−1} E_{α,α}(iξλ_n(T−t)^α) z_{T,n} and
/// (I^{1−α}z)_n(t) = E_{α,1}(iξλ_n(T−t)^α) z_{T,n}, which solve
/// D^α_{t,T} z + iξΔz = 0 with I^{1−α}z(T) = z_T.
pub fn adjoint_modes(
    alpha: f64,
    xi_value: f64,
    basis: &[Mode],
    z_t: &SpectralField,
    grid: TimeGrid,
) -> Result<(AdjointTrajectory, Trajectory)> {
    check_alpha(alpha)?;
    check_xi(xi_value)?;
    check_sizes(basis, z_t, "z_T")?;
    let pa = FracParams::new(alpha, alpha)?;
    let p1 = FracParams::new(alpha, 1.0)?;
    let tf = grid.t_final();
    let singular = alpha < 1.0;
    let (zs, izs): (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) = basis
        .par_iter()
        .enumerate()
        .map(|(n, mode)| {
            let c = z_t.coeffs()[n];
            let mut z = Vec::with_capacity(grid.len());
            let mut iz = Vec::with_capacity(grid.len());
            for k in 0..grid.len() {
                let tau = if k == grid.steps() { 0.0 } else { tf - grid.node(k) };
                let arg = Complex64::new(0.0, xi_value * mode.lambda * tau.powf(alpha));
                iz.push(ml_eval(p1, arg)? * c);
                if tau == 0.0 && singular {
                    z.push(Complex64::new(f64::INFINITY, f64::INFINITY));
                } else {
                    z.push(tau.powf(alpha - 1.0) * ml_eval(pa, arg)? * c);
                }
            }
            Ok((z, iz))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((
        AdjointTrajectory {
            trajectory: Trajectory::from_modes(grid, zs),
            singular_final: singular,
        },
        Trajectory::from_modes(grid, izs),
    ))
}

/// Direct evaluation of the adjoint state at one time.
pub fn adjoint_at(
    alpha: f64,
    xi_value: f64,
    basis: &[Mode],
    z_t: &SpectralField,
    t_final: f64,
    t: f64,
) -> Result<SpectralField> {
    check_alpha(alpha)?;
    check_xi(xi_value)?;
    check_sizes(basis, z_t, "z_T")?;
    if !(t >= 0.0 && t <= t_final) {
        return Err(Error::invalid("t", format!("{t} outside [0, {t_final}]")));
    }
    let tau = t_final - t;
    if tau == 0.0 && alpha < 1.0 {
        return Err(Error::SingularNode { alpha });
    }
    let pa = FracParams::new(alpha, alpha)?;
    let coeffs = basis
        .iter()
        .zip(z_t.coeffs())
        .map(|(m, c)| {
            let arg = Complex64::new(0.0, xi_value * m.lambda * tau.powf(alpha));
            Ok(tau.powf(alpha - 1.0) * ml_eval(pa, arg)? * c)
        })
        .collect::<Result<_>>()?;
    Ok(SpectralField::new(coeffs))
}

/// Expected free evolution, coefficient n = φ_{α,1}(−λ_n t^α) y_{0,n}.
pub fn averaged_free(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    y0: &SpectralField,
    t: f64,
) -> Result<SpectralField> {
    check_alpha(alpha)?;
    check_sizes(basis, y0, "y0")?;
    check_time(t)?;
    let p1 = FracParams::new(alpha, 1.0)?;
    let coeffs = basis
        .iter()
        .zip(y0.coeffs())
        .map(|(m, c)| {
            if t == 0.0 {
                return Ok(*c);
            }
            Ok(fcf(xi, p1, -m.lambda * t.powf(alpha))? * c)
        })
        .collect::<Result<_>>()?;
    Ok(SpectralField::new(coeffs))
}

/// Expected controlled trajectory.
pub fn averaged_controlled(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    y0: &SpectralField,
    u: &ControlSignal,
) -> Result<Trajectory> {
    check_alpha(alpha)?;
    check_sizes(basis, y0, "y0")?;
    if u.modes() != basis.len() {
        return Err(Error::GridMismatch(format!(
            "control has {} modes, basis {}",
            u.modes(),
            basis.len()
        )));
    }
    let grid = u.grid;
    let p1 = FracParams::new(alpha, 1.0)?;
    let per_mode: Vec<Vec<Complex64>> = basis
        .par_iter()
        .enumerate()
        .map(|(n, mode)| {
            let lam = mode.lambda;
            let mut y = if u.cells[n].iter().all(|c| *c == ZERO) {
                vec![ZERO; grid.len()]
            } else {
                let w = averaged_cell_weights(alpha, xi, lam, grid)?;
                convolve(&w, &u.cells[n])
            };
            let y0n = y0.coeffs()[n];
            if y0n != ZERO {
                for (k, yk) in y.iter_mut().enumerate() {
                    let t = grid.node(k);
                    let free = if k == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        fcf(xi, p1, -lam * t.powf(alpha))?
                    };
                    *yk += free * y0n;
                }
            }
            Ok(y)
        })
        .collect::<Result<_>>()?;
    Ok(Trajectory::from_modes(grid, per_mode))
}

/// Free fractional biharmonic evolution, coefficient n = E_{2α,1}(−λ_n² t^{2α}) y_{0,n}.
pub fn biharmonic_free(alpha: f64, basis: &[Mode], y0: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    check_sizes(basis, y0, "y0")?;
    check_time(t)?;
    let p = FracParams::new(2.0 * alpha, 1.0)?;
    let coeffs = basis
        .iter()
        .zip(y0.coeffs())
        .map(|(m, c)| {
            if t == 0.0 {
                return Ok(*c);
            }
            let x = m.lambda * m.lambda * t.powf(2.0 * alpha);
            Ok(ml_eval(p, Complex64::new(-x, 0.0))? * c)
        })
        .collect::<Result<_>>()?;
    Ok(SpectralField::new(coeffs))
}

/// Both sides of the averaged duality identity
/// ⟨E y(T), z_T⟩ − ⟨y_0, E I^{1−α}z(0)⟩ = ∫_0^T Σ_n u_n(t) conj(E z_n(t)) dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Evaluates the duality identity for a smooth control u_n(t) = `u(n, t)`.
///
/// The left side comes from [`averaged_controlled`] with cell-averaged u. The
/// right side is computed independently by adaptive quadrature of the smooth u
/// against the averaged adjoint kernel.
pub fn duality_residual<U: Fn(usize, f64) -> Complex64>(
    alpha: f64,
    xi: &RandomDiffusivity,
    basis: &[Mode],
    y0: &SpectralField,
    z_t: &SpectralField,
    u: U,
    grid: TimeGrid,
) -> Result<DualityCheck> {
    check_alpha(alpha)?;
    check_sizes(basis, y0, "y0")?;
    check_sizes(basis, z_t, "z_T")?;
    let n = basis.len();
    let control = ControlSignal::from_fn(grid, n, &u);
    let traj = averaged_controlled(alpha, xi, basis, y0, &control)?;
    let yt = traj.final_state();
    let tf = grid.t_final();
    let p1 = FracParams::new(alpha, 1.0)?;
    let pa = FracParams::new(alpha, alpha)?;
    let mut lhs = ZERO;
    for (m, mode) in basis.iter().enumerate() {
        let zc = z_t.coeffs()[m].conj();
        lhs += yt.coeffs()[m] * zc;
        // E I^{1−α} z_m(0) = conj(φ_{α,1}(−λT^α)) z_{T,m}
        let ei = fcf(xi, p1, -mode.lambda * tf.powf(alpha))?.conj() * z_t.coeffs()[m];
        lhs -= y0.coeffs()[m] * ei.conj();
    }
    let mut rhs = ZERO;
    let ta = tf.powf(alpha);
    for (m, mode) in basis.iter().enumerate() {
        let zc = z_t.coeffs()[m].conj();
        if zc == ZERO {
            continue;
        }
        // v = (T−t)^α turns the weakly singular integral into ∫_0^{T^α} φ(−λv) u(T − v^{1/α}) dv / α
        let mut breaks = vec![0.0];
        let mut b = 0.25 / mode.lambda;
        while b < ta {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(ta);
        let mut failed = None;
        let r = adaptive_gk(
            |v| match fcf(xi, pa, -mode.lambda * v) {
                Ok(phi) => phi * u(m, (tf - v.powf(1.0 / alpha)).max(0.0)),
                Err(e) => {
                    failed = Some(e);
                    ZERO
                }
            },
            &breaks,
            1e-15,
            1e-12,
            4000,
        )?;
        if let Some(e) = failed {
            return Err(e);
        }
        rhs += r.value / alpha * zc;
    }
    Ok(DualityCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}
