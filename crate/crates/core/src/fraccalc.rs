//! Fractional integrals and derivatives on uniform time grids.
//!
//! All operators act on complex samples at the nodes t_k = kΔt. Integrals use
//! product-trapezoid weights, exact for piecewise-linear data; the Caputo
//! derivative uses the L1 scheme. The weakly singular kernel is always
//! integrated analytically inside the weights.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Uniform grid on [0, T] with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::invalid("t_final", format!("{t_final} must be positive")));
        }
        if steps < 2 {
            return Err(Error::invalid("steps", format!("{steps} must be at least 2")));
        }
        Ok(TimeGrid { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_final
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Grid with twice as many steps over the same horizon.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            t_final: self.t_final,
            steps: 2 * self.steps,
        }
    }
}

/// Complex samples on a [`TimeGrid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(TimeSeries { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: TimeGrid, mut f: F) -> Self {
        let values = grid.nodes().into_iter().map(&mut f).collect();
        TimeSeries { grid, values }
    }

    pub fn from_real_fn<F: FnMut(f64) -> f64>(grid: TimeGrid, mut f: F) -> Self {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        TimeSeries {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Samples of t ↦ f(T − t).
    pub fn reversed(&self) -> TimeSeries {
        let mut values = self.values.clone();
        values.reverse();
        TimeSeries {
            grid: self.grid,
            values,
        }
    }

    /// Largest modulus over the nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_positive_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("{alpha} must be positive")))
    }
}

fn check_unit_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")))
    }
}

/// Product-trapezoid weights for I^α on `steps` intervals, unscaled.
///
/// `inner[m]` multiplies f_{k−m} for 0 ≤ m < k and `first[k]` multiplies f_0.
pub(crate) struct IntegralWeights {
    pub inner: Vec<f64>,
    pub first: Vec<f64>,
    pub scale: f64,
}

pub(crate) fn integral_weights(steps: usize, dt: f64, alpha: f64) -> IntegralWeights {
    let a1 = alpha + 1.0;
    let pw: Vec<f64> = (0..=steps + 1).map(|m| (m as f64).powf(a1)).collect();
    let mut inner = vec![0.0; steps + 1];
    inner[0] = 1.0;
    for m in 1..=steps {
        inner[m] = pw[m + 1] - 2.0 * pw[m] + pw[m - 1];
    }
    let mut first = vec![0.0; steps + 1];
    for (k, w) in first.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        *w = pw[k - 1] - (kf - alpha - 1.0) * kf.powf(alpha);
    }
    IntegralWeights {
        inner,
        first,
        scale: dt.powf(alpha) / gamma(alpha + 2.0),
    }
}

/// Left Riemann–Liouville integral (ω_α ∗ f)(t_k).
pub fn frac_integral_left(f: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    check_positive_order(alpha)?;
    let grid = f.grid;
    let n = grid.steps;
    let w = integral_weights(n, grid.dt(), alpha);
    let v = &f.values;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in 1..=n {
        let mut acc = v[0] * w.first[k];
        for j in 1..=k {
            acc += v[j] * w.inner[k - j];
        }
        out[k] = acc * w.scale;
    }
    Ok(TimeSeries { grid, values: out })
}

/// Right Riemann–Liouville integral ∫_t^T ω_α(s − t) g(s) ds, obtained from
/// the left one by reflection t ↦ T − t.
pub fn frac_integral_right(g: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    Ok(frac_integral_left(&g.reversed(), alpha)?.reversed())
}

/// Caputo derivative ∂^α_{0,t} f by the L1 scheme; zero at t = 0.
pub fn caputo_left(f: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    check_unit_order(alpha)?;
    let grid = f.grid;
    let n = grid.steps;
    let e = 1.0 - alpha;
    let b: Vec<f64> = (0..n).map(|m| (m as f64 + 1.0).powf(e) - (m as f64).powf(e)).collect();
    let scale = grid.dt().powf(-alpha) / gamma(2.0 - alpha);
    let v = &f.values;
    let diffs: Vec<Complex64> = v.windows(2).map(|p| p[1] - p[0]).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..k {
            acc += diffs[j] * b[k - j - 1];
        }
        out[k] = acc * scale;
    }
    Ok(TimeSeries { grid, values: out })
}

/// Right Riemann–Liouville derivative D^α_{t,T} g = −d/dt I^{1−α}_{t,T} g,
/// differentiated with centered differences inside and one-sided ones at the ends.
pub fn rl_derivative_right(g: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    check_unit_order(alpha)?;
    let h = frac_integral_right(g, 1.0 - alpha)?;
    let grid = g.grid;
    let n = grid.steps;
    let dt = grid.dt();
    let hv = &h.values;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    out[0] = -(hv[1] - hv[0]) / dt;
    out[n] = -(hv[n] - hv[n - 1]) / dt;
    for k in 1..n {
        out[k] = -(hv[k + 1] - hv[k - 1]) / (2.0 * dt);
    }
    Ok(TimeSeries { grid, values: out })
}

/// Composite trapezoid rule over the grid.
pub fn trapezoid(values: &[Complex64], dt: f64) -> Complex64 {
    let n = values.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let inner: Complex64 = values[1..n - 1].iter().sum();
    (inner + 0.5 * (values[0] + values[n - 1])) * dt
}

/// |LHS − RHS| of the fractional integration-by-parts identity
///
/// ∫⟨∂^α f, g⟩ = [⟨f, I^{1−α}_{t,T} g⟩]_0^T + ∫⟨f, D^α_{t,T} g⟩,
///
/// with ⟨a, b⟩ = a·conj(b) and trapezoid time quadrature.
pub fn ibp_residual(f: &TimeSeries, g: &TimeSeries, alpha: f64) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch("f and g live on different grids".into()));
    }
    check_unit_order(alpha)?;
    let dt = f.grid.dt();
    let n = f.grid.steps;
    let df = caputo_left(f, alpha)?;
    let ig = frac_integral_right(g, 1.0 - alpha)?;
    let dg = rl_derivative_right(g, alpha)?;
    let lhs: Vec<Complex64> = df.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).collect();
    let rhs: Vec<Complex64> = f.values.iter().zip(&dg.values).map(|(a, b)| a * b.conj()).collect();
    let boundary = f.values[n] * ig.values[n].conj() - f.values[0] * ig.values[0].conj();
    Ok((trapezoid(&lhs, dt) - boundary - trapezoid(&rhs, dt)).norm())
}
