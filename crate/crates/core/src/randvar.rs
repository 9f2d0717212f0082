//! Laws of the random diffusivity ξ, the fractional characteristic function
//! φ_{α,β}(s) = E[E_{α,β}(isξ)], and grid diagnostics for class 𝒞_α.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mlf::{ml_eval, ml_eval_with, FracParams, MlConfig};
use crate::quad::GaussLegendre;

type Pdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Distribution of ξ.
#[derive(Clone)]
pub enum Law {
    /// Point masses (location, weight).
    Atoms(Vec<(f64, f64)>),
    /// Density on a compact support with a base quadrature order.
    Density {
        pdf: Pdf,
        support: (f64, f64),
        order: usize,
    },
}

/// A named law with validated parameters.
#[derive(Clone)]
pub struct RandomDiffusivity {
    name: String,
    law: Law,
    /// Probability mass cut off when an unbounded support was truncated.
    truncated_mass: f64,
}

impl fmt::Debug for RandomDiffusivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            Law::Atoms(a) => f
                .debug_struct("RandomDiffusivity")
                .field("name", &self.name)
                .field("atoms", a)
                .finish(),
            Law::Density { support, order, .. } => f
                .debug_struct("RandomDiffusivity")
                .field("name", &self.name)
                .field("support", support)
                .field("order", order)
                .field("truncated_mass", &self.truncated_mass)
                .finish(),
        }
    }
}

/// Default number of Gauss–Legendre nodes for density laws.
pub const DEFAULT_DENSITY_ORDER: usize = 200;

impl RandomDiffusivity {
    /// Discrete law; weights must be positive and sum to one.
    pub fn atoms(name: &str, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "empty law"));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::invalid("atoms", format!("location {x} is not finite")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid("atoms", format!("weight {w} must be positive")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("atoms", format!("weights sum to {total}, not 1")));
        }
        Ok(RandomDiffusivity {
            name: name.to_string(),
            law: Law::Atoms(atoms),
            truncated_mass: 0.0,
        })
    }

    /// Absolutely continuous law; the density must integrate to one within 1e-8
    /// on `support` (minus `truncated_mass` when the true support is larger).
    pub fn density<F>(name: &str, pdf: F, support: (f64, f64), order: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::density_truncated(name, Arc::new(pdf), support, order, 0.0)
    }

    fn density_truncated(name: &str, pdf: Pdf, support: (f64, f64), order: usize, truncated_mass: f64) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(
                "support",
                format!("[{a}, {b}] is not a bounded interval"),
            ));
        }
        if order < 2 {
            return Err(Error::invalid("order", "quadrature order must be at least 2"));
        }
        let law = Law::Density {
            pdf: pdf.clone(),
            support,
            order,
        };
        let d = RandomDiffusivity {
            name: name.to_string(),
            law,
            truncated_mass,
        };
        let mut min_pdf = f64::INFINITY;
        let mass = d.integrate_real(order, &mut |x| {
            let p = pdf(x);
            min_pdf = min_pdf.min(p);
            p
        });
        if !(min_pdf >= 0.0) {
            return Err(Error::invalid("pdf", "density takes negative or NaN values"));
        }
        if (mass + truncated_mass - 1.0).abs() > 1e-8 {
            return Err(Error::invalid("pdf", format!("density mass {mass} differs from 1")));
        }
        Ok(d)
    }

    pub fn rademacher() -> Self {
        Self::atoms("rademacher", vec![(-1.0, 0.5), (1.0, 0.5)]).expect("valid law")
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::atoms("point_mass", vec![(x, 1.0)])
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(
                "support",
                format!("[{a}, {b}] is not a bounded interval"),
            ));
        }
        let h = 1.0 / (b - a);
        Self::density("uniform", move |_| h, (a, b), DEFAULT_DENSITY_ORDER)
    }

    /// Normal law truncated where the two-sided tail mass drops below 1e-12.
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::invalid("sd", format!("normal({mean}, {sd}) is invalid")));
        }
        let mut k = 5.0;
        while libm::erfc(k / std::f64::consts::SQRT_2) >= 1e-12 {
            k += 0.01;
        }
        let tail = libm::erfc(k / std::f64::consts::SQRT_2);
        let c = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
        Self::density_truncated(
            "normal",
            Arc::new(move |x: f64| {
                let u = (x - mean) / sd;
                c * (-0.5 * u * u).exp()
            }),
            (mean - k * sd, mean + k * sd),
            DEFAULT_DENSITY_ORDER,
            tail,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.law, Law::Atoms(_))
    }

    /// Panels for density quadrature, graded geometrically toward ξ = 0 on
    /// the scale 1/|s| where E(isξ) varies fastest relative to its size.
    fn panels(&self, s: f64) -> Vec<f64> {
        let Law::Density { support: (a, b), .. } = self.law else {
            return Vec::new();
        };
        let mut pts = vec![a, b];
        let width = b - a;
        for k in 1..8 {
            pts.push(a + width * k as f64 / 8.0);
        }
        if a < 0.0 && b > 0.0 {
            pts.push(0.0);
        }
        let h0 = if s.abs() > 0.0 { 1.0 / s.abs() } else { width };
        let mut h = h0.min(width);
        while h < width {
            for c in [-h, h] {
                if c > a && c < b {
                    pts.push(c);
                }
            }
            h *= 2.0;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn integrate_real(&self, order: usize, f: &mut dyn FnMut(f64) -> f64) -> f64 {
        let pts = self.panels(0.0);
        let per = (order / (pts.len() - 1)).max(8);
        let rule = GaussLegendre::cached(per);
        pts.windows(2).map(|w| rule.integrate(w[0], w[1], &mut *f)).sum()
    }

    fn integrate_fcf(&self, p: FracParams, s: f64, order: usize) -> Result<Complex64> {
        let Law::Density { pdf, .. } = &self.law else {
            unreachable!("density only")
        };
        let pts = self.panels(s);
        let per = (order / (pts.len() - 1)).max(8);
        let rule = GaussLegendre::cached(per);
        let mut acc = Complex64::new(0.0, 0.0);
        for w in pts.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                let px = pdf(x);
                if px != 0.0 {
                    acc += wt * px * ml_eval(p, Complex64::new(0.0, s * x))?;
                }
            }
        }
        Ok(acc)
    }
}

/// Atom sums carry no quadrature error, so the Mittag–Leffler values are
/// requested two digits tighter than the default.
fn atom_config() -> MlConfig {
    MlConfig {
        tol: 1e-12,
        ..MlConfig::default()
    }
}

/// Largest quadrature order tried before giving up on a density.
const MAX_DENSITY_ORDER: usize = 6400;

fn check_fcf_params(p: FracParams) -> Result<()> {
    if !(p.alpha() > 0.0 && p.alpha() <= 1.0) {
        return Err(Error::invalid("alpha", format!("{} not in (0, 1]", p.alpha())));
    }
    if !(p.beta() > 0.0) {
        return Err(Error::invalid("beta", format!("{} must be positive", p.beta())));
    }
    Ok(())
}

/// φ_{α,β}(s) = E[E_{α,β}(isξ)].
///
/// Atoms are summed exactly with E_{α,β} at relative accuracy 1e-12; densities use graded composite Gauss–Legendre
/// with the order doubled until two successive values agree to 1e-10.
pub fn fcf(xi: &RandomDiffusivity, p: FracParams, s: f64) -> Result<Complex64> {
    check_fcf_params(p)?;
    if !s.is_finite() {
        return Err(Error::invalid("s", "must be finite"));
    }
    match &xi.law {
        Law::Atoms(atoms) => {
            let cfg = atom_config();
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, w) in atoms {
                acc += w * ml_eval_with(p, Complex64::new(0.0, s * x), &cfg)?.value;
            }
            Ok(acc)
        }
        Law::Density { order, .. } => {
            let mut n = *order;
            let mut prev = xi.integrate_fcf(p, s, n)?;
            while n < MAX_DENSITY_ORDER {
                n *= 2;
                let next = xi.integrate_fcf(p, s, n)?;
                if (next - prev).norm() <= 1e-10 * next.norm().max(1.0) {
                    return Ok(next);
                }
                prev = next;
            }
            Err(Error::QuadratureFailure(format!(
                "fcf at s = {s} not stable to 1e-10 with {MAX_DENSITY_ORDER} nodes"
            )))
        }
    }
}

/// E_{2α,β}(−s²), the characteristic function of the Rademacher law.
pub fn fcf_rademacher_closed(p: FracParams, s: f64) -> Result<f64> {
    check_fcf_params(p)?;
    let q = FracParams::new(2.0 * p.alpha(), p.beta())?;
    Ok(ml_eval_with(q, Complex64::new(-s * s, 0.0), &atom_config())?.value.re)
}

/// |φ_{α,α}(−s)| at `n_points` log-spaced s in [1, s_max].
pub fn fcf_decay_scan(xi: &RandomDiffusivity, alpha: f64, s_max: f64, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if n_points < 2 {
        return Err(Error::invalid("n_points", "need at least 2"));
    }
    if !(s_max > 1.0 && s_max.is_finite()) {
        return Err(Error::invalid("s_max", format!("{s_max} must exceed 1")));
    }
    let p = FracParams::new(alpha, alpha)?;
    let ls = s_max.ln();
    (0..n_points)
        .into_par_iter()
        .map(|k| {
            let s = (ls * k as f64 / (n_points - 1) as f64).exp();
            Ok((s, fcf(xi, p, -s)?.norm()))
        })
        .collect()
}

/// Grid evidence for the two class-𝒞_α inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCAlphaReport {
    pub alpha: f64,
    pub delta: f64,
    pub t_final: f64,
    pub lambda_star: f64,
    pub theta: f64,
    pub r: f64,
    /// Largest c compatible with the decay inequality on the grid.
    pub c: f64,
    /// Bounds of |φ_{α,α}|/|φ_{α,1}| over the grid.
    pub c1: f64,
    pub c2: f64,
    pub pass_decay: bool,
    pub pass_ratio: bool,
    /// Largest ln-excess of the decay inequality at the margin c = 1e-3.
    pub worst_violation: f64,
    /// max_t ratio at the largest λ over max_t ratio at the smallest λ.
    pub ratio_growth: f64,
    /// C2/C1 on the base and on the refined grid.
    pub spread: f64,
    pub spread_refined: f64,
    /// Set when an evaluation failed; the pass flags are then false.
    pub failure: Option<String>,
}

/// Smallest c counted as exponential decay.
pub const DECAY_MARGIN: f64 = 1e-3;
/// Relative change of C2/C1 tolerated under refinement.
pub const SPREAD_TOLERANCE: f64 = 0.1;

/// Geometric λ grid and uniform time grid on [δT, T].
pub fn class_check_grids(
    lambda_star: f64,
    lambda_max: f64,
    n_lambda: usize,
    delta: f64,
    t_final: f64,
    n_time: usize,
) -> (Vec<f64>, Vec<f64>) {
    let lg = (0..n_lambda)
        .map(|k| {
            let f = if n_lambda > 1 {
                k as f64 / (n_lambda - 1) as f64
            } else {
                0.0
            };
            lambda_star * (lambda_max / lambda_star).powf(f)
        })
        .collect();
    let t0 = delta * t_final;
    let tg = (0..n_time)
        .map(|k| {
            let f = if n_time > 1 {
                k as f64 / (n_time - 1) as f64
            } else {
                1.0
            };
            t0 + (t_final - t0) * f
        })
        .collect();
    (lg, tg)
}

struct GridStats {
    c: f64,
    worst: f64,
    c1: f64,
    c2: f64,
    growth: f64,
}

fn grid_stats(
    xi: &RandomDiffusivity,
    alpha: f64,
    theta: f64,
    r: f64,
    lambdas: &[f64],
    times: &[f64],
) -> Result<GridStats> {
    let p1 = FracParams::new(alpha, 1.0)?;
    let pa = FracParams::new(alpha, alpha)?;
    let rows: Vec<Result<Vec<(f64, f64)>>> = lambdas
        .par_iter()
        .map(|&lam| {
            times
                .iter()
                .map(|&t| {
                    let s = -lam * t.powf(alpha);
                    Ok((fcf(xi, p1, s)?.norm(), fcf(xi, pa, s)?.norm()))
                })
                .collect()
        })
        .collect();
    let mut c = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    let mut first_top = 0.0;
    let mut last_top = 0.0;
    for (li, (row, &lam)) in rows.into_iter().zip(lambdas).enumerate() {
        let row = row?;
        let lr = lam.powf(r);
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                let (a_s, a_t) = (row[i].0, row[j].0);
                let gap = lr * (times[j] - times[i]).powf(theta);
                let log_ratio = if a_t == 0.0 {
                    f64::INFINITY
                } else if a_s == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (a_s / a_t).ln()
                };
                c = c.min(log_ratio / gap);
                worst = worst.max(-log_ratio + DECAY_MARGIN * gap);
            }
        }
        let mut top: f64 = 0.0;
        for &(a1, aa) in &row {
            let ratio = if a1 == 0.0 { f64::INFINITY } else { aa / a1 };
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
            top = top.max(ratio);
        }
        if li == 0 {
            first_top = top;
        }
        last_top = top;
    }
    Ok(GridStats {
        c,
        worst: worst.max(0.0),
        c1,
        c2,
        growth: last_top / first_top,
    })
}

/// Fit c, C1, C2 on the grid; the ratio bounds are recomputed on a grid with
/// twice the density and a λ range extended upward by half a decade in log
/// scale, and the spread C2/C1 must be stable to 10%.
#[allow(clippy::too_many_arguments)]
pub fn class_c_alpha_check(
    xi: &RandomDiffusivity,
    alpha: f64,
    delta: f64,
    t_final: f64,
    theta: f64,
    r: f64,
    lambda_grid: &[f64],
    time_grid: &[f64],
) -> Result<ClassCAlphaReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("{delta} not in (0, 1)")));
    }
    if !(t_final > 0.0 && theta > 0.0 && r > 0.0) {
        return Err(Error::invalid("t_final", "t_final, theta and r must be positive"));
    }
    if lambda_grid.len() < 2 || time_grid.len() < 2 {
        return Err(Error::invalid("grid", "need at least two λ and two time points"));
    }
    let t0 = delta * t_final;
    if time_grid
        .iter()
        .any(|&t| t < t0 * (1.0 - 1e-12) || t > t_final * (1.0 + 1e-12))
    {
        return Err(Error::invalid("time_grid", "points must lie in [δT, T]"));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0)) || lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("lambda_grid", "must be positive and increasing"));
    }
    let lambda_star = lambda_grid[0];
    let mut report = ClassCAlphaReport {
        alpha,
        delta,
        t_final,
        lambda_star,
        theta,
        r,
        c: f64::NAN,
        c1: f64::NAN,
        c2: f64::NAN,
        pass_decay: false,
        pass_ratio: false,
        worst_violation: f64::NAN,
        ratio_growth: f64::NAN,
        spread: f64::NAN,
        spread_refined: f64::NAN,
        failure: None,
    };
    let base = match grid_stats(xi, alpha, theta, r, lambda_grid, time_grid) {
        Ok(b) => b,
        Err(e) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
    };
    let lmax = *lambda_grid.last().expect("non-empty");
    let (lam_ref, time_ref) = class_check_grids(
        lambda_star,
        lmax * (lmax / lambda_star).sqrt(),
        2 * lambda_grid.len(),
        delta,
        t_final,
        2 * time_grid.len() - 1,
    );
    report.c = base.c;
    report.worst_violation = base.worst;
    report.c1 = base.c1;
    report.c2 = base.c2;
    report.ratio_growth = base.growth;
    report.pass_decay = base.c.is_finite() && base.c >= DECAY_MARGIN;
    report.spread = base.c2 / base.c1;
    match grid_stats(xi, alpha, theta, r, &lam_ref, &time_ref) {
        Ok(refined) => {
            report.spread_refined = refined.c2 / refined.c1;
            let finite = [base.c1, base.c2, refined.c1, refined.c2]
                .iter()
                .all(|v| v.is_finite() && *v > 0.0);
            report.pass_ratio = finite && ((report.spread_refined / report.spread) - 1.0).abs() <= SPREAD_TOLERANCE;
        }
        Err(e) => report.failure = Some(e.to_string()),
    }
    Ok(report)
}
