//! Two-parameter Mittag–Leffler function E_{α,β}(z) for complex z.
//!
//! Three evaluation regimes are available:
//!
//! * the power series Σ zⁿ/Γ(αn+β), summed in ascending order with a
//!   compensated accumulator. Accurate only while the cancellation factor
//!   Σ|tₙ|/|E| stays small, roughly while |z|^{1/α} is below ten;
//! * the algebraic asymptotic expansion −Σ z^{-k}/Γ(β−αk), optionally
//!   completed by the exponentially small pole contributions, accurate once
//!   |z|^{1/α} is a few dozen;
//! * an integral representation over a Hankel-type contour
//!   (rays at angle ±δ joined by an arc of radius ε, απ/2 < δ ≤ min(π, απ))
//!   that bridges the two and is used for 0 < α < 2.
//!
//! [`ml_eval`] picks the cheapest regime whose self-reported error meets the
//! configured tolerance. Results are conjugate-symmetric by construction.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, CompensatedSum};
use crate::special::{gamma, ln_gamma_signed, rgamma};

/// Complex argument/value type used throughout the crate.
pub type ComplexValue = Complex64;

/// Pair (α, β) of fractional orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    alpha: f64,
    beta: f64,
}

impl FracParams {
    /// `alpha` must lie in (0, 2]; `beta` may be any finite real.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 2]")));
        }
        if !beta.is_finite() {
            return Err(Error::invalid("beta", format!("{beta} is not finite")));
        }
        Ok(FracParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The same α with a different β.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        FracParams::new(self.alpha, beta)
    }
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Series,
    Asymptotic,
    Integral,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Series => "series",
            Regime::Asymptotic => "asymptotic",
            Regime::Integral => "integral",
        }
    }
}

/// Value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLEvalReport {
    pub value: ComplexValue,
    pub regime: Regime,
    pub terms_used: usize,
    /// Estimated relative error.
    pub est_error: f64,
}

/// Tunables for [`ml_eval_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlConfig {
    /// Target relative accuracy.
    pub tol: f64,
    /// Upper bound on |z| for the series regime.
    pub series_radius: f64,
    /// Lower bound on |z| accepted by [`ml_asymptotic`].
    pub asymptotic_radius: f64,
    /// Position of the sector angle μ inside (απ/2, min(π, απ)), as a fraction.
    pub sector_fraction: f64,
    pub max_terms: usize,
    pub max_order: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            tol: 1e-10,
            series_radius: 15.0,
            asymptotic_radius: 25.0,
            sector_fraction: 0.1,
            max_terms: 20_000,
            max_order: 600,
        }
    }
}

impl MlConfig {
    /// Sector angle μ of the asymptotic expansion for a given α.
    pub fn sector_angle(&self, alpha: f64) -> f64 {
        let lo = 0.5 * alpha * PI;
        let hi = (alpha * PI).min(PI);
        lo + self.sector_fraction * (hi - lo)
    }
}

fn check_finite(z: ComplexValue) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("z", format!("non-finite argument {z}")))
    }
}

/// Truncated power series with a relative truncation estimate.
pub fn ml_series(p: FracParams, z: ComplexValue, tol: f64) -> Result<MLEvalReport> {
    ml_series_with(p, z, tol, &MlConfig::default())
}

pub fn ml_series_with(p: FracParams, z: ComplexValue, tol: f64, cfg: &MlConfig) -> Result<MLEvalReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("{tol} must be positive")));
    }
    check_finite(z)?;
    let r = z.norm();
    if r > cfg.series_radius {
        return Err(Error::RadiusTooLarge {
            modulus: r,
            radius: cfg.series_radius,
        });
    }
    let s = series_sum(p, z, tol, cfg.max_terms)?;
    Ok(MLEvalReport {
        value: s.value,
        regime: Regime::Series,
        terms_used: s.terms,
        est_error: s.tail_rel,
    })
}

struct SeriesSum {
    value: ComplexValue,
    terms: usize,
    tail_rel: f64,
    /// Σ|tₙ| / |Σ tₙ|
    condition: f64,
}

fn series_sum(p: FracParams, z: ComplexValue, tol: f64, max_terms: usize) -> Result<SeriesSum> {
    let (alpha, beta) = (p.alpha, p.beta);
    let r = z.norm();
    if r == 0.0 {
        return Ok(SeriesSum {
            value: Complex64::new(rgamma(beta), 0.0),
            terms: 1,
            tail_rel: 0.0,
            condition: 1.0,
        });
    }
    let ln_r = r.ln();
    let theta = z.arg();
    let mut acc = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut zpow = Complex64::new(1.0, 0.0);
    for n in 0..max_terms {
        let x = alpha * n as f64 + beta;
        let term = if zpow.re.is_finite() && zpow.im.is_finite() && x <= 170.0 {
            zpow * rgamma(x)
        } else {
            let (lg, sign) = ln_gamma_signed(x);
            let ln_mag = n as f64 * ln_r - lg;
            if ln_mag > 700.0 {
                return Err(Error::NonConvergence {
                    terms: n,
                    tail: f64::INFINITY,
                });
            }
            let ang = n as f64 * theta;
            Complex64::from_polar(sign * ln_mag.exp(), ang)
        };
        acc.add(term);
        let tmag = term.norm();
        abs_sum += tmag;
        zpow *= z;

        // Γ is log-convex, so for x ≥ 2 the ratio |t_{n+1}/t_n| only decreases
        // and the tail is dominated by a geometric series.
        if x >= 2.0 {
            let (lg0, _) = ln_gamma_signed(x);
            let (lg1, _) = ln_gamma_signed(x + alpha);
            let rho = (ln_r + lg0 - lg1).exp();
            if rho < 1.0 {
                let tail = tmag * rho / (1.0 - rho);
                let value = acc.value();
                let scale = value.norm().max(f64::MIN_POSITIVE);
                let tail_rel = tail / scale;
                if tail_rel < tol || tail == 0.0 {
                    return Ok(SeriesSum {
                        value,
                        terms: n + 1,
                        tail_rel,
                        condition: abs_sum / scale,
                    });
                }
            }
        }
    }
    Err(Error::NonConvergence {
        terms: max_terms,
        tail: f64::NAN,
    })
}

/// Sum over the pole branches w_j = z^{1/α} e^{2πij/α} with |arg z + 2πj| < απ
/// of (1/α) w_j^{1−β} exp(w_j). Returns (sum, sum of moduli, modulus of terms close
/// to the switching line, which the caller treats as uncertain).
fn exponential_terms(p: FracParams, z: ComplexValue) -> (ComplexValue, f64, f64) {
    let (alpha, beta) = (p.alpha, p.beta);
    let r = z.norm();
    let theta = z.arg();
    let limit = alpha * PI;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let mut boundary = 0.0;
    let jmax = (alpha / 2.0).ceil() as i64 + 1;
    for j in -jmax..=jmax {
        let phase = theta + 2.0 * PI * j as f64;
        if phase.abs() > limit * (1.0 + 1e-12) {
            continue;
        }
        // On the Stokes line itself the subdominant term carries weight 1/2.
        let on_line = (phase.abs() - limit).abs() <= 1e-12 * limit;
        let weight = if on_line { 0.5 } else { 1.0 };
        let wr = r.powf(1.0 / alpha);
        let wa = phase / alpha;
        // (1/α) w^{1−β} e^{w}, in log-polar form
        let ln_mag = (1.0 - beta) * wr.ln() + wr * wa.cos() - alpha.ln();
        let ang = (1.0 - beta) * wa + wr * wa.sin();
        let t = if ln_mag < -745.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(ln_mag.exp(), ang)
        };
        let t = t * weight;
        sum += t;
        mag += t.norm();
        if !on_line && (phase.abs() - limit).abs() < 0.01 * limit {
            boundary += t.norm();
        }
    }
    (sum, mag, boundary)
}

/// β − αk computed in floating point can miss a pole of Γ by an ulp, which
/// would leave a spurious tiny term in the expansion.
fn snap_pole(x: f64) -> f64 {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Algebraic asymptotic expansion −Σ_{k=1}^{order} z^{-k}/Γ(β−αk).
///
/// The returned estimate is relative and includes both the first omitted
/// nonzero term and the size of the neglected exponential contributions.
pub fn ml_asymptotic(p: FracParams, z: ComplexValue, order: usize) -> Result<MLEvalReport> {
    ml_asymptotic_with(p, z, order, &MlConfig::default())
}

pub fn ml_asymptotic_with(p: FracParams, z: ComplexValue, order: usize, cfg: &MlConfig) -> Result<MLEvalReport> {
    check_finite(z)?;
    if p.alpha >= 2.0 {
        return Err(Error::invalid("alpha", "asymptotic expansion needs alpha < 2"));
    }
    if order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    let r = z.norm();
    if r < cfg.asymptotic_radius {
        return Err(Error::RadiusTooSmall {
            modulus: r,
            radius: cfg.asymptotic_radius,
        });
    }
    let mu = cfg.sector_angle(p.alpha);
    let arg = z.arg().abs();
    if arg < mu {
        return Err(Error::SectorViolation { arg, mu });
    }
    let inv = z.inv();
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut acc = CompensatedSum::new();
    let mut next = 0.0;
    let horizon = order + (2.0 / p.alpha).ceil() as usize + 2;
    for k in 1..=horizon {
        ipow *= inv;
        let t = -ipow * rgamma(snap_pole(p.beta - p.alpha * k as f64));
        if k <= order {
            acc.add(t);
        } else if t.norm() > 0.0 {
            next = t.norm();
            break;
        }
    }
    let value = acc.value();
    let (_, exp_mag, _) = exponential_terms(p, z);
    let scale = value.norm().max(f64::MIN_POSITIVE);
    Ok(MLEvalReport {
        value,
        regime: Regime::Asymptotic,
        terms_used: order,
        est_error: (next + exp_mag) / scale,
    })
}

/// Optimally truncated expansion plus exponential terms. Returns the value,
/// its absolute error estimate and the number of algebraic terms used.
fn asymptotic_full(p: FracParams, z: ComplexValue, max_order: usize) -> (ComplexValue, f64, usize) {
    let inv = z.inv();
    let ln_r = z.norm().ln();
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut acc = CompensatedSum::new();
    let mut prev_env = f64::INFINITY;
    let mut est = f64::INFINITY;
    let mut used = 0;
    for k in 1..=max_order {
        let x = snap_pole(p.beta - p.alpha * k as f64);
        // Integer α and β: every later β − αk is a pole as well.
        if x <= 0.0 && x.fract() == 0.0 && p.alpha.fract() == 0.0 {
            est = 0.0;
            break;
        }
        // |1/Γ(x)| oscillates between zeros for x < 0, so optimal truncation
        // is decided on its envelope Γ(1−x)/π.
        let env = if x < -1.0 {
            (libm::lgamma(1.0 - x) - PI.ln() - k as f64 * ln_r).exp()
        } else {
            f64::INFINITY
        };
        if env > prev_env {
            est = prev_env;
            break;
        }
        ipow *= inv;
        acc.add(-ipow * rgamma(x));
        used = k;
        if x < -1.0 {
            prev_env = env;
            est = env;
            if env <= 1e-18 * acc.value().norm() {
                break;
            }
        }
    }
    let (exp_sum, _, boundary) = exponential_terms(p, z);
    let value = acc.value() + exp_sum;
    (value, est + boundary + 4.0 * f64::EPSILON * value.norm(), used)
}

/// Integral representation for 0 < α < 2 and |z| > 0.
fn ml_integral(p: FracParams, z: ComplexValue, tol: f64) -> Result<(ComplexValue, f64, usize)> {
    let (alpha, beta) = (p.alpha, p.beta);
    if alpha >= 2.0 {
        return Err(Error::AccuracyUnreachable {
            re: z.re,
            im: z.im,
            reason: "no contour representation for alpha = 2".into(),
        });
    }
    let r = z.norm();
    let theta = z.arg().abs();
    let lo = 0.5 * alpha * PI;
    let hi = (alpha * PI).min(PI);
    let w = hi - lo;
    let candidates = [hi, lo + 0.75 * w, lo + 0.5 * w, lo + 0.25 * w];
    let delta = candidates
        .iter()
        .copied()
        .find(|d| (theta - d).abs() >= 0.2 * w)
        .unwrap_or_else(|| {
            candidates
                .iter()
                .copied()
                .max_by(|a, b| (theta - a).abs().total_cmp(&(theta - b).abs()))
                .expect("non-empty")
        });
    let eps = if r >= 1.0 { 0.5 } else { 0.5 * r };
    let pw = (1.0 - beta) / alpha;
    let decay = (delta / alpha).cos();
    debug_assert!(decay < 0.0);

    // Truncate the rays where the integrand has dropped below e^{-45}.
    let mut chi_max: f64 = eps * 2.0;
    for _ in 0..4 {
        let extra = (pw * chi_max.max(1.0).ln()).max(0.0);
        chi_max = ((45.0 + extra) / -decay).powf(alpha).max(eps * 2.0);
    }
    let mut breaks = vec![eps];
    let mut b = eps;
    while b * 2.0 < chi_max {
        b *= 2.0;
        breaks.push(b);
    }
    breaks.push(chi_max);
    for f in [0.5, 0.8, 1.0, 1.25, 2.0] {
        let c = f * r;
        if c > eps && c < chi_max {
            breaks.push(c);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let rot_p = Complex64::from_polar(1.0, delta);
    let rot_m = rot_p.conj();
    let mut evals = 0usize;
    let er = eps.powf(1.0 / alpha);
    let two_alpha_pi = 2.0 * alpha * PI;
    let arc_f = |phi: f64| {
        let zeta = Complex64::from_polar(eps, phi);
        let ln_mag = er * (phi / alpha).cos() + (pw + 1.0) * eps.ln();
        let ang = er * (phi / alpha).sin() + (pw + 1.0) * phi;
        Complex64::from_polar(ln_mag.exp(), ang) / (zeta - z)
    };
    let ray_f = |chi: f64| {
        let cr = chi.powf(1.0 / alpha);
        let ln_mag = cr * decay + pw * chi.ln();
        if ln_mag < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mag = ln_mag.exp();
        let ang = cr * (delta / alpha).sin() + pw * delta;
        let fp = Complex64::from_polar(mag, ang) / (rot_p * chi - z) * rot_p;
        let fm = Complex64::from_polar(mag, -ang) / (rot_m * chi - z) * rot_m;
        fp - fm
    };
    let arc_breaks = [-delta, -0.5 * delta, 0.0, 0.5 * delta, delta];
    let mut rel_q = (1e-2 * tol).clamp(5e-15, 1e-12);
    let mut abs_q = 0.0;
    let mut pass = 0;
    loop {
        let arc = adaptive_gk(
            |phi| {
                evals += 1;
                arc_f(phi)
            },
            &arc_breaks,
            abs_q,
            rel_q,
            4000,
        )?;
        let ray = adaptive_gk(
            |chi| {
                evals += 1;
                ray_f(chi)
            },
            &breaks,
            // the two rays can cancel exactly, so anchor the floor to the arc
            (1e-17 * arc.magnitude).max(abs_q),
            rel_q,
            8000,
        )?;
        let mut value = ray.value / Complex64::new(0.0, two_alpha_pi) + arc.value / two_alpha_pi;
        if theta < delta && r > eps {
            let wr = r.powf(1.0 / alpha);
            let wa = z.arg() / alpha;
            let ln_mag = (1.0 - beta) * wr.ln() + wr * wa.cos() - alpha.ln();
            if ln_mag > -745.0 {
                value += Complex64::from_polar(ln_mag.exp(), (1.0 - beta) * wa + wr * wa.sin());
            }
        }
        let quad_err = (ray.error + arc.error) / two_alpha_pi;
        let rounding = 8.0 * f64::EPSILON * (ray.magnitude + arc.magnitude) / two_alpha_pi;
        let err = quad_err + rounding;
        // Cancellation leaves |value| far below the integral magnitudes; one
        // more pass with an absolute target taken from the first value.
        if pass == 0 && value.norm() > 0.0 && err > tol * value.norm() && rounding < 0.5 * tol * value.norm() {
            pass = 1;
            rel_q = 0.0;
            abs_q = 0.25 * tol * value.norm() * two_alpha_pi;
            continue;
        }
        return Ok((value, err, evals));
    }
}

/// E_{α,β}(z) with the default configuration.
pub fn ml_eval(p: FracParams, z: ComplexValue) -> Result<ComplexValue> {
    Ok(ml_eval_with(p, z, &MlConfig::default())?.value)
}

/// Hybrid evaluator returning the full report.
pub fn ml_eval_with(p: FracParams, z: ComplexValue, cfg: &MlConfig) -> Result<MLEvalReport> {
    check_finite(z)?;
    // Real coefficients: evaluate in the closed upper half-plane and reflect.
    let flip = z.im < 0.0;
    let is_real = z.im == 0.0;
    let zu = if flip { z.conj() } else { z };
    let mut rep = eval_upper(p, zu, cfg)?;
    if flip {
        rep.value = rep.value.conj();
    }
    if is_real {
        rep.value.im = 0.0;
    }
    Ok(rep)
}

fn eval_upper(p: FracParams, z: ComplexValue, cfg: &MlConfig) -> Result<MLEvalReport> {
    let tol = cfg.tol;
    let r = z.norm();
    if r == 0.0 {
        return Ok(MLEvalReport {
            value: Complex64::new(rgamma(p.beta), 0.0),
            regime: Regime::Series,
            terms_used: 1,
            est_error: 0.0,
        });
    }
    let x = r.powf(1.0 / p.alpha);

    // α = 2 has no other regime, so its series is tried at any radius
    if (r <= cfg.series_radius || p.alpha >= 2.0) && x <= 60.0 {
        if let Ok(s) = series_sum(p, z, (0.01 * tol).min(1e-17), cfg.max_terms) {
            let rounding = 16.0 * f64::EPSILON * s.condition;
            if s.tail_rel + rounding <= tol {
                return Ok(MLEvalReport {
                    value: s.value,
                    regime: Regime::Series,
                    terms_used: s.terms,
                    est_error: s.tail_rel + rounding,
                });
            }
        }
    }

    if p.alpha < 2.0 && x >= 8.0 {
        let (value, est, used) = asymptotic_full(p, z, cfg.max_order);
        let scale = value.norm();
        // est = 0 only when the algebraic part terminates exactly; a zero value
        // is then the exponential part underflowing
        if est == 0.0 || scale > 0.0 && est <= 0.1 * tol * scale {
            return Ok(MLEvalReport {
                value,
                regime: Regime::Asymptotic,
                terms_used: used,
                est_error: if est == 0.0 { 0.0 } else { est / scale },
            });
        }
    }

    if p.alpha < 2.0 {
        let (value, err, evals) = ml_integral(p, z, tol)?;
        let scale = value.norm();
        let rel = if scale > 0.0 { err / scale } else { f64::INFINITY };
        if rel <= tol {
            return Ok(MLEvalReport {
                value,
                regime: Regime::Integral,
                terms_used: evals,
                est_error: rel,
            });
        }
        return Err(Error::AccuracyUnreachable {
            re: z.re,
            im: z.im,
            reason: format!("integral representation error estimate {rel:e} above tolerance"),
        });
    }
    Err(Error::AccuracyUnreachable {
        re: z.re,
        im: z.im,
        reason: "series is ill-conditioned and alpha = 2 has no fallback".into(),
    })
}

/// Real and imaginary parts of E_{α,β}(is) through the even/odd split
/// (E_{2α,β}(−s²), s·E_{2α,α+β}(−s²)).
pub fn ml_imag_parts(p: FracParams, s: f64) -> Result<(f64, f64)> {
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{} not in (0, 1)", p.alpha)));
    }
    if !s.is_finite() {
        return Err(Error::invalid("s", "must be finite"));
    }
    let arg = Complex64::new(-s * s, 0.0);
    let even = ml_eval(FracParams::new(2.0 * p.alpha, p.beta)?, arg)?;
    let odd = ml_eval(FracParams::new(2.0 * p.alpha, p.alpha + p.beta)?, arg)?;
    Ok((even.re, s * odd.re))
}

/// Empirical sup over a symmetric grid of (1+|t|)|E_{α,β}(it)|.
pub fn boundedness_constant(p: FracParams, t_max: f64, points: usize) -> Result<f64> {
    if points < 2 {
        return Err(Error::invalid("points", "need at least two grid points"));
    }
    let mut sup: f64 = 0.0;
    for k in 0..points {
        let t = -t_max + 2.0 * t_max * k as f64 / (points - 1) as f64;
        let v = ml_eval(p, Complex64::new(0.0, t))?;
        sup = sup.max((1.0 + t.abs()) * v.norm());
    }
    Ok(sup)
}

/// Γ(β) convenience re-export for callers building closed forms.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(a: f64, b: f64) -> FracParams {
        FracParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(FracParams::new(0.0, 1.0).is_err());
        assert!(FracParams::new(2.5, 1.0).is_err());
        assert!(FracParams::new(f64::NAN, 1.0).is_err());
        assert!(FracParams::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn series_reproduces_exponential_at_i_pi() {
        let rep = ml_series(fp(1.0, 1.0), Complex64::new(0.0, PI), 1e-14).unwrap();
        assert!((rep.value - Complex64::new(-1.0, 0.0)).norm() <= 1e-12);
        assert_eq!(rep.regime, Regime::Series);
        assert!(rep.est_error < 1e-14);
    }

    #[test]
    fn series_at_origin_is_reciprocal_gamma() {
        let v = ml_series(fp(0.5, 1.0), Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        let v = ml_series(fp(0.5, 0.5), Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!((v.value.re - 0.564_189_583_547_756_3).abs() < 1e-15);
    }

    #[test]
    fn series_radius_enforced() {
        let e = ml_series(fp(0.5, 1.0), Complex64::new(20.0, 0.0), 1e-10).unwrap_err();
        assert!(matches!(e, Error::RadiusTooLarge { .. }));
        assert!(ml_series(fp(0.5, 1.0), Complex64::new(0.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn asymptotic_leading_term_on_negative_axis() {
        let rep = ml_asymptotic(fp(0.5, 1.0), Complex64::new(-50.0, 0.0), 1).unwrap();
        let lead = 1.0 / (PI.sqrt() * 50.0);
        assert!((rep.value.re - lead).abs() < 1e-16);
        // E_{1/2}(-x) = exp(x²) erfc(x) ≈ lead·(1 − 1/(2x²))
        let exact = ml_eval(fp(0.5, 1.0), Complex64::new(-50.0, 0.0)).unwrap();
        assert!(((rep.value.re - exact.re) / exact.re).abs() < 1e-3);

        let big = Complex64::new(-1e6, 0.0);
        let one = ml_asymptotic(fp(0.5, 1.0), big, 1).unwrap();
        let two = ml_asymptotic(fp(0.5, 1.0), big, 2).unwrap();
        assert!((one.value.re - 5.641_895_835_477_563e-7).abs() < 1e-18);
        assert!(((one.value - two.value) / one.value).norm() < 1e-12);
    }

    #[test]
    fn asymptotic_preconditions() {
        let e = ml_asymptotic(fp(0.5, 1.0), Complex64::new(10.0, 0.0), 2).unwrap_err();
        assert!(matches!(e, Error::RadiusTooSmall { .. }));
        let e = ml_asymptotic(fp(0.5, 1.0), Complex64::new(100.0, 0.0), 2).unwrap_err();
        assert!(matches!(e, Error::SectorViolation { .. }));
    }

    #[test]
    fn exponential_special_case() {
        let v = ml_eval(fp(1.0, 1.0), Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - std::f64::consts::E).abs() < 1e-14);
        for &(re, im) in &[(-20.0, 0.0), (-5.0, 3.0), (3.0, -7.0), (0.0, 30.0), (-1.0, 18.0)] {
            let z = Complex64::new(re, im);
            let v = ml_eval(fp(1.0, 1.0), z).unwrap();
            let e = z.exp();
            assert!((v - e).norm() <= 1e-12 * (1.0 + e.norm()), "z = {z}: {v} vs {e}");
        }
    }

    #[test]
    fn cosine_special_case() {
        // E_{2,1}(-x²) = cos x, reachable by the series
        let v = ml_eval(fp(2.0, 1.0), Complex64::new(-4.0, 0.0)).unwrap();
        assert!((v.re - 2.0f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn erfc_closed_form() {
        // E_{1/2,1}(-x) = exp(x²) erfc(x)
        for x in [0.5, 2.0, 4.0, 7.0, 12.0] {
            let v = ml_eval(fp(0.5, 1.0), Complex64::new(-x, 0.0)).unwrap();
            let exact = (x * x).exp() * libm::erfc(x);
            assert!(((v.re - exact) / exact).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        for &a in &[0.3, 0.7, 1.4] {
            let z = Complex64::new(-2.0, 3.5);
            let v1 = ml_eval(fp(a, 0.8), z).unwrap();
            let v2 = ml_eval(fp(a, 0.8), z.conj()).unwrap();
            assert_eq!(v1, v2.conj());
        }
    }

    #[test]
    fn regimes_agree_in_the_overlap() {
        let cfg = MlConfig::default();
        for &a in &[0.2, 0.5, 0.8] {
            let p = fp(a, 1.0);
            for s in [25.0, 31.0, 40.0] {
                let z = Complex64::new(0.0, s);
                let (vi, _, _) = ml_integral(p, z, cfg.tol).unwrap();
                let (va, _, _) = asymptotic_full(p, z, cfg.max_order);
                assert!((vi - va).norm() <= 1e-8 * va.norm(), "a = {a}, s = {s}");
            }
            // keep |z|^{1/α} small enough for a well-conditioned series
            for s in [1.0, 1.5, 2.0].iter().map(|s| s * a / 0.8) {
                let z = Complex64::new(0.0, s);
                let vs = series_sum(p, z, 1e-16, 20_000).unwrap().value;
                let (vi, _, _) = ml_integral(p, z, cfg.tol).unwrap();
                assert!((vi - vs).norm() <= 1e-8 * vs.norm(), "a = {a}, s = {s}");
            }
        }
    }

    #[test]
    fn imag_parts_at_zero_and_against_direct() {
        let (re, im) = ml_imag_parts(fp(0.5, 1.0), 0.0).unwrap();
        assert!((re - 1.0).abs() < 1e-15 && im == 0.0);
        let (re, im) = ml_imag_parts(fp(0.3, 1.0), 2.0).unwrap();
        let d = ml_eval(fp(0.3, 1.0), Complex64::new(0.0, 2.0)).unwrap();
        assert!((d - Complex64::new(re, im)).norm() < 1e-10);
        let (_, im) = ml_imag_parts(fp(0.5, 0.5), 1.0).unwrap();
        assert!((im - (-1.0f64).exp()).abs() < 1e-12);
        assert!(ml_imag_parts(fp(1.0, 1.0), 1.0).is_err());
    }
}
