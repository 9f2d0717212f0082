//! Shared helpers for the integration tests: an extended-precision
//! Mittag–Leffler evaluator on the imaginary axis and small numerical utilities.
#![allow(dead_code)]

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

/// |z|^{1/α} below which the oracle sums the power series directly.
pub const SERIES_LIMIT: f64 = 200.0;

fn fl(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

fn rgamma_hp(x: &Float) -> Float {
    let r = x.to_f64().round();
    if r <= 0.0 && (x.to_f64() - r).abs() <= 1e-12 * r.abs().max(1.0) {
        return Float::with_val(x.prec(), 0);
    }
    Float::with_val(x.prec(), x.gamma_ref()).recip()
}

/// E_{α,β}(is) evaluated with MPFR.
///
/// For s^{1/α} ≤ [`SERIES_LIMIT`] the power series is summed at a working
/// precision that absorbs the cancellation. Beyond that the algebraic
/// expansion is summed to its smallest term (error below e^{-200}) and the
/// exponential contribution of the principal branch is added.
pub fn ml_imag_axis(alpha: f64, beta: f64, s: f64) -> Complex64 {
    if s < 0.0 {
        return ml_imag_axis(alpha, beta, -s).conj();
    }
    if s == 0.0 {
        let prec = 128;
        return Complex64::new(rgamma_hp(&fl(prec, beta)).to_f64(), 0.0);
    }
    let x = s.powf(1.0 / alpha);
    if x <= SERIES_LIMIT {
        series(alpha, beta, s, x)
    } else {
        asymptotic(alpha, beta, s, x)
    }
}

/// α as a ratio p/q with small q, when it is one.
fn rational(alpha: f64) -> Option<(u32, u32)> {
    (1..=20u32).find_map(|q| {
        let p = alpha * q as f64;
        (p > 0.5 && (p - p.round()).abs() < 1e-12).then(|| (p.round() as u32, q))
    })
}

pub fn series(alpha: f64, beta: f64, s: f64, x: f64) -> Complex64 {
    let prec = 96 + (x * std::f64::consts::LOG2_E).ceil() as u32 + 2 * s.log2().max(0.0) as u32;
    let ratio = rational(alpha);
    let a = match ratio {
        Some((p, q)) => Float::with_val(prec, p) / q,
        None => fl(prec, alpha),
    };
    let b = fl(prec, beta);
    let sh = fl(prec, s);
    let mut spow = fl(prec, 1.0);
    let mut re = fl(prec, 0.0);
    let mut im = fl(prec, 0.0);
    let stop = 1e-32 * s.powi(-3).min(1.0);
    // 1/Γ(αn+β) for the last q indices; Γ(x+p) = Γ(x)·x(x+1)…(x+p−1) when αq = p
    let mut recip: Vec<Float> = Vec::new();
    let mut n: u64 = 0;
    loop {
        let arg = Float::with_val(prec, &a * n) + &b;
        let rg = match ratio {
            Some((p, q)) if n >= q as u64 && arg.to_f64() > p as f64 + 1.0 => {
                let base = Float::with_val(prec, &arg - p);
                let mut prod = Float::with_val(prec, 1.0);
                for j in 0..p {
                    prod *= Float::with_val(prec, &base + j);
                }
                Float::with_val(prec, &recip[(n - q as u64) as usize] / prod)
            }
            _ => rgamma_hp(&arg),
        };
        let t = Float::with_val(prec, &spow * &rg);
        recip.push(rg);
        match n % 4 {
            0 => re += &t,
            1 => im += &t,
            2 => re -= &t,
            _ => im -= &t,
        }
        let past_peak = arg.to_f64() > x + 10.0;
        if past_peak && t.clone().abs().to_f64() < stop {
            break;
        }
        spow *= &sh;
        n += 1;
        assert!(n < 2_000_000, "oracle series did not terminate");
    }
    Complex64::new(re.to_f64(), im.to_f64())
}

pub fn asymptotic(alpha: f64, beta: f64, s: f64, x: f64) -> Complex64 {
    let prec = 192;
    let a = fl(prec, alpha);
    let b = fl(prec, beta);
    let sh = fl(prec, s);
    // (is)^{-k} = s^{-k} (-i)^k
    let mut ipow = fl(prec, 1.0);
    let mut re = fl(prec, 0.0);
    let mut im = fl(prec, 0.0);
    // Optimal truncation is decided on the envelope Γ(1−x)/π of |1/Γ(x)|,
    // since the reciprocal gamma itself dips near its zeros.
    let mut prev_env = f64::INFINITY;
    for k in 1u64..1_000_000 {
        ipow /= &sh;
        let arg = Float::with_val(prec, &b - Float::with_val(prec, &a * k));
        let xf = arg.to_f64();
        let ln_env = if xf > 0.0 {
            -libm::lgamma(xf)
        } else {
            libm::lgamma(1.0 - xf) - std::f64::consts::PI.ln()
        } - k as f64 * s.ln();
        if xf < -1.0 {
            if ln_env > prev_env {
                break;
            }
            prev_env = ln_env;
        }
        let t = Float::with_val(prec, &ipow * rgamma_hp(&arg));
        // −(−i)^k t
        match k % 4 {
            0 => re -= &t,
            1 => im += &t,
            2 => re += &t,
            _ => im -= &t,
        }
        let total = Float::with_val(prec, re.clone().hypot(&im)).to_f64();
        if xf < 0.0 && ln_env < (1e-40 * total).ln() {
            break;
        }
    }
    // principal branch w = X e^{iπ/(2α)}, present when π/2 ≤ απ
    if alpha >= 0.5 {
        let weight = if alpha == 0.5 { 0.5 } else { 1.0 };
        let pi = Float::with_val(prec, Constant::Pi);
        let ang = Float::with_val(prec, &pi / Float::with_val(prec, &a * 2u32));
        let xr = Float::with_val(prec, sh.clone().ln() / &a).exp();
        let (sn, cs) = ang.clone().sin_cos(Float::new(prec));
        let one_minus_b = Float::with_val(prec, 1 - &b);
        let lnmag =
            Float::with_val(prec, &one_minus_b * xr.clone().ln()) + Float::with_val(prec, &xr * &cs) - a.clone().ln();
        let phase = Float::with_val(prec, &one_minus_b * &ang) + Float::with_val(prec, &xr * &sn);
        let mag = lnmag.exp() * weight;
        let (ps, pc) = phase.sin_cos(Float::new(prec));
        re += Float::with_val(prec, &mag * &pc);
        im += Float::with_val(prec, &mag * &ps);
    }
    let _ = x;
    Complex64::new(re.to_f64(), im.to_f64())
}

/// 100 log-spaced magnitudes in [1e-2, 1e4], mirrored to negative s.
pub fn imag_axis_grid() -> Vec<f64> {
    let pos: Vec<f64> = (0..100).map(|k| 10f64.powf(-2.0 + 6.0 * k as f64 / 99.0)).collect();
    let mut out: Vec<f64> = pos.iter().rev().map(|s| -s).collect();
    out.extend(pos);
    out
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
