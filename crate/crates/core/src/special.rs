//! Real gamma function helpers.
//!
//! Thin wrappers over `libm` that make the pole behaviour explicit: the
//! reciprocal gamma function is entire, so `rgamma` returns an exact zero at
//! the non-positive integers instead of `1/inf` or NaN.

/// True when `x` is a pole of the gamma function.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Reciprocal gamma function 1/Γ(x), exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    if x > 171.0 {
        let (lg, _) = libm::lgamma_r(x);
        return (-lg).exp();
    }
    1.0 / libm::tgamma(x)
}

/// `(ln|Γ(x)|, sign Γ(x))`. Undefined (returns `(inf, 0)`) at the poles.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 0.0);
    }
    let (lg, sign) = libm::lgamma_r(x);
    (lg, if sign < 0 { -1.0 } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_gamma_vanishes_at_poles() {
        for k in 0..20 {
            assert_eq!(rgamma(-(k as f64)), 0.0);
        }
        assert!((rgamma(0.5) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn negative_arguments() {
        // Γ(-0.5) = -2√π
        let g = gamma(-0.5);
        assert!((g + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        let (lg, s) = ln_gamma_signed(-0.5);
        assert_eq!(s, -1.0);
        assert!((lg.exp() - g.abs()).abs() < 1e-14);
    }

    #[test]
    fn large_argument_reciprocal() {
        let r = rgamma(171.5);
        let (lg, _) = ln_gamma_signed(171.5);
        assert!((r.ln() + lg).abs() < 1e-10);
        assert!(r > 0.0);
    }
}
