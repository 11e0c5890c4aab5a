//! Special functions, norms and the closed-form constants used throughout
//! the crate.
//!
//! Every Γ-ratio is evaluated in log space. Infinite exponents are handled by
//! explicit branches rather than by substituting a large finite `p`.

mod quadrature;

pub use quadrature::{integrate, integrate_to_infinity, QuadratureSpec};

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};

/// A validated exponent `p ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return domain(format!("exponent p must be > 0, got {p}"));
        }
        Ok(Self(p))
    }

    pub const fn infinity() -> Self {
        Self(f64::INFINITY)
    }

    /// Raw value, `f64::INFINITY` for the cube.
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn finite(self) -> Option<f64> {
        if self.0.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    pub fn require_finite(self) -> Result<f64> {
        self.finite()
            .ok_or_else(|| Error::Domain("operation requires a finite exponent".into()))
    }

    /// Dual exponent `p' = p/(p-1)`; defined for `p ≥ 1` only.
    pub fn dual(self) -> Option<PExponent> {
        let p = self.0;
        if p < 1.0 {
            None
        } else if p == 1.0 {
            Some(Self::infinity())
        } else if p.is_infinite() {
            Some(Self(1.0))
        } else {
            Some(Self(p / (p - 1.0)))
        }
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Self::infinity());
        }
        let p: f64 = t.parse().map_err(|_| Error::Parse(format!("invalid exponent '{s}'")))?;
        Self::new(p)
    }
}

/// `‖x‖_p` (a quasi-norm for `p < 1`).
pub fn lp_norm(x: &[f64], p: PExponent) -> f64 {
    match p.finite() {
        None => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        Some(2.0) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Some(1.0) => x.iter().map(|v| v.abs()).sum(),
        Some(q) => x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// `Σ |x_i|^p` for finite `p`.
pub fn lp_norm_pow(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        x.iter().map(|v| v * v).sum()
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum()
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("log_gamma requires x > 0, got {x}"));
    }
    Ok(ln_gamma(x))
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln vol(B_p^n)`.
pub fn log_ball_volume(n: usize, p: PExponent) -> Result<f64> {
    if n == 0 {
        return domain("ball_volume requires n >= 1");
    }
    let n = n as f64;
    Ok(match p.finite() {
        None => n * 2f64.ln(),
        Some(p) => n * (2.0 * ln_gamma(1.0 / p + 1.0).exp()).ln() - ln_gamma(n / p + 1.0),
    })
}

/// Volume of the unit ball of `ℓ_p^n`: `[2Γ(1+1/p)]^n / Γ(1+n/p)`.
///
/// Results outside the normal `f64` range are reported as [`Error::Overflow`].
pub fn ball_volume(n: usize, p: PExponent) -> Result<f64> {
    let log_v = log_ball_volume(n, p)?;
    if p.is_infinite() && n < 1024 {
        return Ok(2f64.powi(n as i32));
    }
    let v = log_v.exp();
    if !v.is_finite() || v < f64::MIN_POSITIVE {
        return Err(Error::Overflow(format!(
            "vol(B_{p}^{n}) = exp({log_v}) is outside the f64 range"
        )));
    }
    Ok(v)
}

/// `α(p, λ) = 2 ∫_0^∞ exp(-λ t^p - t²) dt`.
pub fn alpha(p: f64, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("alpha requires finite p > 0, got {p}"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("alpha requires finite lambda >= 0, got {lambda}"));
    }
    if lambda == 0.0 {
        return Ok(PI.sqrt());
    }
    let half = integrate_to_infinity(|t| (-lambda * t.powf(p) - t * t).exp(), 0.0, spec)?;
    Ok(2.0 * half)
}

/// `E|g|^p` for a standard Gaussian `g`.
pub fn gauss_abs_moment(p: f64) -> Result<f64> {
    if p.is_nan() || p < 0.0 {
        return domain(format!("gauss_abs_moment requires p >= 0, got {p}"));
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    Ok((0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln()).exp())
}

/// q-th absolute moment of the density `exp(-|t|^p) / (2Γ(1+1/p))`.
pub fn gg_abs_moment(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("gg_abs_moment requires finite p > 0, got {p}"));
    }
    if q.is_nan() || q < 0.0 {
        return domain(format!("gg_abs_moment requires q >= 0, got {q}"));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    Ok((ln_gamma((q + 1.0) / p + 1.0) - (q + 1.0).ln() - ln_gamma(1.0 / p + 1.0)).exp())
}

/// `θ(r) = ∫_{-r}^{r} exp(-t²/2) dt`.
pub fn theta(r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return domain(format!("theta requires r > 0, got {r}"));
    }
    Ok(theta_unchecked(r))
}

pub(crate) fn theta_unchecked(r: f64) -> f64 {
    if r.is_infinite() {
        return (2.0 * PI).sqrt();
    }
    (2.0 * PI).sqrt() * libm::erf(r / std::f64::consts::SQRT_2)
}

/// Standard Gaussian measure of the cube `r B_∞^k`.
pub fn gaussian_cube_mass(k: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    libm::erf(r / std::f64::consts::SQRT_2).powi(k as i32)
}

/// `ln ∫_t^∞ exp(-u^p) du`, evaluated without underflow.
pub fn log_tail_integral(t: f64, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return domain(format!("tail_integral requires t > 0, got {t}"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return domain(format!("tail_integral requires finite p >= 1, got {p}"));
    }
    let tp = t.powf(p);
    if p == 1.0 {
        return Ok(-t);
    }
    // ∫_t^∞ e^{-u^p} du = e^{-t^p} ∫_0^∞ exp(-t^p ((1 + s/t)^p - 1)) ds
    let scaled = integrate_to_infinity(|s| (-tp * libm::expm1(p * libm::log1p(s / t))).exp(), 0.0, spec)?;
    Ok(-tp + scaled.ln())
}

/// `∫_t^∞ exp(-u^p) du` for `t > 0`, `p ≥ 1`.
pub fn tail_integral(t: f64, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(log_tail_integral(t, p, spec)?.exp())
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta_reg requires a, b > 0, got ({a}, {b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("beta_reg requires x in [0, 1], got {x}"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * libm::log1p(-x);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - x, b, a)? / b)
    }
}

// Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            return Ok(h);
        }
    }
    Err(Error::Quadrature {
        value: h,
        abs_error: f64::NAN,
        subdivisions: 10_000,
    })
}
