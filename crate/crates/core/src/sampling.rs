//! Exact samplers for radial measures on `B_p^n`.
//!
//! All measures are built from i.i.d. generalized Gaussians `g_i` with density
//! `exp(-|t|^p) / (2Γ(1+1/p))`, for which `|g_i|^p ~ Gamma(1/p, 1)`:
//!
//! * cone: `G / ‖G‖_p`
//! * volume: `G / (‖G‖_p^p + Z)^{1/p}`, `Z ~ Exp(1)`
//! * gamma-mixed(α): `G / (‖G‖_p^p + W)^{1/p}`, `W ~ Gamma(α, 1)`
//! * projected-cone(m): first `n` coordinates of the cone measure on `∂B_p^{n+m}`
//!
//! Coordinates are assembled in log space, `x_i = ±exp((ln W_i - ln T)/p)`, so
//! large `p` does not lose the small gamma variates to underflow.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{beta_reg, ln_gamma, PExponent};

/// `ln W` for `W ~ Gamma(shape, 1)`.
///
/// Marsaglia–Tsang squeeze for `shape ≥ 1`; smaller shapes use
/// `Gamma(a) = Gamma(a + 1) · U^{1/a}`.
pub fn sample_ln_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return sample_ln_gamma(shape + 1.0, rng) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = 1.0 - rng.random::<f64>();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

/// `W ~ Gamma(shape, 1)`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    sample_ln_gamma(shape, rng).exp()
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// One generalized Gaussian variate: random sign times `W^{1/p}`.
pub fn sample_generalized_gaussian<R: Rng + ?Sized>(p: PExponent, rng: &mut R) -> Result<f64> {
    let p = p.require_finite()?;
    Ok(random_sign(rng) * (sample_ln_gamma(1.0 / p, rng) / p).exp())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Which radial measure on `B_p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureKind {
    Cone,
    Volume,
    GammaMixed { alpha: f64 },
    ProjectedCone { m: usize },
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Cone => write!(f, "cone"),
            MeasureKind::Volume => write!(f, "volume"),
            MeasureKind::GammaMixed { alpha } => write!(f, "gamma-mixed:{alpha}"),
            MeasureKind::ProjectedCone { m } => write!(f, "projected-cone:{m}"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// `cone`, `volume`, `gamma-mixed:<alpha>`, `projected-cone:<m>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.trim())),
            None => (s, None),
        };
        let bad = || Error::Parse(format!("invalid measure kind '{s}'"));
        match (head, arg) {
            ("cone", None) => Ok(MeasureKind::Cone),
            ("volume", None) => Ok(MeasureKind::Volume),
            ("gamma-mixed", Some(a)) => Ok(MeasureKind::GammaMixed {
                alpha: a.parse().map_err(|_| bad())?,
            }),
            ("projected-cone", Some(a)) => Ok(MeasureKind::ProjectedCone {
                m: a.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// A validated radial measure on `B_p^n` (finite `p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallMeasure {
    n: usize,
    p: f64,
    kind: MeasureKind,
}

impl BallMeasure {
    pub fn new(n: usize, p: PExponent, kind: MeasureKind) -> Result<Self> {
        if n == 0 {
            return domain("measure dimension must be >= 1");
        }
        let p = p.require_finite()?;
        match kind {
            MeasureKind::GammaMixed { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                return domain(format!("gamma-mixed requires alpha > 0, got {alpha}"));
            }
            MeasureKind::ProjectedCone { m: 0 } => {
                return domain("projected-cone requires m >= 1");
            }
            _ => {}
        }
        Ok(Self { n, p, kind })
    }

    pub fn cone(n: usize, p: PExponent) -> Result<Self> {
        Self::new(n, p, MeasureKind::Cone)
    }

    pub fn volume(n: usize, p: PExponent) -> Result<Self> {
        Self::new(n, p, MeasureKind::Volume)
    }

    pub fn gamma_mixed(n: usize, p: PExponent, alpha: f64) -> Result<Self> {
        Self::new(n, p, MeasureKind::GammaMixed { alpha })
    }

    pub fn projected_cone(n: usize, p: PExponent, m: usize) -> Result<Self> {
        Self::new(n, p, MeasureKind::ProjectedCone { m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// Draws one point into `out` (length `n`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.n, "output buffer has wrong length");
        let shape = 1.0 / self.p;
        let extra = match self.kind {
            MeasureKind::Cone => 0,
            MeasureKind::Volume | MeasureKind::GammaMixed { .. } => 1,
            MeasureKind::ProjectedCone { m } => m,
        };
        let mut logs = vec![0.0; self.n + extra];
        loop {
            for l in logs[..self.n].iter_mut() {
                *l = sample_ln_gamma(shape, rng);
            }
            match self.kind {
                MeasureKind::Cone => {}
                MeasureKind::Volume => logs[self.n] = sample_ln_gamma(1.0, rng),
                MeasureKind::GammaMixed { alpha } => logs[self.n] = sample_ln_gamma(alpha, rng),
                MeasureKind::ProjectedCone { .. } => {
                    for l in logs[self.n..].iter_mut() {
                        *l = sample_ln_gamma(shape, rng);
                    }
                }
            }
            let ln_t = log_sum_exp(&logs);
            if !ln_t.is_finite() {
                // all variates underflowed; redraw
                continue;
            }
            for (o, l) in out.iter_mut().zip(&logs) {
                *o = random_sign(rng) * ((l - ln_t) / self.p).exp();
            }
            return;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_into(rng, &mut out);
        out
    }

    /// `count` points as a row-major `count × n` buffer.
    pub fn sample_matrix<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; count * self.n];
        for row in out.chunks_exact_mut(self.n) {
            self.sample_into(rng, row);
        }
        out
    }

    /// Second Beta parameter `b` with `‖X‖_p^p ~ Beta(n/p, b)`; `None` for the
    /// cone measure, whose radius is identically 1.
    pub fn radial_beta(&self) -> Option<f64> {
        match self.kind {
            MeasureKind::Cone => None,
            MeasureKind::Volume => Some(1.0),
            MeasureKind::GammaMixed { alpha } => Some(alpha),
            MeasureKind::ProjectedCone { m } => Some(m as f64 / self.p),
        }
    }

    fn require_radial(&self) -> Result<f64> {
        self.radial_beta()
            .ok_or_else(|| Error::Domain("cone measure has a deterministic radius".into()))
    }

    /// Density of `‖X‖_p` on `[0, 1]`:
    /// `p r^{n-1} (1 - r^p)^{b-1} / B(n/p, b)`.
    pub fn radial_density(&self, r: f64) -> Result<f64> {
        let b = self.require_radial()?;
        if !(0.0..=1.0).contains(&r) {
            return domain(format!("radius must lie in [0, 1], got {r}"));
        }
        let (n, p) = (self.n as f64, self.p);
        let a = n / p;
        if r == 0.0 {
            return Ok(if self.n == 1 { p / beta_fn(a, b) } else { 0.0 });
        }
        if r == 1.0 {
            return Ok(if b > 1.0 {
                0.0
            } else if b == 1.0 {
                p / beta_fn(a, b)
            } else {
                f64::INFINITY
            });
        }
        let ln_one_minus = libm::log1p(-r.powf(p));
        let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        Ok((p.ln() + (n - 1.0) * r.ln() + (b - 1.0) * ln_one_minus - ln_b).exp())
    }

    /// `P(‖X‖_p ≤ r) = I_{r^p}(n/p, b)`.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        let b = self.require_radial()?;
        if r <= 0.0 {
            return Ok(0.0);
        }
        if r >= 1.0 {
            return Ok(1.0);
        }
        beta_reg(r.powf(self.p), self.n as f64 / self.p, b)
    }
}

fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Cone-measure point together with the `‖G‖_p` it was normalized by.
///
/// Used to check that the direction is independent of the norm.
pub fn sample_gaussian_and_cone<R: Rng + ?Sized>(p: PExponent, rng: &mut R, out: &mut [f64]) -> Result<f64> {
    let p = p.require_finite()?;
    let shape = 1.0 / p;
    let mut logs = vec![0.0; out.len()];
    loop {
        for l in logs.iter_mut() {
            *l = sample_ln_gamma(shape, rng);
        }
        let ln_t = log_sum_exp(&logs);
        if !ln_t.is_finite() {
            continue;
        }
        for (o, l) in out.iter_mut().zip(&logs) {
            *o = random_sign(rng) * ((l - ln_t) / p).exp();
        }
        return Ok((ln_t / p).exp());
    }
}

pub fn sample_cone<R: Rng + ?Sized>(n: usize, p: PExponent, rng: &mut R) -> Result<Vec<f64>> {
    Ok(BallMeasure::cone(n, p)?.sample(rng))
}

pub fn sample_volume<R: Rng + ?Sized>(n: usize, p: PExponent, rng: &mut R) -> Result<Vec<f64>> {
    Ok(BallMeasure::volume(n, p)?.sample(rng))
}

pub fn sample_gamma_mixed<R: Rng + ?Sized>(n: usize, p: PExponent, alpha: f64, rng: &mut R) -> Result<Vec<f64>> {
    Ok(BallMeasure::gamma_mixed(n, p, alpha)?.sample(rng))
}

pub fn sample_projected_cone<R: Rng + ?Sized>(n: usize, p: PExponent, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(BallMeasure::projected_cone(n, p, m)?.sample(rng))
}

/// Writes a row-major matrix as CSV, one vector per line.
pub fn write_samples_csv<W: Write>(mut w: W, data: &[f64], n: usize) -> io::Result<()> {
    for row in data.chunks_exact(n.max(1)) {
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            write!(w, "{v:?}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}
