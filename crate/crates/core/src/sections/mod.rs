//! Gaussian geometry of `k`-dimensional sections of `B_p^n`.
//!
//! For `x ∈ E` the gauge of `E ∩ B_p^n` is the ambient `‖x‖_p`, so every
//! estimator below samples `G_E = basisᵀ g` with `g` standard Gaussian in
//! `ℝ^k` and evaluates ambient norms. Estimators that compare the section with
//! `B_p^k` reuse the same `g` on both sides (common random numbers), which
//! makes identities that hold pathwise come out exact.

mod peaked;
mod subspace;

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::rng::RngState;
use crate::specfun::{alpha, gauss_abs_moment, gaussian_cube_mass, ln_gamma, log_ball_volume, lp_norm, PExponent};
use crate::specfun::{integrate_to_infinity, QuadratureSpec};
use crate::stats::{monotone_violations, CoVar, Estimate, MeanVar};

pub use peaked::{
    bl_psi, geometric_grid, lemma15_check, lemma22_check, lemma23_check, peaked_compare, power_convex_order_check,
    predicted_order, ConvexFn, ConvexOrderReport, ConvexOrderRow, CubeDensity, Lemma15Report, Lemma22Report,
    Lemma23Report, PeakedCase, PeakedReport, PeakedRow, Peakedness, TiltedDensity, ORDER_TOLERANCE,
};
pub use subspace::{Subspace, BASIS_TOLERANCE};

/// p-grid used by the Theorem 8 and Proposition 18 scans.
pub const P_SCAN_GRID: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];

/// Draws `g ~ N(0, I_k)` and its embedding in `E`.
struct SectionSampler<'a> {
    e: &'a Subspace,
    rng: ChaCha8Rng,
    g: Vec<f64>,
    x: Vec<f64>,
}

impl<'a> SectionSampler<'a> {
    fn new(e: &'a Subspace, seed: RngState) -> Self {
        Self {
            e,
            rng: seed.rng(),
            g: vec![0.0; e.k()],
            x: vec![0.0; e.n()],
        }
    }

    fn gaussian(&mut self) {
        for v in &mut self.g {
            *v = self.rng.sample(StandardNormal);
        }
        self.e.embed(&self.g, &mut self.x);
    }

    /// Uniform direction on the unit sphere of `E`.
    fn direction(&mut self) {
        loop {
            for v in &mut self.g {
                *v = self.rng.sample(StandardNormal);
            }
            let r = self.g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 0.0 {
                for v in &mut self.g {
                    *v /= r;
                }
                break;
            }
        }
        self.e.embed(&self.g, &mut self.x);
    }
}

fn require_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return domain(format!("need at least 2 samples, got {samples}"));
    }
    Ok(())
}

/// `E‖G‖₂^β = 2^{β/2} Γ((k+β)/2) / Γ(k/2)` for `G` standard Gaussian in `ℝ^k`.
pub fn sphere_gauss_convert(k: usize, beta: f64) -> Result<f64> {
    if k == 0 {
        return domain("sphere_gauss_convert needs k >= 1");
    }
    if !(beta > -(k as f64)) || !beta.is_finite() {
        return domain(format!(
            "sphere_gauss_convert needs beta > -k = {}, got {beta}",
            -(k as f64)
        ));
    }
    if beta == 0.0 {
        return Ok(1.0);
    }
    let kf = k as f64;
    Ok((0.5 * beta * 2f64.ln() + ln_gamma(0.5 * (kf + beta)) - ln_gamma(0.5 * kf)).exp())
}

/// `E‖G‖_{B_p^k}^p = k E|g|^p` in closed form.
pub fn gaussian_ball_moment(k: usize, p: f64) -> Result<f64> {
    Ok(k as f64 * gauss_abs_moment(p)?)
}

/// Paired radial-conditioned samples of `‖U_E‖_p^β` and `‖u‖_p^β` where `u`
/// is uniform on the sphere of `ℝ^k` and `U_E` its embedding. Multiplying by
/// [`sphere_gauss_convert`] turns either mean into a Gaussian moment.
fn paired_direction_moments(
    e: &Subspace,
    p: PExponent,
    beta: f64,
    rhs_scale: f64,
    samples: usize,
    seed: RngState,
) -> CoVar {
    let mut s = SectionSampler::new(e, seed);
    let mut cv = CoVar::new();
    for _ in 0..samples {
        s.direction();
        let a = lp_norm(&s.x, p).powf(beta);
        let b = rhs_scale * lp_norm(&s.g, p).powf(beta);
        cv.push(a, b);
    }
    cv
}

fn check_moment_order(e: &Subspace, p: PExponent, beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= -(e.k() as f64) {
        return domain(format!(
            "section moments need beta > -k = {}, got {beta}",
            -(e.k() as f64)
        ));
    }
    if p.value() <= 0.0 {
        return domain("section moments need p > 0");
    }
    Ok(())
}

/// `E‖G_E‖_p^β` for `β > -k`.
///
/// Uses `G_E = R·U_E` with `R = ‖g‖₂` independent of the direction, so the
/// radial factor is exact and only `E‖U_E‖_p^β` is sampled. The sampled
/// quantity is bounded, which keeps negative moments well behaved.
pub fn section_moment(e: &Subspace, p: PExponent, beta: f64, samples: usize, seed: RngState) -> Result<Estimate> {
    check_moment_order(e, p, beta)?;
    require_samples(samples)?;
    if beta == 0.0 {
        return Ok(Estimate::exact(1.0, samples as u64, seed));
    }
    let c = sphere_gauss_convert(e.k(), beta)?;
    let mut s = SectionSampler::new(e, seed);
    let mut mv = MeanVar::new();
    for _ in 0..samples {
        s.direction();
        mv.push(lp_norm(&s.x, p).powf(beta));
    }
    Ok(mv.estimate(seed).scale(c))
}

/// `E‖G_E‖_p^p / E‖G‖_{B_p^k}^p`, the denominator in closed form.
pub fn theorem8_ratio(e: &Subspace, p: f64, samples: usize, seed: RngState) -> Result<Estimate> {
    let pe = PExponent::new(p)?;
    pe.require_finite()?;
    let num = section_moment(e, pe, p, samples, seed)?;
    Ok(num.scale(1.0 / gaussian_ball_moment(e.k(), p)?))
}

/// Exact value of the Theorem 8 ratio: `(1/k) Σ_i c_i^{p/2}` with
/// `c_i = |P_E e_i|²`, since each coordinate of `G_E` is `N(0, c_i)`.
pub fn theorem8_ratio_exact(e: &Subspace, p: f64) -> f64 {
    e.coordinate_weights().iter().map(|c| c.powf(0.5 * p)).sum::<f64>() / e.k() as f64
}

/// `E exp(-λ‖G_E‖_p^{θp})`.
pub fn laplace_functional(
    e: &Subspace,
    p: PExponent,
    lambda: f64,
    theta: f64,
    samples: usize,
    seed: RngState,
) -> Result<Estimate> {
    let pv = p.require_finite()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("laplace functional needs lambda >= 0, got {lambda}"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return domain(format!("laplace functional needs theta in (0, 1], got {theta}"));
    }
    require_samples(samples)?;
    if lambda == 0.0 {
        return Ok(Estimate::exact(1.0, samples as u64, seed));
    }
    let mut s = SectionSampler::new(e, seed);
    let mut mv = MeanVar::new();
    for _ in 0..samples {
        s.gaussian();
        mv.push((-lambda * lp_norm(&s.x, p).powf(theta * pv)).exp());
    }
    Ok(mv.estimate(seed))
}

/// `E exp(-λ‖G‖_{B_p^k}^p) = (α(p, λ 2^{p/2}) / √π)^k`.
pub fn gaussian_laplace_exact(k: usize, p: f64, lambda: f64) -> Result<f64> {
    let a = alpha(p, lambda * 2f64.powf(0.5 * p), &QuadratureSpec::default())?;
    Ok((a / PI.sqrt()).powi(k as i32))
}

/// Paired Laplace ratio `E e^{-c‖G_E‖_p^p} / E e^{-c‖g‖_p^p}`.
fn laplace_ratio(e: &Subspace, p: PExponent, c: f64, samples: usize, seed: RngState) -> Result<Estimate> {
    let pv = p.require_finite()?;
    require_samples(samples)?;
    if c == 0.0 {
        return Ok(Estimate::exact(1.0, samples as u64, seed));
    }
    let mut s = SectionSampler::new(e, seed);
    let mut cv = CoVar::new();
    for _ in 0..samples {
        s.gaussian();
        let a = (-c * lp_norm(&s.x, p).powf(pv)).exp();
        let b = (-c * lp_norm(&s.g, p).powf(pv)).exp();
        cv.push(a, b);
    }
    Ok(cv.ratio(seed))
}

/// Proposition 18's `F(p)`: the Laplace ratio at `λ / (2^{p/2} Γ((p+1)/2))`.
pub fn prop18_f(p: f64, e: &Subspace, lambda: f64, samples: usize, seed: RngState) -> Result<Estimate> {
    let pe = PExponent::new(p)?;
    pe.require_finite()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("prop18_f needs lambda > 0, got {lambda}"));
    }
    let c = lambda / (2f64.powf(0.5 * p) * ln_gamma(0.5 * (p + 1.0)).exp());
    laplace_ratio(e, pe, c, samples, seed)
}

/// `r_p(λ) = E e^{-λ‖G_E‖_p^p} / E e^{-λ‖G‖_{B_p^k}^p}` over a λ grid; all
/// grid points share one random stream.
pub fn prop20_r(p: f64, e: &Subspace, lambdas: &[f64], samples: usize, seed: RngState) -> Result<Vec<Estimate>> {
    let pe = PExponent::new(p)?;
    pe.require_finite()?;
    if lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return domain("prop20_r needs a grid of finite lambda >= 0");
    }
    lambdas
        .iter()
        .map(|&l| laplace_ratio(e, pe, l, samples, seed))
        .collect()
}

/// Expected relation between the two sides of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
    Unasserted,
}

/// `lhs` versus `rhs` judged through their paired difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub difference: Estimate,
    pub relation: Relation,
    pub pass: bool,
}

impl Comparison {
    fn from_pairs(
        label: impl Into<String>,
        cv: &CoVar,
        scale: f64,
        relation: Relation,
        z: f64,
        seed: RngState,
    ) -> Self {
        let lhs = cv.x_estimate(seed).scale(scale);
        let rhs = cv.y_estimate(seed).scale(scale);
        let difference = cv.difference(seed).scale(scale);
        Self::judge(label, lhs, rhs, difference, relation, z)
    }

    fn judge(
        label: impl Into<String>,
        lhs: Estimate,
        rhs: Estimate,
        difference: Estimate,
        relation: Relation,
        z: f64,
    ) -> Self {
        let slack = z * difference.stderr + 1e-12 * lhs.value.abs().max(rhs.value.abs());
        let d = difference.value;
        let pass = match relation {
            Relation::AtMost => d <= slack,
            Relation::AtLeast => -d <= slack,
            Relation::Equal => d.abs() <= slack,
            Relation::Unasserted => true,
        };
        Self {
            label: label.into(),
            lhs,
            rhs,
            difference,
            relation,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
}

impl ComparisonReport {
    fn new(comparisons: Vec<Comparison>) -> Self {
        let pass = comparisons.iter().all(|c| c.pass);
        Self { comparisons, pass }
    }
}

/// Both moment comparisons between `E ∩ B_p^n` and `B_p^k`: the negative
/// moment of order `α` and the positive moment of order `β`. Directions are
/// `≤`/`≥` for `p < 2`, reversed for `p > 2` (including `p = ∞`), and
/// equalities at `p = 2`.
pub fn corollary19_suite(
    e: &Subspace,
    p: PExponent,
    alpha_neg: f64,
    beta: f64,
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<ComparisonReport> {
    let k = e.k() as f64;
    if !(alpha_neg > 0.0 && alpha_neg < k) {
        return domain(format!("corollary19 needs 0 < alpha < k = {k}, got {alpha_neg}"));
    }
    if !(beta > 0.0 && (p.is_infinite() || beta <= p.value())) {
        return domain(format!("corollary19 needs 0 < beta <= p, got {beta}"));
    }
    require_samples(samples)?;
    let (neg, pos) = match p.value().partial_cmp(&2.0) {
        Some(std::cmp::Ordering::Less) => (Relation::AtMost, Relation::AtLeast),
        Some(std::cmp::Ordering::Greater) => (Relation::AtLeast, Relation::AtMost),
        _ => (Relation::Equal, Relation::Equal),
    };
    let cv = paired_direction_moments(e, p, -alpha_neg, 1.0, samples, seed);
    let c_neg = sphere_gauss_convert(e.k(), -alpha_neg)?;
    let a = Comparison::from_pairs(format!("negative moment {alpha_neg}"), &cv, c_neg, neg, z, seed);
    let seed_b = seed.child(1);
    let cv = paired_direction_moments(e, p, beta, 1.0, samples, seed_b);
    let c_pos = sphere_gauss_convert(e.k(), beta)?;
    let b = Comparison::from_pairs(format!("positive moment {beta}"), &cv, c_pos, pos, z, seed_b);
    Ok(ComparisonReport::new(vec![a, b]))
}

/// For `p ≥ 2`: `E‖G_E‖^β ≥ (k/n)^{β(1/2-1/p)} E‖G‖_{B_p^k}^β` and
/// `E‖G_E‖^{-α} ≤ (n/k)^{α(1/2-1/p)} E‖G‖_{B_p^k}^{-α}`.
pub fn corollary21_moments(
    e: &Subspace,
    p: PExponent,
    beta: f64,
    alpha_neg: f64,
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<ComparisonReport> {
    let pv = p.value();
    if pv < 2.0 {
        return domain(format!("corollary21 needs p >= 2, got {pv}"));
    }
    let k = e.k() as f64;
    if !(beta >= 0.0 && (p.is_infinite() || beta <= pv)) {
        return domain(format!("corollary21 needs 0 <= beta <= p, got {beta}"));
    }
    if !(alpha_neg >= 0.0 && alpha_neg < k) {
        return domain(format!("corollary21 needs 0 <= alpha < k = {k}, got {alpha_neg}"));
    }
    require_samples(samples)?;
    let ratio = k / e.n() as f64;
    let expo = 0.5 - p.reciprocal();
    let cv = paired_direction_moments(e, p, beta, ratio.powf(beta * expo), samples, seed);
    let a = Comparison::from_pairs(
        format!("positive moment {beta}"),
        &cv,
        sphere_gauss_convert(e.k(), beta)?,
        Relation::AtLeast,
        z,
        seed,
    );
    let seed_b = seed.child(1);
    let cv = paired_direction_moments(e, p, -alpha_neg, ratio.powf(-alpha_neg * expo), samples, seed_b);
    let b = Comparison::from_pairs(
        format!("negative moment {alpha_neg}"),
        &cv,
        sphere_gauss_convert(e.k(), -alpha_neg)?,
        Relation::AtMost,
        z,
        seed_b,
    );
    Ok(ComparisonReport::new(vec![a, b]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlLaplaceReport {
    pub comparison: Comparison,
    /// `E exp(-λ (k/n)^{(p-2)/2} ‖G‖_{B_p^k}^p)` in closed form (`θ = 1` only).
    pub rhs_exact: Option<f64>,
}

/// `E e^{-λ‖G_E‖_p^{θp}} ≤ E e^{-λ (k/n)^{θ(p-2)/2} ‖G‖_{B_p^k}^{θp}}` for `p ≥ 2`.
pub fn bl_laplace_bound(
    e: &Subspace,
    p: f64,
    lambda: f64,
    theta: f64,
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<BlLaplaceReport> {
    let pe = PExponent::new(p)?;
    pe.require_finite()?;
    if p < 2.0 {
        return domain(format!("bl_laplace_bound needs p >= 2, got {p}"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("bl_laplace_bound needs lambda >= 0, got {lambda}"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return domain(format!("bl_laplace_bound needs theta in (0, 1], got {theta}"));
    }
    require_samples(samples)?;
    let c = (e.k() as f64 / e.n() as f64).powf(0.5 * theta * (p - 2.0));
    let mut s = SectionSampler::new(e, seed);
    let mut cv = CoVar::new();
    for _ in 0..samples {
        s.gaussian();
        let a = (-lambda * lp_norm(&s.x, pe).powf(theta * p)).exp();
        let b = (-lambda * c * lp_norm(&s.g, pe).powf(theta * p)).exp();
        cv.push(a, b);
    }
    let comparison = Comparison::from_pairs(
        format!("laplace lambda={lambda} theta={theta}"),
        &cv,
        1.0,
        Relation::AtMost,
        z,
        seed,
    );
    let rhs_exact = if theta == 1.0 {
        Some(gaussian_laplace_exact(e.k(), p, lambda * c)?)
    } else {
        None
    };
    Ok(BlLaplaceReport { comparison, rhs_exact })
}

/// `vol_k(E ∩ B_p^n) / vol_k(B_p^k)` by polar integration:
/// `vol(K) = vol(B_2^k) E_U ‖U‖_K^{-k}`. Both volumes are averaged over the
/// same directions.
pub fn volume_ratio(e: &Subspace, p: PExponent, samples: usize, seed: RngState) -> Result<Estimate> {
    require_samples(samples)?;
    if e.k() == e.n() {
        return Ok(Estimate::exact(1.0, samples as u64, seed));
    }
    let cv = paired_direction_moments(e, p, -(e.k() as f64), 1.0, samples, seed);
    Ok(cv.ratio(seed))
}

/// `vol_k(E ∩ B_p^n)` from the polar identity.
pub fn section_volume(e: &Subspace, p: PExponent, samples: usize, seed: RngState) -> Result<Estimate> {
    require_samples(samples)?;
    let k = e.k();
    let mut s = SectionSampler::new(e, seed);
    let mut mv = MeanVar::new();
    for _ in 0..samples {
        s.direction();
        mv.push(lp_norm(&s.x, p).powf(-(k as f64)));
    }
    let v2 = log_ball_volume(k, PExponent::new(2.0)?)?.exp();
    Ok(mv.estimate(seed).scale(v2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedRatio {
    pub estimate: Estimate,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest absolute residual of the fit in `h = λ^{-2/p}`.
    pub residual: f64,
}

/// Default λ grid for [`volume_ratio_extrapolated`]: `h = λ^{-2/p}` in
/// `{0.02, 0.01, 0.005, 0.0025}`.
pub fn default_extrapolation_lambdas(p: f64) -> Vec<f64> {
    [0.02f64, 0.01, 0.005, 0.0025]
        .iter()
        .map(|h| h.powf(-0.5 * p))
        .collect()
}

/// `φ_k(c) = E e^{-c R^p}` for `R` chi-distributed with `k` degrees of freedom.
fn chi_laplace(k: usize, p: f64, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    let kf = k as f64;
    let log_norm = (0.5 * kf - 1.0) * 2f64.ln() + ln_gamma(0.5 * kf);
    // r = c^{-1/p} v keeps the integrand O(1) for large c
    let s = c.powf(-2.0 / p);
    let i = integrate_to_infinity(|v| v.powf(kf - 1.0) * (-v.powf(p) - 0.5 * s * v * v).exp(), 0.0, spec)?;
    Ok((-(kf / p) * c.ln() - log_norm).exp() * i)
}

/// Volume ratio as the large-λ limit of `r_p(λ)`, fitted as a quadratic in
/// `h = λ^{-2/p}` and read off at `h = 0`. The numerator is conditioned on
/// the direction, so each sample contributes an exact radial integral.
pub fn volume_ratio_extrapolated(
    e: &Subspace,
    p: f64,
    lambdas: &[f64],
    samples: usize,
    seed: RngState,
) -> Result<ExtrapolatedRatio> {
    let pe = PExponent::new(p)?;
    pe.require_finite()?;
    require_samples(samples)?;
    if lambdas.len() < 2 || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return domain("extrapolation needs at least two positive lambdas");
    }
    let spec = QuadratureSpec::new(1e-10, 2000)?;
    let k = e.k();
    let hs: Vec<f64> = lambdas.iter().map(|l| l.powf(-2.0 / p)).collect();
    let dens: Vec<f64> = lambdas
        .iter()
        .map(|&l| gaussian_laplace_exact(k, p, l))
        .collect::<Result<_>>()?;
    let weights = intercept_weights(&hs, if lambdas.len() >= 3 { 2 } else { 1 })?;
    let mut s = SectionSampler::new(e, seed);
    let mut mv = MeanVar::new();
    let mut sums = vec![0.0; lambdas.len()];
    for _ in 0..samples {
        s.direction();
        let sp = lp_norm(&s.x, pe).powf(p);
        let mut combo = 0.0;
        for (j, &l) in lambdas.iter().enumerate() {
            let v = chi_laplace(k, p, l * sp, &spec)? / dens[j];
            sums[j] += v;
            combo += weights[j] * v;
        }
        mv.push(combo);
    }
    let values: Vec<f64> = sums.iter().map(|v| v / samples as f64).collect();
    let estimate = mv.estimate(seed);
    let coeffs = poly_fit(&hs, &values, if lambdas.len() >= 3 { 2 } else { 1 })?;
    let residual = hs
        .iter()
        .zip(&values)
        .map(|(&h, &v)| (v - coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)).abs())
        .fold(0.0, f64::max);
    Ok(ExtrapolatedRatio {
        estimate,
        lambdas: lambdas.to_vec(),
        values,
        residual,
    })
}

/// Least-squares polynomial coefficients (constant term first).
fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let w = (0..=degree)
        .map(|d| weights_for_coefficient(xs, degree, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(w.iter().map(|wd| wd.iter().zip(ys).map(|(a, b)| a * b).sum()).collect())
}

fn intercept_weights(xs: &[f64], degree: usize) -> Result<Vec<f64>> {
    weights_for_coefficient(xs, degree, 0)
}

/// Row `d` of `(VᵀV)^{-1} Vᵀ` for the Vandermonde matrix `V`.
fn weights_for_coefficient(xs: &[f64], degree: usize, d: usize) -> Result<Vec<f64>> {
    let m = degree + 1;
    if xs.len() < m {
        return domain("not enough points for the requested fit degree");
    }
    let mut a = vec![vec![0.0; 2 * m]; m];
    for (i, row) in a.iter_mut().enumerate() {
        for j in 0..m {
            row[j] = xs.iter().map(|x| x.powi((i + j) as i32)).sum();
        }
        row[m + i] = 1.0;
    }
    // Gauss–Jordan inversion of the normal matrix
    for c in 0..m {
        let piv = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty range");
        a.swap(c, piv);
        let pv = a[c][c];
        if pv.abs() < 1e-300 {
            return domain("singular fit");
        }
        for v in &mut a[c] {
            *v /= pv;
        }
        for r in 0..m {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    let pivot_row = a[c].clone();
                    for (v, pvv) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= f * pvv;
                    }
                }
            }
        }
    }
    Ok(xs
        .iter()
        .map(|x| (0..m).map(|j| a[d][m + j] * x.powi(j as i32)).sum())
        .collect())
}

/// `γ_E(E ∩ rB_∞^n) = P(‖G_E‖_∞ ≤ r)`.
pub fn cube_section_gaussian(e: &Subspace, r: f64, samples: usize, seed: RngState) -> Result<Estimate> {
    if !(r > 0.0) {
        return domain(format!("cube section needs r > 0, got {r}"));
    }
    require_samples(samples)?;
    let mut s = SectionSampler::new(e, seed);
    let mut mv = MeanVar::new();
    let inf = PExponent::infinity();
    for _ in 0..samples {
        s.gaussian();
        mv.push(if lp_norm(&s.x, inf) <= r { 1.0 } else { 0.0 });
    }
    Ok(mv.estimate(seed))
}

/// Paired indicators `1[‖G_E‖_∞ ≤ r]` and `1[‖g‖_∞ ≤ r_k]`.
fn cube_pairs(e: &Subspace, r: f64, r_k: f64, samples: usize, seed: RngState) -> CoVar {
    let mut s = SectionSampler::new(e, seed);
    let mut cv = CoVar::new();
    let inf = PExponent::infinity();
    for _ in 0..samples {
        s.gaussian();
        let a = if lp_norm(&s.x, inf) <= r { 1.0 } else { 0.0 };
        let b = if lp_norm(&s.g, inf) <= r_k { 1.0 } else { 0.0 };
        cv.push(a, b);
    }
    cv
}

/// One row of a scan, also the CSV record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: f64,
    pub estimate: Estimate,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub quantity: String,
    pub points: Vec<ScanPoint>,
    /// Pairs `(i, j)` breaking the expected monotonicity by more than `z` bands.
    pub violations: Vec<(usize, usize)>,
    pub pass: bool,
}

impl ScanReport {
    fn new(quantity: &str, points: Vec<ScanPoint>, violations: Vec<(usize, usize)>) -> Self {
        let pass = violations.is_empty() && points.iter().all(|p| p.pass);
        Self {
            quantity: quantity.into(),
            points,
            violations,
            pass,
        }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        self.points.iter().map(|p| p.estimate).collect()
    }
}

pub const SCAN_HEADER: &str = "x,estimate,stderr,bound,margin,verdict";

pub fn write_scan_csv<W: Write>(mut w: W, points: &[ScanPoint]) -> io::Result<()> {
    writeln!(w, "{SCAN_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for p in points {
        writeln!(
            w,
            "{:?},{:?},{:?},{},{},{}",
            p.x,
            p.estimate.value,
            p.estimate.stderr,
            opt(p.bound),
            opt(p.margin),
            if p.pass { "pass" } else { "fail" }
        )?;
        w.flush()?;
    }
    Ok(())
}

/// Theorem 8 ratio across `ps`, all sharing one stream. Asserts the
/// nonincreasing trend within `z` bands; the exact value is the bound column.
pub fn theorem8_scan(e: &Subspace, ps: &[f64], samples: usize, seed: RngState, z: f64) -> Result<ScanReport> {
    let mut points = Vec::with_capacity(ps.len());
    for &p in ps {
        let est = theorem8_ratio(e, p, samples, seed)?;
        let exact = theorem8_ratio_exact(e, p);
        points.push(ScanPoint {
            x: p,
            estimate: est,
            bound: Some(exact),
            margin: Some(est.value - exact),
            pass: true,
        });
    }
    let est: Vec<Estimate> = points.iter().map(|p| p.estimate).collect();
    Ok(ScanReport::new("theorem8", points, monotone_violations(&est, true, z)))
}

/// `F(p)` across `ps`. Monotonicity is asserted on `p ≤ 2` only; for
/// `p ≥ 2` each point must satisfy `F(p) ≥ 1` within the band.
pub fn prop18_scan(
    e: &Subspace,
    ps: &[f64],
    lambda: f64,
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<ScanReport> {
    let mut points = Vec::with_capacity(ps.len());
    for &p in ps {
        let est = prop18_f(p, e, lambda, samples, seed)?;
        let (bound, pass) = if p >= 2.0 {
            (Some(1.0), est.value >= 1.0 - z * est.stderr - 1e-12)
        } else {
            (None, true)
        };
        points.push(ScanPoint {
            x: p,
            estimate: est,
            bound,
            margin: bound.map(|b| est.value - b),
            pass,
        });
    }
    let low: Vec<Estimate> = points.iter().filter(|p| p.x <= 2.0).map(|p| p.estimate).collect();
    Ok(ScanReport::new("prop18", points, monotone_violations(&low, false, z)))
}

/// `r_p(λ)` across `lambdas`: nonincreasing for `p ≤ 2`, nondecreasing for
/// `p ≥ 2`.
pub fn prop20_scan(
    e: &Subspace,
    p: f64,
    lambdas: &[f64],
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<ScanReport> {
    let est = prop20_r(p, e, lambdas, samples, seed)?;
    let points = lambdas
        .iter()
        .zip(&est)
        .map(|(&l, &v)| ScanPoint {
            x: l,
            estimate: v,
            bound: Some(1.0),
            margin: Some(v.value - 1.0),
            pass: true,
        })
        .collect();
    let violations = if p == 2.0 {
        let mut v = monotone_violations(&est, true, z);
        v.extend(monotone_violations(&est, false, z));
        v
    } else {
        monotone_violations(&est, p < 2.0, z)
    };
    Ok(ScanReport::new("prop20", points, violations))
}

/// `γ_E(E∩rB_∞^n) / γ_k(rB_∞^k)` across an increasing `r` grid. Asserts the
/// ratio is nonincreasing and at least 1, each within `z` bands.
pub fn theorem9_scan(e: &Subspace, rs: &[f64], samples: usize, seed: RngState, z: f64) -> Result<ScanReport> {
    if rs.windows(2).any(|w| !(w[1] > w[0])) || rs.iter().any(|&r| !(r > 0.0)) {
        return domain("theorem9_scan needs an increasing grid of r > 0");
    }
    require_samples(samples)?;
    let mut points = Vec::with_capacity(rs.len());
    for &r in rs {
        let cv = cube_pairs(e, r, r, samples, seed);
        let ratio = cv.ratio(seed);
        let d = cv.difference(seed);
        let pass = -d.value <= z * d.stderr + 1e-12;
        points.push(ScanPoint {
            x: r,
            estimate: ratio,
            bound: Some(1.0),
            margin: Some(ratio.value - 1.0),
            pass,
        });
    }
    let est: Vec<Estimate> = points.iter().map(|p| p.estimate).collect();
    Ok(ScanReport::new("theorem9", points, monotone_violations(&est, true, z)))
}

/// Both sides of `γ_k(rB_∞^k) ≤ γ_E(E∩rB_∞^n) ≤ γ_k(r√(n/k) B_∞^k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeSandwich {
    pub r: f64,
    pub section: Estimate,
    pub lower_exact: f64,
    pub upper_exact: f64,
    pub lower: Comparison,
    pub upper: Comparison,
    pub pass: bool,
}

/// Upper bound of the sandwich alone.
pub fn theorem10_bound(e: &Subspace, r: f64, samples: usize, seed: RngState, z: f64) -> Result<Comparison> {
    if !(r > 0.0) {
        return domain(format!("theorem10_bound needs r > 0, got {r}"));
    }
    require_samples(samples)?;
    let r_k = r * (e.n() as f64 / e.k() as f64).sqrt();
    let cv = cube_pairs(e, r, r_k, samples, seed);
    Ok(Comparison::from_pairs(
        format!("upper r={r}"),
        &cv,
        1.0,
        Relation::AtMost,
        z,
        seed,
    ))
}

/// Lower and upper cube bounds at one `r`, with the bounds' exact values.
pub fn cube_sandwich(e: &Subspace, r: f64, samples: usize, seed: RngState, z: f64) -> Result<CubeSandwich> {
    if !(r > 0.0) {
        return domain(format!("cube_sandwich needs r > 0, got {r}"));
    }
    require_samples(samples)?;
    let cv = cube_pairs(e, r, r, samples, seed);
    let lower = Comparison::from_pairs(format!("lower r={r}"), &cv, 1.0, Relation::AtLeast, z, seed);
    let upper = theorem10_bound(e, r, samples, seed, z)?;
    let k = e.k();
    let r_k = r * (e.n() as f64 / k as f64).sqrt();
    let pass = lower.pass && upper.pass;
    Ok(CubeSandwich {
        r,
        section: lower.lhs,
        lower_exact: gaussian_cube_mass(k, r),
        upper_exact: gaussian_cube_mass(k, r_k),
        lower,
        upper,
        pass,
    })
}

#[cfg(test)]
mod tests;
