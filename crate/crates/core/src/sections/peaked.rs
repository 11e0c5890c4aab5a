//! Peaked-ordering comparisons of one-dimensional densities by quadrature.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::rng::RngState;
use crate::specfun::{alpha, ln_gamma, theta, theta_unchecked, PExponent};
use crate::specfun::{integrate, QuadratureSpec};
use crate::stats::{CoVar, Estimate};

/// Absolute tolerance for quadrature-based ordering checks.
pub const ORDER_TOLERANCE: f64 = 1e-8;

/// Beyond this `u`, `e^{-u²}` is below `1e-16` of its peak and the tilted
/// density's mass integral is truncated.
const TRUNCATION: f64 = 6.1;

fn tight_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 4000).expect("valid quadrature spec")
}

/// `μ_{p,λ}` with density `exp(-λα^p|t|^p - α²t²)`, `α = α(p, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltedDensity {
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl TiltedDensity {
    pub fn new(p: PExponent, lambda: f64) -> Result<Self> {
        let p = p.require_finite()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("tilted density needs lambda > 0, got {lambda}"));
        }
        Ok(Self {
            p,
            lambda,
            alpha: alpha(p, lambda, &tight_spec())?,
        })
    }

    pub fn density(&self, t: f64) -> f64 {
        let a = self.alpha;
        (-self.lambda * a.powf(self.p) * t.abs().powf(self.p) - a * a * t * t).exp()
    }

    /// `μ([-a, a])`.
    pub fn interval_mass(&self, a: f64) -> Result<f64> {
        if a <= 0.0 {
            return Ok(0.0);
        }
        // u = α t turns the mass into (2/α) ∫_0^{αa} e^{-λu^p - u²} du
        let upper = (self.alpha * a).min(TRUNCATION);
        let (p, l) = (self.p, self.lambda);
        let half = integrate(|u| (-l * u.powf(p) - u * u).exp(), 0.0, upper, &tight_spec())?;
        Ok((2.0 * half / self.alpha).min(1.0))
    }

    /// Total mass, which should be 1.
    pub fn total_mass(&self) -> Result<f64> {
        self.interval_mass(f64::INFINITY)
    }
}

/// `ρ_r` with density `exp(-θ(r)²t²/2)` on `|t| ≤ r/θ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeDensity {
    pub r: f64,
    pub theta: f64,
}

impl CubeDensity {
    pub fn new(r: f64) -> Result<Self> {
        Ok(Self { r, theta: theta(r)? })
    }

    pub fn half_width(&self) -> f64 {
        self.r / self.theta
    }

    pub fn density(&self, t: f64) -> f64 {
        if t.abs() <= self.half_width() {
            (-0.5 * self.theta * self.theta * t * t).exp()
        } else {
            0.0
        }
    }

    /// `ρ_r([-a, a]) = θ(θ·min(a, r/θ)) / θ`, in closed form.
    pub fn interval_mass(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        theta_unchecked(self.theta * a.min(self.half_width())) / self.theta
    }
}

/// Which part of the tilted-density comparison applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PeakedCase {
    A,
    B,
    C,
    D,
    E,
    /// Same law (identical parameters, or `p = q = 2`).
    Identical,
}

/// Predicted ordering of two measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Peakedness {
    /// First ≺ second: `μ₁([-a,a]) ≤ μ₂([-a,a])`.
    FirstLessPeaked,
    /// Second ≺ first.
    SecondLessPeaked,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakedRow {
    pub a: f64,
    pub mass_first: f64,
    pub mass_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakedReport {
    pub first: TiltedDensity,
    pub second: TiltedDensity,
    pub case: Option<PeakedCase>,
    pub predicted: Option<Peakedness>,
    pub rows: Vec<PeakedRow>,
    /// Largest amount by which a row contradicts the prediction (0 if none).
    pub worst_violation: f64,
    pub pass: bool,
}

/// Predicted ordering of `μ_{p,λ₁}` and `μ_{q,λ₂}`, with the case that yields it.
pub fn predicted_order(d1: &TiltedDensity, d2: &TiltedDensity) -> Option<(PeakedCase, Peakedness)> {
    use Peakedness::*;
    if d1.p == d2.p {
        let p = d1.p;
        if d1.lambda == d2.lambda || p == 2.0 {
            return Some((PeakedCase::Identical, Equal));
        }
        // the smaller λ is less peaked when p < 2, more peaked when p > 2
        let first_smaller = d1.lambda < d2.lambda;
        return Some(if p < 2.0 {
            (
                PeakedCase::D,
                if first_smaller {
                    SecondLessPeaked
                } else {
                    FirstLessPeaked
                },
            )
        } else {
            (
                PeakedCase::E,
                if first_smaller {
                    FirstLessPeaked
                } else {
                    SecondLessPeaked
                },
            )
        });
    }
    // orient so that lo.p < hi.p; a verdict of lo ≺ hi is mapped back
    let (lo, hi, swapped) = if d1.p < d2.p { (d1, d2, false) } else { (d2, d1, true) };
    let case = if lo.p < 2.0 && hi.p >= 2.0 {
        Some(PeakedCase::C)
    } else if hi.p >= 2.0 && lo.alpha > hi.alpha {
        Some(PeakedCase::A)
    } else if hi.p < 2.0 && lo.alpha < hi.alpha {
        Some(PeakedCase::B)
    } else {
        None
    };
    case.map(|c| (c, if swapped { SecondLessPeaked } else { FirstLessPeaked }))
}

/// Compares interval masses of two tilted densities on a grid of `a > 0`.
/// When no case applies the masses are reported and `pass` is true.
pub fn peaked_compare(d1: &TiltedDensity, d2: &TiltedDensity, grid: &[f64]) -> Result<PeakedReport> {
    if grid.iter().any(|&a| !(a > 0.0)) {
        return domain("peaked_compare grid must be positive");
    }
    let predicted = predicted_order(d1, d2);
    let mut rows = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for &a in grid {
        let m1 = d1.interval_mass(a)?;
        let m2 = d2.interval_mass(a)?;
        let v = match predicted.map(|x| x.1) {
            Some(Peakedness::FirstLessPeaked) => m1 - m2,
            Some(Peakedness::SecondLessPeaked) => m2 - m1,
            Some(Peakedness::Equal) => (m1 - m2).abs(),
            None => 0.0,
        };
        worst = worst.max(v);
        rows.push(PeakedRow {
            a,
            mass_first: m1,
            mass_second: m2,
        });
    }
    Ok(PeakedReport {
        first: *d1,
        second: *d2,
        case: predicted.map(|x| x.0),
        predicted: predicted.map(|x| x.1),
        rows,
        worst_violation: worst,
        pass: worst <= ORDER_TOLERANCE,
    })
}

/// `count` points spread geometrically over `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma15Report {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub alpha_p: f64,
    pub alpha_q: f64,
    /// `α(p, λ/Γ((p+1)/2)) < α(q, λ/Γ((q+1)/2))`.
    pub strict: bool,
}

/// Evaluates both sides of `α(p, λ/Γ((p+1)/2)) < α(q, λ/Γ((q+1)/2))`.
pub fn lemma15_check(p: f64, q: f64, lambda: f64, spec: &QuadratureSpec) -> Result<Lemma15Report> {
    if !(p > 0.0 && p < q && q.is_finite()) {
        return domain(format!("lemma15_check needs 0 < p < q < inf, got ({p}, {q})"));
    }
    let alpha_p = alpha(p, lambda / ln_gamma(0.5 * (p + 1.0)).exp(), spec)?;
    let alpha_q = alpha(q, lambda / ln_gamma(0.5 * (q + 1.0)).exp(), spec)?;
    Ok(Lemma15Report {
        p,
        q,
        lambda,
        alpha_p,
        alpha_q,
        strict: alpha_p < alpha_q,
    })
}

/// Convex test functions on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConvexFn {
    /// `a t + b`.
    Linear { a: f64, b: f64 },
    /// `t^s`, `s ≥ 1`.
    Power(f64),
    /// `max(t - t0, 0)`.
    Hinge(f64),
    /// `e^{c t} - 1` for `c > 0`.
    Exp(f64),
}

impl ConvexFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ConvexFn::Linear { a, b } => a * t + b,
            ConvexFn::Power(s) => t.powf(s),
            ConvexFn::Hinge(t0) => (t - t0).max(0.0),
            ConvexFn::Exp(c) => (c * t).exp_m1(),
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self, ConvexFn::Linear { .. })
    }

    /// A fixed family used by the suites.
    pub fn standard_family() -> Vec<ConvexFn> {
        vec![
            ConvexFn::Linear { a: 1.0, b: 0.0 },
            ConvexFn::Power(1.5),
            ConvexFn::Power(2.0),
            ConvexFn::Hinge(0.5),
            ConvexFn::Hinge(1.0),
            ConvexFn::Hinge(2.0),
            ConvexFn::Exp(0.25),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexOrderRow {
    pub f: ConvexFn,
    pub lhs: f64,
    pub rhs: f64,
    /// Paired estimate of `lhs - rhs`.
    pub difference: Estimate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexOrderReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ConvexOrderRow>,
    /// Share of `Σ X^q` carried by the largest sample; near 1 signals a
    /// heavy tail for which `E X^q` is unreliable.
    pub tail_share: f64,
    pub pass: bool,
}

/// Checks `E f(X^p/EX^p) ≤ E f(X^q/EX^q)` by Monte Carlo. Both sides are
/// normalized by sample means, so affine `f` gives equality.
pub fn power_convex_order_check<F: FnMut(&mut ChaCha8Rng) -> f64>(
    mut sampler: F,
    p: f64,
    q: f64,
    fs: &[ConvexFn],
    samples: usize,
    seed: RngState,
    z: f64,
) -> Result<ConvexOrderReport> {
    if !(p > 0.0 && p < q && q.is_finite()) {
        return domain(format!("convex order check needs 0 < p < q < inf, got ({p}, {q})"));
    }
    if samples < 2 {
        return domain("convex order check needs at least 2 samples");
    }
    let mut rng = seed.rng();
    let xs: Vec<f64> = (0..samples).map(|_| sampler(&mut rng).abs()).collect();
    let mp = xs.iter().map(|x| x.powf(p)).sum::<f64>() / samples as f64;
    let mq_sum = xs.iter().map(|x| x.powf(q)).sum::<f64>();
    let mq = mq_sum / samples as f64;
    let tail_share = xs.iter().map(|x| x.powf(q)).fold(0.0, f64::max) / mq_sum;
    let mut rows = Vec::with_capacity(fs.len());
    for f in fs {
        let mut cv = CoVar::new();
        for &x in &xs {
            let (a, b) = if mp > 0.0 && mq > 0.0 {
                (f.eval(x.powf(p) / mp), f.eval(x.powf(q) / mq))
            } else {
                (f.eval(1.0), f.eval(1.0))
            };
            cv.push(a, b);
        }
        let difference = cv.difference(seed);
        let slack = 1e-12 * (1.0 + cv.x_estimate(seed).value.abs());
        let pass = if f.is_affine() {
            difference.value.abs() <= slack
        } else {
            difference.value <= z * difference.stderr + slack
        };
        rows.push(ConvexOrderRow {
            f: *f,
            lhs: cv.x_estimate(seed).value,
            rhs: cv.y_estimate(seed).value,
            difference,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ConvexOrderReport {
        p,
        q,
        rows,
        tail_share,
        pass,
    })
}

/// `ψ(s) = 2 ∫_0^∞ exp(-λ s^{2-p} t^p - t²/2) dt = √2 α(p, λ s^{2-p} 2^{p/2})`.
pub fn bl_psi(s: f64, p: f64, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(s > 0.0) {
        return domain(format!("psi needs s > 0, got {s}"));
    }
    let c = lambda * s.powf(2.0 - p) * 2f64.powf(0.5 * p);
    Ok(std::f64::consts::SQRT_2 * alpha(p, c, spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma22Report {
    pub p: f64,
    pub lambda: f64,
    pub log_psi_nondecreasing: bool,
    pub log_psi_concave: bool,
    pub f_concave: bool,
    /// Largest positive second difference of `t ↦ t log ψ(1/√t)`.
    pub worst_second_difference: f64,
    pub pass: bool,
}

/// Midpoint concavity of `t ↦ t log ψ(1/√t)` on an evenly spaced grid, plus
/// the monotonicity and concavity of `log ψ` that the argument relies on.
pub fn lemma22_check(p: f64, lambda: f64, t_lo: f64, t_hi: f64, points: usize) -> Result<Lemma22Report> {
    if !(p > 2.0 && p.is_finite()) {
        return domain(format!("lemma22_check needs finite p > 2, got {p}"));
    }
    if !(lambda > 0.0 && t_lo > 0.0 && t_hi > t_lo && points >= 3) {
        return domain("lemma22_check needs lambda > 0, 0 < t_lo < t_hi and >= 3 points");
    }
    let spec = tight_spec();
    let h = (t_hi - t_lo) / (points - 1) as f64;
    let ts: Vec<f64> = (0..points).map(|i| t_lo + h * i as f64).collect();
    let f: Vec<f64> = ts
        .iter()
        .map(|&t| Ok(t * bl_psi(1.0 / t.sqrt(), p, lambda, &spec)?.ln()))
        .collect::<Result<_>>()?;
    // log ψ on an evenly spaced s-grid covering the same range of 1/√t
    let (s_lo, s_hi) = (1.0 / t_hi.sqrt(), 1.0 / t_lo.sqrt());
    let hs = (s_hi - s_lo) / (points - 1) as f64;
    let c: Vec<f64> = (0..points)
        .map(|i| Ok(bl_psi(s_lo + hs * i as f64, p, lambda, &spec)?.ln()))
        .collect::<Result<_>>()?;
    let tol = 1e-9;
    let second = |v: &[f64]| {
        v.windows(3)
            .map(|w| w[0] + w[2] - 2.0 * w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let log_psi_nondecreasing = c.windows(2).all(|w| w[1] >= w[0] - tol);
    let log_psi_concave = second(&c) <= tol;
    let worst = second(&f);
    let f_concave = worst <= tol;
    Ok(Lemma22Report {
        p,
        lambda,
        log_psi_nondecreasing,
        log_psi_concave,
        f_concave,
        worst_second_difference: worst,
        pass: log_psi_nondecreasing && log_psi_concave && f_concave,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma23Report {
    pub r: f64,
    pub s: f64,
    pub worst_violation: f64,
    pub pass: bool,
}

/// For `r > s`, checks `ρ_r([-a,a]) ≤ ρ_s([-a,a])` on `grid`.
pub fn lemma23_check(r: f64, s: f64, grid: &[f64]) -> Result<Lemma23Report> {
    if !(r > s && s > 0.0) {
        return domain(format!("lemma23_check needs r > s > 0, got ({r}, {s})"));
    }
    let (dr, ds) = (CubeDensity::new(r)?, CubeDensity::new(s)?);
    let worst = grid
        .iter()
        .map(|&a| dr.interval_mass(a) - ds.interval_mass(a))
        .fold(0.0, f64::max);
    Ok(Lemma23Report {
        r,
        s,
        worst_violation: worst,
        pass: worst <= ORDER_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_abs_moment;
    use rand_distr::{Distribution, StandardNormal};

    fn pe(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn tilted_density_is_normalized() {
        for &(p, l) in &[(0.5, 1.0), (1.0, 0.3), (2.0, 2.0), (3.0, 5.0), (6.0, 0.1)] {
            let d = TiltedDensity::new(pe(p), l).unwrap();
            assert!((d.total_mass().unwrap() - 1.0).abs() < 1e-8, "p={p} l={l}");
            // independent check with the raw density
            let raw = integrate(|t| d.density(t), 0.0, 20.0 / d.alpha, &QuadratureSpec::default()).unwrap();
            assert!((2.0 * raw - 1.0).abs() < 1e-8);
        }
        assert!(TiltedDensity::new(PExponent::infinity(), 1.0).is_err());
        assert!(TiltedDensity::new(pe(1.0), 0.0).is_err());
    }

    #[test]
    fn p_two_is_a_fixed_gaussian() {
        // μ_{2,λ} has density e^{-π t²} for every λ
        let d = TiltedDensity::new(pe(2.0), 3.7).unwrap();
        for &t in &[0.0, 0.3, 1.1] {
            assert!((d.density(t) - (-PI * t * t).exp()).abs() < 1e-12);
        }
    }
    use std::f64::consts::PI;

    #[test]
    fn identical_parameters_give_equality() {
        let d = TiltedDensity::new(pe(1.3), 0.7).unwrap();
        let r = peaked_compare(&d, &d, &geometric_grid(0.01, 5.0, 50)).unwrap();
        assert_eq!(r.case, Some(PeakedCase::Identical));
        assert!(r.pass);
        assert_eq!(r.worst_violation, 0.0);
    }

    fn case_pair(case: PeakedCase) -> (TiltedDensity, TiltedDensity) {
        let mk = |p, l| TiltedDensity::new(pe(p), l).unwrap();
        match case {
            PeakedCase::A => (mk(2.5, 0.05), mk(4.0, 3.0)),
            PeakedCase::B => (mk(0.5, 4.0), mk(1.5, 0.2)),
            PeakedCase::C => (mk(1.0, 2.0), mk(2.0, 0.5)),
            PeakedCase::D => (mk(1.0, 0.5), mk(1.0, 3.0)),
            PeakedCase::E => (mk(3.0, 0.5), mk(3.0, 3.0)),
            PeakedCase::Identical => (mk(2.0, 1.0), mk(2.0, 5.0)),
        }
    }

    #[test]
    fn every_case_holds_on_a_grid() {
        let grid = geometric_grid(0.01, 4.0, 50);
        for case in [
            PeakedCase::A,
            PeakedCase::B,
            PeakedCase::C,
            PeakedCase::D,
            PeakedCase::E,
            PeakedCase::Identical,
        ] {
            let (d1, d2) = case_pair(case);
            let r = peaked_compare(&d1, &d2, &grid).unwrap();
            assert_eq!(r.case, Some(case));
            assert!(r.pass, "{case:?}: worst {}", r.worst_violation);
            // the swapped comparison predicts the mirrored direction
            let s = peaked_compare(&d2, &d1, &grid).unwrap();
            assert!(s.pass);
        }
        let (d1, d2) = case_pair(PeakedCase::D);
        assert_eq!(predicted_order(&d1, &d2).unwrap().1, Peakedness::SecondLessPeaked);
        let (d1, d2) = case_pair(PeakedCase::E);
        assert_eq!(predicted_order(&d1, &d2).unwrap().1, Peakedness::FirstLessPeaked);
    }

    #[test]
    fn no_case_is_reported_not_asserted() {
        // q ≥ 2 with α(p) < α(q), and p ≥ 2: only (a) could apply and it does not
        let d1 = TiltedDensity::new(pe(2.5), 3.0).unwrap();
        let d2 = TiltedDensity::new(pe(4.0), 0.05).unwrap();
        assert!(d1.alpha < d2.alpha);
        let r = peaked_compare(&d1, &d2, &[0.5, 1.0]).unwrap();
        assert_eq!(r.case, None);
        assert!(r.pass);
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn lemma15_values() {
        let spec = QuadratureSpec::default();
        let r = lemma15_check(1.0, 2.0, 1.0, &spec).unwrap();
        assert!(r.strict);
        // small λ: both sides approach √π
        let r = lemma15_check(1.0, 2.0, 1e-9, &spec).unwrap();
        assert!((r.alpha_p - PI.sqrt()).abs() < 1e-8 && (r.alpha_q - PI.sqrt()).abs() < 1e-8);
        // finer oracle for (2, 4), λ = 5
        let r = lemma15_check(2.0, 4.0, 5.0, &spec).unwrap();
        let fine = QuadratureSpec::new(1e-13, 20_000).unwrap();
        let oracle_p = alpha(2.0, 5.0 / ln_gamma(1.5).exp(), &fine).unwrap();
        let oracle_q = alpha(4.0, 5.0 / ln_gamma(2.5).exp(), &fine).unwrap();
        assert!((r.alpha_p - oracle_p).abs() < 1e-10 && (r.alpha_q - oracle_q).abs() < 1e-10);
        // α(2, c) = √(π/(1+c)) in closed form
        assert!((oracle_p - (PI / (1.0 + 5.0 / ln_gamma(1.5).exp())).sqrt()).abs() < 1e-12);
        assert!(r.strict);
        assert!(lemma15_check(2.0, 1.0, 1.0, &spec).is_err());
    }

    #[test]
    fn convex_order_on_gaussian() {
        let seed = RngState::new(8, 0);
        let fs = [
            ConvexFn::Linear { a: 2.0, b: 1.0 },
            ConvexFn::Power(2.0),
            ConvexFn::Hinge(1.0),
        ];
        let r = power_convex_order_check(|g| StandardNormal.sample(g), 1.0, 2.0, &fs, 200_000, seed, 3.0).unwrap();
        assert!(r.pass);
        assert!(r.rows[0].difference.value.abs() < 1e-12);
        // f(t) = t²: E|g|²/(E|g|)² = π/2 versus E g⁴/(E g²)² = 3
        let m1 = gauss_abs_moment(1.0).unwrap();
        assert!((r.rows[1].lhs - 1.0 / (m1 * m1)).abs() < 0.02);
        assert!((r.rows[1].rhs - 3.0).abs() < 0.05);
        assert!(r.rows[1].difference.value < -1.0);
        assert!(r.tail_share < 1e-3);
    }

    #[test]
    fn convex_order_constant_variable() {
        let r = power_convex_order_check(
            |_| 2.5,
            0.5,
            3.0,
            &ConvexFn::standard_family(),
            100,
            RngState::new(1, 0),
            3.0,
        )
        .unwrap();
        assert!(r.pass);
        for row in &r.rows {
            assert!((row.lhs - row.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma22_concavity() {
        for &(p, l) in &[(3.0, 0.5), (4.0, 1.0), (6.0, 2.0)] {
            let r = lemma22_check(p, l, 0.05, 4.0, 40).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!(lemma22_check(2.0, 1.0, 0.1, 1.0, 10).is_err());
    }

    #[test]
    fn cube_density_mass() {
        for &r in &[0.2, 1.0, 3.0] {
            let d = CubeDensity::new(r).unwrap();
            assert!((d.interval_mass(f64::INFINITY) - 1.0).abs() < 1e-14);
            let q = integrate(|t| d.density(t), 0.0, d.half_width(), &QuadratureSpec::default()).unwrap();
            assert!((2.0 * q - 1.0).abs() < 1e-10);
            let a = 0.3 * d.half_width();
            let q = integrate(|t| d.density(t), 0.0, a, &QuadratureSpec::default()).unwrap();
            assert!((2.0 * q - d.interval_mass(a)).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma23_on_grid() {
        let grid = geometric_grid(0.01, 3.0, 50);
        for &(r, s) in &[(0.5, 0.1), (2.0, 1.0), (5.0, 0.5)] {
            assert!(lemma23_check(r, s, &grid).unwrap().pass);
        }
        // reversed arguments violate the ordering
        let d1 = CubeDensity::new(0.5).unwrap();
        let d2 = CubeDensity::new(2.0).unwrap();
        assert!(d1.interval_mass(0.2) > d2.interval_mass(0.2));
        assert!(lemma23_check(1.0, 2.0, &grid).is_err());
    }
}
