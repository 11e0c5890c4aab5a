//! Monte Carlo estimates and the statistical tests used to judge them.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::RngState;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: RngState,
}

impl Estimate {
    /// An exact value (zero standard error).
    pub fn exact(value: f64, samples: u64, seed: RngState) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples,
            seed,
        }
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.stderr
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.stderr
    }

    pub fn relative_stderr(&self) -> f64 {
        if self.value == 0.0 {
            if self.stderr == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.stderr / self.value).abs()
        }
    }

    /// Fails with [`Error::Imprecise`] when `stderr/|value|` exceeds `limit`.
    pub fn require_precision(self, limit: f64) -> Result<Self> {
        let r = self.relative_stderr();
        if r > limit {
            return Err(Error::Imprecise {
                relative_stderr: r,
                limit,
            });
        }
        Ok(self)
    }

    /// `|value - target| ≤ z·stderr`, plus a few ulps of rounding slack.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        let ulps = 8.0 * f64::EPSILON * self.value.abs().max(target.abs());
        (self.value - target).abs() <= z * self.stderr + ulps
    }

    /// Delta-method transform `x ↦ x^{1/q}` of a positive mean estimate.
    pub fn qth_root(self, q: f64) -> Self {
        let v = self.value.max(0.0).powf(1.0 / q);
        let se = if self.value > 0.0 {
            v / (q * self.value) * self.stderr
        } else {
            f64::INFINITY
        };
        Self {
            value: v,
            stderr: se,
            ..self
        }
    }

    /// Ratio of two estimates treated as independent.
    pub fn ratio_independent(self, other: Estimate) -> Self {
        let v = self.value / other.value;
        let rel = (self.relative_stderr().powi(2) + other.relative_stderr().powi(2)).sqrt();
        Self {
            value: v,
            stderr: v.abs() * rel,
            ..self
        }
    }

    /// Multiplies value and stderr by a constant.
    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            stderr: self.stderr * c.abs(),
            ..self
        }
    }
}

/// Streaming mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn estimate(&self, seed: RngState) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: self.stderr(),
            samples: self.n,
            seed,
        }
    }
}

/// Streaming covariance of a pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoVar {
    n: u64,
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
    // moments of d = x - y, kept separately so nearly equal pairs do not
    // lose their spread to cancellation
    md: f64,
    sdd: f64,
    sdy: f64,
}

impl CoVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mx;
        let dy = y - self.my;
        self.mx += dx / n;
        self.my += dy / n;
        self.sxx += dx * (x - self.mx);
        self.syy += dy * (y - self.my);
        self.sxy += dx * (y - self.my);
        let d = x - y;
        let dd = d - self.md;
        self.md += dd / n;
        self.sdd += dd * (d - self.md);
        self.sdy += dd * (y - self.my);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn correlation(&self) -> f64 {
        let d = (self.sxx * self.syy).sqrt();
        if d == 0.0 {
            0.0
        } else {
            self.sxy / d
        }
    }

    fn per_sample(&self, s: f64) -> f64 {
        if self.n < 2 {
            return if self.n == 0 { f64::INFINITY } else { 0.0 };
        }
        (s.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }

    pub fn x_estimate(&self, seed: RngState) -> Estimate {
        Estimate {
            value: self.mx,
            stderr: self.per_sample(self.sxx),
            samples: self.n,
            seed,
        }
    }

    pub fn y_estimate(&self, seed: RngState) -> Estimate {
        Estimate {
            value: self.my,
            stderr: self.per_sample(self.syy),
            samples: self.n,
            seed,
        }
    }

    /// Paired estimate of `E x - E y`.
    pub fn difference(&self, seed: RngState) -> Estimate {
        Estimate {
            value: self.mx - self.my,
            stderr: self.per_sample(self.sdd),
            samples: self.n,
            seed,
        }
    }

    /// Delta-method estimate of `E x / E y` from paired samples.
    pub fn ratio(&self, seed: RngState) -> Estimate {
        let r = self.mx / self.my;
        // x - r y = d + (1 - r) y
        let u = 1.0 - r;
        let s = self.sdd + 2.0 * u * self.sdy + u * u * self.syy;
        Estimate {
            value: r,
            stderr: self.per_sample(s) / self.my.abs(),
            samples: self.n,
            seed,
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal CDF.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("normal_quantile requires u in (0, 1), got {u}"));
    }
    // Acklam's rational approximation, then one Halley step.
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let lo = 0.02425;
    let x = if u < lo {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - lo {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = if u < 0.5 {
        normal_cdf(x) - u
    } else {
        (1.0 - u) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    };
    let t = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - t / (1.0 + 0.5 * x * t))
}

/// One-sided z multiplier for `groups` simultaneous tests at family-wise
/// level `level`, never below 3.
pub fn bonferroni_z(groups: usize, level: f64) -> f64 {
    let g = groups.max(1) as f64;
    let z = normal_quantile(1.0 - level / g).unwrap_or(3.0);
    z.max(3.0)
}

/// Kolmogorov–Smirnov statistic of `samples` against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
    ks_two_sample_counts(a, b).0 as f64 / (a.len() as f64 * b.len() as f64)
}

// Returns (K, m, n) with D = K / (m n), K an integer.
fn ks_two_sample_counts(a: &[f64], b: &[f64]) -> (u64, u64, u64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (m, n) = (xa.len() as i64, xb.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < xa.len() && j < xb.len() {
        let x = if xa[i] <= xb[j] { xa[i] } else { xb[j] };
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        best = best.max((i as i64 * n - j as i64 * m).abs());
    }
    (best as u64, m as u64, n as u64)
}

/// Asymptotic Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series converges fast for small λ.
        let pi2 = std::f64::consts::PI.powi(2);
        let mut s = 0.0;
        for k in 1..=20 {
            let k = (2 * k - 1) as f64;
            s += (-k * k * pi2 / (8.0 * lambda * lambda)).exp();
        }
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Exact `P(D_n < d)` for the one-sample statistic (Marsaglia, Tsang, Wang).
fn kolmogorov_cdf_exact(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let s = d * d * nf;
    if s > 7.24 || (s > 3.76 && n > 99) {
        return 1.0 - 2.0 * (-(2.000071 + 0.331 / nf.sqrt() + 1.409 / nf) * s).exp();
    }
    let k = (nf * d) as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nf * d;
    let mut hm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    hm[i * m + j] /= g as f64;
                }
            }
        }
    }
    let (q, mut e) = matrix_power(&hm, m, n);
    let mut s = q[(k - 1) * m + k - 1];
    for i in 1..=n {
        s = s * i as f64 / nf;
        if s < 1e-140 {
            s *= 1e140;
            e -= 140;
        }
    }
    s * 10f64.powi(e)
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            let row_b = &b[k * m..(k + 1) * m];
            let row_c = &mut c[i * m..(i + 1) * m];
            for (cj, bj) in row_c.iter_mut().zip(row_b) {
                *cj += aik * bj;
            }
        }
    }
    c
}

// A^n with a decimal exponent kept separately to avoid overflow.
fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (v, ev) = matrix_power(a, m, n / 2);
    let b = matmul(&v, &v, m);
    let eb = 2 * ev;
    let (mut out, mut e) = if n % 2 == 0 { (b, eb) } else { (matmul(a, &b, m), eb) };
    if out[(m / 2) * m + m / 2] > 1e140 {
        for x in out.iter_mut() {
            *x *= 1e-140;
        }
        e += 140;
    }
    (out, e)
}

/// Largest sample size for which exact null distributions are computed.
pub const KS_EXACT_LIMIT: usize = 10_000;

/// p-value of the one-sample statistic `d` at sample size `n`.
pub fn ks_pvalue(n: usize, d: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if d <= 0.0 {
        return 1.0;
    }
    if d >= 1.0 {
        return 0.0;
    }
    if n <= KS_EXACT_LIMIT {
        return (1.0 - kolmogorov_cdf_exact(n, d)).clamp(0.0, 1.0);
    }
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Critical value `d` with `ks_pvalue(n, d) = level`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ks_pvalue(n, mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// One-sample test of `samples` against `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let d = ks_statistic(samples, cdf);
    KsResult {
        statistic: d,
        p_value: ks_pvalue(samples.len(), d),
    }
}

/// Two-sample test. Exact when both samples have at most
/// [`KS_EXACT_LIMIT`] points (continuous data assumed), asymptotic otherwise.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    if a.is_empty() || b.is_empty() {
        return KsResult {
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let (k, m, n) = ks_two_sample_counts(a, b);
    let d = k as f64 / (m as f64 * n as f64);
    let p = if m as usize <= KS_EXACT_LIMIT && n as usize <= KS_EXACT_LIMIT {
        1.0 - smirnov_inside(m, n, k)
    } else {
        let ne = (m * n) as f64 / (m + n) as f64;
        let s = ne.sqrt();
        kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
    };
    KsResult {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    }
}

// P(|i n - j m| < k along the whole merged path) under the null, by a
// normalized lattice-path recursion.
fn smirnov_inside(m: u64, n: u64, k: u64) -> f64 {
    let (m, n) = if m > n { (n, m) } else { (m, n) };
    let (mi, ni, ki) = (m as i64, n as i64, k as i64);
    let inside = |i: i64, j: i64| (i * ni - j * mi).abs() < ki;
    let mut u = vec![0.0_f64; n as usize + 1];
    for (j, uj) in u.iter_mut().enumerate() {
        *uj = if inside(0, j as i64) { 1.0 } else { 0.0 };
    }
    for i in 1..=mi {
        let w = i as f64 / (i + ni) as f64;
        u[0] = if inside(i, 0) { w * u[0] } else { 0.0 };
        for j in 1..=ni {
            let ju = j as usize;
            u[ju] = if inside(i, j) { w * u[ju] + u[ju - 1] } else { 0.0 };
        }
    }
    u[n as usize]
}

/// Indices `(i, j)`, `i < j`, at which a sequence expected to be
/// nonincreasing rises by more than `z` combined standard errors.
pub fn monotone_violations(seq: &[Estimate], nonincreasing: bool, z: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            let (a, b) = (seq[i], seq[j]);
            let rise = if nonincreasing {
                b.value - a.value
            } else {
                a.value - b.value
            };
            let band = z * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            if rise > band + 1e-12 * a.value.abs().max(b.value.abs()) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Median of a slice (average of middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `max / median` of positive values; the stability statistic for
/// empirically measured constants.
pub fn stability_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max / median(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn normal_quantile_matches_reference() {
        let nd = Normal::new(0.0, 1.0).unwrap();
        for &u in &[1e-12, 1e-6, 0.001, 0.02, 0.3, 0.5, 0.77, 0.975, 0.999, 1.0 - 1e-9] {
            let x = normal_quantile(u).unwrap();
            assert_relative_eq!(x, nd.inverse_cdf(u), max_relative = 1e-9, epsilon = 1e-12);
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn bonferroni_floor_and_growth() {
        assert_eq!(bonferroni_z(1, 0.5), 3.0);
        let z = bonferroni_z(200, 1e-3);
        assert_relative_eq!(z, normal_quantile(1.0 - 5e-6).unwrap());
        assert!(z > 4.0);
    }

    #[test]
    fn welford_matches_direct() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25, 0.0];
        let mut mv = MeanVar::new();
        xs.iter().for_each(|&x| mv.push(x));
        let mean = xs.iter().sum::<f64>() / 6.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert_relative_eq!(mv.mean(), mean, max_relative = 1e-15);
        assert_relative_eq!(mv.variance(), var, max_relative = 1e-14);
        assert_relative_eq!(mv.stderr(), (var / 6.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn qth_root_delta_method() {
        let e = Estimate {
            value: 8.0,
            stderr: 0.3,
            samples: 1000,
            seed: RngState::new(0, 0),
        };
        let r = e.qth_root(3.0);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-15);
        // d/dx x^{1/3} = (1/3) x^{-2/3} = 1/12 at x = 8
        assert_relative_eq!(r.stderr, 0.3 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn kolmogorov_series_agree_at_switch() {
        let a = kolmogorov_survival(1.0);
        let pi2 = std::f64::consts::PI.powi(2);
        let mut s = 0.0;
        for k in 1..=20 {
            let k = (2 * k - 1) as f64;
            s += (-k * k * pi2 / 8.0).exp();
        }
        let b = 1.0 - (2.0 * std::f64::consts::PI).sqrt() * s;
        assert_relative_eq!(a, b, max_relative = 1e-12);
        // classical 5% point
        assert_relative_eq!(kolmogorov_survival(1.358_098_8), 0.05, max_relative = 1e-5);
    }

    #[test]
    fn exact_one_sample_small_n() {
        // n = 1: P(D_1 < d) = 2d - 1 for d in [1/2, 1]
        assert_relative_eq!(kolmogorov_cdf_exact(1, 0.75), 0.5, max_relative = 1e-12);
        // n = 2, d = 0.5: exact value 1/2
        assert_relative_eq!(kolmogorov_cdf_exact(2, 0.5), 0.5, max_relative = 1e-12);
        // tabulated 5% critical values
        assert_relative_eq!(ks_critical_value(10, 0.05), 0.40925, max_relative = 2e-4);
        assert_relative_eq!(ks_critical_value(20, 0.05), 0.29408, max_relative = 2e-4);
    }

    #[test]
    fn exact_and_asymptotic_agree_at_limit() {
        let n = KS_EXACT_LIMIT;
        for &d in &[0.008, 0.012, 0.016] {
            let exact = ks_pvalue(n, d);
            let sn = (n as f64).sqrt();
            let asym = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
            assert!((exact - asym).abs() < 2e-3, "d={d}: {exact} vs {asym}");
        }
    }

    #[test]
    fn two_sample_exact_small_cases() {
        // m = n = 1: D = 1 always, p = 1.
        let r = ks_two_sample(&[0.0], &[1.0]);
        assert_eq!(r.statistic, 1.0);
        assert_relative_eq!(r.p_value, 1.0);
        // m = n = 3, complete separation: P(D = 1) = 2 / C(6, 3) = 0.1
        let r = ks_two_sample(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0]);
        assert_relative_eq!(r.p_value, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn two_sample_exact_by_enumeration() {
        // Enumerate all C(8, 4) interleavings and count those with D ≥ observed.
        let a = [0.1, 0.4, 0.5, 0.9];
        let b = [0.2, 0.3, 0.6, 0.7];
        let observed = ks_two_sample_statistic(&a, &b);
        let mut hits = 0;
        let mut total = 0;
        for mask in 0u32..256 {
            if mask.count_ones() != 4 {
                continue;
            }
            total += 1;
            let xs: Vec<f64> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| i as f64).collect();
            let ys: Vec<f64> = (0..8).filter(|i| mask >> i & 1 == 0).map(|i| i as f64).collect();
            if ks_two_sample_statistic(&xs, &ys) >= observed - 1e-12 {
                hits += 1;
            }
        }
        let r = ks_two_sample(&a, &b);
        assert_relative_eq!(r.p_value, hits as f64 / total as f64, max_relative = 1e-12);
    }

    #[test]
    fn monotone_violation_detection() {
        let s = RngState::new(0, 0);
        let e = |v: f64, se: f64| Estimate {
            value: v,
            stderr: se,
            samples: 1000,
            seed: s,
        };
        let seq = [e(1.0, 0.01), e(0.99, 0.01), e(1.01, 0.01), e(0.9, 0.01)];
        assert!(monotone_violations(&seq, true, 3.0).is_empty());
        let seq = [e(1.0, 0.01), e(1.2, 0.01)];
        assert_eq!(monotone_violations(&seq, true, 3.0), vec![(0, 1)]);
        assert!(monotone_violations(&seq, false, 3.0).is_empty());
    }

    #[test]
    fn stability_ratio_basic() {
        assert_eq!(stability_ratio(&[1.0, 2.0, 3.0]), 1.5);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
