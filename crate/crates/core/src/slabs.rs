//! Sub-independence of coordinate slabs, checked by Monte Carlo.
//!
//! Joint and marginal probabilities come from the same sample pool. The
//! standard error of `joint - product` uses the influence function
//! `1_J - Σ_i (∏_{j≠i} p_j) 1_{A_i}`, which accounts for the positive
//! correlation between the two estimates.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::RngState;
use crate::sampling::{BallMeasure, MeasureKind};
use crate::specfun::{lp_norm_pow, PExponent};
use crate::stats::{bonferroni_z, Estimate, MeanVar};

/// Family-wise level used for the default multiplier.
pub const FAMILY_LEVEL: f64 = 1e-3;

/// Marginal quantile levels used to place thresholds.
pub const QUANTILE_LEVELS: [f64; 3] = [0.5, 0.75, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `{|x_i| ≥ s_i}`
    Outer,
    /// `{|x_i| ≤ s_i}`
    Inner,
}

/// Thresholds `s ∈ [0, 1]^n` and a slab orientation.
///
/// All-zero thresholds are accepted; they give the degenerate events used as
/// equality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabSpec {
    thresholds: Vec<f64>,
    orientation: Orientation,
}

impl SlabSpec {
    pub fn new(thresholds: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if thresholds.is_empty() {
            return domain("slab needs at least one threshold");
        }
        if let Some(s) = thresholds.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return domain(format!("slab thresholds must lie in [0, 1], got {s}"));
        }
        Ok(Self {
            thresholds,
            orientation,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    fn hit(&self, i: usize, x: f64) -> bool {
        match self.orientation {
            Orientation::Outer => x.abs() >= self.thresholds[i],
            Orientation::Inner => x.abs() <= self.thresholds[i],
        }
    }

    /// Same thresholds, permuted.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&i| self.thresholds[i]).collect(), self.orientation)
    }
}

/// Joint and product estimates from one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabEstimates {
    pub joint: Estimate,
    pub product: Estimate,
    pub marginals: Vec<Estimate>,
    /// Standard error of `joint - product`.
    pub difference_stderr: f64,
    pub joint_hits: u64,
}

/// Samples `samples` points and evaluates all slab probabilities.
pub fn slab_estimates(measure: &BallMeasure, slab: &SlabSpec, samples: usize, seed: RngState) -> Result<SlabEstimates> {
    let n = measure.n();
    if slab.thresholds.len() != n {
        return domain("slab dimension does not match the measure");
    }
    if samples < 2 {
        return domain("at least two samples are required");
    }
    let mut rng = seed.rng();
    let mut x = vec![0.0; n];
    let mut hits = vec![false; samples * n];
    let mut joint = vec![false; samples];
    let mut counts = vec![0u64; n];
    let mut joint_hits = 0u64;
    for s in 0..samples {
        measure.sample_into(&mut rng, &mut x);
        let row = &mut hits[s * n..(s + 1) * n];
        let mut all = true;
        for i in 0..n {
            let h = slab.hit(i, x[i]);
            row[i] = h;
            all &= h;
            counts[i] += h as u64;
        }
        joint[s] = all;
        joint_hits += all as u64;
    }
    let nf = samples as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    // ∏_{j≠i} p_j without division
    let mut coef = vec![1.0; n];
    for i in 0..n {
        for (j, &p) in probs.iter().enumerate() {
            if j != i {
                coef[i] *= p;
            }
        }
    }
    let mut prod_infl = MeanVar::new();
    let mut diff_infl = MeanVar::new();
    let mut joint_mv = MeanVar::new();
    let mut marg = vec![MeanVar::new(); n];
    for s in 0..samples {
        let row = &hits[s * n..(s + 1) * n];
        let lin: f64 = row.iter().zip(&coef).map(|(&h, c)| if h { *c } else { 0.0 }).sum();
        let j = joint[s] as u8 as f64;
        prod_infl.push(lin);
        diff_infl.push(j - lin);
        joint_mv.push(j);
        for (m, &h) in marg.iter_mut().zip(row) {
            m.push(h as u8 as f64);
        }
    }
    let product: f64 = probs.iter().product();
    Ok(SlabEstimates {
        joint: Estimate {
            value: joint_hits as f64 / nf,
            ..joint_mv.estimate(seed)
        },
        product: Estimate {
            value: product,
            stderr: prod_infl.stderr(),
            samples: samples as u64,
            seed,
        },
        marginals: marg
            .iter()
            .zip(&probs)
            .map(|(m, &p)| Estimate {
                value: p,
                ..m.estimate(seed)
            })
            .collect(),
        difference_stderr: diff_infl.stderr(),
        joint_hits,
    })
}

/// Estimate of `ν(∩_i {slab_i})`.
pub fn joint_slab_prob(measure: &BallMeasure, slab: &SlabSpec, samples: usize, seed: RngState) -> Result<Estimate> {
    Ok(slab_estimates(measure, slab, samples, seed)?.joint)
}

/// Estimate of `∏_i ν(slab_i)` with a delta-method standard error.
pub fn product_slab_prob(measure: &BallMeasure, slab: &SlabSpec, samples: usize, seed: RngState) -> Result<Estimate> {
    Ok(slab_estimates(measure, slab, samples, seed)?.product)
}

/// One grid point of a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabPoint {
    pub thresholds: Vec<f64>,
    pub orientation: Orientation,
    pub joint: f64,
    pub product: f64,
    /// `product - joint`; nonnegative when the inequality holds exactly.
    pub margin: f64,
    pub stderr: f64,
    pub pass: bool,
    /// No sample fell in the joint event.
    pub below_resolution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabSummary {
    pub measure: String,
    pub n: usize,
    pub p: f64,
    pub grid_size: usize,
    pub z: f64,
    pub min_margin: f64,
    /// Smallest margin in units of its standard error, over points with a
    /// nonzero standard error.
    pub min_standardized_margin: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabVerdict {
    pub points: Vec<SlabPoint>,
    pub summary: SlabSummary,
}

/// Checks `joint ≤ product + z·stderr` at every grid point. Grid point `i`
/// draws from stream `seed.child(i)`. With `z = None` the multiplier is the
/// Bonferroni value for the grid size at level [`FAMILY_LEVEL`].
pub fn subindependence_verdict(
    measure: &BallMeasure,
    grid: &[SlabSpec],
    z: Option<f64>,
    samples: usize,
    seed: RngState,
) -> Result<SlabVerdict> {
    if grid.is_empty() {
        return domain("slab grid is empty");
    }
    let z = z.unwrap_or_else(|| bonferroni_z(grid.len(), FAMILY_LEVEL));
    let mut points = Vec::with_capacity(grid.len());
    for (i, slab) in grid.iter().enumerate() {
        let est = slab_estimates(measure, slab, samples, seed.child(i as u64))?;
        let margin = est.product.value - est.joint.value;
        let se = est.difference_stderr;
        let pass = -margin <= z * se + 1e-15;
        points.push(SlabPoint {
            thresholds: slab.thresholds.clone(),
            orientation: slab.orientation,
            joint: est.joint.value,
            product: est.product.value,
            margin,
            stderr: se,
            pass,
            below_resolution: est.joint_hits == 0,
        });
    }
    let min_margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let min_std = points
        .iter()
        .filter(|p| p.stderr > 0.0)
        .map(|p| p.margin / p.stderr)
        .reduce(f64::min);
    let pass = points.iter().all(|p| p.pass);
    Ok(SlabVerdict {
        summary: SlabSummary {
            measure: measure.kind().to_string(),
            n: measure.n(),
            p: measure.p(),
            grid_size: grid.len(),
            z,
            min_margin,
            min_standardized_margin: min_std,
            pass,
        },
        points,
    })
}

/// Empirical quantiles of `|x_1|` at the given levels.
pub fn marginal_quantiles(measure: &BallMeasure, levels: &[f64], samples: usize, seed: RngState) -> Result<Vec<f64>> {
    if samples == 0 {
        return domain("at least one sample is required");
    }
    let mut rng = seed.rng();
    let mut x = vec![0.0; measure.n()];
    let mut v: Vec<f64> = (0..samples)
        .map(|_| {
            measure.sample_into(&mut rng, &mut x);
            x[0].abs()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    levels
        .iter()
        .map(|&u| {
            if !(0.0..=1.0).contains(&u) {
                return domain(format!("quantile level must lie in [0, 1], got {u}"));
            }
            let idx = ((u * samples as f64).ceil() as usize).clamp(1, samples) - 1;
            Ok(v[idx])
        })
        .collect()
}

/// Random threshold grid: each point activates between 1 and
/// `max_active` coordinates, each at a marginal quantile from
/// [`QUANTILE_LEVELS`]. Inactive coordinates get the trivial threshold
/// (0 for outer slabs, 1 for inner ones).
pub fn random_slab_grid(
    measure: &BallMeasure,
    orientation: Orientation,
    count: usize,
    max_active: usize,
    seed: RngState,
) -> Result<Vec<SlabSpec>> {
    let n = measure.n();
    let quantiles = marginal_quantiles(measure, &QUANTILE_LEVELS, 20_000, seed.child(u64::MAX))?;
    let mut rng = seed.rng();
    let trivial = match orientation {
        Orientation::Outer => 0.0,
        Orientation::Inner => 1.0,
    };
    let mut idx: Vec<usize> = (0..n).collect();
    (0..count)
        .map(|_| {
            let active = rng.random_range(1..=max_active.clamp(1, n));
            idx.shuffle(&mut rng);
            let mut s = vec![trivial; n];
            for &i in &idx[..active] {
                s[i] = quantiles[rng.random_range(0..quantiles.len())];
            }
            SlabSpec::new(s, orientation)
        })
        .collect()
}

/// A step function `f(t) = values[#{b ∈ breakpoints : b ≤ t}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Constant,
    Nondecreasing,
    Nonincreasing,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return domain("step function needs one more value than breakpoints");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return domain("breakpoints must be strictly increasing");
        }
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return domain("step function values must be finite and nonnegative");
        }
        let s = Self { breakpoints, values };
        if s.monotonicity().is_none() {
            return domain("step function must be monotone");
        }
        Ok(s)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![], vec![c])
    }

    /// `1[t ≥ s]`.
    pub fn indicator_above(s: f64) -> Result<Self> {
        Self::new(vec![s], vec![0.0, 1.0])
    }

    /// `1[t < s]`.
    pub fn indicator_below(s: f64) -> Result<Self> {
        Self::new(vec![s], vec![1.0, 0.0])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.values[k]
    }

    pub fn monotonicity(&self) -> Option<Monotonicity> {
        let up = self.values.windows(2).all(|w| w[0] <= w[1]);
        let down = self.values.windows(2).all(|w| w[0] >= w[1]);
        match (up, down) {
            (true, true) => Some(Monotonicity::Constant),
            (true, false) => Some(Monotonicity::Nondecreasing),
            (false, true) => Some(Monotonicity::Nonincreasing),
            (false, false) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    /// `E ∏ f_i ≤ ∏ E f_i`
    AtMost,
    /// `E ∏ f_i ≥ ∏ E f_i`
    AtLeast,
    /// No direction asserted.
    Unasserted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub expected: Expected,
    pub z: f64,
    pub pass: bool,
}

/// Compares `E ∏ f_i(|X_i|/‖X‖_p)` with `∏ E f_i(|X_i|/‖X‖_p)` for a
/// generalized Gaussian vector `X`.
///
/// The asserted direction is `≤` when all `f_i` share one monotonicity, and
/// `≥` for a two-coordinate pair of opposite monotonicity. Other mixtures are
/// reported without a verdict.
pub fn fkg_monotone_check(
    p: PExponent,
    fs: &[StepFunction],
    z: f64,
    samples: usize,
    seed: RngState,
) -> Result<FkgReport> {
    let n = fs.len();
    if n == 0 {
        return domain("need at least one function");
    }
    if samples < 2 {
        return domain("at least two samples are required");
    }
    let measure = BallMeasure::new(n, p, MeasureKind::Cone)?;
    let pf = measure.p();
    let mut rng = seed.rng();
    let mut y = vec![0.0; n];
    let mut vals = vec![0.0; samples * n];
    for s in 0..samples {
        measure.sample_into(&mut rng, &mut y);
        debug_assert!((lp_norm_pow(&y, pf) - 1.0).abs() < 1e-9);
        for i in 0..n {
            vals[s * n + i] = fs[i].eval(y[i].abs());
        }
    }
    let nf = samples as f64;
    let means: Vec<f64> = (0..n)
        .map(|i| (0..samples).map(|s| vals[s * n + i]).sum::<f64>() / nf)
        .collect();
    let mut coef = vec![1.0; n];
    for i in 0..n {
        for (j, &m) in means.iter().enumerate() {
            if j != i {
                coef[i] *= m;
            }
        }
    }
    let mut lhs = MeanVar::new();
    let mut diff = MeanVar::new();
    for s in 0..samples {
        let row = &vals[s * n..(s + 1) * n];
        let prod: f64 = row.iter().product();
        let lin: f64 = row.iter().zip(&coef).map(|(v, c)| v * c).sum();
        lhs.push(prod);
        diff.push(prod - lin);
    }
    let rhs: f64 = means.iter().product();
    let kinds: Vec<Monotonicity> = fs
        .iter()
        .filter_map(|f| f.monotonicity())
        .filter(|m| *m != Monotonicity::Constant)
        .collect();
    let expected = if kinds.windows(2).all(|w| w[0] == w[1]) {
        Expected::AtMost
    } else if n == 2 {
        Expected::AtLeast
    } else {
        Expected::Unasserted
    };
    let se = diff.stderr();
    let d = lhs.mean() - rhs;
    let pass = match expected {
        Expected::AtMost => d <= z * se + 1e-15,
        Expected::AtLeast => -d <= z * se + 1e-15,
        Expected::Unasserted => true,
    };
    Ok(FkgReport {
        lhs: lhs.mean(),
        rhs,
        stderr: se,
        expected,
        z,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pe(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn degenerate_thresholds_give_equality() {
        let m = BallMeasure::volume(3, pe(1.5)).unwrap();
        let s = SlabSpec::new(vec![0.0; 3], Orientation::Outer).unwrap();
        let e = slab_estimates(&m, &s, 1000, RngState::new(1, 0)).unwrap();
        assert_eq!(e.joint.value, 1.0);
        assert_eq!(e.product.value, 1.0);
        let s = SlabSpec::new(vec![0.0; 3], Orientation::Inner).unwrap();
        let e = slab_estimates(&m, &s, 1000, RngState::new(1, 0)).unwrap();
        assert_eq!(e.joint.value, 0.0);
        assert_eq!(e.product.value, 0.0);
    }

    #[test]
    fn one_dimensional_uniform() {
        let m = BallMeasure::volume(1, pe(1.0)).unwrap();
        let s = SlabSpec::new(vec![0.3], Orientation::Inner).unwrap();
        let e = slab_estimates(&m, &s, 100_000, RngState::new(2, 0)).unwrap();
        assert!(e.joint.agrees_with(0.3, 4.0));
        assert_eq!(e.joint.value, e.product.value);
    }

    #[test]
    fn cross_polytope_corner_is_empty() {
        let m = BallMeasure::volume(2, pe(1.0)).unwrap();
        let s = SlabSpec::new(vec![0.5, 0.5], Orientation::Outer).unwrap();
        let e = slab_estimates(&m, &s, 100_000, RngState::new(3, 0)).unwrap();
        assert_eq!(e.joint.value, 0.0);
        assert!(e.product.value > 0.0);
    }

    #[test]
    fn disc_marginals_match_quadrature() {
        use crate::specfun::{integrate, QuadratureSpec};
        // P(|x_1| ≥ s) on the unit disc = (4/π) ∫_s^1 √(1 - t²) dt
        let spec = QuadratureSpec::default();
        let tail = |s: f64| {
            4.0 / std::f64::consts::PI * integrate(|t: f64| (1.0 - t * t).max(0.0).sqrt(), s, 1.0, &spec).unwrap()
        };
        let oracle = tail(0.3) * tail(0.4);
        let m = BallMeasure::volume(2, pe(2.0)).unwrap();
        let s = SlabSpec::new(vec![0.3, 0.4], Orientation::Outer).unwrap();
        let e = product_slab_prob(&m, &s, 200_000, RngState::new(4, 0)).unwrap();
        assert!(e.agrees_with(oracle, 4.0), "{e:?} vs {oracle}");
    }

    #[test]
    fn symmetric_thresholds_product_is_square() {
        let m = BallMeasure::volume(2, pe(3.0)).unwrap();
        let s = SlabSpec::new(vec![0.5, 0.5], Orientation::Outer).unwrap();
        let e = slab_estimates(&m, &s, 200_000, RngState::new(5, 0)).unwrap();
        let a = e.marginals[0].value;
        let b = e.marginals[1].value;
        assert!((a - b).abs() < 4.0 * (e.marginals[0].stderr + e.marginals[1].stderr));
        assert_relative_eq!(e.product.value, a * b, max_relative = 1e-15);
    }

    #[test]
    fn cone_n1_equality_and_verdicts() {
        let m = BallMeasure::cone(1, pe(2.0)).unwrap();
        let grid = vec![SlabSpec::new(vec![0.5], Orientation::Outer).unwrap()];
        let v = subindependence_verdict(&m, &grid, None, 1000, RngState::new(6, 0)).unwrap();
        assert!(v.summary.pass);
        assert_eq!(v.points[0].margin, 0.0);
        for kind in [MeasureKind::Volume, MeasureKind::GammaMixed { alpha: 3.0 }] {
            let m = BallMeasure::new(4, pe(1.5), kind).unwrap();
            for o in [Orientation::Outer, Orientation::Inner] {
                let grid = random_slab_grid(&m, o, 8, 3, RngState::new(7, 0)).unwrap();
                let v = subindependence_verdict(&m, &grid, None, 20_000, RngState::new(8, 0)).unwrap();
                assert!(v.summary.pass, "{kind:?} {o:?}: {:?}", v.summary);
            }
        }
    }

    #[test]
    fn permuted_thresholds_agree_in_distribution() {
        let m = BallMeasure::volume(3, pe(2.0)).unwrap();
        let s = SlabSpec::new(vec![0.2, 0.35, 0.5], Orientation::Outer).unwrap();
        let t = s.permuted(&[2, 0, 1]).unwrap();
        let a = slab_estimates(&m, &s, 100_000, RngState::new(9, 0)).unwrap();
        let b = slab_estimates(&m, &t, 100_000, RngState::new(9, 1)).unwrap();
        let se = (a.joint.stderr.powi(2) + b.joint.stderr.powi(2)).sqrt();
        assert!((a.joint.value - b.joint.value).abs() <= 4.0 * se);
        let se = (a.product.stderr.powi(2) + b.product.stderr.powi(2)).sqrt();
        assert!((a.product.value - b.product.value).abs() <= 4.0 * se);
    }

    #[test]
    fn fkg_cases() {
        let one = StepFunction::constant(1.0).unwrap();
        let r = fkg_monotone_check(
            pe(1.5),
            &[one.clone(), one.clone(), one],
            3.0,
            1000,
            RngState::new(10, 0),
        )
        .unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.rhs, 1.0);
        assert!(r.pass);

        let up = |s| StepFunction::indicator_above(s).unwrap();
        let r = fkg_monotone_check(pe(2.0), &[up(0.4), up(0.5), up(0.3)], 3.0, 50_000, RngState::new(11, 0)).unwrap();
        assert_eq!(r.expected, Expected::AtMost);
        assert!(r.pass && r.lhs < r.rhs);

        let down = StepFunction::indicator_below(0.6).unwrap();
        let r = fkg_monotone_check(pe(1.0), &[up(0.5), down], 3.0, 50_000, RngState::new(12, 0)).unwrap();
        assert_eq!(r.expected, Expected::AtLeast);
        assert!(r.pass && r.lhs > r.rhs, "{r:?}");

        let steps = StepFunction::new(vec![0.2, 0.5], vec![0.5, 1.0, 3.0]).unwrap();
        assert_eq!(steps.eval(0.1), 0.5);
        assert_eq!(steps.eval(0.2), 1.0);
        assert_eq!(steps.eval(0.9), 3.0);
        assert!(StepFunction::new(vec![0.2, 0.5], vec![0.5, 1.0, 0.3]).is_err());
    }

    #[test]
    fn validation() {
        assert!(SlabSpec::new(vec![1.5], Orientation::Outer).is_err());
        assert!(SlabSpec::new(vec![], Orientation::Outer).is_err());
        let m = BallMeasure::volume(2, pe(2.0)).unwrap();
        let s = SlabSpec::new(vec![0.1, 0.1, 0.1], Orientation::Outer).unwrap();
        assert!(slab_estimates(&m, &s, 100, RngState::new(0, 0)).is_err());
        assert!(subindependence_verdict(&m, &[], None, 100, RngState::new(0, 0)).is_err());
    }
}
