use serde::Serialize;

use super::PointSet;
use crate::error::{domain, Error, Result};
use crate::specfun::{lp_norm, PExponent};

/// Largest `m` accepted by [`balance_exhaustive`].
pub const MAX_EXHAUSTIVE: usize = 24;

/// Signs `ε ∈ {-1, +1}^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignPattern(pub Vec<i8>);

impl SignPattern {
    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// Flips every sign if needed so that the first one is `+1`.
    pub fn canonical(mut self) -> Self {
        if self.0.first() == Some(&-1) {
            self.0.iter_mut().for_each(|s| *s = -*s);
        }
        self
    }

    /// `Σ ε_i x_i`.
    pub fn apply(&self, points: &PointSet) -> Vec<f64> {
        let mut sum = vec![0.0; points.d()];
        for (x, &s) in points.points().zip(&self.0) {
            for (acc, v) in sum.iter_mut().zip(x) {
                *acc += f64::from(s) * v;
            }
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceResult {
    pub signs: SignPattern,
    pub value: f64,
}

/// Minimizes `‖Σ ε_i x_i‖_p` over all sign patterns with `ε_1 = +1`.
///
/// Patterns are visited in Gray-code order so each step flips one sign; the
/// running sum is refreshed from scratch every 4096 steps to bound drift.
/// Ties keep the pattern visited first.
pub fn balance_exhaustive(points: &PointSet, p: PExponent) -> Result<BalanceResult> {
    let m = points.m();
    if m > MAX_EXHAUSTIVE {
        return Err(Error::TooManyPoints { m, max: MAX_EXHAUSTIVE });
    }
    if m == 0 {
        return Ok(BalanceResult {
            signs: SignPattern(Vec::new()),
            value: 0.0,
        });
    }
    let mut signs = vec![1i8; m];
    let mut sum = SignPattern(signs.clone()).apply(points);
    let mut best = lp_norm(&sum, p);
    let mut best_signs = signs.clone();
    let total: u64 = 1 << (m - 1);
    for step in 1..total {
        // bit that changes between gray(step-1) and gray(step)
        let j = step.trailing_zeros() as usize + 1;
        signs[j] = -signs[j];
        if step % 4096 == 0 {
            sum = SignPattern(signs.clone()).apply(points);
        } else {
            let s = 2.0 * f64::from(signs[j]);
            for (acc, v) in sum.iter_mut().zip(points.point(j)) {
                *acc += s * v;
            }
        }
        let v = lp_norm(&sum, p);
        if v < best {
            best = v;
            best_signs.copy_from_slice(&signs);
        }
    }
    // recompute the winner exactly
    let signs = SignPattern(best_signs);
    let value = lp_norm(&signs.apply(points), p);
    Ok(BalanceResult { signs, value })
}

/// Chooses each `ε_i` in turn to minimize the running `‖Σ_{j≤i} ε_j x_j‖_p`;
/// ties go to `+1`.
pub fn balance_greedy(points: &PointSet, p: PExponent) -> BalanceResult {
    let mut sum = vec![0.0; points.d()];
    let mut plus = vec![0.0; points.d()];
    let mut signs = Vec::with_capacity(points.m());
    for x in points.points() {
        for ((pl, s), v) in plus.iter_mut().zip(&sum).zip(x) {
            *pl = s + v;
        }
        let a = lp_norm(&plus, p);
        let minus: Vec<f64> = sum.iter().zip(x).map(|(s, v)| s - v).collect();
        let b = lp_norm(&minus, p);
        if a <= b {
            signs.push(1);
            sum.copy_from_slice(&plus);
        } else {
            signs.push(-1);
            sum = minus;
        }
    }
    let value = lp_norm(&sum, p);
    BalanceResult {
        signs: SignPattern(signs),
        value,
    }
}

/// Implied constant of a balancing result against a bound form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    /// Dimension of the span of the points.
    pub rank: usize,
    pub max_l2: f64,
    pub normalizer: f64,
    /// `value / normalizer` (0 when the normalizer vanishes).
    pub constant: f64,
    pub note: String,
}

fn ratio(value: f64, normalizer: f64) -> f64 {
    if normalizer > 0.0 {
        value / normalizer
    } else {
        0.0
    }
}

/// `value / (√log max(d, 2) · max_i ‖x_i‖₂)` with `d` the span dimension.
pub fn komlos_bound_check(points: &PointSet, result: &BalanceResult) -> BoundReport {
    let rank = points.rank();
    let max_l2 = points.max_l2();
    let normalizer = (rank.max(2) as f64).ln().sqrt() * max_l2;
    BoundReport {
        value: result.value,
        rank,
        max_l2,
        normalizer,
        constant: ratio(result.value, normalizer),
        note: if rank < 2 {
            "log term floored at log 2".into()
        } else {
            String::new()
        },
    }
}

/// `value / (√p · d^{1/p} · max_i ‖x_i‖₂)` for `p ≥ 2`; `p = ∞` uses the
/// logarithmic form of [`komlos_bound_check`].
pub fn lp_balance_bound_check(points: &PointSet, p: PExponent, result: &BalanceResult) -> Result<BoundReport> {
    if p.value() < 2.0 {
        return domain(format!("lp balance bound needs p >= 2, got {p}"));
    }
    let Some(pv) = p.finite() else {
        return Ok(komlos_bound_check(points, result));
    };
    let rank = points.rank();
    let max_l2 = points.max_l2();
    let normalizer = pv.sqrt() * (rank as f64).powf(1.0 / pv) * max_l2;
    Ok(BoundReport {
        value: result.value,
        rank,
        max_l2,
        normalizer,
        constant: ratio(result.value, normalizer),
        note: String::new(),
    })
}
