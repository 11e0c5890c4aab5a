//! Moments of linear functionals on `B_p^n`, Khinchine constants and
//! `ψ_α` estimates.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::RngState;
use crate::sampling::BallMeasure;
use crate::specfun::{gg_abs_moment, ln_gamma, lp_norm, PExponent};
use crate::stats::{Estimate, MeanVar};

/// Default `q` grid for `ψ_α` estimation.
pub const PSI_Q_GRID: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0];

/// Relative stderr above which a single moment estimate is rejected.
pub const MAX_RELATIVE_STDERR: f64 = 0.05;

/// A nonzero coefficient vector `a` with its nonincreasing rearrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    a: Vec<f64>,
    order: Vec<usize>,
}

impl Direction {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
            return domain("direction must be a nonempty finite vector");
        }
        if a.iter().all(|&v| v == 0.0) {
            return domain("direction must not be the zero vector");
        }
        let mut order: Vec<usize> = (0..a.len()).collect();
        order.sort_by(|&i, &j| a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j)));
        Ok(Self { a, order })
    }

    /// Coordinate vector `e_i` in `ℝ^n`.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return domain(format!("basis index {i} out of range for n = {n}"));
        }
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        Self::new(a)
    }

    /// `(1, …, 1, 0, …, 0)/√m` with `m` leading ones.
    pub fn flat(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return domain(format!("flat direction needs 1 <= m <= n, got m = {m}, n = {n}"));
        }
        let c = 1.0 / (m as f64).sqrt();
        Self::new((0..n).map(|i| if i < m { c } else { 0.0 }).collect())
    }

    /// Main diagonal `(1, …, 1)/√n`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::flat(n, n)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    /// `|a_{σ(1)}| ≥ … ≥ |a_{σ(n)}|`.
    pub fn sorted_abs(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.a[i].abs()).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.a.iter().map(|v| v * t).collect())
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return domain(format!("requires finite p >= 1, got {p}"));
    }
    if !(q >= 0.0 && q.is_finite()) {
        return domain(format!("requires finite q >= 0, got {q}"));
    }
    Ok(())
}

/// `Γ(n/p+1) / Γ((n+q)/p+1)`.
pub fn gamma_ratio_moment(n: usize, p: f64, q: f64) -> Result<f64> {
    check_pq(p, q)?;
    if n == 0 {
        return domain("n must be >= 1");
    }
    let n = n as f64;
    Ok((ln_gamma(n / p + 1.0) - ln_gamma((n + q) / p + 1.0)).exp())
}

/// `E|x_1|^q` under the normalized volume measure on `B_p^n`.
pub fn marginal_abs_moment_exact(n: usize, p: f64, q: f64) -> Result<f64> {
    Ok(gamma_ratio_moment(n, p, q)? * gg_abs_moment(p, q)?)
}

/// `q^{1/p} ‖(a*_i)_{i ≤ ⌊q⌋}‖_{p'} + √q ‖(a*_i)_{i > ⌊q⌋}‖_2` on the
/// nonincreasing rearrangement `a*`.
pub fn gk_estimate(a: &Direction, p: PExponent, q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return domain(format!("gk_estimate requires finite q >= 1, got {q}"));
    }
    let dual = p
        .dual()
        .ok_or_else(|| Error::Domain(format!("gk_estimate requires p >= 1, got {p}")))?;
    let s = a.sorted_abs();
    let split = (q.floor() as usize).min(s.len());
    let head = lp_norm(&s[..split], dual);
    let tail = lp_norm(&s[split..], PExponent::new(2.0)?);
    Ok(q.powf(p.reciprocal()) * head + q.sqrt() * tail)
}

/// Two-sided estimate of `(E|⟨a, X⟩|^q)^{1/q}` for `X` uniform on `B_p^n`:
/// `gk_estimate / max(n, q)^{1/p}`.
pub fn full_moment_formula(a: &Direction, p: PExponent, q: f64) -> Result<f64> {
    let n = a.dim() as f64;
    Ok(gk_estimate(a, p, q)? / n.max(q).powf(p.reciprocal()))
}

/// Monte Carlo `(E|⟨a_j, X⟩|^q)^{1/q}` for every direction `a_j` and every
/// `q` in `qs`, all from one sample pool. `result[j][k]` pairs direction `j`
/// with `qs[k]`.
pub fn functional_moments_mc(
    directions: &[Direction],
    measure: &BallMeasure,
    qs: &[f64],
    samples: usize,
    seed: RngState,
) -> Result<Vec<Vec<Estimate>>> {
    if samples < 2 {
        return domain("at least two samples are required");
    }
    for d in directions {
        if d.dim() != measure.n() {
            return domain("direction dimension does not match the measure");
        }
    }
    for &q in qs {
        if !(q > 0.0 && q.is_finite()) {
            return domain(format!("moment order must be positive and finite, got {q}"));
        }
    }
    let int_q: Vec<Option<i32>> = qs
        .iter()
        .map(|&q| (q.fract() == 0.0 && q <= 64.0).then_some(q as i32))
        .collect();
    let mut acc = vec![vec![MeanVar::new(); qs.len()]; directions.len()];
    let mut rng = seed.rng();
    let mut x = vec![0.0; measure.n()];
    for _ in 0..samples {
        measure.sample_into(&mut rng, &mut x);
        for (d, row) in directions.iter().zip(acc.iter_mut()) {
            let v = d.dot(&x).abs();
            for ((cell, &q), iq) in row.iter_mut().zip(qs).zip(&int_q) {
                cell.push(match iq {
                    Some(k) => v.powi(*k),
                    None => v.powf(q),
                });
            }
        }
    }
    Ok(acc
        .iter()
        .map(|row| {
            row.iter()
                .zip(qs)
                .map(|(mv, &q)| mv.estimate(seed).qth_root(q))
                .collect()
        })
        .collect())
}

/// Monte Carlo `(E|⟨a, X⟩|^q)^{1/q}` with a delta-method standard error.
///
/// Fails with [`Error::Imprecise`] when the relative standard error exceeds
/// [`MAX_RELATIVE_STDERR`].
pub fn functional_moment_mc(
    a: &Direction,
    measure: &BallMeasure,
    q: f64,
    samples: usize,
    seed: RngState,
) -> Result<Estimate> {
    if q < 1.0 {
        return domain(format!("functional_moment_mc requires q >= 1, got {q}"));
    }
    let est = functional_moments_mc(std::slice::from_ref(a), measure, &[q], samples, seed)?[0][0];
    est.require_precision(MAX_RELATIVE_STDERR)
}

/// Orders of magnitude of the best Khinchine constants `(A, B)` on `B_p^n`.
pub fn khinchine_constants(p: f64, q: f64, n: usize) -> Result<(f64, f64)> {
    if !(q >= 1.0 && q.is_finite()) {
        return domain(format!("khinchine_constants requires finite q >= 1, got {q}"));
    }
    check_pq(p, q)?;
    let nf = n as f64;
    let lower_like = q.sqrt() / nf.powf(1.0 / p) * (nf / q).sqrt().min(1.0);
    let upper_like = (q / nf).powf(1.0 / p).min(1.0);
    Ok(if p <= 2.0 {
        (lower_like, upper_like)
    } else {
        (upper_like, lower_like)
    })
}

/// Smallest and largest value of `full_moment_formula(a)/‖a‖_2` over the
/// candidate extremizers `e_1`, the main diagonal and the flat vector on
/// the first `⌊q⌋` coordinates.
pub fn khinchine_extremal_search(p: f64, q: f64, n: usize) -> Result<(f64, f64)> {
    let pe = PExponent::new(p)?;
    let mut cands = vec![Direction::basis(n, 0)?, Direction::diagonal(n)?];
    let m = q.floor() as usize;
    if m >= 1 && m <= n {
        cands.push(Direction::flat(n, m)?);
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for c in &cands {
        let v = full_moment_formula(c, pe, q)? / c.l2_norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `sup_k q_k^{-1/α} m_k` over a grid of `(q_k, m_k)` pairs.
pub fn psi_alpha_norm(moments: &[(f64, f64)], alpha: f64) -> Result<f64> {
    if moments.is_empty() {
        return domain("psi_alpha_norm needs a nonempty grid");
    }
    if !(1.0..=2.0).contains(&alpha) {
        return domain(format!("alpha must lie in [1, 2], got {alpha}"));
    }
    let mut best = 0.0_f64;
    for &(q, m) in moments {
        if !(q >= 1.0 && m > 0.0) {
            return domain(format!("invalid grid entry (q = {q}, m = {m})"));
        }
        best = best.max(q.powf(-1.0 / alpha) * m);
    }
    Ok(best)
}

/// `n^{1/p - 1/2} ‖θ‖_{p'}` for a unit vector `θ` and `p ∈ [1, 2]`.
pub fn psi2_direction_constant(theta: &Direction, p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("psi2_direction_constant requires p in [1, 2], got {p}"));
    }
    if (theta.l2_norm() - 1.0).abs() > 1e-9 {
        return domain("theta must be a unit vector");
    }
    let n = theta.dim() as f64;
    let dual = PExponent::new(p)?.dual().expect("p >= 1 has a dual");
    Ok(n.powf(1.0 / p - 0.5) * lp_norm(theta.coefficients(), dual))
}

/// Monte Carlo `ψ_α` constant of a direction:
/// `sup_q q^{-1/α} m_q / m_2` with `m_q = (E|⟨θ, X⟩|^q)^{1/q}`.
///
/// The reported stderr is that of the maximizing grid point.
pub fn psi_alpha_direction_mc(
    theta: &Direction,
    measure: &BallMeasure,
    alpha: f64,
    qs: &[f64],
    samples: usize,
    seed: RngState,
) -> Result<Estimate> {
    let mut grid: Vec<f64> = qs.to_vec();
    if !grid.contains(&2.0) {
        grid.push(2.0);
    }
    let est = functional_moments_mc(std::slice::from_ref(theta), measure, &grid, samples, seed)?;
    let row = &est[0];
    let two = grid.iter().position(|&q| q == 2.0).expect("2 is in the grid");
    let m2 = row[two];
    let mut best: Option<Estimate> = None;
    for (&q, e) in grid.iter().zip(row) {
        if !qs.contains(&q) {
            continue;
        }
        let r = e.ratio_independent(m2).scale(q.powf(-1.0 / alpha));
        if best.map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Domain("empty q grid".into()))
}

/// One row of a moment scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentScanRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub direction_id: usize,
    pub mc_value: f64,
    pub stderr: f64,
    pub formula_value: f64,
    pub ratio: f64,
}

pub const MOMENT_SCAN_HEADER: &str = "n,p,q,direction_id,mc_value,stderr,formula_value,ratio";

pub fn write_moment_scan_csv<W: Write>(mut w: W, rows: &[MomentScanRow]) -> io::Result<()> {
    writeln!(w, "{MOMENT_SCAN_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{:?},{:?},{},{:?},{:?},{:?},{:?}",
            r.n, r.p, r.q, r.direction_id, r.mc_value, r.stderr, r.formula_value, r.ratio
        )?;
    }
    w.flush()
}
