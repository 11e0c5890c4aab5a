//! Vector balancing and covering numbers of absolute convex hulls.

mod balance;
mod covering;

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};

pub use balance::{
    balance_exhaustive, balance_greedy, komlos_bound_check, lp_balance_bound_check, BalanceResult, BoundReport,
    SignPattern, MAX_EXHAUSTIVE,
};
pub use covering::{
    covering_count, entropy_interpolate, prop26_bound_check, sudakov_rhs, CoveringResult, Prop26Report, SudakovReport,
    MESH_CAP,
};

/// Relative singular-value cutoff for the span dimension.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `m` points of `ℝ^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    d: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return domain("point set needs d >= 1");
        }
        if data.len() % d != 0 {
            return domain(format!(
                "{} coordinates do not split into points of dimension {d}",
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return domain("point coordinates must be finite");
        }
        Ok(Self { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return domain("points have different dimensions");
        }
        Self::new(d, rows.concat())
    }

    /// `m` independent points uniform on the unit sphere of `ℝ^d`.
    pub fn random_unit<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<Self> {
        let mut data = Vec::with_capacity(m * d);
        for _ in 0..m {
            loop {
                let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 0.0 {
                    data.extend(v.iter().map(|x| x / r));
                    break;
                }
            }
        }
        Self::new(d, data)
    }

    /// The first `m` standard basis vectors of `ℝ^d`.
    pub fn orthonormal(m: usize, d: usize) -> Result<Self> {
        if m > d {
            return domain(format!("cannot place {m} orthonormal points in dimension {d}"));
        }
        let mut data = vec![0.0; m * d];
        for i in 0..m {
            data[i * d + i] = 1.0;
        }
        Self::new(d, data)
    }

    pub fn m(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d)
    }

    /// `max_i ‖x_i‖₂` (0 for an empty set).
    pub fn max_l2(&self) -> f64 {
        self.points()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d: self.d,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// The same points in `ℝ^{d'}`, `d' ≥ d`, padded with zeros.
    pub fn embedded(&self, d_new: usize) -> Result<Self> {
        if d_new < self.d {
            return domain(format!("cannot embed dimension {} into {d_new}", self.d));
        }
        let mut data = Vec::with_capacity(self.m() * d_new);
        for x in self.points() {
            data.extend_from_slice(x);
            data.extend(std::iter::repeat(0.0).take(d_new - self.d));
        }
        Self::new(d_new, data)
    }

    /// The set with `other`'s points appended.
    pub fn appended(&self, other: &PointSet) -> Result<Self> {
        if other.d != self.d {
            return domain("appended points must share the dimension");
        }
        Self::new(self.d, [self.data.as_slice(), other.data.as_slice()].concat())
    }

    /// Singular values of the `m × d` matrix (descending) and an orthonormal
    /// basis of the span, via one-sided Jacobi rotations on the points.
    pub fn span(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut cols: Vec<Vec<f64>> = self.points().map(<[f64]>::to_vec).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        for _sweep in 0..60 {
            let mut rotated = false;
            for i in 0..cols.len() {
                for j in i + 1..cols.len() {
                    let a = dot(&cols[i], &cols[i]);
                    let b = dot(&cols[j], &cols[j]);
                    let g = dot(&cols[i], &cols[j]);
                    if g == 0.0 || g.abs() <= 1e-15 * (a * b).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (b - a) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (left, right) = cols.split_at_mut(j);
                    for (u, v) in left[i].iter_mut().zip(right[0].iter_mut()) {
                        let (x, y) = (*u, *v);
                        *u = c * x - s * y;
                        *v = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut pairs: Vec<(f64, Vec<f64>)> = cols
            .into_iter()
            .map(|c| (c.iter().map(|v| v * v).sum::<f64>().sqrt(), c))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let sigma: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let cutoff = RANK_TOLERANCE * sigma.first().copied().unwrap_or(0.0);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for (s, c) in pairs {
            if !(s > cutoff) || s == 0.0 {
                break;
            }
            let mut v: Vec<f64> = c.iter().map(|x| x / s).collect();
            // one Gram–Schmidt pass cleans up residual non-orthogonality
            for b in &basis {
                let d = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= d * bi;
                }
            }
            let r = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
        }
        (sigma, basis)
    }

    /// Dimension of the linear span.
    pub fn rank(&self) -> usize {
        self.span().1.len()
    }

    /// One point per line, coordinates separated by spaces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for x in self.points() {
            let row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("no points".into()));
        }
        Self::from_rows(&rows)
    }
}
