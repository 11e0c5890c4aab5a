use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};

/// Orthonormality tolerance for stored bases.
pub const BASIS_TOLERANCE: f64 = 1e-12;

/// A `k`-dimensional subspace `E ⊂ ℝⁿ` given by an orthonormal basis.
///
/// Rows of the `k × n` matrix are the basis vectors. A point of `E` with
/// coordinates `g ∈ ℝ^k` is `basisᵀ g`, and its section gauge is the ambient
/// `ℓ_p` norm of that vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    n: usize,
    k: usize,
    basis: Vec<f64>,
}

impl Subspace {
    /// Builds a subspace from a row-major `k × n` basis, checking orthonormality.
    pub fn new(n: usize, k: usize, basis: Vec<f64>) -> Result<Self> {
        Self::check_dims(n, k)?;
        if basis.len() != n * k {
            return domain(format!("basis has {} entries, expected {}", basis.len(), n * k));
        }
        let s = Self { n, k, basis };
        let err = s.orthonormality_error();
        if !(err <= BASIS_TOLERANCE) {
            return domain(format!("basis rows are not orthonormal (max deviation {err:e})"));
        }
        Ok(s)
    }

    fn check_dims(n: usize, k: usize) -> Result<()> {
        if k == 0 || k > n {
            return domain(format!("subspace needs 1 <= k <= n, got k = {k}, n = {n}"));
        }
        Ok(())
    }

    /// Span of the first `k` coordinate axes.
    pub fn axis(n: usize, k: usize) -> Result<Self> {
        Self::check_dims(n, k)?;
        let mut basis = vec![0.0; n * k];
        for j in 0..k {
            basis[j * n + j] = 1.0;
        }
        Ok(Self { n, k, basis })
    }

    /// Main diagonal of `ℝ^k × ⋯ × ℝ^k` (`n/k` copies).
    pub fn diagonal(n: usize, k: usize) -> Result<Self> {
        Self::check_dims(n, k)?;
        if n % k != 0 {
            return domain(format!("diagonal subspace needs k | n, got k = {k}, n = {n}"));
        }
        let m = n / k;
        let w = 1.0 / (m as f64).sqrt();
        let mut basis = vec![0.0; n * k];
        for j in 0..k {
            for i in 0..m {
                basis[j * n + i * k + j] = w;
            }
        }
        Ok(Self { n, k, basis })
    }

    /// Haar-random subspace: Gram–Schmidt on a Gaussian `k × n` matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        Self::check_dims(n, k)?;
        'outer: loop {
            let mut basis: Vec<f64> = (0..n * k).map(|_| rng.sample(StandardNormal)).collect();
            for j in 0..k {
                // two passes of modified Gram–Schmidt
                for _ in 0..2 {
                    for i in 0..j {
                        let d: f64 = (0..n).map(|c| basis[j * n + c] * basis[i * n + c]).sum();
                        for c in 0..n {
                            basis[j * n + c] -= d * basis[i * n + c];
                        }
                    }
                }
                let norm = basis[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 1e-8) {
                    continue 'outer;
                }
                for v in &mut basis[j * n..(j + 1) * n] {
                    *v /= norm;
                }
            }
            return Ok(Self { n, k, basis });
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.basis[j * self.n..(j + 1) * self.n]
    }

    /// `max |B Bᵀ - I|` over entries.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in 0..=i {
                let d: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    /// Writes `basisᵀ g` into `out`.
    pub fn embed(&self, g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(g.len(), self.k);
        debug_assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for (j, &gj) in g.iter().enumerate() {
            for (o, &b) in out.iter_mut().zip(self.row(j)) {
                *o += gj * b;
            }
        }
    }

    /// `c_i = |P_E e_i|²`; these sum to `k`.
    pub fn coordinate_weights(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        for j in 0..self.k {
            for (ci, b) in c.iter_mut().zip(self.row(j)) {
                *ci += b * b;
            }
        }
        c
    }

    /// Plain-text matrix, one basis row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for j in 0..self.k {
            let row: Vec<String> = self.row(j).iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Parses whitespace- or comma-separated rows. Rows that are orthonormal
    /// to within `1e-9` are re-orthonormalized so the stored basis meets
    /// [`BASIS_TOLERANCE`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
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
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("rows have different lengths".into()));
        }
        Self::check_dims(n, k)?;
        let basis: Vec<f64> = rows.into_iter().flatten().collect();
        let raw = Self { n, k, basis };
        let err = raw.orthonormality_error();
        if !(err <= 1e-9) {
            return domain(format!("imported rows are not orthonormal (max deviation {err:e})"));
        }
        let mut s = raw;
        for j in 0..k {
            for i in 0..j {
                let d: f64 = (0..n).map(|c| s.basis[j * n + c] * s.basis[i * n + c]).sum();
                for c in 0..n {
                    s.basis[j * n + c] -= d * s.basis[i * n + c];
                }
            }
            let norm = s.row(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut s.basis[j * n..(j + 1) * n] {
                *v /= norm;
            }
        }
        Ok(s)
    }
}
