use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::PointSet;
use crate::error::{domain, Error, Result};
use crate::rng::RngState;
use crate::specfun::{lp_norm, PExponent};
use crate::stats::{Estimate, MeanVar};

/// Largest mesh (and offset stencil) [`covering_count`] will build.
pub const MESH_CAP: usize = 2_000_000;

/// Search nodes allowed while building the mesh.
const NODE_CAP: usize = 4 * MESH_CAP;

/// Number of pseudo-random support directions used to trim the mesh.
const EXTRA_DIRECTIONS: usize = 64;

/// Seed of the trimming directions; fixed so counts are reproducible.
const DIRECTION_SEED: RngState = RngState::new(0x5eed_c0fe, 26);

/// A greedy cover of `absconv{x_i}` by `ℓ_p` balls of radius `ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringResult {
    /// Number of balls.
    pub n: usize,
    /// Ball centers in the ambient space.
    pub centers: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// Dimension of the span the mesh lives in.
    pub rank: usize,
    /// Lattice pitch in span coordinates (0 when no mesh was needed).
    pub pitch: f64,
    /// Every point of the hull lies within this `ℓ_p` distance of a mesh point.
    pub resolution: f64,
    /// Greedy radius used on the mesh, `ε - resolution`.
    pub mesh_radius: f64,
    pub mesh_points: usize,
    pub stencil_points: usize,
}

/// Upper bound on the covering number `N(absconv{x_i}, ε B_p)` for `p ≥ 2`.
///
/// The hull is meshed by the lattice `h ℤ^r` in an orthonormal basis of the
/// span (`r` = rank, `h = ε / (2√r)`), so every hull point is within `ε/4`
/// in `ℓ₂`, hence in `ℓ_p`, of a lattice point. Lattice points are kept when
/// they satisfy `⟨y, u⟩ ≤ h_K(u) + ε/4` for a fixed family of directions
/// `u`, which never drops the lattice point nearest to a hull point. The
/// mesh is then covered greedily, nearest to the origin first, by `ℓ_p`
/// balls of radius `3ε/4`; the resulting centers cover the hull at radius `ε`.
///
/// When `max_i ‖x_i‖_p ≤ ε` the single ball around the origin suffices and
/// no mesh is built.
pub fn covering_count(points: &PointSet, epsilon: f64, p: PExponent) -> Result<CoveringResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return domain(format!("covering radius must be positive and finite, got {epsilon}"));
    }
    if p.value() < 2.0 {
        return domain(format!("covering needs p >= 2, got {p}"));
    }
    if points.max_l2() > 1.0 + 1e-12 {
        return domain(format!(
            "points must lie in the unit l2 ball, max norm {}",
            points.max_l2()
        ));
    }
    let d = points.d();
    let (_, basis) = points.span();
    let rank = basis.len();
    let single = CoveringResult {
        n: 1,
        centers: vec![vec![0.0; d]],
        epsilon,
        rank,
        pitch: 0.0,
        resolution: 0.0,
        mesh_radius: epsilon,
        mesh_points: 0,
        stencil_points: 0,
    };
    // a convex function peaks at a vertex of the hull
    if points.points().all(|x| lp_norm(x, p) <= epsilon) {
        return Ok(single);
    }

    let coords: Vec<Vec<f64>> = points
        .points()
        .map(|x| basis.iter().map(|b| dot(x, b)).collect())
        .collect();
    let h = epsilon / (2.0 * (rank as f64).sqrt());
    let resolution = 0.25 * epsilon;
    let radius = epsilon - resolution;
    let support = |u: &[f64]| coords.iter().map(|y| dot(y, u).abs()).fold(0.0, f64::max);

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for j in 0..rank {
        let mut e = vec![0.0; rank];
        e[j] = 1.0;
        dirs.push(e.clone());
        e[j] = -1.0;
        dirs.push(e);
    }
    for y in &coords {
        let r = dot(y, y).sqrt();
        if r > 0.0 {
            dirs.push(y.iter().map(|v| v / r).collect());
            dirs.push(y.iter().map(|v| -v / r).collect());
        }
    }
    let mut rng = DIRECTION_SEED.rng();
    for _ in 0..EXTRA_DIRECTIONS {
        let u: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
        let r = dot(&u, &u).sqrt();
        if r > 0.0 {
            dirs.push(u.iter().map(|v| v / r).collect());
        }
    }
    let limits: Vec<f64> = dirs.iter().map(|u| support(u) + resolution + 1e-12).collect();
    let half: Vec<i64> = (0..rank)
        .map(|j| ((support(&dirs[2 * j]) + resolution) / h).floor() as i64)
        .collect();

    let box_size = half.iter().map(|&l| (2 * l + 1) as u128).product::<u128>();
    if box_size > u128::from(u64::MAX) {
        return Err(Error::MeshTooLarge {
            points: usize::MAX,
            cap: MESH_CAP,
        });
    }
    let mut mesh: Vec<Vec<i64>>;
    {
        let tail: Vec<Vec<f64>> = dirs
            .iter()
            .map(|u| {
                let mut t = vec![0.0; rank + 1];
                for j in (0..rank).rev() {
                    t[j] = t[j + 1] - u[j].abs() * h * half[j] as f64;
                }
                t
            })
            .collect();
        let mut walk = LatticeWalk {
            dirs: &dirs,
            limits: &limits,
            tail: &tail,
            half: &half,
            h,
            partial: vec![vec![0.0; dirs.len()]; rank + 1],
            o: vec![0; rank],
            nodes: 0,
            out: Vec::new(),
        };
        walk.walk(0)?;
        mesh = walk.out;
    }

    // stencil of lattice offsets inside the ℓ_p ball of the greedy radius;
    // ‖v‖_p ≥ d^{1/p - 1/2} ‖v‖₂ bounds its ℓ₂ extent
    let spread = match p.finite() {
        Some(q) => (d as f64).powf(0.5 - 1.0 / q),
        None => (d as f64).sqrt(),
    };
    let reach = radius * spread;
    let r_int = (reach / h).floor() as i64;
    let mut stencil: Vec<Vec<i64>> = Vec::new();
    {
        let mut o = vec![0i64; rank];
        let mut amb = vec![0.0; d];
        stencil_walk(
            0,
            &mut o,
            0.0,
            reach * reach,
            r_int,
            h,
            &basis,
            p,
            radius,
            &mut amb,
            &mut stencil,
        )?;
    }

    mesh.sort_by(|a, b| {
        let na: i64 = a.iter().map(|v| v * v).sum();
        let nb: i64 = b.iter().map(|v| v * v).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    let strides: Vec<u64> = {
        let mut s = vec![1u64; rank];
        for j in 1..rank {
            s[j] = s[j - 1] * (2 * half[j - 1] + 1) as u64;
        }
        s
    };
    let key = |o: &[i64]| -> Option<u64> {
        let mut k = 0u64;
        for j in 0..rank {
            if o[j].abs() > half[j] {
                return None;
            }
            k += (o[j] + half[j]) as u64 * strides[j];
        }
        Some(k)
    };
    let index: HashMap<u64, usize> = mesh
        .iter()
        .enumerate()
        .map(|(i, o)| (key(o).expect("mesh point inside box"), i))
        .collect();

    let mut covered = vec![false; mesh.len()];
    let mut centers = Vec::new();
    let mut shifted = vec![0i64; rank];
    for i in 0..mesh.len() {
        if covered[i] {
            continue;
        }
        let c = &mesh[i];
        for s in &stencil {
            for j in 0..rank {
                shifted[j] = c[j] + s[j];
            }
            if let Some(&t) = key(&shifted).and_then(|k| index.get(&k)) {
                covered[t] = true;
            }
        }
        let mut amb = vec![0.0; d];
        for (b, &oj) in basis.iter().zip(c) {
            for (a, bv) in amb.iter_mut().zip(b) {
                *a += h * oj as f64 * bv;
            }
        }
        centers.push(amb);
    }
    Ok(CoveringResult {
        n: centers.len(),
        centers,
        epsilon,
        rank,
        pitch: h,
        resolution,
        mesh_radius: radius,
        mesh_points: mesh.len(),
        stencil_points: stencil.len(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Branch-and-bound enumeration of the lattice points passing every
/// support-function constraint.
struct LatticeWalk<'a> {
    dirs: &'a [Vec<f64>],
    limits: &'a [f64],
    /// `tail[u][j]`: least value of `Σ_{l ≥ j} u_l h o_l` over the box.
    tail: &'a [Vec<f64>],
    half: &'a [i64],
    h: f64,
    /// `partial[j][u]`: `Σ_{l < j} u_l h o_l` along the current branch.
    partial: Vec<Vec<f64>>,
    o: Vec<i64>,
    nodes: usize,
    out: Vec<Vec<i64>>,
}

impl LatticeWalk<'_> {
    fn walk(&mut self, j: usize) -> Result<()> {
        let rank = self.o.len();
        self.nodes += 1;
        if self.out.len() >= MESH_CAP || self.nodes > NODE_CAP {
            return Err(Error::MeshTooLarge {
                points: self.out.len() + 1,
                cap: MESH_CAP,
            });
        }
        if j == rank {
            self.out.push(self.o.clone());
            return Ok(());
        }
        // range of o_j that keeps every constraint satisfiable
        let (mut lo, mut hi) = (-self.half[j], self.half[j]);
        for ((u, s), (lim, t)) in self
            .dirs
            .iter()
            .zip(&self.partial[j])
            .zip(self.limits.iter().zip(self.tail))
        {
            let slack = (lim - s - t[j + 1]) / self.h;
            if u[j] > 0.0 {
                hi = hi.min((slack / u[j]).floor() as i64);
            } else if u[j] < 0.0 {
                lo = lo.max((slack / u[j]).ceil() as i64);
            } else if slack < 0.0 {
                return Ok(());
            }
        }
        for v in lo..=hi {
            self.o[j] = v;
            let x = self.h * v as f64;
            let (head, rest) = self.partial.split_at_mut(j + 1);
            let mut feasible = true;
            for (((u, next), base), (lim, t)) in self
                .dirs
                .iter()
                .zip(rest[0].iter_mut())
                .zip(&head[j])
                .zip(self.limits.iter().zip(self.tail))
            {
                *next = base + u[j] * x;
                if *next + t[j + 1] > *lim {
                    feasible = false;
                }
            }
            if feasible {
                self.walk(j + 1)?;
            }
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn stencil_walk(
    j: usize,
    o: &mut [i64],
    sq: f64,
    reach_sq: f64,
    r_int: i64,
    h: f64,
    basis: &[Vec<f64>],
    p: PExponent,
    radius: f64,
    amb: &mut Vec<f64>,
    out: &mut Vec<Vec<i64>>,
) -> Result<()> {
    if j == o.len() {
        amb.fill(0.0);
        for (b, &oj) in basis.iter().zip(o.iter()) {
            for (a, bv) in amb.iter_mut().zip(b) {
                *a += h * oj as f64 * bv;
            }
        }
        if lp_norm(amb, p) <= radius {
            if out.len() >= MESH_CAP {
                return Err(Error::MeshTooLarge {
                    points: out.len() + 1,
                    cap: MESH_CAP,
                });
            }
            out.push(o.to_vec());
        }
        return Ok(());
    }
    for v in -r_int..=r_int {
        let s = sq + (h * v as f64).powi(2);
        if s > reach_sq {
            continue;
        }
        o[j] = v;
        stencil_walk(j + 1, o, s, reach_sq, r_int, h, basis, p, radius, amb, out)?;
    }
    o[j] = 0;
    Ok(())
}

/// Implied constant `log N · ε^{p/(p-1)} / log max(m, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop26Report {
    pub m: usize,
    pub epsilon: f64,
    pub n: usize,
    /// `p/(p-1)`, and 1 for `p = ∞`.
    pub exponent: f64,
    pub constant: f64,
    pub note: String,
}

pub fn prop26_bound_check(m: usize, epsilon: f64, p: PExponent, n: usize) -> Result<Prop26Report> {
    if !(epsilon > 0.0) || n == 0 {
        return domain(format!("need epsilon > 0 and N >= 1, got {epsilon}, {n}"));
    }
    let exponent = match p.finite() {
        None => 1.0,
        Some(q) if q > 1.0 => q / (q - 1.0),
        Some(q) => return domain(format!("covering bound needs p > 1, got {q}")),
    };
    let mut notes = Vec::new();
    if m < 2 {
        notes.push("log m floored at log 2");
    }
    if p.finite() == Some(2.0) {
        notes.push("p = 2: Carl-Pajor regime");
    }
    Ok(Prop26Report {
        m,
        epsilon,
        n,
        exponent,
        constant: (n as f64).ln() * epsilon.powf(exponent) / (m.max(2) as f64).ln(),
        note: notes.join("; "),
    })
}

/// `e₂^{2/p} · e_∞^{1-2/p}` for `p ≥ 2`.
pub fn entropy_interpolate(e_k_2: f64, e_k_inf: f64, p: PExponent) -> Result<f64> {
    if !(e_k_2 > 0.0 && e_k_inf > 0.0) {
        return domain(format!("entropy numbers must be positive, got {e_k_2}, {e_k_inf}"));
    }
    if p.value() < 2.0 {
        return domain(format!("interpolation needs p >= 2, got {p}"));
    }
    Ok(match p.finite() {
        None => e_k_inf,
        Some(2.0) => e_k_2,
        _ if e_k_2 == e_k_inf => e_k_2,
        Some(q) => e_k_2.powf(2.0 / q) * e_k_inf.powf(1.0 - 2.0 / q),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SudakovReport {
    /// `E sup_i |⟨G, x_i⟩|`.
    pub sup: Estimate,
    /// `E ‖G‖_∞` for the same `G`.
    pub linf: Estimate,
    pub rank: usize,
    /// `linf / √log max(m, 2)`.
    pub constant: f64,
}

/// Estimates both sides for a standard Gaussian `G` on the span of the points.
pub fn sudakov_rhs(points: &PointSet, samples: usize, seed: RngState) -> Result<SudakovReport> {
    if samples < 2 {
        return domain("sudakov_rhs needs at least 2 samples");
    }
    let (_, basis) = points.span();
    let rank = basis.len();
    let d = points.d();
    let mut rng = seed.rng();
    let mut sup = MeanVar::new();
    let mut linf = MeanVar::new();
    let mut g = vec![0.0; d];
    for _ in 0..samples {
        g.fill(0.0);
        for b in &basis {
            let z: f64 = rng.sample(StandardNormal);
            for (gi, bi) in g.iter_mut().zip(b) {
                *gi += z * bi;
            }
        }
        sup.push(points.points().map(|x| dot(&g, x).abs()).fold(0.0, f64::max));
        linf.push(lp_norm(&g, PExponent::infinity()));
    }
    let linf = linf.estimate(seed);
    Ok(SudakovReport {
        sup: sup.estimate(seed),
        constant: linf.value / (points.m().max(2) as f64).ln().sqrt(),
        linf,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate_to_infinity, QuadratureSpec};
    use proptest::prelude::*;
    use rand::Rng;

    fn pe(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    fn ps() -> [PExponent; 3] {
        [pe(2.0), pe(4.0), PExponent::infinity()]
    }

    fn random_ball_points(m: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = RngState::new(seed, 9).rng();
        let s = PointSet::random_unit(m, d, &mut rng).unwrap();
        let radii: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..1.0)).collect();
        let data: Vec<f64> = s
            .points()
            .zip(&radii)
            .flat_map(|(x, r)| x.iter().map(move |v| v * r))
            .collect();
        PointSet::new(d, data).unwrap()
    }

    /// Largest distance from random hull points to their nearest center.
    fn worst_gap(points: &PointSet, res: &CoveringResult, p: PExponent, seed: u64) -> f64 {
        let mut rng = RngState::new(seed, 3).rng();
        let mut worst: f64 = 0.0;
        for trial in 0..400 {
            let w: Vec<f64> = (0..points.m()).map(|_| rng.random_range(-1.0..1.0f64)).collect();
            let total: f64 = w.iter().map(|v| v.abs()).sum();
            // half the trials land on the boundary of the hull
            let scale = if trial % 2 == 0 {
                1.0 / total
            } else {
                rng.random_range(0.0..1.0) / total
            };
            let mut x = vec![0.0; points.d()];
            for (pt, wi) in points.points().zip(&w) {
                for (a, v) in x.iter_mut().zip(pt) {
                    *a += wi * scale * v;
                }
            }
            let best = res
                .centers
                .iter()
                .map(|c| {
                    let diff: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
                    lp_norm(&diff, p)
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    }

    #[test]
    fn trivial_hulls() {
        let zero = PointSet::new(3, vec![0.0; 6]).unwrap();
        for p in ps() {
            let r = covering_count(&zero, 0.1, p).unwrap();
            assert_eq!(r.n, 1);
            assert_eq!(r.rank, 0);
        }
        let seg = PointSet::new(2, vec![0.3, 0.4]).unwrap();
        for p in ps() {
            let eps = lp_norm(seg.point(0), p);
            assert!(covering_count(&seg, eps, p).unwrap().n <= 3);
            // a segment slightly longer than the radius still needs few balls
            let r = covering_count(&seg, 0.9 * eps, p).unwrap();
            assert!(r.n <= 3, "{}", r.n);
            assert_eq!(r.rank, 1);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = PointSet::new(2, vec![0.3, 0.4]).unwrap();
        assert!(covering_count(&s, 0.0, pe(2.0)).is_err());
        assert!(covering_count(&s, 0.5, pe(1.5)).is_err());
        let big = PointSet::new(2, vec![3.0, 4.0]).unwrap();
        assert!(covering_count(&big, 0.5, pe(2.0)).is_err());
        let wide = PointSet::orthonormal(6, 6).unwrap();
        assert!(matches!(
            covering_count(&wide, 0.1, pe(2.0)),
            Err(Error::MeshTooLarge { .. })
        ));
    }

    #[test]
    fn centers_cover_the_hull() {
        for (seed, (m, d)) in [(3, 3), (4, 4), (6, 3), (5, 5)].into_iter().enumerate() {
            let s = random_ball_points(m, d, seed as u64);
            for p in ps() {
                for eps in [0.3, 0.6] {
                    let r = covering_count(&s, eps, p).unwrap();
                    let gap = worst_gap(&s, &r, p, seed as u64);
                    assert!(gap <= eps, "m={m} d={d} p={p} eps={eps}: gap {gap}");
                    assert!(r.n >= 1 && r.n <= r.mesh_points.max(1));
                }
            }
        }
    }

    #[test]
    fn greedy_matches_an_independent_cover_of_the_same_mesh() {
        // rebuild the mesh by scanning the whole box and cover it by a plain
        // quadratic greedy in the same order
        let s = random_ball_points(3, 3, 17);
        let p = PExponent::infinity();
        let eps = 0.25;
        let r = covering_count(&s, eps, p).unwrap();
        assert!(r.mesh_points > 0);
        let (_, basis) = s.span();
        let h = r.pitch;
        let coords: Vec<Vec<f64>> = s.points().map(|x| basis.iter().map(|b| dot(x, b)).collect()).collect();
        let hk = |u: &[f64]| coords.iter().map(|y| dot(y, u).abs()).fold(0.0, f64::max);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            dirs.push(e.clone());
            e[j] = -1.0;
            dirs.push(e);
        }
        for y in &coords {
            let n = dot(y, y).sqrt();
            dirs.push(y.iter().map(|v| v / n).collect());
            dirs.push(y.iter().map(|v| -v / n).collect());
        }
        let mut g = DIRECTION_SEED.rng();
        for _ in 0..EXTRA_DIRECTIONS {
            let u: Vec<f64> = (0..3).map(|_| g.sample(StandardNormal)).collect();
            let n = dot(&u, &u).sqrt();
            dirs.push(u.iter().map(|v| v / n).collect());
        }
        let lim = 20i64;
        let mut mesh: Vec<Vec<f64>> = Vec::new();
        let mut keys: Vec<(i64, [i64; 3])> = Vec::new();
        for a in -lim..=lim {
            for b in -lim..=lim {
                for c in -lim..=lim {
                    let y = [a as f64 * h, b as f64 * h, c as f64 * h];
                    if dirs.iter().all(|u| dot(&y, u) <= hk(u) + 0.25 * eps + 1e-12) {
                        keys.push((a * a + b * b + c * c, [a, b, c]));
                    }
                }
            }
        }
        keys.sort();
        for (_, k) in &keys {
            let mut amb = vec![0.0; 3];
            for (bv, &kj) in basis.iter().zip(k) {
                for (x, v) in amb.iter_mut().zip(bv) {
                    *x += h * kj as f64 * v;
                }
            }
            mesh.push(amb);
        }
        assert_eq!(mesh.len(), r.mesh_points);
        let mut covered = vec![false; mesh.len()];
        let mut n = 0;
        for i in 0..mesh.len() {
            if covered[i] {
                continue;
            }
            n += 1;
            for j in 0..mesh.len() {
                let diff: Vec<f64> = mesh[i].iter().zip(&mesh[j]).map(|(a, b)| a - b).collect();
                if lp_norm(&diff, p) <= 0.75 * eps {
                    covered[j] = true;
                }
            }
        }
        assert_eq!(n, r.n);
    }

    #[test]
    fn monotone_in_epsilon_and_in_appended_points() {
        for seed in 0..3 {
            let s = random_ball_points(4, 3, 100 + seed);
            let more = s.appended(&random_ball_points(3, 3, 200 + seed)).unwrap();
            for p in ps() {
                let mut prev = usize::MAX;
                for eps in [0.25, 0.5, 1.0] {
                    let a = covering_count(&s, eps, p).unwrap().n;
                    let b = covering_count(&more, eps, p).unwrap().n;
                    assert!(a <= prev, "seed {seed} p {p} eps {eps}");
                    assert!(b >= a, "seed {seed} p {p} eps {eps}: {b} < {a}");
                    prev = a;
                }
            }
        }
    }

    #[test]
    fn prop26_constants() {
        let r = prop26_bound_check(4, 0.5, PExponent::infinity(), 8).unwrap();
        assert_eq!(r.exponent, 1.0);
        assert!((r.constant - 8f64.ln() * 0.5 / 4f64.ln()).abs() < 1e-15);
        let r = prop26_bound_check(4, 0.5, pe(2.0), 8).unwrap();
        assert_eq!(r.exponent, 2.0);
        assert!(r.note.contains("Carl-Pajor"));
        let r = prop26_bound_check(1, 0.5, pe(4.0), 3).unwrap();
        assert!((r.exponent - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.note.contains("floored"));
        assert_eq!(prop26_bound_check(4, 1.0, pe(3.0), 1).unwrap().constant, 0.0);
        assert!(prop26_bound_check(4, 0.0, pe(3.0), 1).is_err());
    }

    #[test]
    fn entropy_interpolation_cases() {
        assert_eq!(entropy_interpolate(0.3, 0.7, pe(2.0)).unwrap(), 0.3);
        assert_eq!(entropy_interpolate(0.3, 0.7, PExponent::infinity()).unwrap(), 0.7);
        for p in [2.5, 3.0, 7.0, 100.0] {
            assert_eq!(entropy_interpolate(0.37, 0.37, pe(p)).unwrap(), 0.37);
        }
        assert_eq!(entropy_interpolate(0.25, 1.0, pe(4.0)).unwrap(), 0.5);
        assert!(entropy_interpolate(0.0, 1.0, pe(4.0)).is_err());
        assert!(entropy_interpolate(1.0, 1.0, pe(1.0)).is_err());
    }

    #[test]
    fn sudakov_single_point() {
        let s = PointSet::new(3, vec![0.6, 0.0, 0.8]).unwrap();
        let r = sudakov_rhs(&s, 40_000, RngState::new(1, 0)).unwrap();
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!(r.sup.agrees_with(target, 4.0), "{:?}", r.sup);
        assert_eq!(r.rank, 1);
        // G = z·x, so ‖G‖_∞ = 0.8|z|
        assert!(r.linf.agrees_with(0.8 * target, 4.0), "{:?}", r.linf);
    }

    #[test]
    fn sudakov_orthonormal_points() {
        let spec = QuadratureSpec::default();
        for m in [2usize, 5, 8] {
            let oracle = integrate_to_infinity(
                |t| 1.0 - libm::erf(t / std::f64::consts::SQRT_2).powi(m as i32),
                0.0,
                &spec,
            )
            .unwrap();
            let s = PointSet::orthonormal(m, m + 2).unwrap();
            let r = sudakov_rhs(&s, 30_000, RngState::new(2, m as u64)).unwrap();
            assert!(r.sup.agrees_with(oracle, 4.0), "m={m}: {:?} vs {oracle}", r.sup);
            assert_eq!(r.sup, r.linf);
            assert!((r.constant - r.linf.value / (m as f64).ln().sqrt()).abs() < 1e-15);
        }
        let zero = PointSet::new(2, vec![0.0, 0.0]).unwrap();
        let r = sudakov_rhs(&zero, 10, RngState::new(0, 0)).unwrap();
        assert_eq!((r.sup.value, r.linf.value, r.rank), (0.0, 0.0, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn random_hulls_are_covered(seed in 0u64..1000, m in 1usize..5, d in 1usize..4, pi in 0usize..3, eps in 0.2f64..0.5) {
            let s = random_ball_points(m, d, seed);
            let p = ps()[pi];
            let r = covering_count(&s, eps, p).unwrap();
            prop_assert!(worst_gap(&s, &r, p, seed) <= eps);
            prop_assert_eq!(r.centers.len(), r.n);
        }
    }
}
