use super::*;
use crate::specfun::integrate;
use crate::specfun::theta;
use proptest::prelude::*;

const Z: f64 = 3.0;

fn pe(p: f64) -> PExponent {
    PExponent::new(p).unwrap()
}

fn random_e(n: usize, k: usize, s: u64) -> Subspace {
    Subspace::random(n, k, &mut RngState::new(100 + s, 0).rng()).unwrap()
}

#[test]
fn sphere_gauss_convert_values() {
    assert_eq!(sphere_gauss_convert(5, 0.0).unwrap(), 1.0);
    for k in 1..8 {
        assert!((sphere_gauss_convert(k, 2.0).unwrap() - k as f64).abs() < 1e-12);
    }
    assert!((sphere_gauss_convert(1, 1.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-14);
    // E‖G‖₂^{-1} in ℝ³ is √(2/π)
    assert!((sphere_gauss_convert(3, -1.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-14);
    assert!(sphere_gauss_convert(3, -3.0).is_err());
    assert!(sphere_gauss_convert(0, 1.0).is_err());
}

#[test]
fn full_space_pth_moment() {
    let seed = RngState::new(1, 0);
    for &p in &[1.0, 3.0] {
        let e = random_e(4, 4, 0);
        let m = section_moment(&e, pe(p), p, 100_000, seed).unwrap();
        let exact = 4.0 * gauss_abs_moment(p).unwrap();
        assert!(m.agrees_with(exact, 4.0), "p={p}: {m:?} vs {exact}");
        assert!((gaussian_ball_moment(4, p).unwrap() - exact).abs() < 1e-12);
    }
}

#[test]
fn diagonal_line_moment_is_exact() {
    let e = Subspace::diagonal(2, 1).unwrap();
    for &p in &[0.5, 1.0, 2.0, 3.0, 4.0] {
        let m = section_moment(&e, pe(p), p, 1000, RngState::new(2, 0)).unwrap();
        let exact = 2f64.powf(1.0 - 0.5 * p) * gauss_abs_moment(p).unwrap();
        assert!((m.value - exact).abs() < 1e-12 * exact);
    }
}

#[test]
fn section_moment_basic_cases() {
    let e = random_e(5, 3, 1);
    let s = RngState::new(3, 0);
    assert_eq!(section_moment(&e, pe(1.5), 0.0, 10, s).unwrap().value, 1.0);
    assert!(section_moment(&e, pe(1.5), -3.0, 10, s).is_err());
    assert!(section_moment(&e, pe(1.5), -2.9, 10, s).is_ok());
    // ℓ₂ section moments do not depend on E
    let m = section_moment(&e, pe(2.0), -1.0, 10, s).unwrap();
    assert!((m.value - sphere_gauss_convert(3, -1.0).unwrap()).abs() < 1e-12);
}

#[test]
fn radial_conditioning_matches_plain_sampling() {
    let e = random_e(6, 3, 2);
    let seed = RngState::new(4, 0);
    for &(p, beta) in &[(1.0, 1.0), (3.0, -1.5), (0.5, 2.0)] {
        let conditioned = section_moment(&e, pe(p), beta, 50_000, seed).unwrap();
        // independent oracle: raw Gaussian samples on E
        let mut rng = seed.child(9).rng();
        let mut mv = MeanVar::new();
        let mut g = [0.0; 3];
        let mut x = [0.0; 6];
        for _ in 0..100_000 {
            for v in &mut g {
                *v = rand::Rng::sample(&mut rng, StandardNormal);
            }
            e.embed(&g, &mut x);
            mv.push(lp_norm(&x, pe(p)).powf(beta));
        }
        let plain = mv.estimate(seed);
        let band = 4.0 * (conditioned.stderr.powi(2) + plain.stderr.powi(2)).sqrt();
        assert!((conditioned.value - plain.value).abs() < band, "p={p} beta={beta}");
    }
}

#[test]
fn theorem8_exact_cases() {
    let seed = RngState::new(5, 0);
    let diag = Subspace::diagonal(2, 1).unwrap();
    for &p in &[0.5, 1.0, 2.0, 3.0, 4.0] {
        let r = theorem8_ratio(&diag, p, 1000, seed).unwrap();
        assert!(r.agrees_with(2f64.powf(1.0 - 0.5 * p), Z));
        assert!((theorem8_ratio_exact(&diag, p) - 2f64.powf(1.0 - 0.5 * p)).abs() < 1e-14);
    }
    let axis = Subspace::axis(5, 2).unwrap();
    for &p in &[0.5, 3.0] {
        assert!((theorem8_ratio_exact(&axis, p) - 1.0).abs() < 1e-15);
        assert!(theorem8_ratio(&axis, p, 50_000, seed).unwrap().agrees_with(1.0, 4.0));
    }
}

#[test]
fn theorem8_ratio_matches_exact_on_random_subspaces() {
    let seed = RngState::new(6, 0);
    for s in 0..4 {
        let e = random_e(6, 2, s);
        for &p in &[0.5, 1.5, 4.0] {
            let r = theorem8_ratio(&e, p, 40_000, seed.child(s)).unwrap();
            assert!(r.agrees_with(theorem8_ratio_exact(&e, p), 4.0), "s={s} p={p}: {r:?}");
        }
    }
}

#[test]
fn theorem8_scan_is_nonincreasing() {
    let seed = RngState::new(7, 0);
    for s in 0..3 {
        let e = random_e(8, 2, s);
        let rep = theorem8_scan(&e, &P_SCAN_GRID, 20_000, seed, Z).unwrap();
        assert!(rep.pass, "{rep:?}");
        let exact: Vec<f64> = P_SCAN_GRID.iter().map(|&p| theorem8_ratio_exact(&e, p)).collect();
        assert!(exact.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}

#[test]
fn laplace_functional_cases() {
    let seed = RngState::new(8, 0);
    let e = random_e(3, 3, 0);
    assert_eq!(laplace_functional(&e, pe(2.0), 0.0, 1.0, 10, seed).unwrap().value, 1.0);
    for &l in &[0.3, 1.0] {
        let est = laplace_functional(&e, pe(2.0), l, 1.0, 100_000, seed).unwrap();
        assert!(est.agrees_with((1.0 + 2.0 * l).powf(-1.5), 4.0), "{est:?}");
    }
    let vals: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&l| laplace_functional(&e, pe(1.0), l, 0.5, 20_000, seed).unwrap().value)
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals[3] < 0.01);
    assert!(laplace_functional(&e, pe(1.0), 1.0, 1.5, 10, seed).is_err());
}

#[test]
fn gaussian_laplace_closed_form() {
    let axis = Subspace::axis(2, 2).unwrap();
    let seed = RngState::new(9, 0);
    for &(p, l) in &[(1.0, 0.5), (3.0, 0.2)] {
        let exact = gaussian_laplace_exact(2, p, l).unwrap();
        let mc = laplace_functional(&axis, pe(p), l, 1.0, 100_000, seed).unwrap();
        assert!(mc.agrees_with(exact, 4.0));
    }
    assert!((gaussian_laplace_exact(3, 2.0, 0.5).unwrap() - 2f64.powf(-1.5)).abs() < 1e-10);
}

#[test]
fn prop18_identities() {
    let seed = RngState::new(10, 0);
    let e = random_e(6, 3, 3);
    let f2 = prop18_f(2.0, &e, 1.0, 5000, seed).unwrap();
    assert!((f2.value - 1.0).abs() < 1e-12 && f2.stderr < 1e-12);
    let axis = Subspace::axis(6, 3).unwrap();
    for &p in &[0.5, 3.0] {
        let f = prop18_f(p, &axis, 1.0, 5000, seed).unwrap();
        assert!((f.value - 1.0).abs() < 1e-12);
    }
    assert!(prop18_f(1.0, &e, 0.0, 10, seed).is_err());
}

#[test]
fn prop18_scan_on_random_subspaces() {
    let seed = RngState::new(11, 0);
    for s in 0..3 {
        let e = random_e(6, 2, s);
        let rep = prop18_scan(&e, &P_SCAN_GRID, 1.0, 20_000, seed, Z).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn prop20_diagonal_quadrature_oracle() {
    let e = Subspace::diagonal(2, 1).unwrap();
    let lambdas = [0.0, 0.5, 2.0, 8.0];
    let est = prop20_r(1.0, &e, &lambdas, 100_000, RngState::new(12, 0)).unwrap();
    assert_eq!(est[0].value, 1.0);
    let spec = QuadratureSpec::default();
    let gauss = |c: f64| {
        let v = integrate(|t| (-c * t - 0.5 * t * t).exp(), 0.0, 40.0, &spec).unwrap();
        2.0 * v / (2.0 * PI).sqrt()
    };
    for (l, e) in lambdas.iter().zip(&est).skip(1) {
        let oracle = gauss(l * 2f64.sqrt()) / gauss(*l);
        assert!(e.agrees_with(oracle, 4.0), "lambda={l}: {e:?} vs {oracle}");
    }
    // decreasing toward the volume ratio 1/√2
    assert!(est.windows(2).all(|w| w[1].value < w[0].value));
    assert!(est[3].value > 0.5f64.sqrt());
}

#[test]
fn prop20_scan_directions() {
    let seed = RngState::new(13, 0);
    let lambdas = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0];
    for s in 0..2 {
        let e = random_e(5, 2, s);
        for &p in &[1.0, 2.0, 4.0] {
            let rep = prop20_scan(&e, p, &lambdas, 20_000, seed, Z).unwrap();
            assert!(rep.pass, "p={p}: {rep:?}");
        }
        let lo = prop20_r(1.0, &e, &[10.0], 20_000, seed).unwrap()[0];
        let hi = prop20_r(4.0, &e, &[10.0], 20_000, seed).unwrap()[0];
        assert!(lo.value < 1.0 && hi.value > 1.0);
    }
}

#[test]
fn volume_ratio_cases() {
    let seed = RngState::new(14, 0);
    let axis = Subspace::axis(5, 2).unwrap();
    let v = volume_ratio(&axis, pe(1.3), 1000, seed).unwrap();
    assert!((v.value - 1.0).abs() < 1e-12);
    let diag = Subspace::diagonal(2, 1).unwrap();
    let v = volume_ratio(&diag, pe(1.0), 1000, seed).unwrap();
    assert!((v.value - 0.5f64.sqrt()).abs() < 1e-12);
    let full = random_e(3, 3, 0);
    assert_eq!(volume_ratio(&full, pe(1.0), 10, seed).unwrap().value, 1.0);
    // direction of the comparison with B_p^k
    for s in 0..4 {
        let e = random_e(6, 3, s);
        let lo = volume_ratio(&e, pe(1.0), 20_000, seed).unwrap();
        let hi = volume_ratio(&e, pe(4.0), 20_000, seed).unwrap();
        assert!(
            lo.upper(Z) <= 1.0 + 1e-12 && hi.lower(Z) >= 1.0 - 1e-12,
            "{lo:?} {hi:?}"
        );
    }
}

#[test]
fn section_volume_of_full_ball() {
    let e = Subspace::axis(2, 2).unwrap();
    let v = section_volume(&e, pe(1.0), 100_000, RngState::new(15, 0)).unwrap();
    assert!(v.agrees_with(2.0, 4.0), "{v:?}");
    let v = section_volume(
        &Subspace::axis(3, 3).unwrap(),
        PExponent::infinity(),
        100_000,
        RngState::new(15, 1),
    )
    .unwrap();
    assert!(v.agrees_with(8.0, 4.0), "{v:?}");
}

#[test]
fn extrapolated_volume_ratio() {
    let seed = RngState::new(16, 0);
    let diag = Subspace::diagonal(2, 1).unwrap();
    let x = volume_ratio_extrapolated(&diag, 1.0, &default_extrapolation_lambdas(1.0), 50, seed).unwrap();
    assert!((x.estimate.value - 0.5f64.sqrt()).abs() < 2e-5, "{x:?}");
    assert!(x.residual < 1e-6);
    let e = random_e(4, 2, 1);
    let polar = volume_ratio(&e, pe(1.5), 20_000, seed).unwrap();
    let x = volume_ratio_extrapolated(&e, 1.5, &default_extrapolation_lambdas(1.5), 2000, seed).unwrap();
    let band = 4.0 * (polar.stderr.powi(2) + x.estimate.stderr.powi(2)).sqrt() + 10.0 * x.residual;
    assert!((x.estimate.value - polar.value).abs() < band, "{x:?} vs {polar:?}");
}

#[test]
fn poly_fit_recovers_polynomials() {
    let xs = [0.5, 1.0, 2.0, 3.5];
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
    let c = poly_fit(&xs, &ys, 2).unwrap();
    assert!((c[0] - 2.0).abs() < 1e-10 && (c[1] + 3.0).abs() < 1e-10 && (c[2] - 0.5).abs() < 1e-10);
    let w = intercept_weights(&xs, 2).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn cube_section_oracles() {
    let seed = RngState::new(17, 0);
    let line = Subspace::axis(1, 1).unwrap();
    let diag = Subspace::diagonal(2, 1).unwrap();
    let axis = Subspace::axis(5, 3).unwrap();
    for &r in &[0.5, 1.0, 2.0] {
        let c = (2.0 * PI).sqrt();
        let v = cube_section_gaussian(&line, r, 100_000, seed).unwrap();
        assert!(v.agrees_with(theta(r).unwrap() / c, 4.0));
        let v = cube_section_gaussian(&diag, r, 100_000, seed).unwrap();
        assert!(v.agrees_with(theta(r * 2f64.sqrt()).unwrap() / c, 4.0));
        let v = cube_section_gaussian(&axis, r, 100_000, seed).unwrap();
        assert!(v.agrees_with(gaussian_cube_mass(3, r), 4.0));
    }
    assert!(cube_section_gaussian(&line, 0.0, 10, seed).is_err());
}

#[test]
fn theorem9_axis_ratio_is_one() {
    let axis = Subspace::axis(6, 2).unwrap();
    let rep = theorem9_scan(&axis, &[0.5, 1.0, 2.0], 5000, RngState::new(18, 0), Z).unwrap();
    assert!(rep.pass);
    for p in &rep.points {
        assert_eq!(p.estimate.value, 1.0);
    }
    assert!(theorem9_scan(&axis, &[1.0, 0.5], 10, RngState::new(18, 0), Z).is_err());
}

#[test]
fn cube_sandwich_on_random_subspaces() {
    let seed = RngState::new(19, 0);
    let rs = [0.5, 1.0, 1.5, 2.0, 3.0];
    for s in 0..3 {
        let e = random_e(8, 3, s);
        let scan = theorem9_scan(&e, &rs, 20_000, seed.child(s), Z).unwrap();
        assert!(scan.pass, "{scan:?}");
        assert!(scan.points[0].estimate.value > 1.0);
        for &r in &rs {
            let c = cube_sandwich(&e, r, 20_000, seed.child(s), Z).unwrap();
            assert!(c.pass, "{c:?}");
            assert!(c.lower_exact <= c.upper_exact);
        }
    }
}

#[test]
fn theorem10_equality_and_margin() {
    let seed = RngState::new(20, 0);
    for &(n, k) in &[(4, 2), (6, 3), (6, 2)] {
        let d = Subspace::diagonal(n, k).unwrap();
        let c = theorem10_bound(&d, 0.7, 5000, seed, Z).unwrap();
        assert_eq!(c.difference.value, 0.0);
        assert!(c.pass);
    }
    let e = random_e(6, 2, 5);
    let c = theorem10_bound(&e, 0.5, 50_000, seed, Z).unwrap();
    assert!(c.pass);
    assert!(c.difference.value < -5.0 * c.difference.stderr, "{c:?}");
    let full = random_e(3, 3, 1);
    let c = theorem10_bound(&full, 1.0, 20_000, seed, Z).unwrap();
    assert!(c.pass);
}

#[test]
fn bl_laplace_cases() {
    let seed = RngState::new(21, 0);
    let e = random_e(6, 2, 2);
    let r = bl_laplace_bound(&e, 2.0, 0.7, 1.0, 5000, seed, Z).unwrap();
    assert!(r.comparison.difference.value.abs() < 1e-12);
    let r = bl_laplace_bound(&e, 4.0, 0.0, 1.0, 100, seed, Z).unwrap();
    assert_eq!(r.comparison.lhs.value, 1.0);
    assert_eq!(r.comparison.rhs.value, 1.0);
    let d = Subspace::diagonal(6, 2).unwrap();
    let r = bl_laplace_bound(&d, 4.0, 0.3, 1.0, 5000, seed, Z).unwrap();
    assert!(r.comparison.difference.value.abs() < 1e-12);
    for &(p, l, th) in &[(4.0, 0.5, 1.0), (3.0, 2.0, 1.0), (6.0, 0.1, 0.5)] {
        let r = bl_laplace_bound(&e, p, l, th, 40_000, seed, Z).unwrap();
        assert!(r.comparison.pass, "{r:?}");
        if let Some(x) = r.rhs_exact {
            assert!(r.comparison.rhs.agrees_with(x, 4.0));
        }
    }
    assert!(bl_laplace_bound(&e, 1.5, 1.0, 1.0, 10, seed, Z).is_err());
}

#[test]
fn corollary21_cases() {
    let seed = RngState::new(22, 0);
    let e = random_e(8, 2, 3);
    let r = corollary21_moments(&e, pe(4.0), 0.0, 0.0, 100, seed, Z).unwrap();
    assert!(r.pass);
    assert_eq!(r.comparisons[0].lhs.value, 1.0);
    let d = Subspace::diagonal(6, 3).unwrap();
    let r = corollary21_moments(&d, pe(4.0), 4.0, 2.0, 5000, seed, Z).unwrap();
    for c in &r.comparisons {
        assert!(c.difference.value.abs() <= 1e-12 * c.lhs.value.abs(), "{c:?}");
    }
    let r = corollary21_moments(&e, pe(4.0), 2.0, 1.0, 40_000, seed, Z).unwrap();
    assert!(r.pass);
    assert!(r.comparisons[0].difference.value > 5.0 * r.comparisons[0].difference.stderr);
    assert!(corollary21_moments(&e, pe(1.0), 1.0, 1.0, 10, seed, Z).is_err());
    assert!(corollary21_moments(&e, pe(4.0), 1.0, 2.0, 10, seed, Z).is_err());
}

#[test]
fn corollary19_cases() {
    let seed = RngState::new(23, 0);
    let e = random_e(6, 3, 4);
    let r = corollary19_suite(&e, pe(2.0), 1.0, 2.0, 5000, seed, Z).unwrap();
    assert!(r.pass);
    for c in &r.comparisons {
        assert_eq!(c.relation, Relation::Equal);
    }
    // diagonal line in the plane: the section side is larger by 2^{1/p - 1/2}
    let d = Subspace::diagonal(2, 1).unwrap();
    let r = corollary19_suite(&d, pe(1.0), 0.5, 1.0, 1000, seed, Z).unwrap();
    let pos = &r.comparisons[1];
    assert!((pos.lhs.value / pos.rhs.value - 2f64.sqrt()).abs() < 1e-12);
    assert!(r.pass);
    let r = corollary19_suite(&d, pe(4.0), 0.5, 4.0, 1000, seed, Z).unwrap();
    let pos = &r.comparisons[1];
    assert!((pos.lhs.value / pos.rhs.value - 2f64.powf(1.0 - 2.0)).abs() < 1e-12);
    assert_eq!(pos.relation, Relation::AtMost);
    assert!(r.pass);
    for s in 0..3 {
        let e = random_e(7, 3, s);
        for &p in &[0.7, 1.5, 3.0, 6.0] {
            let r = corollary19_suite(&e, pe(p), 2.0, p.min(1.0), 20_000, seed, Z).unwrap();
            assert!(r.pass, "p={p}: {r:?}");
        }
        let r = corollary19_suite(&e, PExponent::infinity(), 2.0, 1.0, 20_000, seed, Z).unwrap();
        assert!(r.pass);
    }
    assert!(corollary19_suite(&e, pe(1.0), 3.0, 1.0, 10, seed, Z).is_err());
    assert!(corollary19_suite(&e, pe(1.0), 1.0, 1.5, 10, seed, Z).is_err());
}

#[test]
fn scan_csv_format() {
    let e = Subspace::diagonal(2, 1).unwrap();
    let rep = theorem8_scan(&e, &[1.0, 2.0], 100, RngState::new(24, 0), Z).unwrap();
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, &rep.points).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SCAN_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0,"));
    assert!(lines[2].ends_with(",pass"));
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, &[]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{SCAN_HEADER}\n"));
}

fn permuted(e: &Subspace, perm: &[usize], signs: &[f64]) -> Subspace {
    let n = e.n();
    let mut b = vec![0.0; n * e.k()];
    for j in 0..e.k() {
        for (c, &pc) in perm.iter().enumerate() {
            b[j * n + c] = signs[c] * e.row(j)[pc];
        }
    }
    Subspace::new(n, e.k(), b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moments_invariant_under_signed_permutations(
        seed in 0u64..1000,
        p in 0.5f64..6.0,
        beta in -1.5f64..3.0,
        perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
        signs in proptest::collection::vec(prop_oneof![Just(1.0f64), Just(-1.0)], 5),
    ) {
        let e = random_e(5, 2, seed);
        let f = permuted(&e, &perm, &signs);
        let s = RngState::new(seed, 1);
        let a = section_moment(&e, pe(p), beta, 200, s).unwrap();
        let b = section_moment(&f, pe(p), beta, 200, s).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs());
        prop_assert!((theorem8_ratio_exact(&e, p) - theorem8_ratio_exact(&f, p)).abs() < 1e-12);
    }

    #[test]
    fn exact_ratio_is_one_at_p_two_and_bounded(seed in 0u64..1000, n in 2usize..9, p in 0.3f64..8.0) {
        let k = 1 + (seed as usize % n);
        let e = random_e(n, k, seed);
        prop_assert!((theorem8_ratio_exact(&e, 2.0) - 1.0).abs() < 1e-12);
        // c_i ∈ [0, 1] and Σ c_i = k bound the ratio on each side of p = 2
        let r = theorem8_ratio_exact(&e, p);
        let floor = (k as f64 / n as f64).powf(0.5 * p - 1.0);
        if p > 2.0 {
            prop_assert!(r <= 1.0 + 1e-12 && r >= floor - 1e-12);
        } else {
            prop_assert!(r >= 1.0 - 1e-12 && r <= floor + 1e-12);
        }
    }

    #[test]
    fn cube_mass_monotone_in_r(seed in 0u64..500, r in 0.1f64..3.0) {
        let e = random_e(6, 3, seed);
        let s = RngState::new(seed, 2);
        let a = cube_section_gaussian(&e, r, 500, s).unwrap();
        let b = cube_section_gaussian(&e, r * 1.2, 500, s).unwrap();
        prop_assert!(a.value <= b.value);
    }
}
