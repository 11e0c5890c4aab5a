use lpball::sections::{
    bl_laplace_bound, corollary19_suite, corollary21_moments, cube_sandwich, geometric_grid, lemma15_check,
    lemma22_check, lemma23_check, peaked_compare, predicted_order, prop18_scan, prop20_scan, theorem8_ratio_exact,
    theorem8_scan, theorem9_scan, Comparison, PeakedCase, ScanReport, TiltedDensity, ORDER_TOLERANCE, P_SCAN_GRID,
};
use lpball::specfun::QuadratureSpec;
use lpball::PExponent;

use super::{
    bound_row, check_choices, config_error, exponent, finite_exponent, monotone_row, parse_subspaces, positive,
    root_seed, subspace_seed,
};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::report::{Recorder, Row};

fn push_scan(rec: &mut Recorder, quantity: &str, label: &str, scan: &ScanReport) -> CliResult<()> {
    for pt in &scan.points {
        let mut row = Row::from_estimate(quantity, label, pt.x, &pt.estimate).verdict(pt.pass);
        if let Some(b) = pt.bound {
            row = row.bound(b);
        }
        if let Some(m) = pt.margin {
            row = row.margin(m);
        }
        rec.push(row)?;
    }
    rec.push(monotone_row(
        &format!("{quantity}-monotone"),
        label,
        scan.violations.len(),
    ))
}

fn push_comparison(rec: &mut Recorder, quantity: &str, label: &str, x: f64, c: &Comparison) -> CliResult<()> {
    rec.push(
        Row::from_estimate(quantity, format!("{label} {}", c.label), x, &c.lhs)
            .bound(c.rhs.value)
            .margin(c.difference.value)
            .verdict(c.pass),
    )
}

fn increasing(key: &str, v: &[f64]) -> CliResult<()> {
    positive(key, v)?;
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_error(format!("{key} must be strictly increasing")));
    }
    Ok(())
}

pub(super) fn p_scan(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["subspace", "p"])?;
    let samples = cfg.samples_or(100_000)?;
    let z = cfg.z_or(3.0);
    let ps = cfg.floats("p", &P_SCAN_GRID)?;
    increasing("p", &ps)?;
    let subs = parse_subspaces(
        &cfg.strings(
            "subspace",
            &[
                "diagonal:2:1",
                "diagonal:4:2",
                "diagonal:6:3",
                "diagonal:6:2",
                "random:6:3:10",
            ],
        ),
        subspace_seed(cfg),
    )?;
    let seed = root_seed(cfg);
    for (i, s) in subs.iter().enumerate() {
        let e = &s.subspace;
        let scan = theorem8_scan(e, &ps, samples, seed.child(i as u64), z)?;
        let ratio = e.k() as f64 / e.n() as f64;
        for pt in &scan.points {
            let exact = if s.diagonal {
                ratio.powf(pt.x / 2.0 - 1.0)
            } else {
                theorem8_ratio_exact(e, pt.x)
            };
            let est = pt.estimate;
            let pass = (est.value - exact).abs() <= z * est.stderr + 1e-12 * exact;
            rec.push(bound_row("theorem8", &s.label, pt.x, &est, exact).verdict(pass))?;
        }
        rec.push(monotone_row("theorem8-monotone", &s.label, scan.violations.len()))?;
    }
    Ok(z)
}

pub(super) fn lambda_scan(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["subspace", "p", "lambda", "prop18_p", "prop18_lambda"])?;
    let samples = cfg.samples_or(20_000)?;
    let z = cfg.z_or(3.0);
    let ps = cfg.floats("p", &[1.0, 1.5, 3.0])?;
    for &p in &ps {
        finite_exponent("p", p)?;
    }
    let lambdas = cfg.floats("lambda", &[0.1, 0.3, 1.0, 3.0, 10.0])?;
    increasing("lambda", &lambdas)?;
    let p18 = cfg.floats("prop18_p", &P_SCAN_GRID)?;
    increasing("prop18_p", &p18)?;
    let l18 = cfg.float("prop18_lambda", 1.0)?;
    positive("prop18_lambda", &[l18])?;
    let subs = parse_subspaces(
        &cfg.strings("subspace", &["diagonal:4:2", "random:6:3:2"]),
        subspace_seed(cfg),
    )?;
    let seed = root_seed(cfg);
    for (i, s) in subs.iter().enumerate() {
        let sub_seed = seed.child(i as u64);
        for (j, &p) in ps.iter().enumerate() {
            let scan = prop20_scan(&s.subspace, p, &lambdas, samples, sub_seed.child(j as u64), z)?;
            push_scan(rec, "prop20", &format!("{} p={p}", s.label), &scan)?;
        }
        let scan = prop18_scan(&s.subspace, &p18, l18, samples, sub_seed.child(1000), z)?;
        push_scan(rec, "prop18", &format!("{} lambda={l18}", s.label), &scan)?;
    }
    Ok(z)
}

pub(super) fn cube(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["subspace", "r"])?;
    let samples = cfg.samples_or(100_000)?;
    let z = cfg.z_or(3.0);
    let rs = cfg.floats("r", &[0.5, 1.0, 1.5, 2.0, 3.0])?;
    increasing("r", &rs)?;
    let subs = parse_subspaces(
        &cfg.strings("subspace", &["random:6:3:10", "axis:6:3"]),
        subspace_seed(cfg),
    )?;
    let seed = root_seed(cfg);
    for (i, s) in subs.iter().enumerate() {
        let sub_seed = seed.child(i as u64);
        let scan = theorem9_scan(&s.subspace, &rs, samples, sub_seed, z)?;
        push_scan(rec, "theorem9", &s.label, &scan)?;
        for (j, &r) in rs.iter().enumerate() {
            let c = cube_sandwich(&s.subspace, r, samples, sub_seed.child(1 + j as u64), z)?;
            rec.push(
                Row::from_estimate("cube-lower", &s.label, r, &c.section)
                    .bound(c.lower_exact)
                    .margin(c.lower.difference.value)
                    .verdict(c.lower.pass),
            )?;
            rec.push(
                Row::from_estimate("cube-upper", &s.label, r, &c.upper.lhs)
                    .bound(c.upper_exact)
                    .margin(-c.upper.difference.value)
                    .verdict(c.upper.pass),
            )?;
        }
    }
    Ok(z)
}

const BL_CHECKS: [&str; 7] = [
    "peaked",
    "lemma15",
    "lemma22",
    "lemma23",
    "laplace",
    "corollary19",
    "corollary21",
];

/// One tilted-density pair per case, with the case it should land in.
const PEAKED_PAIRS: [(PeakedCase, (f64, f64), (f64, f64)); 5] = [
    (PeakedCase::A, (2.5, 0.05), (4.0, 3.0)),
    (PeakedCase::B, (0.5, 4.0), (1.5, 0.2)),
    (PeakedCase::C, (1.0, 2.0), (2.0, 0.5)),
    (PeakedCase::D, (1.0, 0.5), (1.0, 3.0)),
    (PeakedCase::E, (3.0, 0.5), (3.0, 3.0)),
];

pub(super) fn brascamp_lieb(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&[
        "checks",
        "subspace",
        "grid_points",
        "laplace_p",
        "laplace_lambda",
        "theta",
        "corollary_p",
    ])?;
    let checks = cfg.strings("checks", &BL_CHECKS);
    check_choices("checks", &checks, &BL_CHECKS)?;
    let has = |c: &str| checks.iter().any(|x| x == c);
    let samples = cfg.samples_or(50_000)?;
    let z = cfg.z_or(3.0);
    let grid_points = cfg.usize("grid_points", 50)?;
    if grid_points < 2 {
        return Err(config_error("grid_points must be >= 2"));
    }
    let grid = geometric_grid(0.01, 4.0, grid_points);

    let mut peaked = Vec::new();
    for (case, (p1, l1), (p2, l2)) in PEAKED_PAIRS {
        let d1 = TiltedDensity::new(exponent(p1)?, l1)?;
        let d2 = TiltedDensity::new(exponent(p2)?, l2)?;
        if predicted_order(&d1, &d2).map(|x| x.0) != Some(case) {
            return Err(config_error(format!(
                "pair ({p1},{l1}) vs ({p2},{l2}) is not case {case:?}"
            )));
        }
        peaked.push((case, format!("({p1},{l1}) vs ({p2},{l2})"), d1, d2));
    }

    let laplace_p = cfg.floats("laplace_p", &[3.0, 4.0])?;
    if let Some(p) = laplace_p.iter().find(|&&p| !(p >= 2.0 && p.is_finite())) {
        return Err(config_error(format!("laplace_p: need finite p >= 2, got {p}")));
    }
    let laplace_lambda = cfg.floats("laplace_lambda", &[0.5, 1.0])?;
    positive("laplace_lambda", &laplace_lambda)?;
    let thetas = cfg.floats("theta", &[0.5, 1.0])?;
    if let Some(t) = thetas.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(config_error(format!("theta must lie in (0, 1], got {t}")));
    }
    let cor_p = cfg
        .floats("corollary_p", &[1.0, 1.5, 2.0, 3.0, 4.0])?
        .iter()
        .map(|&p| {
            if p < 1.0 {
                Err(config_error(format!("corollary_p: need p >= 1, got {p}")))
            } else {
                exponent(p)
            }
        })
        .collect::<CliResult<Vec<PExponent>>>()?;
    let subs = parse_subspaces(
        &cfg.strings("subspace", &["diagonal:4:2", "random:6:3:2"]),
        subspace_seed(cfg),
    )?;
    if let Some(s) = subs.iter().find(|s| s.subspace.k() < 2) {
        return Err(config_error(format!(
            "subspace '{}': moment comparisons need k >= 2",
            s.label
        )));
    }

    if has("peaked") {
        for (case, label, d1, d2) in &peaked {
            let r = peaked_compare(d1, d2, &grid)?;
            let pass = r.pass && r.case == Some(*case);
            rec.push(
                Row::new(
                    "peaked",
                    format!("case {case:?} {label}"),
                    grid.len() as f64,
                    r.worst_violation,
                    0.0,
                )
                .bound(ORDER_TOLERANCE)
                .margin(ORDER_TOLERANCE - r.worst_violation)
                .verdict(pass),
            )?;
        }
    }
    if has("lemma15") {
        let spec = QuadratureSpec::default();
        for &(p, q) in &[(1.0, 2.0), (1.0, 3.0), (1.5, 4.0), (2.0, 4.0), (3.0, 4.0)] {
            for &l in &[0.5, 1.0, 5.0] {
                let r = lemma15_check(p, q, l, &spec)?;
                rec.push(
                    Row::new("lemma15", format!("p={p} q={q} lambda={l}"), l, r.alpha_p, 0.0)
                        .bound(r.alpha_q)
                        .margin(r.alpha_q - r.alpha_p)
                        .verdict(r.strict),
                )?;
            }
        }
    }
    if has("lemma22") {
        for &p in &[3.0, 4.0, 6.0] {
            for &l in &[0.5, 1.0, 2.0] {
                let r = lemma22_check(p, l, 0.05, 4.0, 40)?;
                rec.push(
                    Row::new(
                        "lemma22",
                        format!("p={p} lambda={l}"),
                        p,
                        r.worst_second_difference,
                        0.0,
                    )
                    .bound(0.0)
                    .margin(-r.worst_second_difference)
                    .verdict(r.pass),
                )?;
            }
        }
    }
    if has("lemma23") {
        for &(r, s) in &[(0.5, 0.1), (1.5, 1.0), (2.0, 1.0), (5.0, 0.5)] {
            let rep = lemma23_check(r, s, &grid)?;
            rec.push(
                Row::new("lemma23", format!("r={r} s={s}"), r, rep.worst_violation, 0.0)
                    .bound(ORDER_TOLERANCE)
                    .margin(ORDER_TOLERANCE - rep.worst_violation)
                    .verdict(rep.pass),
            )?;
        }
    }

    let seed = root_seed(cfg);
    for (i, s) in subs.iter().enumerate() {
        let sub_seed = seed.child(i as u64);
        let e = &s.subspace;
        if has("laplace") {
            let mut j = 0u64;
            for &p in &laplace_p {
                for &l in &laplace_lambda {
                    for &t in &thetas {
                        let r = bl_laplace_bound(e, p, l, t, samples, sub_seed.child(j), z)?;
                        j += 1;
                        push_comparison(rec, "bl-laplace", &format!("{} p={p}", s.label), l, &r.comparison)?;
                    }
                }
            }
        }
        if has("corollary19") {
            for (j, &pe) in cor_p.iter().enumerate() {
                let beta = pe.value().min(1.0);
                let r = corollary19_suite(e, pe, 0.5, beta, samples, sub_seed.child(100 + j as u64), z)?;
                for c in &r.comparisons {
                    push_comparison(rec, "corollary19", &format!("{} p={}", s.label, pe), pe.value(), c)?;
                }
            }
        }
        if has("corollary21") {
            for (j, &pe) in cor_p.iter().filter(|p| p.value() >= 2.0).enumerate() {
                let r = corollary21_moments(e, pe, 1.0, 0.5, samples, sub_seed.child(200 + j as u64), z)?;
                for c in &r.comparisons {
                    push_comparison(rec, "corollary21", &format!("{} p={}", s.label, pe), pe.value(), c)?;
                }
            }
        }
    }
    Ok(z)
}
