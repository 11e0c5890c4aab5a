use lpball::sampling::sample_gaussian_and_cone;
use lpball::specfun::{log_gamma, lp_norm};
use lpball::stats::{ks_critical_value, ks_test, ks_two_sample, CoVar, MeanVar};
use lpball::{BallMeasure, PExponent};

use super::{check_choices, config_error, finite_exponent, positive, root_seed};
use crate::config::{ExperimentConfig, MIN_SAMPLES};
use crate::error::CliResult;
use crate::report::{Recorder, Row};

const CHECKS: [&str; 3] = ["radial", "mixture", "independence"];

const DEFAULT_TRIPLES: [&str; 9] = [
    "2:1:1", "2:2:2", "3:1.5:1", "3:3:2", "4:1:3", "4:2:1", "5:1.5:4", "5:3:3", "6:2:2",
];

pub(super) fn sampling_oracles(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&[
        "checks",
        "n",
        "p",
        "triples",
        "level",
        "independence_n",
        "independence_p",
        "independence_samples",
    ])?;
    let checks = cfg.strings("checks", &CHECKS);
    check_choices("checks", &checks, &CHECKS)?;
    let samples = cfg.samples_or(100_000)?;
    let level = cfg.float("level", 1e-3)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(config_error(format!("level must lie in (0, 1), got {level}")));
    }

    let ns = cfg.usizes("n", &[2, 5, 10])?;
    let ps = cfg.floats("p", &[1.0, 1.5, 2.0, 3.0])?;
    let mut radial = Vec::new();
    for &n in &ns {
        for &p in &ps {
            radial.push(BallMeasure::volume(n, finite_exponent("p", p)?)?);
        }
    }

    let mut mixture = Vec::new();
    for t in cfg.strings("triples", &DEFAULT_TRIPLES) {
        let bad = || config_error(format!("triples: '{t}' is not n:p:m"));
        let parts: Vec<&str> = t.split(':').map(str::trim).collect();
        let [n, p, m] = parts.as_slice() else { return Err(bad()) };
        let n: usize = n.parse().map_err(|_| bad())?;
        let p: f64 = p.parse().map_err(|_| bad())?;
        let m: usize = m.parse().map_err(|_| bad())?;
        let pe = finite_exponent("triples", p)?;
        let projected = BallMeasure::projected_cone(n, pe, m)?;
        let mixed = BallMeasure::gamma_mixed(n, pe, m as f64 / p)?;
        mixture.push((format!("n={n} p={p} m={m}"), projected, mixed));
    }

    let ind_n = cfg.usize("independence_n", 5)?;
    if ind_n < 2 {
        return Err(config_error("independence_n must be >= 2"));
    }
    let ind_ps = cfg.floats("independence_p", &[0.5, 1.0, 2.0, 4.0])?;
    let ind_pe = ind_ps
        .iter()
        .map(|&p| finite_exponent("independence_p", p))
        .collect::<CliResult<Vec<PExponent>>>()?;
    let ind_samples = cfg.usize("independence_samples", 1_000_000)?;
    if ind_samples < MIN_SAMPLES {
        return Err(config_error(format!("independence_samples must be >= {MIN_SAMPLES}")));
    }

    let seed = root_seed(cfg);
    if checks.iter().any(|c| c == "radial") {
        let crit = ks_critical_value(samples, level);
        for (i, m) in radial.iter().enumerate() {
            let pe = PExponent::new(m.p())?;
            let nf = m.n() as f64;
            let mut rng = seed.child(i as u64).rng();
            let radii: Vec<f64> = (0..samples).map(|_| lp_norm(&m.sample(&mut rng), pe)).collect();
            let ks = ks_test(&radii, |r| r.clamp(0.0, 1.0).powf(nf));
            rec.push(
                Row::new(
                    "radial-ks",
                    format!("n={} p={}", m.n(), m.p()),
                    m.p(),
                    ks.statistic,
                    0.0,
                )
                .bound(crit)
                .margin(crit - ks.statistic)
                .verdict(ks.statistic <= crit),
            )?;
        }
    }

    if checks.iter().any(|c| c == "mixture") {
        for (i, (label, projected, mixed)) in mixture.iter().enumerate() {
            let pe = PExponent::new(projected.p())?;
            let n = projected.n();
            let a = projected.sample_matrix(samples, &mut seed.child(100 + i as u64).rng());
            let b = mixed.sample_matrix(samples, &mut seed.child(200 + i as u64).rng());
            let radius = |m: &[f64]| m.chunks(n).map(|x| lp_norm(x, pe)).collect::<Vec<f64>>();
            let first = |m: &[f64]| m.chunks(n).map(|x| x[0]).collect::<Vec<f64>>();
            for (what, ks) in [
                ("radius", ks_two_sample(&radius(&a), &radius(&b))),
                ("first", ks_two_sample(&first(&a), &first(&b))),
            ] {
                rec.push(
                    Row::new(
                        "mixture-ks-pvalue",
                        format!("{label} {what}"),
                        i as f64,
                        ks.p_value,
                        0.0,
                    )
                    .bound(level)
                    .margin(ks.p_value - level)
                    .verdict(ks.passes(level)),
                )?;
            }
        }
    }

    if checks.iter().any(|c| c == "independence") {
        let bound = 3.0 / (ind_samples as f64).sqrt();
        for (i, &pe) in ind_pe.iter().enumerate() {
            let p = pe.value();
            let mut rng = seed.child(300 + i as u64).rng();
            let mut y = vec![0.0; ind_n];
            let mut cv = [CoVar::new(), CoVar::new(), CoVar::new()];
            for _ in 0..ind_samples {
                let g = sample_gaussian_and_cone(pe, &mut rng, &mut y)?;
                let mx = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                cv[0].push(g, y[0].abs().powf(p));
                cv[1].push(g, mx);
                cv[2].push(g, (y[0] * y[1]).abs());
            }
            for (c, what) in cv.iter().zip(["|y1|^p", "max|yi|", "|y1 y2|"]) {
                let r = c.correlation();
                rec.push(
                    Row::new("independence-corr", format!("p={p} {what}"), p, r, 0.0)
                        .bound(bound)
                        .margin(bound - r.abs())
                        .verdict(r.abs() <= bound),
                )?;
            }
        }
    }
    Ok(3.0)
}

/// `E|x_1|^q` under the volume measure, from the Gamma-function closed form.
fn marginal_moment_closed_form(n: usize, p: f64, q: f64) -> CliResult<f64> {
    let n = n as f64;
    let lg = |x: f64| log_gamma(x);
    Ok(
        (lg(n / p + 1.0)? + lg((q + 1.0) / p + 1.0)? - (q + 1.0).ln() - lg(1.0 / p + 1.0)? - lg((n + q) / p + 1.0)?)
            .exp(),
    )
}

pub(super) fn moments(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["n", "p", "q", "max_relative_stderr"])?;
    let samples = cfg.samples_or(1_000_000)?;
    let z = cfg.z_or(3.0);
    let ns = cfg.usizes("n", &[2, 5, 10])?;
    let ps = cfg.floats("p", &[1.0, 1.5, 2.0, 3.0])?;
    let qs = cfg.floats("q", &[1.0, 2.0, 4.0])?;
    positive("q", &qs)?;
    let max_rel = cfg.float("max_relative_stderr", 0.01)?;
    positive("max_relative_stderr", &[max_rel])?;
    let mut pools = Vec::new();
    for &n in &ns {
        for &p in &ps {
            let m = BallMeasure::volume(n, finite_exponent("p", p)?)?;
            let exact = qs
                .iter()
                .map(|&q| marginal_moment_closed_form(n, p, q))
                .collect::<CliResult<Vec<f64>>>()?;
            pools.push((m, exact));
        }
    }

    let seed = root_seed(cfg);
    for (i, (m, exact)) in pools.iter().enumerate() {
        let (n, p) = (m.n(), m.p());
        let mut acc = vec![MeanVar::new(); qs.len()];
        let mut rng = seed.child(i as u64).rng();
        let mut x = vec![0.0; n];
        for _ in 0..samples {
            m.sample_into(&mut rng, &mut x);
            let a = x[0].abs();
            for (mv, &q) in acc.iter_mut().zip(&qs) {
                mv.push(if q.fract() == 0.0 { a.powi(q as i32) } else { a.powf(q) });
            }
        }
        for ((mv, &q), &ex) in acc.iter().zip(&qs).zip(exact) {
            let e = mv.estimate(seed.child(i as u64));
            let pass = (e.value - ex).abs() <= z * e.stderr + 1e-12 * ex && e.relative_stderr() <= max_rel;
            rec.push(
                Row::from_estimate("marginal-moment", format!("n={n} p={p} q={q}"), q, &e)
                    .bound(ex)
                    .margin(e.value - ex)
                    .verdict(pass),
            )?;
            let lib = lpball::moments::marginal_abs_moment_exact(n, p, q)?;
            let rel = (lib - ex).abs() / ex;
            rec.push(
                Row::new("closed-form-agreement", format!("n={n} p={p} q={q}"), q, lib, 0.0)
                    .bound(ex)
                    .margin(lib - ex)
                    .verdict(rel <= 1e-10),
            )?;
        }
    }
    Ok(z)
}
