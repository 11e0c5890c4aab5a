use lpball::apps::PointSet;
use lpball::moments::{
    full_moment_formula, functional_moments_mc, khinchine_constants, khinchine_extremal_search,
    psi2_direction_constant, psi_alpha_direction_mc, Direction, PSI_Q_GRID,
};
use lpball::stats::stability_ratio;
use lpball::BallMeasure;

use super::{config_error, finite_exponent, positive, root_seed};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::report::{Recorder, Row};

pub(super) fn khinchine(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["n", "p", "q", "directions", "stability_limit"])?;
    let samples = cfg.samples_or(100_000)?;
    let ns = cfg.usizes("n", &[10, 40])?;
    let ps = cfg.floats("p", &[1.0, 1.5, 2.0, 4.0])?;
    let qs = cfg.floats("q", &[1.0, 2.0, 4.0, 8.0])?;
    let count = cfg.usize("directions", 50)?;
    let limit = cfg.float("stability_limit", 2.0)?;
    positive("stability_limit", &[limit])?;
    if count == 0 {
        return Err(config_error("directions must be >= 1"));
    }
    if let Some(q) = qs.iter().find(|&&q| !(q >= 1.0 && q.is_finite())) {
        return Err(config_error(format!("q: need finite q >= 1, got {q}")));
    }
    if let Some(p) = ps.iter().find(|&&p| p < 1.0) {
        return Err(config_error(format!("p: need p >= 1, got {p}")));
    }
    let seed = root_seed(cfg);
    let mut cells = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let pts = PointSet::random_unit(count, n, &mut seed.child(1000 + i as u64).rng())?;
        let dirs = pts
            .points()
            .map(|x| Direction::new(x.to_vec()))
            .collect::<lpball::Result<Vec<_>>>()?;
        for &p in &ps {
            let pe = finite_exponent("p", p)?;
            let measure = BallMeasure::volume(n, pe)?;
            let formula = dirs
                .iter()
                .map(|d| qs.iter().map(|&q| full_moment_formula(d, pe, q)).collect())
                .collect::<lpball::Result<Vec<Vec<f64>>>>()?;
            for &q in &qs {
                khinchine_constants(p, q, n)?;
            }
            cells.push((n, p, dirs.clone(), measure, formula));
        }
    }

    let mut ratios = Vec::new();
    for (i, (n, p, dirs, measure, formula)) in cells.iter().enumerate() {
        let est = functional_moments_mc(dirs, measure, &qs, samples, seed.child(i as u64))?;
        for (j, (row, f)) in est.iter().zip(formula).enumerate() {
            for ((e, &fv), &q) in row.iter().zip(f).zip(&qs) {
                let r = e.value / fv;
                ratios.push(r);
                rec.push(Row::new(
                    "khinchine-ratio",
                    format!("n={n} p={p} q={q} dir={j}"),
                    q,
                    r,
                    e.stderr / fv,
                ))?;
            }
        }
        for &q in &qs {
            let (a, b) = khinchine_constants(*p, q, *n)?;
            let (lo, hi) = khinchine_extremal_search(*p, q, *n)?;
            rec.push(Row::new("khinchine-lower", format!("n={n} p={p} q={q}"), q, lo, 0.0).bound(a))?;
            rec.push(Row::new("khinchine-upper", format!("n={n} p={p} q={q}"), q, hi, 0.0).bound(b))?;
        }
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let band = max.max(1.0 / min);
    rec.push(Row::new("khinchine-band", "C = max(max r, 1/min r)", 0.0, band, 0.0))?;
    let stab = stability_ratio(&ratios);
    rec.push(
        Row::new("khinchine-stability", "max/median of ratios", 0.0, stab, 0.0)
            .bound(limit)
            .margin(limit - stab)
            .verdict(stab <= limit),
    )?;
    rec.note(format!("ratio band [{min:.4}, {max:.4}], C = {band:.4}"));
    Ok(cfg.z_or(3.0))
}

pub(super) fn psi2(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["n", "p", "q", "alpha", "ratio_limit"])?;
    let samples = cfg.samples_or(1_000_000)?;
    let ns = cfg.usizes("n", &[16, 64])?;
    let ps = cfg.floats("p", &[1.0])?;
    let qs = cfg.floats("q", &PSI_Q_GRID)?;
    positive("q", &qs)?;
    let alpha = cfg.float("alpha", 2.0)?;
    if !(1.0..=2.0).contains(&alpha) {
        return Err(config_error(format!("alpha must lie in [1, 2], got {alpha}")));
    }
    let limit = cfg.float("ratio_limit", 2.0)?;
    if !(limit >= 1.0) {
        return Err(config_error(format!("ratio_limit must be >= 1, got {limit}")));
    }
    let mut cells = Vec::new();
    for &p in &ps {
        let pe = finite_exponent("p", p)?;
        for &n in &ns {
            let theta = Direction::diagonal(n)?;
            let constant = if (1.0..=2.0).contains(&p) {
                Some(psi2_direction_constant(&theta, p)?)
            } else {
                None
            };
            cells.push((p, n, theta, BallMeasure::volume(n, pe)?, constant));
        }
    }

    let seed = root_seed(cfg);
    let mut by_p: Vec<(f64, Vec<f64>)> = Vec::new();
    for (i, (p, n, theta, measure, constant)) in cells.iter().enumerate() {
        let e = psi_alpha_direction_mc(theta, measure, alpha, &qs, samples, seed.child(i as u64))?;
        let mut row = Row::from_estimate("psi2", format!("p={p} n={n}"), *n as f64, &e);
        if let Some(c) = constant {
            row = row.bound(*c);
        }
        rec.push(row)?;
        match by_p.iter_mut().find(|(q, _)| q == p) {
            Some((_, v)) => v.push(e.value),
            None => by_p.push((*p, vec![e.value])),
        }
    }
    for (p, v) in by_p {
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let r = max / min;
        rec.push(
            Row::new("psi2-n-ratio", format!("p={p} max/min over n"), p, r, 0.0)
                .bound(limit)
                .margin(limit - r)
                .verdict(r <= limit),
        )?;
    }
    Ok(cfg.z_or(3.0))
}
