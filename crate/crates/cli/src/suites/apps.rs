use lpball::apps::{
    balance_exhaustive, balance_greedy, covering_count, komlos_bound_check, lp_balance_bound_check, prop26_bound_check,
    sudakov_rhs, PointSet, MAX_EXHAUSTIVE,
};
use lpball::stats::stability_ratio;
use lpball::PExponent;

use super::{config_error, exponent, positive, root_seed};
use crate::config::{ExperimentConfig, MIN_SAMPLES};
use crate::error::CliResult;
use crate::report::{Recorder, Row};

fn stability_row(quantity: &str, label: &str, values: &[f64], limit: f64) -> Row {
    let s = stability_ratio(values);
    Row::new(quantity, label, values.len() as f64, s, 0.0)
        .bound(limit)
        .margin(limit - s)
        .verdict(s <= limit)
}

pub(super) fn balance(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["m", "d", "instances", "p", "stability_limit"])?;
    let ms = cfg.usizes("m", &[8, 12, 16])?;
    let ds = cfg.usizes("d", &[4, 8])?;
    let instances = cfg.usize("instances", 20)?;
    let lp = cfg
        .floats("p", &[])?
        .iter()
        .map(|&p| {
            if p < 2.0 {
                Err(config_error(format!("p: need p >= 2, got {p}")))
            } else {
                exponent(p)
            }
        })
        .collect::<CliResult<Vec<PExponent>>>()?;
    let limit = cfg.float("stability_limit", 2.0)?;
    positive("stability_limit", &[limit])?;
    if instances == 0 {
        return Err(config_error("instances must be >= 1"));
    }
    if let Some(m) = ms.iter().find(|&&m| m == 0 || m > MAX_EXHAUSTIVE) {
        return Err(config_error(format!("m: need 1 <= m <= {MAX_EXHAUSTIVE}, got {m}")));
    }
    if ds.contains(&0) {
        return Err(config_error("d must be >= 1"));
    }
    let shapes: Vec<(usize, usize)> = ms.iter().flat_map(|&m| ds.iter().map(move |&d| (m, d))).collect();

    let seed = root_seed(cfg);
    let inf = PExponent::infinity();
    let mut constants = Vec::with_capacity(instances);
    for (i, &(m, d)) in shapes.iter().cycle().take(instances).enumerate() {
        let pts = PointSet::random_unit(m, d, &mut seed.child(i as u64).rng())?;
        let best = balance_exhaustive(&pts, inf)?;
        let greedy = balance_greedy(&pts, inf);
        let k = komlos_bound_check(&pts, &best);
        let label = format!("#{i} m={m} d={d}");
        constants.push(k.constant);
        rec.push(Row::new("balance-value", &label, i as f64, best.value, 0.0).bound(k.normalizer))?;
        rec.push(Row::new("balance-komlos", &label, i as f64, k.constant, 0.0))?;
        let gap = greedy.value - best.value;
        rec.push(
            Row::new("balance-greedy-gap", &label, i as f64, gap, 0.0)
                .bound(0.0)
                .margin(gap)
                .verdict(gap >= -1e-12),
        )?;
        for &p in &lp {
            let r = balance_exhaustive(&pts, p)?;
            let b = lp_balance_bound_check(&pts, p, &r)?;
            rec.push(Row::new(
                "balance-lp",
                format!("{label} p={p}"),
                p.value(),
                b.constant,
                0.0,
            ))?;
        }
    }
    rec.push(stability_row(
        "balance-stability",
        "max/median of komlos constants",
        &constants,
        limit,
    ))?;
    let max = constants.iter().cloned().fold(0.0, f64::max);
    rec.note(format!("empirical constant C_emp = {max:.4}"));
    Ok(cfg.z_or(3.0))
}

pub(super) fn cover(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["m", "d", "epsilon", "p", "stability_limit", "sudakov_samples"])?;
    let ms = cfg.usizes("m", &[4, 8])?;
    let ds = cfg.usizes("d", &[4])?;
    let eps = cfg.floats("epsilon", &[0.25, 0.5, 1.0])?;
    positive("epsilon", &eps)?;
    let ps = cfg
        .floats("p", &[2.0, 4.0, f64::INFINITY])?
        .iter()
        .map(|&p| exponent(p))
        .collect::<CliResult<Vec<PExponent>>>()?;
    let limit = cfg.float("stability_limit", 3.0)?;
    positive("stability_limit", &[limit])?;
    let sudakov = cfg.usize("sudakov_samples", 20_000)?;
    if sudakov < MIN_SAMPLES {
        return Err(config_error(format!("sudakov_samples must be >= {MIN_SAMPLES}")));
    }
    if ms.contains(&0) || ds.contains(&0) {
        return Err(config_error("m and d must be >= 1"));
    }
    for &m in &ms {
        for &p in &ps {
            for &e in &eps {
                prop26_bound_check(m, e, p, 1)?;
            }
        }
    }

    let seed = root_seed(cfg);
    let mut constants = Vec::new();
    let mut idx = 0u64;
    for &m in &ms {
        for &d in &ds {
            let pts = PointSet::random_unit(m, d, &mut seed.child(idx).rng())?;
            let s = sudakov_rhs(&pts, sudakov, seed.child(1000 + idx))?;
            idx += 1;
            let label = format!("m={m} d={d}");
            for &p in &ps {
                for &e in &eps {
                    let c = covering_count(&pts, e, p)?;
                    let r = prop26_bound_check(m, e, p, c.n)?;
                    let cl = format!("{label} p={p} eps={e}");
                    constants.push(r.constant);
                    rec.push(Row::new("cover-count", &cl, e, c.n as f64, 0.0))?;
                    rec.push(Row::new("cover-constant", &cl, e, r.constant, 0.0))?;
                    if !r.note.is_empty() {
                        rec.note(format!("{cl}: {}", r.note));
                    }
                }
            }
            rec.push(Row::from_estimate("sudakov-sup", &label, m as f64, &s.sup))?;
            rec.push(Row::new("sudakov-constant", &label, m as f64, s.constant, 0.0))?;
        }
    }
    rec.push(stability_row(
        "cover-stability",
        "max/median of covering constants",
        &constants,
        limit,
    ))?;
    Ok(cfg.z_or(3.0))
}
