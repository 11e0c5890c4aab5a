use lpball::slabs::{random_slab_grid, subindependence_verdict, Orientation, FAMILY_LEVEL};
use lpball::stats::bonferroni_z;
use lpball::{BallMeasure, MeasureKind};

use super::{check_choices, config_error, finite_exponent, root_seed};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::report::{Recorder, Row};

pub(super) fn slabs(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    cfg.check_keys(&["kind", "n", "p", "orientation", "points", "max_active"])?;
    let samples = cfg.samples_or(20_000)?;
    let kinds = cfg
        .strings("kind", &["cone", "volume", "gamma-mixed:2", "projected-cone:2"])
        .iter()
        .map(|s| s.parse::<MeasureKind>())
        .collect::<lpball::Result<Vec<_>>>()?;
    let ns = cfg.usizes("n", &[3, 5])?;
    let ps = cfg.floats("p", &[1.0, 2.0, 3.0])?;
    let orients = cfg.strings("orientation", &["outer", "inner"]);
    check_choices("orientation", &orients, &["outer", "inner"])?;
    let points = cfg.usize("points", 5)?;
    let max_active = cfg.usize("max_active", 3)?;
    if points == 0 || max_active == 0 {
        return Err(config_error("points and max_active must be >= 1"));
    }
    let mut cells = Vec::new();
    for &kind in &kinds {
        for &n in &ns {
            for &p in &ps {
                let m = BallMeasure::new(n, finite_exponent("p", p)?, kind)?;
                for o in &orients {
                    let o = if o == "outer" {
                        Orientation::Outer
                    } else {
                        Orientation::Inner
                    };
                    cells.push((m, o));
                }
            }
        }
    }
    let total = cells.len() * points;
    let z = cfg.z.unwrap_or_else(|| bonferroni_z(total, FAMILY_LEVEL));

    let seed = root_seed(cfg);
    let mut violations = 0usize;
    let mut index = 0usize;
    for (i, (m, o)) in cells.iter().enumerate() {
        let cell_seed = seed.child(i as u64);
        let grid = random_slab_grid(m, *o, points, max_active, cell_seed.child(0))?;
        let v = subindependence_verdict(m, &grid, Some(z), samples, cell_seed.child(1))?;
        let tag = format!("{} n={} p={} {:?}", m.kind(), m.n(), m.p(), o).to_lowercase();
        for (j, pt) in v.points.iter().enumerate() {
            violations += usize::from(!pt.pass);
            rec.push(
                Row::new("slab", format!("{tag} #{j}"), index as f64, pt.joint, pt.stderr)
                    .bound(pt.product)
                    .margin(pt.margin)
                    .verdict(pt.pass),
            )?;
            index += 1;
        }
    }
    rec.push(
        Row::new(
            "slab-violations",
            format!("{total} grid points"),
            total as f64,
            violations as f64,
            0.0,
        )
        .bound(0.0)
        .margin(0.0 - violations as f64)
        .verdict(violations == 0),
    )?;
    rec.note(format!(
        "Bonferroni z = {z:.4} over {total} grid points at family level {FAMILY_LEVEL}"
    ));
    Ok(z)
}
