//! The verification suites. Each one validates its whole grid before it
//! draws a single sample, then streams rows into a [`Recorder`].

use lpball::sections::Subspace;
use lpball::{Estimate, PExponent, RngState};

use crate::config::{ExperimentConfig, Suite};
use crate::error::{CliError, CliResult};
use crate::report::{Recorder, Row};

mod apps;
mod functionals;
mod sampling;
mod sections;
mod slabs;

/// Runs the suite named in `cfg` and returns the confidence multiplier it used.
pub fn execute(cfg: &ExperimentConfig, rec: &mut Recorder) -> CliResult<f64> {
    match cfg.suite {
        Suite::SamplingOracles => sampling::sampling_oracles(cfg, rec),
        Suite::Moments => sampling::moments(cfg, rec),
        Suite::Khinchine => functionals::khinchine(cfg, rec),
        Suite::Psi2 => functionals::psi2(cfg, rec),
        Suite::Slabs => slabs::slabs(cfg, rec),
        Suite::SectionsPScan => sections::p_scan(cfg, rec),
        Suite::SectionsLambdaScan => sections::lambda_scan(cfg, rec),
        Suite::Cube => sections::cube(cfg, rec),
        Suite::BrascampLieb => sections::brascamp_lieb(cfg, rec),
        Suite::Balance => apps::balance(cfg, rec),
        Suite::Cover => apps::cover(cfg, rec),
    }
}

/// Root stream of a suite; distinct suites never share a stream.
pub(crate) fn root_seed(cfg: &ExperimentConfig) -> RngState {
    let idx = Suite::ALL.iter().position(|&s| s == cfg.suite).unwrap_or(0);
    RngState::new(cfg.seed, idx as u64)
}

pub(crate) fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn exponent(p: f64) -> CliResult<PExponent> {
    Ok(PExponent::new(p)?)
}

pub(crate) fn finite_exponent(key: &str, p: f64) -> CliResult<PExponent> {
    if !p.is_finite() {
        return Err(config_error(format!("{key}: p must be finite, got {p}")));
    }
    exponent(p)
}

/// Every entry of `values` must appear in `known`.
pub(crate) fn check_choices(key: &str, values: &[String], known: &[&str]) -> CliResult<()> {
    for v in values {
        if !known.contains(&v.as_str()) {
            return Err(config_error(format!(
                "{key}: unknown value '{v}', expected one of {}",
                known.join(", ")
            )));
        }
    }
    Ok(())
}

pub(crate) fn positive(key: &str, values: &[f64]) -> CliResult<()> {
    match values.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        Some(v) => Err(config_error(format!(
            "{key}: values must be positive and finite, got {v}"
        ))),
        None => Ok(()),
    }
}

/// A named subspace from a spec entry.
pub(crate) struct NamedSubspace {
    pub label: String,
    pub subspace: Subspace,
    pub diagonal: bool,
}

/// `axis:n:k`, `diagonal:n:k` or `random:n:k[:count]`. Random subspaces are
/// drawn from a stream reserved for subspaces, one child per instance.
pub(crate) fn parse_subspaces(specs: &[String], seed: RngState) -> CliResult<Vec<NamedSubspace>> {
    let mut out = Vec::new();
    let mut drawn = 0u64;
    for s in specs {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || config_error(format!("subspace: invalid spec '{s}', expected kind:n:k[:count]"));
        if parts.len() < 3 {
            return Err(bad());
        }
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        let k: usize = parts[2].parse().map_err(|_| bad())?;
        if k == 0 || k > n {
            return Err(config_error(format!("subspace '{s}': need 1 <= k <= n")));
        }
        match (parts[0], parts.len()) {
            ("axis", 3) => out.push(NamedSubspace {
                label: format!("axis n={n} k={k}"),
                subspace: Subspace::axis(n, k)?,
                diagonal: false,
            }),
            ("diagonal", 3) => out.push(NamedSubspace {
                label: format!("diagonal n={n} k={k}"),
                subspace: Subspace::diagonal(n, k)?,
                diagonal: true,
            }),
            ("random", 3 | 4) => {
                let count: usize = match parts.get(3) {
                    Some(c) => c.parse().map_err(|_| bad())?,
                    None => 1,
                };
                for j in 0..count {
                    let mut rng = seed.child(drawn).rng();
                    drawn += 1;
                    out.push(NamedSubspace {
                        label: format!("random n={n} k={k} #{j}"),
                        subspace: Subspace::random(n, k, &mut rng)?,
                        diagonal: false,
                    });
                }
            }
            _ => return Err(bad()),
        }
    }
    if out.is_empty() {
        return Err(config_error("subspace: no subspaces given"));
    }
    Ok(out)
}

/// Subspace stream, kept apart from the sampling streams.
pub(crate) fn subspace_seed(cfg: &ExperimentConfig) -> RngState {
    root_seed(cfg).child(u64::MAX - 1)
}

/// Row of a paired or scalar estimate compared with `bound`.
pub(crate) fn bound_row(quantity: &str, label: impl Into<String>, x: f64, e: &Estimate, bound: f64) -> Row {
    Row::from_estimate(quantity, label, x, e)
        .bound(bound)
        .margin(e.value - bound)
}

/// Number of CI-certified monotonicity violations, as a row.
pub(crate) fn monotone_row(quantity: &str, label: impl Into<String>, violations: usize) -> Row {
    Row::new(quantity, label, 0.0, violations as f64, 0.0)
        .bound(0.0)
        .margin(0.0 - violations as f64)
        .verdict(violations == 0)
}
