//! Flat key-value experiment configuration.
//!
//! ```text
//! # comment
//! suite = cube
//! samples = 100000
//! seed = 7
//! r = 0.5, 1, 1.5, 2, 3
//! ```
//!
//! One `key = value` pair per line; a value may be a comma-separated list.
//! `suite`, `samples`, `seed`, `z` and `output` are reserved, every other key
//! is a grid parameter interpreted by the suite. Later lines override
//! earlier ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Smallest sample count a suite accepts.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    SamplingOracles,
    Moments,
    Khinchine,
    Psi2,
    Slabs,
    SectionsPScan,
    SectionsLambdaScan,
    Cube,
    BrascampLieb,
    Balance,
    Cover,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::SamplingOracles,
        Suite::Moments,
        Suite::Khinchine,
        Suite::Psi2,
        Suite::Slabs,
        Suite::SectionsPScan,
        Suite::SectionsLambdaScan,
        Suite::Cube,
        Suite::BrascampLieb,
        Suite::Balance,
        Suite::Cover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SamplingOracles => "sampling-oracles",
            Suite::Moments => "moments",
            Suite::Khinchine => "khinchine",
            Suite::Psi2 => "psi2",
            Suite::Slabs => "slabs",
            Suite::SectionsPScan => "sections-p-scan",
            Suite::SectionsLambdaScan => "sections-lambda-scan",
            Suite::Cube => "cube",
            Suite::BrascampLieb => "brascamp-lieb",
            Suite::Balance => "balance",
            Suite::Cover => "cover",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// `None` selects the suite's default.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Confidence multiplier; `None` selects the suite's default.
    pub z: Option<f64>,
    pub output: Option<PathBuf>,
    pub grid: BTreeMap<String, Vec<String>>,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            samples: None,
            seed: 1,
            z: None,
            output: None,
            grid: BTreeMap::new(),
        }
    }

    /// Sets a grid parameter from a comma-separated list.
    pub fn with(mut self, key: &str, values: &str) -> Self {
        self.grid.insert(key.to_string(), split_list(values));
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut suite = None;
        let mut samples = None;
        let mut seed = 1;
        let mut z = None;
        let mut output = None;
        let mut grid = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| CliError::Config(format!("line {}: {msg}: '{}'", i + 1, raw.trim()));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(bad("empty key or value"));
            }
            match key {
                "suite" => suite = Some(value.parse::<Suite>()?),
                "samples" => samples = Some(parse_usize(value).ok_or_else(|| bad("invalid sample count"))?),
                "seed" => seed = value.parse().map_err(|_| bad("invalid seed"))?,
                "z" => z = Some(value.parse::<f64>().map_err(|_| bad("invalid z"))?),
                "output" => output = Some(PathBuf::from(value)),
                _ => {
                    grid.insert(key.to_string(), split_list(value));
                }
            }
        }
        let suite = suite.ok_or_else(|| CliError::Config("missing 'suite'".into()))?;
        if let Some(z) = z {
            if !(z > 0.0 && z.is_finite()) {
                return Err(CliError::Config(format!("z must be positive, got {z}")));
            }
        }
        Ok(Self {
            suite,
            samples,
            seed,
            z,
            output,
            grid,
        })
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let mut s = format!("suite = {}\n", self.suite);
        if let Some(n) = self.samples {
            s += &format!("samples = {n}\n");
        }
        s += &format!("seed = {}\n", self.seed);
        if let Some(z) = self.z {
            s += &format!("z = {z:?}\n");
        }
        if let Some(o) = &self.output {
            s += &format!("output = {}\n", o.display());
        }
        for (k, v) in &self.grid {
            s += &format!("{k} = {}\n", v.join(", "));
        }
        s
    }

    /// Everything that determines the results, as strings.
    pub fn echo(&self) -> BTreeMap<String, Vec<String>> {
        let mut m = self.grid.clone();
        m.insert("suite".into(), vec![self.suite.to_string()]);
        m.insert("seed".into(), vec![self.seed.to_string()]);
        if let Some(n) = self.samples {
            m.insert("samples".into(), vec![n.to_string()]);
        }
        if let Some(z) = self.z {
            m.insert("z".into(), vec![format!("{z:?}")]);
        }
        m
    }

    /// Sample count, checked against [`MIN_SAMPLES`].
    pub fn samples_or(&self, default: usize) -> CliResult<usize> {
        let n = self.samples.unwrap_or(default);
        if n < MIN_SAMPLES {
            return Err(CliError::Config(format!("samples must be >= {MIN_SAMPLES}, got {n}")));
        }
        Ok(n)
    }

    pub fn z_or(&self, default: f64) -> f64 {
        self.z.unwrap_or(default)
    }

    /// Fails on grid keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        let unknown: Vec<&str> = self
            .grid
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "suite {} does not take {}; known keys: {}",
                self.suite,
                unknown.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn strings(&self, key: &str, default: &[&str]) -> Vec<String> {
        self.grid
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect())
    }

    /// Reals; `inf` is accepted.
    pub fn floats(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.grid.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| !x.is_nan())
                        .ok_or_else(|| CliError::Config(format!("{key}: '{s}' is not a number")))
                })
                .collect(),
        }
    }

    pub fn float(&self, key: &str, default: f64) -> CliResult<f64> {
        single(key, self.floats(key, &[default])?)
    }

    pub fn usizes(&self, key: &str, default: &[usize]) -> CliResult<Vec<usize>> {
        match self.grid.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .iter()
                .map(|s| parse_usize(s).ok_or_else(|| CliError::Config(format!("{key}: '{s}' is not a count"))))
                .collect(),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        single(key, self.usizes(key, &[default])?)
    }
}

fn single<T: Copy>(key: &str, v: Vec<T>) -> CliResult<T> {
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(CliError::Config(format!("{key} takes a single value"))),
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Accepts `100000`, `100_000` and `1e5`.
fn parse_usize(s: &str) -> Option<usize> {
    let t = s.trim().replace('_', "");
    if let Ok(n) = t.parse::<usize>() {
        return Some(n);
    }
    let x: f64 = t.parse().ok()?;
    (x >= 0.0 && x.fract() == 0.0 && x < 1e15).then_some(x as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_reserved_and_grid_keys() {
        let c = ExperimentConfig::parse(
            "# cube run\nsuite = cube\nsamples = 1e5\nseed = 9\nz = 2.5\nr = 0.5, 1 ,2\nsubspace = axis # inline\n",
        )
        .unwrap();
        assert_eq!(c.suite, Suite::Cube);
        assert_eq!(c.samples, Some(100_000));
        assert_eq!(c.seed, 9);
        assert_eq!(c.z, Some(2.5));
        assert_eq!(c.floats("r", &[]).unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(c.strings("subspace", &[]), vec!["axis"]);
        assert_eq!(c.floats("missing", &[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn text_round_trip() {
        let c = ExperimentConfig::new(Suite::Cover)
            .with("p", "2, inf")
            .with_samples(5000)
            .with_seed(3);
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.floats("p", &[]).unwrap(), vec![2.0, f64::INFINITY]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ExperimentConfig::parse("samples = 10\n").is_err());
        assert!(ExperimentConfig::parse("suite = nope\n").is_err());
        assert!(ExperimentConfig::parse("suite = cube\nr\n").is_err());
        assert!(ExperimentConfig::parse("suite = cube\nz = -1\n").is_err());
        assert!(ExperimentConfig::parse("suite = cube\nseed = x\n").is_err());
        let c = ExperimentConfig::parse("suite = cube\nsamples = 10\nr = a\n").unwrap();
        assert!(c.samples_or(1000).is_err());
        assert!(c.floats("r", &[]).is_err());
        assert!(c.check_keys(&["n"]).is_err());
        assert!(c.check_keys(&["r"]).is_ok());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }
}
