//! Flat key-value experiment configuration with dotted section keys.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; list
//! values are comma-separated. Unknown keys are rejected.

use std::collections::BTreeMap;

use pnr_core::pulses::{PairSign, PulseFamily, PulseSpec};
use pnr_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Linear,
    Outcomes,
    Correlate,
    Trajectory,
    Response,
    Compare,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "linear" => Self::Linear,
            "outcomes" => Self::Outcomes,
            "correlate" => Self::Correlate,
            "trajectory" => Self::Trajectory,
            "response" => Self::Response,
            "compare" => Self::Compare,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Outcomes => "outcomes",
            Self::Correlate => "correlate",
            Self::Trajectory => "trajectory",
            Self::Response => "response",
            Self::Compare => "compare",
        }
    }

    pub fn uses_trajectories(&self) -> bool {
        matches!(self, Self::Trajectory | Self::Response | Self::Compare)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    Absolute(f64),
    PerDelta(f64),
}

/// A fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub family: String,
    pub n_photons: usize,
    pub detuning: f64,
    pub separation: Option<Separation>,
    pub sign: PairSign,
    pub n_emitters: usize,
    pub delta_gamma: Vec<f64>,
    pub trajectories: usize,
    pub seed: Option<u64>,
    pub outcome: usize,
    pub grid: Option<(f64, f64, usize)>,
    pub photons_min: usize,
    pub photons_max: usize,
    pub output: Option<String>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Pulse description at one sweep point (gamma_g = 1, so the pulse width
    /// equals the dimensionless sweep value).
    pub fn pulse_spec(&self, delta_gamma: f64) -> Result<PulseSpec> {
        self.pulse_spec_with_photons(delta_gamma, self.n_photons)
    }

    pub fn pulse_spec_with_photons(&self, delta_gamma: f64, n: usize) -> Result<PulseSpec> {
        let family = match self.family.as_str() {
            "gaussian-fock" => PulseFamily::GaussianFock,
            "separated-gaussians" => {
                let separation = match self.separation {
                    Some(Separation::Absolute(s)) => s,
                    Some(Separation::PerDelta(s)) => s * delta_gamma,
                    None => {
                        return Err(Error::Config(
                            "separated-gaussians needs pulse.separation or \
                             pulse.separation_per_delta"
                                .into(),
                        ))
                    }
                };
                PulseFamily::SeparatedGaussians { separation }
            }
            "hermite-gauss-pair" => PulseFamily::HermiteGaussPair { sign: self.sign },
            other => return Err(Error::Config(format!("unknown pulse family {other}"))),
        };
        PulseSpec::new(family, n, delta_gamma, self.detuning)
    }

    /// Canonical sorted key-value echo used for metadata and hashing.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut map = BTreeMap::new();
        map.insert("experiment".to_string(), self.experiment.name().to_string());
        map.insert("pulse.family".into(), self.family.clone());
        map.insert("pulse.photons".into(), self.n_photons.to_string());
        map.insert("pulse.detuning".into(), format!("{}", self.detuning));
        match self.separation {
            Some(Separation::Absolute(s)) => {
                map.insert("pulse.separation".into(), format!("{s}"));
            }
            Some(Separation::PerDelta(s)) => {
                map.insert("pulse.separation_per_delta".into(), format!("{s}"));
            }
            None => {}
        }
        map.insert(
            "pulse.sign".into(),
            match self.sign {
                PairSign::Plus => "plus".into(),
                PairSign::Minus => "minus".into(),
            },
        );
        map.insert("emitters".into(), self.n_emitters.to_string());
        map.insert(
            "delta_gamma".into(),
            self.delta_gamma
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        map.insert("trajectories".into(), self.trajectories.to_string());
        if let Some(seed) = self.seed {
            map.insert("seed".into(), seed.to_string());
        }
        map.insert("outcome".into(), self.outcome.to_string());
        if let Some((a, b, n)) = self.grid {
            map.insert("grid.t_start".into(), format!("{a}"));
            map.insert("grid.t_end".into(), format!("{b}"));
            map.insert("grid.points".into(), n.to_string());
        }
        map.insert("photons.min".into(), self.photons_min.to_string());
        map.insert("photons.max".into(), self.photons_max.to_string());
        map.into_iter().collect()
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {p:?}"))
        })
        .collect()
}

/// Parse a configuration file. Syntax or type errors are collected as
/// line-tagged diagnostics.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<String>> {
    let mut diags = Vec::new();
    let mut keys: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if keys.insert(key.clone(), (lineno + 1, v.trim().to_string())).is_some() {
                    diags.push(format!("line {}: duplicate key {key}", lineno + 1));
                }
            }
            None => diags.push(format!("line {}: expected key = value", lineno + 1)),
        }
    }

    let mut take = |key: &str| keys.remove(key);
    let experiment = match take("experiment") {
        Some((line, v)) => match Experiment::parse(&v) {
            Some(e) => Some(e),
            None => {
                diags.push(format!("line {line}: unknown experiment {v:?}"));
                None
            }
        },
        None => None,
    };

    macro_rules! parse_field {
        ($key:expr, $default:expr, $ty:ty) => {
            match take($key) {
                Some((line, v)) => match v.parse::<$ty>() {
                    Ok(x) => x,
                    Err(_) => {
                        diags.push(format!("line {line}: field {} expects {}", $key, stringify!($ty)));
                        $default
                    }
                },
                None => $default,
            }
        };
    }

    let family = take("pulse.family")
        .map(|(_, v)| v)
        .unwrap_or_else(|| "gaussian-fock".to_string());
    if !matches!(
        family.as_str(),
        "gaussian-fock" | "separated-gaussians" | "hermite-gauss-pair"
    ) {
        diags.push(format!("pulse.family: unknown family {family:?}"));
    }
    let n_photons = parse_field!("pulse.photons", 2usize, usize);
    let detuning = parse_field!("pulse.detuning", 0.0f64, f64);
    let separation = match (take("pulse.separation"), take("pulse.separation_per_delta")) {
        (Some((line, _)), Some(_)) => {
            diags.push(format!(
                "line {line}: give either pulse.separation or pulse.separation_per_delta, not both"
            ));
            None
        }
        (Some((line, v)), None) => match v.parse::<f64>() {
            Ok(x) => Some(Separation::Absolute(x)),
            Err(_) => {
                diags.push(format!("line {line}: pulse.separation expects a number"));
                None
            }
        },
        (None, Some((line, v))) => match v.parse::<f64>() {
            Ok(x) => Some(Separation::PerDelta(x)),
            Err(_) => {
                diags.push(format!("line {line}: pulse.separation_per_delta expects a number"));
                None
            }
        },
        (None, None) => None,
    };
    let sign = match take("pulse.sign") {
        Some((line, v)) => match v.as_str() {
            "plus" | "+1" | "+" => PairSign::Plus,
            "minus" | "-1" | "-" => PairSign::Minus,
            _ => {
                diags.push(format!("line {line}: pulse.sign expects plus or minus"));
                PairSign::Plus
            }
        },
        None => PairSign::Plus,
    };
    let n_emitters = parse_field!("emitters", 1usize, usize);
    let delta_gamma = match take("delta_gamma") {
        Some((line, v)) => match parse_list(&v) {
            Ok(list) if !list.is_empty() => list,
            Ok(_) => {
                diags.push(format!("line {line}: delta_gamma list is empty"));
                Vec::new()
            }
            Err(e) => {
                diags.push(format!("line {line}: delta_gamma: {e}"));
                Vec::new()
            }
        },
        None => {
            diags.push("missing required key delta_gamma".into());
            Vec::new()
        }
    };
    let trajectories = parse_field!("trajectories", 2000usize, usize);
    let seed = take("seed").and_then(|(line, v)| match v.parse::<u64>() {
        Ok(x) => Some(x),
        Err(_) => {
            diags.push(format!("line {line}: seed expects an unsigned integer"));
            None
        }
    });
    let outcome = parse_field!("outcome", 0usize, usize);
    let grid = {
        let t_start = take("grid.t_start");
        let t_end = take("grid.t_end");
        let points = take("grid.points");
        match (t_start, t_end, points) {
            (None, None, None) => None,
            (Some((_, a)), Some((_, b)), Some((_, n))) => {
                match (a.parse::<f64>(), b.parse::<f64>(), n.parse::<usize>()) {
                    (Ok(a), Ok(b), Ok(n)) => Some((a, b, n)),
                    _ => {
                        diags.push("grid.*: expected numbers".into());
                        None
                    }
                }
            }
            _ => {
                diags.push("grid.t_start, grid.t_end, grid.points must appear together".into());
                None
            }
        }
    };
    let photons_min = parse_field!("photons.min", 1usize, usize);
    let photons_max = parse_field!("photons.max", n_photons.max(photons_min), usize);
    let output = take("output").map(|(_, v)| v);
    let threads = take("threads").and_then(|(line, v)| match v.parse::<usize>() {
        Ok(x) => Some(x),
        Err(_) => {
            diags.push(format!("line {line}: threads expects an integer"));
            None
        }
    });

    for (key, (line, _)) in &keys {
        diags.push(format!("line {line}: unknown key {key}"));
    }
    let experiment = match experiment {
        Some(e) => e,
        None => {
            if !diags.iter().any(|d| d.contains("experiment")) {
                diags.push("missing required key experiment".into());
            }
            Experiment::Linear
        }
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(ExperimentConfig {
        experiment,
        family,
        n_photons,
        detuning,
        separation,
        sign,
        n_emitters,
        delta_gamma,
        trajectories,
        seed,
        outcome,
        grid,
        photons_min,
        photons_max,
        output,
        threads,
    })
}

/// Semantic checks; an empty list means `run` cannot fail on config grounds.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let mut diags = Vec::new();
    if config.delta_gamma.iter().any(|&v| !(v > 0.0)) {
        diags.push("delta_gamma values must be positive".into());
    }
    if config.experiment.uses_trajectories() && config.seed.is_none() {
        diags.push(format!(
            "experiment {} runs trajectories and needs a seed",
            config.experiment.name()
        ));
    }
    if config.experiment.uses_trajectories() && config.family == "hermite-gauss-pair" {
        diags.push(
            "the hermite-gauss-pair source has no shaped-cavity release; \
             trajectory experiments cannot run it"
                .into(),
        );
    }
    if config.experiment.uses_trajectories() && config.trajectories == 0 {
        diags.push("trajectories must be positive".into());
    }
    match config.experiment {
        Experiment::Outcomes | Experiment::Trajectory => {
            if config.n_photons > 3 && config.experiment == Experiment::Outcomes {
                diags.push("outcome probabilities are analytic only up to 3 photons".into());
            }
            if config.experiment == Experiment::Trajectory && config.n_emitters != 1 {
                diags.push("trajectory outcome classification needs exactly one emitter".into());
            }
        }
        Experiment::Correlate => {
            if config.delta_gamma.len() != 1 {
                diags.push("correlate expects a single delta_gamma value".into());
            }
            let valid = matches!(
                (config.n_photons, config.outcome),
                (2, 0) | (3, 0) | (3, 3)
            );
            if !valid {
                diags.push(format!(
                    "correlator cases are (photons, outcome) in {{(2,0), (3,0), (3,3)}}, \
                     got ({}, {})",
                    config.n_photons, config.outcome
                ));
            }
        }
        Experiment::Response | Experiment::Compare => {
            if config.photons_min == 0 || config.photons_max < config.photons_min {
                diags.push("photons.min..photons.max must be a non-empty range from 1".into());
            }
            if config.photons_max > 7 {
                diags.push("response curves are limited to 7 photons".into());
            }
            if config.n_emitters > 5 {
                diags.push("response curves are limited to 5 emitters".into());
            }
        }
        Experiment::Linear => {
            if config.photons_min == 0 || config.photons_max < config.photons_min {
                diags.push("photons.min..photons.max must be a non-empty range from 1".into());
            }
        }
    }
    if config.outcome > config.n_photons {
        diags.push(format!(
            "outcome {} exceeds the photon number {}",
            config.outcome, config.n_photons
        ));
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# two-photon outcome probabilities
experiment = outcomes
pulse.family = gaussian-fock
pulse.photons = 2
delta_gamma = 0.3, 1, 3
emitters = 1
";

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.experiment, Experiment::Outcomes);
        assert_eq!(cfg.delta_gamma, vec![0.3, 1.0, 3.0]);
        assert!(validate(&cfg).is_empty());
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = parse_config("experiment = linear\ndelta_gamma = 1\nbogus = 3\n").unwrap_err();
        assert!(err.iter().any(|d| d.contains("line 3") && d.contains("bogus")), "{err:?}");
    }

    #[test]
    fn missing_seed_for_trajectories_is_diagnosed() {
        let text = "experiment = trajectory\ndelta_gamma = 1\npulse.photons = 2\n";
        let cfg = parse_config(text).unwrap();
        let diags = validate(&cfg);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].contains("seed"));
    }

    #[test]
    fn hermite_pair_trajectory_is_diagnosed() {
        let text = "experiment = trajectory\ndelta_gamma = 1\npulse.family = hermite-gauss-pair\n\
                    pulse.photons = 2\nseed = 1\n";
        let cfg = parse_config(text).unwrap();
        let diags = validate(&cfg);
        assert!(diags.iter().any(|d| d.contains("shaped-cavity")), "{diags:?}");
    }

    #[test]
    fn separation_scaling_applies_per_sweep_point() {
        let text = "experiment = outcomes\ndelta_gamma = 0.5\npulse.family = separated-gaussians\n\
                    pulse.photons = 2\npulse.separation_per_delta = 20\n";
        let cfg = parse_config(text).unwrap();
        let spec = cfg.pulse_spec(0.5).unwrap();
        match spec.family {
            PulseFamily::SeparatedGaussians { separation } => {
                assert!((separation - 10.0).abs() < 1e-12)
            }
            other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn echo_is_sorted_and_complete() {
        let cfg = parse_config(GOOD).unwrap();
        let echo = cfg.echo();
        let keys: Vec<&str> = echo.iter().map(|(k, _)| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(keys.contains(&"experiment"));
        assert!(keys.contains(&"delta_gamma"));
    }
}
