//! Flat `key=value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use holonomy_core::sampling::{BlochSampling, SamplingScheme};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Noiseless Bloch-averaged fidelity.
    IdealMean,
    /// Fidelity of the named initial states for each coupling.
    PerState,
    /// Bloch-averaged fidelity under the chosen noise model.
    NoisyMean,
    /// Bloch-averaged fidelity under an Ohmic bath, one column per temperature.
    OhmicMean,
}

impl FromStr for Figure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal-mean" => Ok(Self::IdealMean),
            "per-state" => Ok(Self::PerState),
            "noisy-mean" => Ok(Self::NoisyMean),
            "ohmic-mean" => Ok(Self::OhmicMean),
            other => Err(format!(
                "unknown figure '{other}' (expected ideal-mean, per-state, noisy-mean or ohmic-mean)"
            )),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IdealMean => "ideal-mean",
            Self::PerState => "per-state",
            Self::NoisyMean => "noisy-mean",
            Self::OhmicMean => "ohmic-mean",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fixed,
    Ohmic,
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "ohmic" => Ok(Self::Ohmic),
            other => Err(format!("unknown preset '{other}' (expected fixed or ohmic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub figure: Figure,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    /// `None` means the figure's default list.
    pub lambda2: Option<Vec<f64>>,
    /// `None` means `ohmic` for the Ohmic figure and `fixed` otherwise.
    pub preset: Option<Preset>,
    pub kappa: f64,
    pub omega_c: f64,
    pub temperatures: Vec<f64>,
    pub sampling: BlochSampling,
    pub steps: usize,
    pub out: PathBuf,
    /// Optional loop file, rescaled to each grid time. The NOT loop otherwise.
    pub path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            figure: Figure::IdealMean,
            tau_min: 1.0,
            tau_max: 100.0,
            tau_points: 300,
            lambda2: None,
            preset: None,
            kappa: 0.01,
            omega_c: 100.0,
            temperatures: vec![0.1, 1.0, 5.0, 10.0],
            sampling: BlochSampling::fibonacci(200),
            steps: 2000,
            out: PathBuf::from("out.csv"),
            path: None,
        }
    }
}

/// Couplings swept when `lambda2` is not given.
pub const DEFAULT_LAMBDA2_SWEEP: [f64; 7] = [0.0, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T, LabError> {
    value
        .trim()
        .parse()
        .map_err(|_| LabError::config(field, format!("'{}' is not a valid number", value.trim())))
}

fn parse_list(field: &str, value: &str) -> Result<Vec<f64>, LabError> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(LabError::config(field, "empty list"));
    }
    items.iter().map(|s| parse_num(field, s)).collect()
}

impl ExperimentConfig {
    /// Sets one field from its textual value. Keys use underscores; dashes
    /// are accepted as well so CLI flag names can be passed through.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "figure" => self.figure = v.parse().map_err(|e| LabError::config("figure", e))?,
            "tau_min" => self.tau_min = parse_num("tau_min", v)?,
            "tau_max" => self.tau_max = parse_num("tau_max", v)?,
            "tau_points" => self.tau_points = parse_num("tau_points", v)?,
            "lambda2" => self.lambda2 = Some(parse_list("lambda2", v)?),
            "preset" => self.preset = Some(v.parse().map_err(|e| LabError::config("preset", e))?),
            "kappa" => self.kappa = parse_num("kappa", v)?,
            "omega_c" => self.omega_c = parse_num("omega_c", v)?,
            "temperature" | "temperatures" => self.temperatures = parse_list("temperature", v)?,
            "samples" => self.sampling.count = parse_num("samples", v)?,
            "sampling" => {
                self.sampling.scheme = v
                    .parse::<SamplingScheme>()
                    .map_err(|e| LabError::config("sampling", e.to_string()))?
            }
            "seed" => self.sampling.seed = parse_num("seed", v)?,
            "steps" => self.steps = parse_num("steps", v)?,
            "out" => self.out = PathBuf::from(v),
            "path" => self.path = Some(PathBuf::from(v)),
            other => return Err(LabError::config(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Parses a config file body. Lines are `key = value`; `#` starts a
    /// comment. Relative `path` entries resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, LabError> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                LabError::config(format!("line {}", i + 1), format!("expected key=value, got '{line}'"))
            })?;
            let k = k.trim().replace('-', "_");
            if seen.contains(&k) {
                return Err(LabError::config(&k, format!("given twice (line {})", i + 1)));
            }
            cfg.set(&k, v)?;
            if k == "path" {
                if let (Some(base), Some(p)) = (base_dir, cfg.path.as_ref()) {
                    if p.is_relative() {
                        cfg.path = Some(base.join(p));
                    }
                }
            }
            seen.push(k);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    pub fn preset(&self) -> Preset {
        self.preset.unwrap_or(match self.figure {
            Figure::OhmicMean => Preset::Ohmic,
            _ => Preset::Fixed,
        })
    }

    pub fn lambda2_list(&self) -> Vec<f64> {
        match (&self.lambda2, self.figure) {
            (Some(l), _) => l.clone(),
            (None, Figure::OhmicMean) => vec![0.01],
            (None, _) => DEFAULT_LAMBDA2_SWEEP.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.tau_min > 0.0) || !self.tau_min.is_finite() {
            return Err(LabError::config("tau_min", format!("must be positive, got {}", self.tau_min)));
        }
        if !(self.tau_max >= self.tau_min) || !self.tau_max.is_finite() {
            return Err(LabError::config(
                "tau_max",
                format!("must be finite and at least tau_min, got {}", self.tau_max),
            ));
        }
        if self.tau_points < 2 {
            return Err(LabError::config("tau_points", format!("must be at least 2, got {}", self.tau_points)));
        }
        if let Some(bad) = self.lambda2_list().iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(LabError::config("lambda2", format!("values must be non-negative, got {bad}")));
        }
        if self.sampling.count == 0 {
            return Err(LabError::config("samples", "must be at least 1"));
        }
        if self.steps < 100 {
            return Err(LabError::config("steps", format!("must be at least 100, got {}", self.steps)));
        }
        if self.preset() == Preset::Ohmic && self.figure != Figure::IdealMean {
            if !(self.kappa > 0.0) || !self.kappa.is_finite() {
                return Err(LabError::config("kappa", format!("must be positive, got {}", self.kappa)));
            }
            if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
                return Err(LabError::config("omega_c", format!("must be positive, got {}", self.omega_c)));
            }
            if let Some(bad) = self.temperatures.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
                return Err(LabError::config("temperature", format!("values must be non-negative, got {bad}")));
            }
        }
        if self.figure == Figure::OhmicMean && self.preset() != Preset::Ohmic {
            return Err(LabError::config("preset", "ohmic-mean requires preset=ohmic"));
        }
        Ok(())
    }

    /// Grid of `Ωτ` values, evenly spaced and including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.tau_points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.tau_max
                } else {
                    self.tau_min + (self.tau_max - self.tau_min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}
