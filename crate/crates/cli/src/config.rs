//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment. Unknown keys, malformed
//! values and violated invariants are errors that name the offending key.

use std::fmt;
use std::path::PathBuf;

use lognls::orlicz::RegLevel;
use lognls::stability::PerturbationKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub omega: f64,
    pub half_width: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub m_reg: f64,
    pub tol: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub perturbation: PerturbationKind,
    pub output_dir: PathBuf,
    /// Steps between recorded diagnostics.
    pub record_every: usize,
    pub sweep_omegas: Vec<f64>,
    pub sweep_gammas: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gamma: 1.0,
            omega: 1.0,
            half_width: 12.0,
            n: 1537,
            dt: 1e-3,
            t_final: 20.0,
            m_reg: RegLevel::DEFAULT,
            tol: 1e-8,
            seed: 1,
            epsilon: 1e-3,
            perturbation: PerturbationKind::RandomH1,
            output_dir: PathBuf::from("out"),
            record_every: 200,
            sweep_omegas: vec![-1.0, 0.0, 1.0],
            sweep_gammas: vec![0.5, 1.0, 2.0],
        }
    }
}

pub const KEYS: [&str; 15] = [
    "gamma",
    "omega",
    "L",
    "n",
    "dt",
    "T",
    "m_reg",
    "tol",
    "seed",
    "epsilon",
    "perturbation",
    "output_dir",
    "record_every",
    "sweep_omegas",
    "sweep_gammas",
];

fn real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(key, format!("expected a number, got '{value}'")))?;
    if !v.is_finite() {
        return Err(err(key, format!("must be finite, got '{value}'")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| err(key, format!("expected a nonnegative integer, got '{value}'")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| real(key, item.trim()))
        .collect()
}

impl ExperimentConfig {
    /// Assigns one key. The value is trimmed; invariants are checked later
    /// by [`ExperimentConfig::validate`] so overrides can be applied first.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "gamma" => self.gamma = real(key, value)?,
            "omega" => self.omega = real(key, value)?,
            "L" => self.half_width = real(key, value)?,
            "n" => self.n = integer(key, value)?,
            "dt" => self.dt = real(key, value)?,
            "T" => self.t_final = real(key, value)?,
            "m_reg" => self.m_reg = real(key, value)?,
            "tol" => self.tol = real(key, value)?,
            "seed" => self.seed = integer(key, value)?,
            "epsilon" => self.epsilon = real(key, value)?,
            "perturbation" => self.perturbation = value.parse().map_err(|m: String| err(key, m))?,
            "output_dir" => {
                if value.is_empty() {
                    return Err(err(key, "must not be empty"));
                }
                self.output_dir = PathBuf::from(value)
            }
            "record_every" => self.record_every = integer(key, value)?,
            "sweep_omegas" => self.sweep_omegas = list(key, value)?,
            "sweep_gammas" => self.sweep_gammas = list(key, value)?,
            other => return Err(err(other, format!("unknown key (known keys: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies the assignments in `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line, format!("line {}: expected 'key = value'", number + 1)));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.half_width > 0.0) {
            return Err(err("L", format!("must be positive, got {}", self.half_width)));
        }
        if self.n < 3 || self.n % 2 == 0 {
            return Err(err("n", format!("must be odd and at least 3 so x = 0 is a node, got {}", self.n)));
        }
        if !(self.dt > 0.0) {
            return Err(err("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) {
            return Err(err("T", format!("must be nonnegative, got {}", self.t_final)));
        }
        if let Err(e) = RegLevel::new(self.m_reg) {
            return Err(err("m_reg", e.to_string()));
        }
        if !(self.tol > 0.0) {
            return Err(err("tol", format!("must be positive, got {}", self.tol)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(err("epsilon", format!("must be nonnegative, got {}", self.epsilon)));
        }
        if self.record_every == 0 {
            return Err(err("record_every", "must be at least 1"));
        }
        if self.sweep_omegas.is_empty() {
            return Err(err("sweep_omegas", "must list at least one value"));
        }
        if let Some(g) = self.sweep_gammas.iter().find(|g| !(**g > 0.0)) {
            return Err(err("sweep_gammas", format!("entries must be positive, got {g}")));
        }
        Ok(())
    }

    pub fn reg(&self) -> RegLevel {
        RegLevel::new(self.m_reg).expect("validated")
    }

    /// The resolved configuration as `key = value` lines, in [`KEYS`] order.
    /// Floats use the shortest representation that round-trips.
    pub fn resolved(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let values = [
            format!("{:?}", self.gamma),
            format!("{:?}", self.omega),
            format!("{:?}", self.half_width),
            self.n.to_string(),
            format!("{:?}", self.dt),
            format!("{:?}", self.t_final),
            format!("{:?}", self.m_reg),
            format!("{:?}", self.tol),
            self.seed.to_string(),
            format!("{:?}", self.epsilon),
            self.perturbation.name().to_string(),
            self.output_dir.display().to_string(),
            self.record_every.to_string(),
            join(&self.sweep_omegas),
            join(&self.sweep_gammas),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Defaults, then the file, then `overrides` (in order), then validation.
pub fn parse_config(text: &str, overrides: &[(&str, String)]) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    config.apply_text(text)?;
    for (key, value) in overrides {
        config.set(key, value)?;
    }
    config.validate()?;
    Ok(config)
}
