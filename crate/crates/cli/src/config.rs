//! Experiment configuration: baked-in defaults, an optional key–value
//! config file, and command-line overrides, merged in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use gridrom_core::error::{Error, Result};
use gridrom_core::simulate::DifferenceScheme;

/// How the derivative snapshots are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Forward differences with a trailing backward difference.
    #[default]
    Forward,
    /// Central differences (one-sided at the ends).
    Central,
    /// Evaluate the exact lifted right-hand side at each sample. Uses the
    /// assembled full-order operators, so it is only meaningful for oracle
    /// experiments, never for genuinely non-intrusive runs.
    ExactRhs,
}

impl DerivativeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "forward" | "forward-difference" => Ok(Self::Forward),
            "central" | "central-difference" => Ok(Self::Central),
            "exact" | "exact-rhs" => Ok(Self::ExactRhs),
            other => Err(Error::InvalidArgument(format!(
                "unknown derivative mode {other:?} (use forward, central or exact-rhs)"
            ))),
        }
    }

    pub fn difference_scheme(self) -> Option<DifferenceScheme> {
        match self {
            Self::Forward => Some(DifferenceScheme::Forward),
            Self::Central => Some(DifferenceScheme::Central),
            Self::ExactRhs => None,
        }
    }
}

impl fmt::Display for DerivativeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Forward => "forward",
            Self::Central => "central",
            Self::ExactRhs => "exact-rhs",
        };
        write!(f, "{name}")
    }
}

/// Initial condition of the full model.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// All angles and velocities zero.
    Zero,
    /// Seeded uniform angle perturbation of the given magnitude (rad),
    /// zero velocities.
    Random { magnitude: f64 },
    /// Explicit vectors.
    Explicit { angles: Vec<f64>, velocities: Vec<f64> },
}

impl InitialCondition {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "zero" {
            return Ok(Self::Zero);
        }
        if let Some(rest) = spec.strip_prefix("random") {
            let magnitude = rest.trim_start_matches([':', ' ']).trim();
            let magnitude = if magnitude.is_empty() {
                0.1
            } else {
                magnitude.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("bad perturbation magnitude {magnitude:?}"))
                })?
            };
            if !(magnitude.is_finite() && magnitude > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "perturbation magnitude must be positive, got {magnitude}"
                )));
            }
            return Ok(Self::Random { magnitude });
        }
        Err(Error::InvalidArgument(format!(
            "unknown initial condition {spec:?} (use zero, random[:MAG], or angles/velocities keys)"
        )))
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Random { magnitude } => write!(f, "random:{magnitude}"),
            Self::Explicit { .. } => write!(f, "explicit"),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub network_path: PathBuf,
    pub t_span: (f64, f64),
    pub dt: f64,
    pub initial_condition: InitialCondition,
    pub tol: f64,
    pub r_override: Option<usize>,
    pub mu: f64,
    pub derivative_mode: DerivativeMode,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            network_path: PathBuf::from("networks/ring_n20.net"),
            t_span: (0.0, 3.0),
            dt: 1e-3,
            initial_condition: InitialCondition::Random { magnitude: 0.1 },
            tol: 1.5e-4,
            r_override: None,
            mu: 1e-3,
            derivative_mode: DerivativeMode::Forward,
            output_dir: PathBuf::from("out"),
            seed: 17,
        }
    }
}

impl ExperimentConfig {
    /// Applies a key–value config file to this configuration.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut angles: Option<Vec<f64>> = None;
        let mut velocities: Option<Vec<f64>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(path, line_no, format!("expected `key = value`, got {line:?}")));
            };
            let key = key.trim();
            let value = value.trim();
            let bad_number =
                || Error::parse(path, line_no, format!("field {key}: bad number {value:?}"));
            match key {
                "network" => self.network_path = PathBuf::from(value),
                "t_start" => self.t_span.0 = value.parse().map_err(|_| bad_number())?,
                "t_end" => self.t_span.1 = value.parse().map_err(|_| bad_number())?,
                "dt" => self.dt = value.parse().map_err(|_| bad_number())?,
                "initial_condition" => {
                    if value != "explicit" {
                        self.initial_condition = InitialCondition::parse(value)
                            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
                    }
                }
                "angles" | "velocities" => {
                    let parsed: Vec<f64> = value
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|_| bad_number()))
                        .collect::<Result<_>>()?;
                    if key == "angles" {
                        angles = Some(parsed);
                    } else {
                        velocities = Some(parsed);
                    }
                }
                "tol" => self.tol = value.parse().map_err(|_| bad_number())?,
                "r_override" => {
                    self.r_override = if value.is_empty() {
                        None
                    } else {
                        Some(value.parse::<usize>().map_err(|_| bad_number())?)
                    }
                }
                "mu" => self.mu = value.parse().map_err(|_| bad_number())?,
                "derivative_mode" => {
                    self.derivative_mode = DerivativeMode::parse(value)
                        .map_err(|e| Error::parse(path, line_no, e.to_string()))?
                }
                "output_dir" => self.output_dir = PathBuf::from(value),
                "seed" => {
                    self.seed = value.parse::<u64>().map_err(|_| {
                        Error::parse(path, line_no, format!("field seed: bad integer {value:?}"))
                    })?
                }
                other => {
                    return Err(Error::parse(path, line_no, format!("unknown field {other:?}")));
                }
            }
        }
        match (angles, velocities) {
            (Some(angles), Some(velocities)) => {
                if angles.len() != velocities.len() {
                    return Err(Error::parse(
                        path,
                        0,
                        "angles and velocities must have equal length",
                    ));
                }
                self.initial_condition = InitialCondition::Explicit { angles, velocities };
            }
            (None, None) => {}
            _ => {
                return Err(Error::parse(
                    path,
                    0,
                    "explicit initial conditions need both angles and velocities",
                ));
            }
        }
        Ok(())
    }

    /// Checks the scalar invariants. Path existence is checked where the
    /// files are actually opened.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        let span = self.t_span.1 - self.t_span.0;
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time span [{}, {}] is empty",
                self.t_span.0, self.t_span.1
            )));
        }
        if self.dt >= self.t_span.1 - self.t_span.0 {
            return Err(Error::InvalidArgument(format!(
                "dt = {} does not fit the time span [{}, {}]",
                self.dt, self.t_span.0, self.t_span.1
            )));
        }
        if self.r_override.is_none() && !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu must be non-negative, got {}",
                self.mu
            )));
        }
        if let InitialCondition::Random { magnitude } = self.initial_condition {
            if !(magnitude.is_finite() && magnitude > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "perturbation magnitude must be positive, got {magnitude}"
                )));
            }
        }
        Ok(())
    }
}
