//! Run configuration: JSON config files, flag overrides and the small
//! string parsers for grids, n lists and potentials.

use mbhe::potential::PotentialSpec;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

pub const PRECISION_ENV: &str = "MBHE_PRECISION_BITS";

/// Largest accepted grid size per axis and largest n.
pub const MAX_POINTS: usize = 10_000;
pub const MAX_N: usize = 4096;
pub const MIN_PRECISION: u32 = 128;
pub const MAX_PRECISION: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid grid {input:?}: {reason}")]
    Grid { input: String, reason: String },
    #[error("invalid n list {input:?}: {reason}")]
    NList { input: String, reason: String },
    #[error("{0}")]
    Potential(String),
    #[error("invalid config file: {0}")]
    File(String),
    #[error("invalid {field}: {reason}")]
    Field { field: &'static str, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Equilibrium,
    LimitKernel,
    FiniteN,
    Converge,
    CheckParametrix,
    CheckIdentities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::LimitKernel => "limit-kernel",
            Command::FiniteN => "finite-n",
            Command::Converge => "converge",
            Command::CheckParametrix => "check-parametrix",
            Command::CheckIdentities => "check-identities",
        }
    }

    pub fn default_format(self) -> Format {
        match self {
            Command::LimitKernel | Command::FiniteN | Command::Converge => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ConfigError::Field {
                field: "format",
                reason: format!("{s:?} is neither csv nor json"),
            }),
        }
    }
}

/// Uniform grid of `points` values in [x_min, x_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.x_min > 0.0 && self.x_max.is_finite()) {
            return Err("bounds must be positive and finite".into());
        }
        if self.x_max < self.x_min {
            return Err("x_max is below x_min".into());
        }
        if self.points == 0 || self.points > MAX_POINTS {
            return Err(format!("points must lie in 1..={MAX_POINTS}"));
        }
        if self.points > 1 && self.x_max == self.x_min {
            return Err("several points on a degenerate interval".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.x_min];
        }
        let h = (self.x_max - self.x_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.x_max
                } else {
                    self.x_min + h * i as f64
                }
            })
            .collect()
    }

    /// Row-major product grid, (x, y) with y varying fastest.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let v = self.values();
        v.iter()
            .flat_map(|&x| v.iter().map(move |&y| (x, y)))
            .collect()
    }
}

/// Parses `x_min:x_max:points`, e.g. `0.5:3:9`.
pub fn parse_grid(input: &str) -> Result<Grid> {
    let err = |reason: &str| ConfigError::Grid {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = input.trim().split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(err("expected x_min:x_max:points"));
    };
    let x_min: f64 = lo
        .trim()
        .parse()
        .map_err(|_| err("x_min is not a number"))?;
    let x_max: f64 = hi
        .trim()
        .parse()
        .map_err(|_| err("x_max is not a number"))?;
    let points: usize = n
        .trim()
        .parse()
        .map_err(|_| err("points is not a positive integer"))?;
    let grid = Grid {
        x_min,
        x_max,
        points,
    };
    grid.validate().map_err(|r| err(&r))?;
    Ok(grid)
}

fn check_ns(ns: &[usize]) -> std::result::Result<(), String> {
    if ns.is_empty() {
        return Err("empty".into());
    }
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n > MAX_N) {
        return Err(format!("n = {n} outside 1..={MAX_N}"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err("not strictly ascending".into());
    }
    Ok(())
}

/// Parses a comma-separated, strictly ascending list such as `8,16,32,64`.
pub fn parse_ns(input: &str) -> Result<Vec<usize>> {
    let err = |reason: String| ConfigError::NList {
        input: input.to_string(),
        reason,
    };
    let ns = input
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| err(format!("{t:?} is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_ns(&ns).map_err(err)?;
    Ok(ns)
}

/// Either a polynomial in x (`x + x^2/2`) or a comma-separated coefficient
/// list for x¹, x², … (`1,0.5`).
pub fn parse_potential(input: &str) -> Result<Vec<f64>> {
    if input.contains(['x', 'X']) {
        let spec = PotentialSpec::parse(&input.to_ascii_lowercase())
            .map_err(|e| ConfigError::Potential(e.to_string()))?;
        return Ok(spec.coefficients);
    }
    let coeffs = input
        .split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                ConfigError::Potential(format!("potential coefficient {t:?} is not a number"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    potential_spec(&coeffs)?;
    Ok(coeffs)
}

pub fn potential_spec(coeffs: &[f64]) -> Result<PotentialSpec> {
    PotentialSpec::new(coeffs.to_vec()).map_err(|e| ConfigError::Potential(e.to_string()))
}

/// Contents of a JSON config file; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub potential: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub grid: Option<Grid>,
    pub precision_bits: Option<u32>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ConfigError::File(e.to_string()))
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overridden_by(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            command: other.command.or(self.command),
            potential: other.potential.or(self.potential),
            theta: other.theta.or(self.theta),
            alpha: other.alpha.or(self.alpha),
            n_list: other.n_list.or(self.n_list),
            grid: other.grid.or(self.grid),
            precision_bits: other.precision_bits.or(self.precision_bits),
            output_path: other.output_path.or(self.output_path),
            format: other.format.or(self.format),
            seed: other.seed.or(self.seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Coefficients of x¹, x², ….
    pub potential: Vec<f64>,
    pub theta: f64,
    pub alpha: f64,
    pub n_list: Vec<usize>,
    /// None: 0.5:3:3 for the kernel commands, 64 interior points of the
    /// support for `equilibrium`.
    pub grid: Option<Grid>,
    /// None: the per-n default of the biorthogonal module.
    pub precision_bits: Option<u32>,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

pub const DEFAULT_KERNEL_GRID: Grid = Grid {
    x_min: 0.5,
    x_max: 3.0,
    points: 3,
};
pub const DEFAULT_SEED: u64 = 20_240_101;

impl RunConfig {
    /// Fills defaults and validates. `env_precision` is the raw value of
    /// MBHE_PRECISION_BITS, which takes precedence over everything else.
    pub fn resolve(file: ConfigFile, env_precision: Option<&str>) -> Result<Self> {
        let command = file.command.ok_or(ConfigError::Field {
            field: "command",
            reason: "missing".into(),
        })?;
        let precision_bits = match env_precision {
            Some(s) => Some(s.trim().parse::<u32>().map_err(|_| ConfigError::Field {
                field: "precision_bits",
                reason: format!("{PRECISION_ENV}={s:?} is not an integer"),
            })?),
            None => file.precision_bits,
        };
        let cfg = RunConfig {
            command,
            potential: file.potential.unwrap_or_else(|| vec![1.0]),
            theta: file.theta.unwrap_or(1.0),
            alpha: file.alpha.unwrap_or(0.0),
            n_list: file.n_list.unwrap_or_else(|| match command {
                Command::FiniteN => vec![32],
                _ => vec![8, 16, 32, 64],
            }),
            grid: file.grid,
            precision_bits,
            output_path: file.output_path,
            format: file.format.unwrap_or(command.default_format()),
            seed: file.seed.unwrap_or(DEFAULT_SEED),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        potential_spec(&self.potential)?;
        if !(self.theta >= 1.0 && self.theta <= 64.0) {
            return Err(ConfigError::Field {
                field: "theta",
                reason: format!("{} outside [1, 64]", self.theta),
            });
        }
        if self.command != Command::Equilibrium && self.theta.fract() != 0.0 {
            return Err(ConfigError::Field {
                field: "theta",
                reason: format!(
                    "{} must be an integer for {}",
                    self.theta,
                    self.command.name()
                ),
            });
        }
        if !(self.alpha > -1.0 && self.alpha.is_finite()) {
            return Err(ConfigError::Field {
                field: "alpha",
                reason: format!("{} must exceed -1", self.alpha),
            });
        }
        check_ns(&self.n_list).map_err(|reason| ConfigError::Field {
            field: "n_list",
            reason,
        })?;
        if self.command == Command::FiniteN && self.n_list.len() != 1 {
            return Err(ConfigError::Field {
                field: "n_list",
                reason: "finite-n takes a single n".into(),
            });
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|reason| ConfigError::Field {
                field: "grid",
                reason,
            })?;
        }
        if let Some(p) = self.precision_bits {
            if !(MIN_PRECISION..=MAX_PRECISION).contains(&p) {
                return Err(ConfigError::Field {
                    field: "precision_bits",
                    reason: format!("{p} outside {MIN_PRECISION}..={MAX_PRECISION}"),
                });
            }
        }
        Ok(())
    }

    pub fn theta_u32(&self) -> u32 {
        self.theta as u32
    }

    pub fn kernel_grid(&self) -> Grid {
        self.grid.unwrap_or(DEFAULT_KERNEL_GRID)
    }
}
