//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! problem.n = 85
//! scheme.mode = left
//! scheme.fmt_s = bfloat16
//! stop = anorm_error_min:200
//! ```
//!
//! Unknown keys and malformed values are errors that name the key. Every
//! output file starts with the resolved configuration as `# key = value`
//! comment lines, which [`ExperimentConfig::from_header`] reads back.

use std::fmt;
use std::str::FromStr;

use krylovmp::bounds::BoundVariant;
use krylovmp::experiment::PreconditionerKind;
use krylovmp::fpx::{FloatFormat, BUILTIN_FORMATS, FP64};
use krylovmp::pcg::{PrecondMode, StoppingRule};
use krylovmp::problems::ProblemSpec;

pub const DEFAULT_MAXITER: usize = 2500;
pub const DEFAULT_SWEEP_MAXITER: usize = 2600;
pub const DEFAULT_PATIENCE: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeMode {
    Pcg(PrecondMode),
    SaadSplit,
}

impl fmt::Display for SchemeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pcg(m) => m.fmt(f),
            Self::SaadSplit => f.write_str("saad-split"),
        }
    }
}

impl FromStr for SchemeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "saad-split" {
            Ok(Self::SaadSplit)
        } else {
            s.parse().map(Self::Pcg)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub preconditioner: PreconditionerKind,
    pub mode: SchemeMode,
    pub fmt_s: FloatFormat,
    pub fmt_q: FloatFormat,
    pub fmt_z: FloatFormat,
    /// `None` until resolved for a command.
    pub maxiter: Option<usize>,
    pub stop: StoppingRule,
    pub bound_variant: BoundVariant,
    pub output: String,
    pub sweep_formats: Vec<FloatFormat>,
    pub sweep_patience: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::standard(55),
            preconditioner: PreconditionerKind::Truncation,
            mode: SchemeMode::Pcg(PrecondMode::Left),
            fmt_s: FP64,
            fmt_q: FP64,
            fmt_z: FP64,
            maxiter: None,
            stop: StoppingRule::None,
            bound_variant: BoundVariant::Plot,
            output: "krylovmp.csv".to_string(),
            sweep_formats: BUILTIN_FORMATS.to_vec(),
            sweep_patience: DEFAULT_PATIENCE,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| ConfigError::new(key, format!("cannot parse `{raw}`: {e}")))
}

fn format_list(key: &str, raw: &str) -> Result<Vec<FloatFormat>, ConfigError> {
    let formats = raw
        .split(',')
        .map(|f| value::<FloatFormat>(key, f.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if formats.is_empty() {
        return Err(ConfigError::new(key, "empty format list"));
    }
    Ok(formats)
}

impl ExperimentConfig {
    /// Parses a whole config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, "expected `key = value`"))?;
            config.set(key.trim(), raw.trim())?;
        }
        Ok(config)
    }

    /// Rebuilds the configuration echoed in the comment header of an output
    /// file. `meta.*` lines are skipped.
    pub fn from_header(text: &str) -> Result<Self, ConfigError> {
        let body: String = text
            .lines()
            .map_while(|l| l.strip_prefix("# "))
            .filter(|l| !l.starts_with("meta."))
            .map(|l| format!("{l}\n"))
            .collect();
        Self::parse(&body)
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        match key {
            "problem.n" => self.problem.n = value(key, raw)?,
            "problem.lambda_1" => self.problem.lambda_1 = value(key, raw)?,
            "problem.lambda_n" => self.problem.lambda_n = value(key, raw)?,
            "problem.rho" => self.problem.rho = value(key, raw)?,
            "problem.trunc_index" => self.problem.trunc_index = value(key, raw)?,
            "preconditioner" => self.preconditioner = value(key, raw)?,
            "scheme.mode" => self.mode = value(key, raw)?,
            "scheme.fmt_s" | "scheme.fmt_L" => self.fmt_s = value(key, raw)?,
            "scheme.fmt_q" => self.fmt_q = value(key, raw)?,
            "scheme.fmt_z" => self.fmt_z = value(key, raw)?,
            "scheme.fmt_R" => {
                self.fmt_q = value(key, raw)?;
                self.fmt_z = self.fmt_q;
            }
            "maxiter" => self.maxiter = Some(value(key, raw)?),
            "stop" => self.stop = value(key, raw)?,
            "bound_variant" => self.bound_variant = value(key, raw)?,
            "output" => self.output = raw.to_string(),
            "sweep.formats" => self.sweep_formats = format_list(key, raw)?,
            "sweep.patience" => self.sweep_patience = value(key, raw)?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks cross-key constraints that single values cannot.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.problem
            .validate()
            .map_err(|e| ConfigError::new("problem", e.to_string()))?;
        if self.maxiter == Some(0) {
            return Err(ConfigError::new("maxiter", "must be at least 1"));
        }
        Ok(())
    }

    /// Copy with `maxiter` filled in.
    pub fn resolved(&self, default_maxiter: usize) -> Self {
        Self {
            maxiter: Some(self.maxiter.unwrap_or(default_maxiter)),
            ..self.clone()
        }
    }

    pub fn maxiter_or(&self, default_maxiter: usize) -> usize {
        self.maxiter.unwrap_or(default_maxiter)
    }

    /// `(key, value)` pairs of every setting, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let formats: Vec<&str> = self.sweep_formats.iter().map(|f| f.name()).collect();
        let mut out = vec![
            ("problem.n", self.problem.n.to_string()),
            ("problem.lambda_1", format!("{:e}", self.problem.lambda_1)),
            ("problem.lambda_n", format!("{:e}", self.problem.lambda_n)),
            ("problem.rho", format!("{:e}", self.problem.rho)),
            ("problem.trunc_index", self.problem.trunc_index.to_string()),
            ("preconditioner", self.preconditioner.as_str().to_string()),
            ("scheme.mode", self.mode.to_string()),
            ("scheme.fmt_s", self.fmt_s.to_string()),
            ("scheme.fmt_q", self.fmt_q.to_string()),
            ("scheme.fmt_z", self.fmt_z.to_string()),
        ];
        if let Some(m) = self.maxiter {
            out.push(("maxiter", m.to_string()));
        }
        out.extend([
            ("stop", self.stop.to_string()),
            ("bound_variant", self.bound_variant.to_string()),
            ("output", self.output.clone()),
            ("sweep.formats", formats.join(",")),
            ("sweep.patience", self.sweep_patience.to_string()),
        ]);
        out
    }
}
