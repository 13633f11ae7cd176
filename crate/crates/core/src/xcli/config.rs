//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use super::parse::parse_lefun;
use crate::ergolab::{CharacterObservable, Schedule, Seed, SystemSpec, TorusBox};
use crate::lefun::LEFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Decompose,
    Window,
    PetReduce,
    VerifyCert,
    Average,
    Weyl,
    Seminorm,
    Recurrence,
    IntervalCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Decompose => "decompose",
            Command::Window => "window",
            Command::PetReduce => "pet-reduce",
            Command::VerifyCert => "verify-cert",
            Command::Average => "average",
            Command::Weyl => "weyl",
            Command::Seminorm => "seminorm",
            Command::Recurrence => "recurrence",
            Command::IntervalCheck => "interval-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AverageMode {
    Pointwise,
    #[default]
    L2,
}

/// One character `c · e(k · x)`; `c` is `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub k: Vec<i64>,
    #[serde(default = "unit")]
    pub c: [f64; 2],
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub terms: Vec<TermSpec>,
}

impl ObservableSpec {
    pub fn build(&self, dim: usize) -> Result<CharacterObservable, crate::ergolab::ErgoError> {
        CharacterObservable::new(
            dim,
            self.terms.iter().map(|t| (t.k.clone(), Complex64::new(t.c[0], t.c[1]))).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub command: Command,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub ladder: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// One observable per function (average, interval-check), or the
    /// observables whose seminorms are estimated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub seed: Seed,
    #[serde(default)]
    pub mode: AverageMode,
    /// Weyl frequencies, one per function (`p/q` or decimal).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<String>,
    /// Seminorm orders.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<u32>,
    /// Window function `L` of the short-interval check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    /// Power `d` of the short-interval check, or the starting order of the
    /// window search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub region: Option<TorusBox>,
    /// Family or certificate document for pet-reduce / verify-cert.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("function {index}: {message}")]
    Parse { index: usize, message: String },
    #[error("ladder must be positive and strictly increasing")]
    Ladder,
    #[error("{0} does not exist")]
    Missing(PathBuf),
    #[error("{0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn new(name: &str, command: Command) -> Self {
        ExperimentConfig {
            name: name.into(),
            command,
            functions: Vec::new(),
            system: None,
            ladder: Vec::new(),
            schedule: None,
            output: None,
            observables: Vec::new(),
            seed: Seed::Origin,
            mode: AverageMode::L2,
            frequencies: Vec::new(),
            orders: Vec::new(),
            window: None,
            d: None,
            region: None,
            input: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn parsed_functions(&self) -> Result<Vec<LEFunction>, ConfigError> {
        self.functions
            .iter()
            .enumerate()
            .map(|(index, s)| parse_lefun(s).map_err(|e| ConfigError::Parse { index, message: e.to_string() }))
            .collect()
    }

    /// Checks that expressions parse, the ladder increases and referenced
    /// files exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.parsed_functions()?;
        if let Some(w) = &self.window {
            parse_lefun(w).map_err(|e| ConfigError::Parse { index: usize::MAX, message: e.to_string() })?;
        }
        if self.ladder.first() == Some(&0) || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Ladder);
        }
        if let Some(p) = &self.input {
            if !p.exists() {
                return Err(ConfigError::Missing(p.clone()));
            }
        }
        let needs_system = matches!(
            self.command,
            Command::Average | Command::Seminorm | Command::Recurrence | Command::IntervalCheck
        );
        if needs_system && self.system.is_none() {
            return Err(ConfigError::Invalid(format!("{} needs a system", self.command.name())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new("ladder", Command::Average);
        c.functions = vec!["t^(3/2)".into(), "t*log(t)".into()];
        c.system = Some(SystemSpec::TorusRotation { alpha: vec!["sqrt(2) - 1".into()] });
        c.ladder = vec![1000, 10000];
        c.observables = vec![ObservableSpec { terms: vec![TermSpec { k: vec![1], c: [1.0, 0.0] }] }; 2];
        c.schedule = Some(Schedule::default());
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        back.validate().unwrap();
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new("x", Command::Weyl);
        c.functions = vec!["t^(".into()];
        assert!(matches!(c.validate(), Err(ConfigError::Parse { index: 0, .. })));
        c.functions = vec!["t".into()];
        c.ladder = vec![10, 10];
        assert!(matches!(c.validate(), Err(ConfigError::Ladder)));
        c.ladder = vec![10];
        c.input = Some("/nonexistent/file.json".into());
        assert!(matches!(c.validate(), Err(ConfigError::Missing(_))));
        assert!(ExperimentConfig::from_json(r#"{"name":"a","command":"weyl","bogus":1}"#).is_err());
    }
}
