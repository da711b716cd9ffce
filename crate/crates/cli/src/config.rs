//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use affine_mixer::algebra::{IntMatrix, DEFAULT_L_MAX};
use affine_mixer::increments::IncrementDistribution;
use affine_mixer::sweep::RateModel;
use affine_mixer::Error;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPS: f64 = 0.25;
pub const DEFAULT_N_CAP: u64 = 100_000;
pub const DEFAULT_SIGMA: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classify,
    Evolve,
    Bounds,
    MixingSweep,
    DigitCensus,
    VerifyIdentities,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Evolve => "evolve",
            Task::Bounds => "bounds",
            Task::MixingSweep => "mixing-sweep",
            Task::DigitCensus => "digit-census",
            Task::VerifyIdentities => "verify-identities",
        }
    }
}

/// Closed-form certificate to add to a bounds table.
#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateConfig {
    #[default]
    None,
    Rho {
        alpha: Vec<i64>,
    },
    Gamma,
}

/// One experiment. Every field except `task` may be absent as long as the
/// task does not need it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub matrix: Option<IntMatrix>,
    pub increments: Option<IncrementDistribution>,
    /// Starting state; reduced mod each `p`.
    pub x0: Option<Vec<i64>>,
    /// Moduli. Tasks other than the sweep run once per entry.
    pub p: Option<Vec<u64>>,
    /// Number of steps for evolve and bounds.
    pub n: Option<u64>,
    pub eps: Option<f64>,
    pub n_cap: Option<u64>,
    pub l_max: Option<u32>,
    pub sigma: Option<u64>,
    /// Digit block length; defaults to the smallest `t` with `sigma^t >= p`.
    pub t: Option<usize>,
    /// Number of consecutive blocks per residue.
    pub r: Option<usize>,
    pub seed: Option<u64>,
    /// Monte Carlo trajectories for evolve; none means no simulation.
    pub trials: Option<u64>,
    /// Fit models for the sweep; all of them when absent.
    pub models: Option<Vec<RateModel>>,
    #[serde(default)]
    pub certificate: CertificateConfig,
    /// Maximum power `j` for verify-identities.
    pub j_max: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub n_cap: Option<u64>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.eps.is_some() {
            self.eps = o.eps;
        }
        if o.n_cap.is_some() {
            self.n_cap = o.n_cap;
        }
        if o.out.is_some() {
            self.output = o.out.clone();
        }
    }

    /// Checks that everything `task` reads is present and in range.
    pub fn validate(&self, task: Task) -> Result<(), Error> {
        if let Some(t) = self.task {
            if t != task {
                return Err(invalid(format!(
                    "config is for task {}, invoked as {}",
                    t.name(),
                    task.name()
                )));
            }
        }
        self.matrix()?;
        if matches!(task, Task::Evolve | Task::Bounds | Task::MixingSweep) {
            self.increments()?;
        }
        if matches!(task, Task::Evolve | Task::Bounds | Task::MixingSweep | Task::DigitCensus) {
            self.moduli()?;
        }
        if matches!(task, Task::Evolve | Task::Bounds) {
            self.steps()?;
        }
        let eps = self.eps();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
        }
        if self.sigma() < 2 {
            return Err(invalid("sigma must be at least 2"));
        }
        if self.trials == Some(0) {
            return Err(invalid("trials must be at least 1"));
        }
        if self.r == Some(0) || self.t == Some(0) {
            return Err(invalid("t and r must be at least 1"));
        }
        if let Some(x0) = &self.x0 {
            let k = self.matrix()?.dim();
            if x0.len() != k {
                return Err(invalid(format!("x0 has {} entries, matrix is {k}x{k}", x0.len())));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> Result<&IntMatrix, Error> {
        self.matrix.as_ref().ok_or_else(|| invalid("missing field `matrix`"))
    }

    pub fn increments(&self) -> Result<&IncrementDistribution, Error> {
        self.increments.as_ref().ok_or_else(|| invalid("missing field `increments`"))
    }

    pub fn moduli(&self) -> Result<&[u64], Error> {
        match self.p.as_deref() {
            None | Some([]) => Err(invalid("field `p` must be a nonempty list")),
            Some(ps) => Ok(ps),
        }
    }

    pub fn steps(&self) -> Result<u64, Error> {
        self.n.ok_or_else(|| invalid("missing field `n`"))
    }

    /// `x0` reduced into `[0, p)`, or the origin.
    pub fn start(&self, p: u64, k: usize) -> Vec<u64> {
        match &self.x0 {
            Some(x) => x.iter().map(|c| c.rem_euclid(p as i64) as u64).collect(),
            None => vec![0; k],
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(DEFAULT_EPS)
    }

    pub fn n_cap(&self) -> u64 {
        self.n_cap.unwrap_or(DEFAULT_N_CAP)
    }

    pub fn l_max(&self) -> u32 {
        self.l_max.unwrap_or(DEFAULT_L_MAX)
    }

    pub fn sigma(&self) -> u64 {
        self.sigma.unwrap_or(DEFAULT_SIGMA)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn models(&self) -> Vec<RateModel> {
        self.models.clone().unwrap_or_else(|| RateModel::ALL.to_vec())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EVOLVE: &str = r#"{
        "task": "evolve",
        "matrix": [[2]],
        "increments": {"k": 1, "support": [[0], [1]], "probs": [0.5, 0.5]},
        "p": [3],
        "n": 2
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::parse(EVOLVE).unwrap();
        c.validate(Task::Evolve).unwrap();
        assert_eq!(c.eps(), DEFAULT_EPS);
        assert_eq!(c.start(3, 1), vec![0]);
    }

    #[test]
    fn task_mismatch() {
        let c = ExperimentConfig::parse(EVOLVE).unwrap();
        assert_eq!(c.validate(Task::Bounds).unwrap_err().kind(), "ConfigInvalid");
    }

    #[test]
    fn unknown_field_rejected() {
        let e = ExperimentConfig::parse(r#"{"matrix": [[1]], "colour": 3}"#).unwrap_err();
        assert_eq!(e.kind(), "ConfigInvalid");
    }

    #[test]
    fn missing_fields_reported() {
        let c = ExperimentConfig::parse(r#"{"matrix": [[1]]}"#).unwrap();
        c.validate(Task::Classify).unwrap();
        for task in [Task::Evolve, Task::MixingSweep, Task::DigitCensus] {
            assert_eq!(c.validate(task).unwrap_err().kind(), "ConfigInvalid");
        }
        let empty = ExperimentConfig::parse(r#"{"matrix": [[1]], "p": []}"#).unwrap();
        assert!(empty.validate(Task::DigitCensus).is_err());
    }

    #[test]
    fn overrides_win() {
        let mut c = ExperimentConfig::parse(EVOLVE).unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            eps: Some(0.1),
            n_cap: None,
            out: None,
        });
        assert_eq!(c.seed(), 9);
        assert_eq!(c.eps(), 0.1);
        c.eps = Some(1.5);
        assert!(c.validate(Task::Evolve).is_err());
    }

    #[test]
    fn negative_start_is_reduced() {
        let mut c = ExperimentConfig::parse(EVOLVE).unwrap();
        c.x0 = Some(vec![-1]);
        assert_eq!(c.start(5, 1), vec![4]);
    }

    #[test]
    fn certificate_forms() {
        let c = ExperimentConfig::parse(r#"{"certificate": {"kind": "rho", "alpha": [1]}}"#).unwrap();
        assert_eq!(c.certificate, CertificateConfig::Rho { alpha: vec![1] });
        let c = ExperimentConfig::parse(r#"{"certificate": {"kind": "gamma"}}"#).unwrap();
        assert_eq!(c.certificate, CertificateConfig::Gamma);
    }
}
