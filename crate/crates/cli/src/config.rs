use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ipiag::problems::ProblemDocument;
use ipiag::rates::{alpha0_stated, inertia_for, theorem1_at};
use ipiag::schedule::{schedule_synchronous, schedule_uniform_single};
use ipiag::{CertificateKind, CompositeProblem, DelaySchedule, Method, RateCertificate, RateInputs, SolverParams};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, Result};

/// A numeric parameter, or `"auto"` to take it from the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "SettingRepr", into = "SettingRepr")]
pub enum Setting {
    #[default]
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SettingRepr {
    Number(f64),
    Word(String),
}

impl TryFrom<SettingRepr> for Setting {
    type Error = String;

    fn try_from(repr: SettingRepr) -> Result<Self, String> {
        match repr {
            SettingRepr::Number(v) => Ok(Setting::Value(v)),
            SettingRepr::Word(w) => w.parse(),
        }
    }
}

impl From<Setting> for SettingRepr {
    fn from(s: Setting) -> Self {
        match s {
            Setting::Auto => SettingRepr::Word("auto".into()),
            Setting::Value(v) => SettingRepr::Number(v),
        }
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Setting::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Setting::Value(v)),
            _ => Err(format!("expected a finite number or 'auto', got '{s}'")),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Auto => f.write_str("auto"),
            Setting::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// Every worker refreshes at every iteration.
    Sync,
    /// One uniformly drawn worker per iteration, staleness capped at τ.
    Uniform1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub workers: usize,
    /// Declared delay bound used by certificates. Synchronous schedules
    /// realize zero staleness, which respects any declared bound.
    #[serde(default)]
    pub tau: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ScheduleConfig {
    pub fn build(&self, iterations: usize) -> Result<DelaySchedule> {
        if self.workers == 0 {
            return Err(CliError::config("at least one worker is required"));
        }
        Ok(match self.kind {
            ScheduleKind::Sync => schedule_synchronous(self.workers, iterations)?,
            ScheduleKind::Uniform1 => schedule_uniform_single(self.workers, self.tau, iterations, self.seed)?,
        })
    }

    pub fn is_random(&self) -> bool {
        self.kind == ScheduleKind::Uniform1
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

fn default_c1() -> f64 {
    0.25
}

/// One solver run. `problem` may be omitted inside a comparison file that
/// supplies a shared problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemDocument>,
    pub variant: Method,
    #[serde(default)]
    pub alpha: Setting,
    #[serde(default)]
    pub eta1: Setting,
    #[serde(default)]
    pub eta2: Setting,
    /// Heavy-ball fraction used when `eta1` is `auto`: `η₁ = C₁αβ`.
    #[serde(default = "default_c1")]
    pub c1: f64,
    pub schedule: ScheduleConfig,
    pub iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
}

/// Solver parameters after `auto` resolution, with the certificate that
/// covers them when the problem declares `β` and `η₁ < αβ/2`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SolverParams,
    pub certificate: Option<RateCertificate>,
    pub certificate_note: Option<String>,
}

impl RunConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.variant.to_string())
    }

    pub fn resolve(&self, problem: &CompositeProblem) -> Result<Resolved> {
        let method = self.variant;
        let tau = self.schedule.tau;
        let lipschitz = problem.total_lipschitz();
        let beta = problem.growth();
        let uses = [(self.eta1, method.uses_eta1(), "eta1"), (self.eta2, method.uses_eta2(), "eta2")];
        for (setting, used, name) in uses {
            if let Setting::Value(v) = setting {
                if !used && v != 0.0 {
                    return Err(CliError::config(format!("variant {method} fixes {name} = 0, got {v}")));
                }
            }
        }
        let needs_auto = self.alpha == Setting::Auto
            || (method.uses_eta1() && self.eta1 == Setting::Auto)
            || (method.uses_eta2() && self.eta2 == Setting::Auto);
        let auto_inputs = match (needs_auto, beta) {
            (false, _) => None,
            (true, None) => {
                return Err(CliError::config(
                    "'auto' parameters need the growth constant beta in the problem document",
                ))
            }
            (true, Some(b)) => {
                let c1 = if method.uses_eta1() { self.c1 } else { 0.0 };
                Some(RateInputs::new(lipschitz, b, tau, c1).map_err(|e| CliError::config(e.to_string()))?)
            }
        };
        let alpha = match self.alpha {
            Setting::Value(a) => a,
            Setting::Auto => alpha0_stated(auto_inputs.as_ref().expect("auto inputs exist")),
        };
        let (auto_eta1, auto_eta2) = match &auto_inputs {
            Some(inputs) => inertia_for(method, inputs, alpha),
            None => (0.0, 0.0),
        };
        let pick = |setting: Setting, used: bool, auto: f64| match (used, setting) {
            (false, _) => 0.0,
            (true, Setting::Value(v)) => v,
            (true, Setting::Auto) => auto,
        };
        let eta1 = pick(self.eta1, method.uses_eta1(), auto_eta1);
        let eta2 = pick(self.eta2, method.uses_eta2(), auto_eta2);
        let params = SolverParams::new(alpha, eta1, eta2, self.iters).map_err(|e| CliError::config(e.to_string()))?;

        let (certificate, certificate_note) = match beta {
            None => (None, Some("problem declares no growth constant beta".to_string())),
            Some(b) => {
                let c1 = eta1 / (alpha * b);
                if c1 >= 0.5 {
                    (None, Some(format!("eta1 = {eta1} is at least alpha*beta/2, outside the certified range")))
                } else {
                    let inputs = RateInputs::new(lipschitz, b, tau, c1)?;
                    let cert = theorem1_at(&inputs, CertificateKind::Theorem1Stated, alpha, eta2)?;
                    (Some(cert), None)
                }
            }
        };
        Ok(Resolved { params, certificate, certificate_note })
    }
}

/// Several runs over one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemDocument>,
    /// Seeded repetitions for runs on random schedules.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub runs: Vec<RunConfig>,
}

fn default_repetitions() -> usize {
    10
}

impl CompareSpec {
    /// The problem every run shares; per-run documents must agree with it
    /// and with each other.
    pub fn shared_problem(&self) -> Result<ProblemDocument> {
        let mut found = self.problem.as_ref();
        for run in &self.runs {
            if let Some(p) = &run.problem {
                match found {
                    Some(q) if q != p => {
                        return Err(CliError::config(format!(
                            "run '{}' uses a different problem than the others",
                            run.label()
                        )))
                    }
                    Some(_) => {}
                    None => found = Some(p),
                }
            }
        }
        found.cloned().ok_or_else(|| CliError::config("comparison names no problem"))
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.display().to_string(), source })
}
