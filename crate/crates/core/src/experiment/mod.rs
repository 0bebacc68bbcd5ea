//! Declarative experiments: a TOML config selects a scenario and an engine;
//! the runner produces a [`Report`] with fixed-format JSON and CSV output.
//!
//! ```toml
//! [scenario]
//! family = "1d-quadratic-contraction"
//! n = 100
//!
//! [engine]
//! kind = "derivative-1d"
//! samples = 1000
//! ```

mod output;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curves::reparameterize_natural;
use crate::distortion::{
    arc_ratio_curve, interval_ratio_1d, run_1d, run_curve, run_curve_holder, BoundReport, EngineKind, RunOptions,
    Verdict,
};
use crate::scenarios::{build_sequence, BudgetSpec, Initial, Scenario, ScenarioSpec};
use crate::Error;

pub use output::{format_float, profile_csv, steps_csv, to_json, write_outputs, Written, STEPS_HEADER};

/// Engine names accepted in `[engine] kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineName {
    #[serde(rename = "derivative-1d", alias = "thm-2.1")]
    Derivative1d,
    #[serde(rename = "interval-ratio-1d", alias = "thm-2.2")]
    IntervalRatio1d,
    #[serde(rename = "curve", alias = "main-thm")]
    Curve,
    #[serde(rename = "arc-ratio", alias = "nbdp")]
    ArcRatio,
    #[serde(rename = "holder")]
    Holder,
}

impl EngineName {
    pub fn kind(self) -> EngineKind {
        match self {
            EngineName::Derivative1d => EngineKind::Derivative1d,
            EngineName::IntervalRatio1d => EngineKind::IntervalRatio1d,
            EngineName::Curve => EngineKind::CurveDerivative,
            EngineName::ArcRatio => EngineKind::ArcRatio,
            EngineName::Holder => EngineKind::Holder,
        }
    }
}

fn default_samples() -> usize {
    RunOptions::default().samples
}

fn default_resolution() -> usize {
    RunOptions::default().resolution
}

fn default_seminorm_resolution() -> usize {
    RunOptions::default().seminorm_resolution
}

fn default_tolerance() -> f64 {
    RunOptions::default().tolerance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub kind: EngineName,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_seminorm_resolution")]
    pub seminorm_resolution: usize,
    /// Two subintervals as fractions of the initial interval (ratio of
    /// interval lengths) or of the initial curve's arc length.
    #[serde(default)]
    pub subintervals: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_tolerance")]
    pub absolute: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            absolute: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "OutputConfig::default_report")]
    pub report: String,
    #[serde(default = "OutputConfig::default_steps")]
    pub steps: String,
    #[serde(default = "OutputConfig::default_profile")]
    pub profile: String,
}

impl OutputConfig {
    fn default_report() -> String {
        "report.json".into()
    }

    fn default_steps() -> String {
        "steps.csv".into()
    }

    fn default_profile() -> String {
        "profile.csv".into()
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            report: Self::default_report(),
            steps: Self::default_steps(),
            profile: Self::default_profile(),
        }
    }
}

/// Top-level config. `[budget]` entries override the scenario's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub engine: EngineConfig,
    #[serde(default)]
    pub budget: BudgetSpec,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Failure of an experiment, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis failure{}: {source}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Hypothesis { step: Option<usize>, source: Error },
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// 2 for hypothesis failures, 3 for everything the user must fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Hypothesis { .. } => 2,
            ExperimentError::Config(_) | ExperimentError::Io(_) => 3,
        }
    }
}

impl From<Error> for ExperimentError {
    fn from(e: Error) -> Self {
        if e.is_hypothesis_failure() {
            ExperimentError::Hypothesis { step: e.step(), source: e }
        } else {
            ExperimentError::Config(e.to_string())
        }
    }
}

/// Exit code for a verdict: 0 holds, 1 violated, 2 unverified.
pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::BoundHolds => 0,
        Verdict::BoundViolated => 1,
        Verdict::HypothesisUnverified => 2,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Command-line overrides; the echoed config records them.
    pub fn apply_overrides(&mut self, samples: Option<usize>, resolution: Option<usize>, seed: Option<u64>) {
        if let Some(s) = samples {
            self.engine.samples = s;
        }
        if let Some(r) = resolution {
            self.engine.resolution = r;
        }
        if let Some(s) = seed {
            self.scenario.seed = s;
        }
    }

    /// Scenario spec with `[budget]` merged in.
    pub fn scenario_spec(&self) -> ScenarioSpec {
        let mut spec = self.scenario.clone();
        let (b, top) = (&mut spec.budget, self.budget);
        b.c = top.c.or(b.c);
        b.l = top.l.or(b.l);
        b.alpha = top.alpha.or(b.alpha);
        spec
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            samples: self.engine.samples,
            resolution: self.engine.resolution,
            tolerance: self.tolerance.absolute,
            seminorm_resolution: self.engine.seminorm_resolution,
        }
    }

    /// Field-level checks that need no computation.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        let e = &self.engine;
        if e.samples < 2 {
            return bad("engine.samples: need at least 2");
        }
        if e.resolution < 2 {
            return bad("engine.resolution: need at least 2");
        }
        if e.seminorm_resolution < 2 {
            return bad("engine.seminorm_resolution: need at least 2");
        }
        if !(self.tolerance.absolute >= 0.0 && self.tolerance.absolute.is_finite()) {
            return bad("tolerance.absolute: must be finite and nonnegative");
        }
        if e.kind.kind().is_ratio() {
            let Some(subs) = e.subintervals else {
                return bad("engine.subintervals: missing, required by ratio engines");
            };
            for [lo, hi] in subs {
                if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                    return bad("engine.subintervals: each must be [lo, hi] with 0 <= lo < hi <= 1");
                }
            }
        }
        if e.kind == EngineName::Holder && self.scenario.epsilon.is_none() {
            return bad("scenario.epsilon: missing, required by engine holder");
        }
        if self.scenario.epsilon.is_some() && !matches!(e.kind, EngineName::Holder | EngineName::ArcRatio) {
            return bad("scenario.epsilon: only the holder and arc-ratio engines use it");
        }
        for name in ["report", "steps", "profile"] {
            let v = match name {
                "report" => &self.output.report,
                "steps" => &self.output.steps,
                _ => &self.output.profile,
            };
            if v.is_empty() || v.contains('/') || v.contains('\\') {
                return bad(&format!("output.{name}: must be a plain file name"));
            }
        }
        Ok(())
    }

    /// Validate and build the scenario without running an engine.
    pub fn check(&self) -> Result<Scenario, ExperimentError> {
        self.validate()?;
        let sc = build_sequence(&self.scenario_spec()).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let one_dim = self.engine.kind.kind().is_one_dim();
        match (&sc.initial, one_dim) {
            (Initial::Interval(..), false) => Err(ExperimentError::Config(format!(
                "engine.kind: {} needs a curve scenario",
                self.engine.kind.kind().as_str()
            ))),
            (Initial::Curve(_), true) => Err(ExperimentError::Config(format!(
                "engine.kind: {} needs a one-dimensional scenario",
                self.engine.kind.kind().as_str()
            ))),
            _ => Ok(sc),
        }
    }
}

/// Config echo plus engine output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// Driving word of Sturmian scenarios, as `0`/`1` characters.
    pub word: Option<String>,
    pub scenario_notes: Vec<String>,
    #[serde(flatten)]
    pub result: BoundReport,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        verdict_exit_code(self.result.verdict)
    }
}

fn fraction(range: (f64, f64), f: [f64; 2]) -> (f64, f64) {
    let w = range.1 - range.0;
    (range.0 + f[0] * w, range.0 + f[1] * w)
}

/// Build the scenario and run the configured engine.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let sc = config.check()?;
    let opts = config.run_options();
    let seq = &sc.sequence;
    let subs = config.engine.subintervals.unwrap_or([[0.0, 0.5], [0.5, 1.0]]);
    let result = match (&sc.initial, config.engine.kind) {
        (Initial::Interval(lo, hi), EngineName::Derivative1d) => run_1d(seq, (*lo, *hi), &opts, &sc.budget)?,
        (Initial::Interval(lo, hi), EngineName::IntervalRatio1d) => {
            let r = (*lo, *hi);
            interval_ratio_1d(seq, r, fraction(r, subs[0]), fraction(r, subs[1]), &opts, &sc.budget)?
        }
        (Initial::Curve(c), EngineName::Curve) => run_curve(seq, c, &opts, &sc.budget)?,
        (Initial::Curve(c), EngineName::Holder) => run_curve_holder(seq, c, &opts, &sc.budget)?,
        (Initial::Curve(c), EngineName::ArcRatio) => {
            let total = reparameterize_natural(c, opts.resolution)?.total_length();
            let r = (0.0, total);
            arc_ratio_curve(seq, c, fraction(r, subs[0]), fraction(r, subs[1]), &opts, &sc.budget)?
        }
        _ => unreachable!("check() pairs engines with scenario kinds"),
    };
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        seed: config.scenario.seed,
        config: config.clone(),
        word: sc.word.map(|w| w.iter().map(|b| char::from(b'0' + b)).collect()),
        scenario_notes: sc.notes,
        result,
    })
}

#[cfg(test)]
mod tests;
