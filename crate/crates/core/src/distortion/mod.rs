//! Distortion engines.
//!
//! * [`run_1d`] and [`interval_ratio_1d`]: compositions of interval maps, with
//!   `K = e^{C L}` for derivative ratios and `K²` for image-length ratios.
//! * [`run_curve`], [`run_curve_holder`] and [`arc_ratio_curve`]: curves in
//!   `R^d`, with `log K = C² (α + L)` and `K²` for arc-length ratios.
//!
//! All derivative products are accumulated as sums of logarithms.

mod curve;
mod lemmas;
mod one_dim;

use serde::{Deserialize, Serialize};

use crate::maps::Provenance;

pub use curve::{arc_ratio_curve, run_curve, run_curve_holder};
pub use lemmas::{lemma_step_checks, LemmaCheck, LemmaReport, LemmaViolation};
pub use one_dim::{interval_ratio_1d, run_1d};

/// `e^{C L}`.
pub fn bound_1d(c: f64, l: f64) -> f64 {
    (c * l).exp()
}

/// `e^{C² (α + L)}`.
pub fn bound_curve(c: f64, l: f64, alpha: f64) -> f64 {
    (c * c * (alpha + l)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundHolds,
    BoundViolated,
    HypothesisUnverified,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::BoundHolds => "bound-holds",
            Verdict::BoundViolated => "bound-violated",
            Verdict::HypothesisUnverified => "hypothesis-unverified",
        }
    }
}

/// Which inequality a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    /// `|log(F_n'(x) / F_n'(y))| ≤ C L`.
    #[serde(rename = "derivative-1d")]
    Derivative1d,
    /// Image-length ratio of two subintervals within `r K^{±1}`, `K = e^{2 C L}`.
    #[serde(rename = "interval-ratio-1d")]
    IntervalRatio1d,
    /// `|log(‖u_n‖ / ‖v_n‖)| ≤ C² (α + L)`.
    CurveDerivative,
    /// Arc-length ratio of two sub-arcs within `r K^{±1}`, `K = e^{2 C² (α + L)}`.
    ArcRatio,
    /// Curve derivative form with `‖Df‖_ε` in `C` and `Σ L_i^ε` as the length budget.
    Holder,
}

impl EngineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Derivative1d => "derivative-1d",
            EngineKind::IntervalRatio1d => "interval-ratio-1d",
            EngineKind::CurveDerivative => "curve-derivative",
            EngineKind::ArcRatio => "arc-ratio",
            EngineKind::Holder => "holder",
        }
    }

    pub fn is_ratio(&self) -> bool {
        matches!(self, EngineKind::IntervalRatio1d | EngineKind::ArcRatio)
    }

    pub fn is_one_dim(&self) -> bool {
        matches!(self, EngineKind::Derivative1d | EngineKind::IntervalRatio1d)
    }
}

/// A hypothesis constant and where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

impl Constant {
    pub fn analytic(value: f64) -> Self {
        Constant {
            value,
            provenance: Provenance::Analytic,
        }
    }

    pub fn measured(value: f64) -> Self {
        Constant {
            value,
            provenance: Provenance::Measured,
        }
    }

    pub fn sampled(value: f64, resolution: usize) -> Self {
        Constant {
            value,
            provenance: Provenance::Sampled { resolution },
        }
    }
}

/// Constants `C`, `L`, `α` (and `ε`). Missing ones are measured by the engine.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisBudget {
    pub c: Option<Constant>,
    pub l: Option<Constant>,
    pub alpha: Option<Constant>,
    pub epsilon: Option<f64>,
}

impl HypothesisBudget {
    fn constants(&self) -> impl Iterator<Item = &Constant> {
        [&self.c, &self.l, &self.alpha].into_iter().flatten()
    }

    /// True when every present constant is an upper bound.
    pub fn certifiable(&self) -> bool {
        self.constants().all(|c| c.provenance.is_upper_bound())
    }
}

/// Sampling controls shared by the engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Sample points (both endpoints included) for the sup over pairs.
    pub samples: usize,
    /// Quadrature and max-angle resolution along curves.
    pub resolution: usize,
    /// Absolute log-space tolerance for bound comparisons.
    pub tolerance: f64,
    /// Grid points per axis when a seminorm must be sampled.
    pub seminorm_resolution: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            samples: 33,
            resolution: 256,
            tolerance: 1e-9,
            seminorm_resolution: 9,
        }
    }
}

/// Quantities for map `f_i`, `i = step_index ≥ 1`, acting on `F_{i−1}(I_0)`
/// or `F_{i−1} ∘ γ_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    /// `|I_{i−1}|` or `L(F_{i−1} ∘ γ_0)`.
    pub length: f64,
    /// Quadrature error estimate of `length` (zero in 1D).
    pub length_error: f64,
    /// `α(F_{i−1} ∘ γ_0)`; absent in 1D.
    pub alpha: Option<f64>,
    /// Max over sample pairs of `|log(‖Du‖/‖Dv‖)| − |log(‖u‖/‖v‖)|`, clamped at 0.
    pub lemma1_increment: f64,
    /// Max over ordered sample pairs of `|log(‖D_x f v‖/‖D_y f v‖)|`.
    pub lemma2_increment: f64,
    /// Sample indices attaining the lemma increments.
    pub lemma1_pair: (usize, usize),
    pub lemma2_pair: (usize, usize),
    /// Theoretical bound summed over steps `1..=step_index`.
    pub cumulative_log_bound: f64,
}

/// Per-step records and totals of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionTrace {
    pub n: usize,
    pub per_step: Vec<StepRecord>,
    pub sum_l: f64,
    pub sum_alpha: f64,
    /// `Σ L_i^ε` for the Hölder variant.
    pub sum_l_eps: Option<f64>,
    pub sup_abs_log_ratio: f64,
    /// `C` used in the bound.
    pub c_used: f64,
    /// Multiplier of the per-step budgets: `C` in 1D, `C²` for curves.
    pub step_factor: f64,
    pub epsilon: Option<f64>,
    /// `step_factor · Σ` quadrature error estimates.
    pub quadrature_allowance: f64,
}

/// `ratio` must lie in `[lower, upper] = [r / K, r K]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub ratio: f64,
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    /// Absolute lengths of the two images.
    pub first_length: f64,
    pub second_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub engine: EngineKind,
    /// Sup of `|log ratio|` (derivative forms) or `|log(ratio / r)|` (ratio forms).
    pub empirical: f64,
    pub theoretical_log_k: f64,
    pub k: f64,
    /// `theoretical_log_k − empirical`.
    pub slack: f64,
    pub verdict: Verdict,
    /// Constants actually used, with provenance.
    pub budget: HypothesisBudget,
    pub trace: DistortionTrace,
    pub ratio: Option<RatioCheck>,
    pub lemmas: LemmaReport,
    /// Sampled `C` when one was computed (1D always, curves when `C` was not supplied).
    pub measured_c: Option<f64>,
    pub notes: Vec<String>,
    /// `(parameter, log ratio against the first sample)`.
    pub profile: Vec<(f64, f64)>,
}

pub(crate) struct Verdicts<'a> {
    pub budget: &'a HypothesisBudget,
    pub empirical: f64,
    pub log_k: f64,
    pub tolerance: f64,
    pub notes: &'a mut Vec<String>,
}

impl Verdicts<'_> {
    /// Certified comparison only when every constant is an upper bound and
    /// no measured sum exceeds its budget.
    pub fn decide(self, exceeded: bool) -> Verdict {
        if !self.log_k.is_finite() {
            self.notes.push("bound is infinite; hypotheses cannot be verified".into());
            return Verdict::HypothesisUnverified;
        }
        if !self.budget.certifiable() {
            self.notes
                .push("a budget constant is a sampled lower bound; comparison is not certified".into());
            return Verdict::HypothesisUnverified;
        }
        if exceeded {
            return Verdict::HypothesisUnverified;
        }
        if self.empirical <= self.log_k + self.tolerance {
            Verdict::BoundHolds
        } else {
            Verdict::BoundViolated
        }
    }
}

/// `true` when `measured` exceeds the supplied budget (and records why).
pub(crate) fn over_budget(name: &str, measured: f64, budget: &Constant, tol: f64, notes: &mut Vec<String>) -> bool {
    if measured > budget.value * (1.0 + 1e-12) + tol {
        notes.push(format!("measured {name} = {measured:e} exceeds the budget {:e}", budget.value));
        true
    } else {
        false
    }
}

/// Turn a derivative-form report into a ratio-form report with `log K` doubled.
pub(crate) fn into_ratio_report(mut base: BoundReport, engine: EngineKind, check: RatioCheck, tolerance: f64) -> BoundReport {
    let log_k = 2.0 * base.theoretical_log_k;
    let empirical = (check.ratio.ln() - check.r.ln()).abs();
    base.verdict = match base.verdict {
        Verdict::HypothesisUnverified => Verdict::HypothesisUnverified,
        _ if empirical <= log_k + tolerance => Verdict::BoundHolds,
        _ => Verdict::BoundViolated,
    };
    base.engine = engine;
    base.empirical = empirical;
    base.theoretical_log_k = log_k;
    base.k = log_k.exp();
    base.slack = log_k - empirical;
    base.ratio = Some(RatioCheck {
        lower: check.r * (-log_k).exp(),
        upper: check.r * log_k.exp(),
        ..check
    });
    base
}

/// Evenly spaced indices `round(k m / (s − 1))`, `k = 0..s`, deduplicated.
pub(crate) fn sample_indices(m: usize, samples: usize) -> Vec<usize> {
    let s = samples.max(2);
    let mut out: Vec<usize> = (0..s)
        .map(|k| ((k as f64 * m as f64) / (s - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests;
