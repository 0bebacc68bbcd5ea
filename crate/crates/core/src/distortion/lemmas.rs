use serde::{Deserialize, Serialize};

use super::DistortionTrace;

/// Both per-step inequalities at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub step_index: usize,
    /// Angle lemma: increment vs `factor · α_i`.
    pub lemma1_lhs: f64,
    pub lemma1_rhs: f64,
    pub lemma1_ok: bool,
    /// Length lemma: increment vs `factor · L_i` (or `L_i^ε`).
    pub lemma2_lhs: f64,
    pub lemma2_rhs: f64,
    pub lemma2_ok: bool,
    /// Tolerance used at this step, including the quadrature allowance.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub step_index: usize,
    /// 1 (angle) or 2 (length).
    pub lemma: u8,
    /// Sample indices `(x, y)` of the offending pair.
    pub pair: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub passed: bool,
    pub steps: Vec<LemmaCheck>,
    pub first_violation: Option<LemmaViolation>,
}

/// Checks both per-step lemmas on every step of a trace.
///
/// The right-hand sides do not depend on the pair, so the pair attaining
/// the maximal increment is the first violating pair whenever one exists.
pub fn lemma_step_checks(trace: &DistortionTrace, tolerance: f64) -> LemmaReport {
    let f = trace.step_factor;
    let budget_len = |l: f64| match trace.epsilon {
        Some(e) => l.max(0.0).powf(e),
        None => l,
    };
    let mut steps = Vec::with_capacity(trace.per_step.len());
    let mut first_violation = None;
    for s in &trace.per_step {
        let allowance = f * (budget_len(s.length + s.length_error) - budget_len(s.length));
        let tol = tolerance + allowance;
        let rhs1 = f * s.alpha.unwrap_or(0.0);
        let rhs2 = f * budget_len(s.length);
        let ok1 = s.lemma1_increment <= rhs1 + tol;
        let ok2 = s.lemma2_increment <= rhs2 + tol;
        if first_violation.is_none() {
            if !ok1 {
                first_violation = Some(LemmaViolation {
                    step_index: s.step_index,
                    lemma: 1,
                    pair: s.lemma1_pair,
                    lhs: s.lemma1_increment,
                    rhs: rhs1,
                });
            } else if !ok2 {
                first_violation = Some(LemmaViolation {
                    step_index: s.step_index,
                    lemma: 2,
                    pair: s.lemma2_pair,
                    lhs: s.lemma2_increment,
                    rhs: rhs2,
                });
            }
        }
        steps.push(LemmaCheck {
            step_index: s.step_index,
            lemma1_lhs: s.lemma1_increment,
            lemma1_rhs: rhs1,
            lemma1_ok: ok1,
            lemma2_lhs: s.lemma2_increment,
            lemma2_rhs: rhs2,
            lemma2_ok: ok2,
            tolerance: tol,
        });
    }
    LemmaReport {
        passed: first_violation.is_none(),
        steps,
        first_violation,
    }
}
