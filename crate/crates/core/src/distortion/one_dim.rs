use crate::jets::{jacobian, push_jet2};
use crate::maps::{uniform_grid, MapSequence, SmoothMap};
use crate::{vector, Error, Result};

use super::{
    into_ratio_report, lemma_step_checks, over_budget, BoundReport, Constant, DistortionTrace, EngineKind,
    HypothesisBudget, RatioCheck, RunOptions, StepRecord, Verdicts,
};

const MIN_CHECK_POINTS: usize = 65;

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && hi - lo >= 1e-12 {
        Ok(())
    } else {
        Err(Error::DegenerateInterval { lo, hi })
    }
}

fn derivative(map: &dyn SmoothMap, x: f64) -> Result<f64> {
    Ok(jacobian(map, &vector(&[x]))?[(0, 0)])
}

fn image(map: &dyn SmoothMap, x: f64) -> Result<f64> {
    Ok(map.apply(&vector(&[x]))?[0])
}

/// Grid check that `f'` keeps one sign on `[a, b]`; returns `max |f''| / |f'|`.
fn sign_check(map: &dyn SmoothMap, a: f64, b: f64, points: usize, step: usize) -> Result<f64> {
    let one = vector(&[1.0]);
    let mut sign = 0.0;
    let mut worst = 0.0f64;
    for x in uniform_grid(a, b, points - 1) {
        let jet = push_jet2(map, &vector(&[x]), &one, &one).map_err(|e| Error::at_step(step, e))?;
        let d = jet.first[0];
        if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
            return Err(Error::Hypothesis {
                step,
                reason: format!("derivative of {} vanishes or changes sign near x = {x}", map.label()),
            });
        }
        sign = d.signum();
        worst = worst.max(jet.second[0].abs() / d.abs());
    }
    Ok(worst)
}

/// Sup over sample pairs of `|log(F_n'(x) / F_n'(y))|` against `C L`.
///
/// Interval images come from endpoint images, which is valid because a
/// grid check guards that each `f_j'` keeps its sign on `I_{j−1}`.
pub fn run_1d(
    seq: &MapSequence,
    interval: (f64, f64),
    opts: &RunOptions,
    budget: &HypothesisBudget,
) -> Result<BoundReport> {
    if seq.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: seq.dim(),
        });
    }
    let (lo, hi) = interval;
    check_interval(lo, hi)?;
    let xs0 = uniform_grid(lo, hi, opts.samples.max(2) - 1);
    let mut xs = xs0.clone();
    let mut logs = vec![0.0f64; xs.len()];
    let (mut a, mut b) = (lo, hi);
    let check_points = opts.samples.max(MIN_CHECK_POINTS);
    let mut measured_c = 0.0f64;
    let mut per_step = Vec::with_capacity(seq.len());
    let mut sum_l = 0.0;

    for (i, map) in seq.iter().enumerate() {
        let step = i + 1;
        let at = |e: Error| Error::at_step(step, e);
        measured_c = measured_c.max(sign_check(map.as_ref(), a, b, check_points, step)?);
        let mut lds = Vec::with_capacity(xs.len());
        for x in &xs {
            lds.push(derivative(map.as_ref(), *x).map_err(at)?.abs().ln());
        }
        let (kmin, kmax) = argminmax(&lds);
        per_step.push(StepRecord {
            step_index: step,
            length: b - a,
            length_error: 0.0,
            alpha: None,
            lemma1_increment: 0.0,
            lemma2_increment: lds[kmax] - lds[kmin],
            lemma1_pair: (0, 0),
            lemma2_pair: (kmax, kmin),
            cumulative_log_bound: 0.0,
        });
        sum_l += b - a;
        for (k, x) in xs.iter_mut().enumerate() {
            logs[k] += lds[k];
            *x = image(map.as_ref(), *x).map_err(at)?;
        }
        let (fa, fb) = (image(map.as_ref(), a).map_err(at)?, image(map.as_ref(), b).map_err(at)?);
        (a, b) = (fa.min(fb), fa.max(fb));
    }

    let (kmin, kmax) = argminmax(&logs);
    let sup = logs[kmax] - logs[kmin];
    let mut notes = Vec::new();
    let c = budget.c.unwrap_or(Constant::sampled(measured_c, check_points));
    if budget.c.is_some() && measured_c > c.value * (1.0 + 1e-9) {
        notes.push(format!(
            "sampled max |f''|/|f'| = {measured_c:e} exceeds the supplied C = {:e}",
            c.value
        ));
    }
    let l = budget.l.unwrap_or(Constant::measured(sum_l));
    let exceeded = over_budget("sum of interval lengths", sum_l, &l, opts.tolerance, &mut notes);
    let mut cumulative = 0.0;
    for s in &mut per_step {
        cumulative += c.value * s.length;
        s.cumulative_log_bound = cumulative;
    }
    let trace = DistortionTrace {
        n: seq.len(),
        per_step,
        sum_l,
        sum_alpha: 0.0,
        sum_l_eps: None,
        sup_abs_log_ratio: sup,
        c_used: c.value,
        step_factor: c.value,
        epsilon: None,
        quadrature_allowance: 0.0,
    };
    let used = HypothesisBudget {
        c: Some(c),
        l: Some(l),
        alpha: None,
        epsilon: None,
    };
    let log_k = c.value * l.value;
    let verdict = Verdicts {
        budget: &used,
        empirical: sup,
        log_k,
        tolerance: opts.tolerance,
        notes: &mut notes,
    }
    .decide(exceeded);
    let lemmas = lemma_step_checks(&trace, opts.tolerance);
    let profile = xs0.iter().zip(&logs).map(|(x, l)| (*x, l - logs[0])).collect();
    Ok(BoundReport {
        engine: EngineKind::Derivative1d,
        empirical: sup,
        theoretical_log_k: log_k,
        k: log_k.exp(),
        slack: log_k - sup,
        verdict,
        budget: used,
        trace,
        ratio: None,
        lemmas,
        measured_c: Some(measured_c),
        notes,
        profile,
    })
}

/// `|F_n(b₁) − F_n(a₁)| / |F_n(b₂) − F_n(a₂)|` against `r K^{±1}` with
/// `r = |b₁ − a₁| / |b₂ − a₂|` and `K = e^{2 C L}`.
pub fn interval_ratio_1d(
    seq: &MapSequence,
    interval: (f64, f64),
    sub1: (f64, f64),
    sub2: (f64, f64),
    opts: &RunOptions,
    budget: &HypothesisBudget,
) -> Result<BoundReport> {
    let slack = 1e-12 * (1.0 + interval.0.abs().max(interval.1.abs()));
    for (lo, hi) in [sub1, sub2] {
        check_interval(lo, hi)?;
        if lo < interval.0 - slack || hi > interval.1 + slack {
            return Err(Error::param(
                "subinterval",
                format!("[{lo}, {hi}] is not inside [{}, {}]", interval.0, interval.1),
            ));
        }
    }
    let base = run_1d(seq, interval, opts, budget)?;
    let end = |x: f64| -> Result<f64> { Ok(seq.apply_all(&vector(&[x]))?[0]) };
    let first = (end(sub1.1)? - end(sub1.0)?).abs();
    let second = (end(sub2.1)? - end(sub2.0)?).abs();
    let check = RatioCheck {
        ratio: first / second,
        r: (sub1.1 - sub1.0) / (sub2.1 - sub2.0),
        lower: 0.0,
        upper: 0.0,
        first_length: first,
        second_length: second,
    };
    Ok(into_ratio_report(base, EngineKind::IntervalRatio1d, check, opts.tolerance))
}

/// Indices of the first minimum and first maximum.
pub(crate) fn argminmax(xs: &[f64]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for (k, x) in xs.iter().enumerate() {
        if *x < xs[lo] {
            lo = k;
        }
        if *x > xs[hi] {
            hi = k;
        }
    }
    (lo, hi)
}
