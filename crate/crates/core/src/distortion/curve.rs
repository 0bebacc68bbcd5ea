use std::sync::Arc;

use crate::curves::quadrature::simpson_richardson;
use crate::curves::{length_with_error, max_pairwise_angle, reparameterize_natural, ParamCurve};
use crate::jets::jacobian;
use crate::maps::{inverse_norm_of, sample_seminorms, MapSequence, Region, SmoothMap};
use crate::{Error, Matrix, Result, Vector};

use super::one_dim::argminmax;
use super::{
    into_ratio_report, lemma_step_checks, over_budget, sample_indices, BoundReport, Constant, DistortionTrace,
    EngineKind, HypothesisBudget, RatioCheck, RunOptions, StepRecord, Verdicts,
};

/// Tangent bundle of `F_i ∘ γ_0` on a uniform parameter grid: positions,
/// unit directions, and `log ‖(F_i ∘ γ_0)'(t)‖`.
struct Bundle {
    params: Vec<f64>,
    points: Vec<Vector>,
    dirs: Vec<Vector>,
    log_speed: Vec<f64>,
    /// `log ‖γ_0'(t)‖`; subtracting it gives the natural-parameter log norm.
    base_log: Vec<f64>,
}

impl Bundle {
    fn new(curve: &ParamCurve, m: usize) -> Result<Self> {
        let params = curve.sample_params(m);
        let mut b = Bundle {
            points: Vec::with_capacity(params.len()),
            dirs: Vec::with_capacity(params.len()),
            log_speed: Vec::with_capacity(params.len()),
            base_log: Vec::with_capacity(params.len()),
            params,
        };
        for &t in &b.params {
            let j = curve.regular_jet(t)?;
            let n = j.deriv.norm();
            b.points.push(j.value);
            b.dirs.push(j.deriv / n);
            b.log_speed.push(n.ln());
            b.base_log.push(n.ln());
        }
        Ok(b)
    }

    fn natural_log(&self, k: usize) -> f64 {
        self.log_speed[k] - self.base_log[k]
    }
}

struct StepMeasure {
    increment1: f64,
    pair1: (usize, usize),
    increment2: f64,
    pair2: (usize, usize),
}

/// Lemma increments over ordered sample pairs `(p, q)`, `p ≠ q`.
fn lemma_increments(b: &Bundle, jacs: &[Matrix], idx: &[usize]) -> StepMeasure {
    let mut out = StepMeasure {
        increment1: 0.0,
        pair1: (0, 0),
        increment2: 0.0,
        pair2: (0, 0),
    };
    let log_ju: Vec<f64> = idx.iter().map(|&k| (&jacs[k] * &b.dirs[k]).norm().ln()).collect();
    for (pi, &p) in idx.iter().enumerate() {
        for (qi, &q) in idx.iter().enumerate() {
            if pi == qi {
                continue;
            }
            let log_jv_x = (&jacs[p] * &b.dirs[q]).norm().ln();
            let prev = b.natural_log(p) - b.natural_log(q);
            let d1 = (log_ju[pi] - log_jv_x + prev).abs() - prev.abs();
            let d2 = (log_jv_x - log_ju[qi]).abs();
            if d1 > out.increment1 {
                out.increment1 = d1;
                out.pair1 = (pi, qi);
            }
            if d2 > out.increment2 {
                out.increment2 = d2;
                out.pair2 = (pi, qi);
            }
        }
    }
    out
}

fn sampled_constant(map: &dyn SmoothMap, points: &[Vector], resolution: usize, epsilon: Option<f64>) -> Result<f64> {
    let spread = Region::bounding(points, 0.0)?.diameter();
    let region = Region::bounding(points, 1e-9 + 1e-3 * spread)?;
    let est = sample_seminorms(map, &region, resolution, epsilon)?;
    Ok(match est.holder {
        Some((_, h)) => est.c1.max(est.c1_inv).max(h),
        None => est.constant(),
    })
}

fn check_curve(seq: &MapSequence, gamma0: &ParamCurve) -> Result<()> {
    if seq.dim() != gamma0.dim() {
        return Err(Error::DimensionMismatch {
            expected: seq.dim(),
            got: gamma0.dim(),
        });
    }
    Ok(())
}

fn core(
    seq: &MapSequence,
    gamma0: &ParamCurve,
    opts: &RunOptions,
    budget: &HypothesisBudget,
    epsilon: Option<f64>,
) -> Result<BoundReport> {
    check_curve(seq, gamma0)?;
    if let Some(e) = epsilon {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::param("epsilon", "must lie in (0, 1)"));
        }
    }
    let n_half = opts.resolution.max(2) + opts.resolution % 2;
    let m = 2 * n_half;
    let (a, b) = gamma0.domain();
    let mut bundle = Bundle::new(gamma0, m)?;
    let idx = sample_indices(m, opts.samples);
    let budget_len = |l: f64| epsilon.map_or(l, |e| l.powf(e));

    let mut per_step = Vec::with_capacity(seq.len());
    let mut measured_c: Option<f64> = None;
    for (i, map) in seq.iter().enumerate() {
        let step = i + 1;
        let at = |e: Error| Error::at_step(step, e);
        let speeds: Vec<f64> = bundle.log_speed.iter().map(|l| l.exp()).collect();
        let (length, length_error) = simpson_richardson(&speeds, a, b)?;
        let alpha = max_pairwise_angle(&bundle.dirs);

        if budget.c.is_none() {
            let c = sampled_constant(map.as_ref(), &bundle.points, opts.seminorm_resolution, epsilon).map_err(at)?;
            measured_c = Some(measured_c.map_or(c, |m: f64| m.max(c)));
        }

        let jacs = bundle
            .points
            .iter()
            .map(|x| jacobian(map.as_ref(), x))
            .collect::<Result<Vec<Matrix>>>()
            .map_err(at)?;
        for &k in &idx {
            inverse_norm_of(&jacs[k], &bundle.points[k]).map_err(at)?;
        }
        let lm = lemma_increments(&bundle, &jacs, &idx);
        per_step.push(StepRecord {
            step_index: step,
            length,
            length_error,
            alpha: Some(alpha),
            lemma1_increment: lm.increment1,
            lemma2_increment: lm.increment2,
            lemma1_pair: lm.pair1,
            lemma2_pair: lm.pair2,
            cumulative_log_bound: 0.0,
        });

        for k in 0..bundle.points.len() {
            let w = &jacs[k] * &bundle.dirs[k];
            let wn = w.norm();
            if !(wn > 0.0 && wn.is_finite()) {
                return Err(at(Error::SingularJacobian {
                    point: bundle.points[k].iter().copied().collect(),
                    rel_det: 0.0,
                }));
            }
            bundle.log_speed[k] += wn.ln();
            bundle.dirs[k] = w / wn;
            bundle.points[k] = map.apply(&bundle.points[k]).map_err(at)?;
        }
    }

    let finals: Vec<f64> = idx.iter().map(|&k| bundle.natural_log(k)).collect();
    let (kmin, kmax) = argminmax(&finals);
    let sup = finals[kmax] - finals[kmin];

    let mut notes = Vec::new();
    let sum_l: f64 = per_step.iter().map(|s| s.length).sum();
    let sum_l_eps = epsilon.map(|_| per_step.iter().map(|s| budget_len(s.length)).sum::<f64>());
    let sum_alpha: f64 = per_step.iter().map(|s| s.alpha.unwrap_or(0.0)).sum();
    let len_error: f64 = per_step
        .iter()
        .map(|s| budget_len(s.length + s.length_error) - budget_len(s.length))
        .sum();
    let measured_len = sum_l_eps.unwrap_or(sum_l);

    let c = match (budget.c, measured_c) {
        (Some(c), _) => c,
        (None, Some(m)) => Constant::sampled(m, opts.seminorm_resolution),
        (None, None) => unreachable!("sequence is nonempty"),
    };
    let l = budget.l.unwrap_or(Constant::measured(measured_len));
    let alpha = budget.alpha.unwrap_or(Constant::sampled(sum_alpha, m));
    let factor = c.value * c.value;
    let name = if epsilon.is_some() { "sum of L_i^eps" } else { "sum of lengths" };
    let mut exceeded = over_budget(name, measured_len, &l, opts.tolerance + len_error, &mut notes);
    exceeded |= over_budget("sum of max angles", sum_alpha, &alpha, opts.tolerance, &mut notes);
    if epsilon.is_some() {
        notes.push("budget sums run over i = 0..n-1".into());
    }

    let mut cumulative = 0.0;
    for s in &mut per_step {
        cumulative += factor * (s.alpha.unwrap_or(0.0) + budget_len(s.length));
        s.cumulative_log_bound = cumulative;
    }
    let allowance = factor * len_error;
    let trace = DistortionTrace {
        n: seq.len(),
        per_step,
        sum_l,
        sum_alpha,
        sum_l_eps,
        sup_abs_log_ratio: sup,
        c_used: c.value,
        step_factor: factor,
        epsilon,
        quadrature_allowance: allowance,
    };
    let used = HypothesisBudget {
        c: Some(c),
        l: Some(l),
        alpha: Some(alpha),
        epsilon,
    };
    let log_k = factor * (alpha.value + l.value);
    let verdict_tol = opts.tolerance + if budget.l.is_none() { allowance } else { 0.0 };
    let verdict = Verdicts {
        budget: &used,
        empirical: sup,
        log_k,
        tolerance: verdict_tol,
        notes: &mut notes,
    }
    .decide(exceeded);
    let lemmas = lemma_step_checks(&trace, opts.tolerance);
    let profile = idx
        .iter()
        .zip(&finals)
        .map(|(&k, r)| (bundle.params[k], r - finals[0]))
        .collect();
    Ok(BoundReport {
        engine: if epsilon.is_some() {
            EngineKind::Holder
        } else {
            EngineKind::CurveDerivative
        },
        empirical: sup,
        theoretical_log_k: log_k,
        k: log_k.exp(),
        slack: log_k - sup,
        verdict,
        budget: used,
        trace,
        ratio: None,
        lemmas,
        measured_c,
        notes,
        profile,
    })
}

/// Sup over sample pairs of `|log(‖(F_n ∘ γ_0)'(x)‖ / ‖(F_n ∘ γ_0)'(y)‖)|`
/// for the natural parameterization of `gamma0`, against `C² (α + L)`.
///
/// `gamma0` may have any regular parameterization: only unit tangents enter
/// the ratios, and lengths and angles do not depend on the parameter.
/// Missing budget constants are measured: `L` by quadrature, `α` and `C`
/// by sampling (lower bounds, so the verdict is then at best unverified).
pub fn run_curve(
    seq: &MapSequence,
    gamma0: &ParamCurve,
    opts: &RunOptions,
    budget: &HypothesisBudget,
) -> Result<BoundReport> {
    core(seq, gamma0, opts, budget, None)
}

/// [`run_curve`] with `‖Df‖_ε` in place of `‖f‖₂` and `Σ L_i^ε` as the
/// length budget. Requires `budget.epsilon`.
pub fn run_curve_holder(
    seq: &MapSequence,
    gamma0: &ParamCurve,
    opts: &RunOptions,
    budget: &HypothesisBudget,
) -> Result<BoundReport> {
    let eps = budget
        .epsilon
        .ok_or_else(|| Error::param("epsilon", "required by the Hölder engine"))?;
    core(seq, gamma0, opts, budget, Some(eps))
}

/// Ratio of the image arc lengths of `γ_0([a₁, b₁])` and `γ_0([a₂, b₂])`
/// under `F_n`, against `r K^{±1}` with `r = |b₁ − a₁| / |b₂ − a₂|` and
/// `K = e^{2 C² (α + L)}`. Subintervals are in arc length along `gamma0`.
/// With `budget.epsilon` set, `C` and `L` follow the Hölder variant.
pub fn arc_ratio_curve(
    seq: &MapSequence,
    gamma0: &ParamCurve,
    sub1: (f64, f64),
    sub2: (f64, f64),
    opts: &RunOptions,
    budget: &HypothesisBudget,
) -> Result<BoundReport> {
    check_curve(seq, gamma0)?;
    let natural = reparameterize_natural(gamma0, opts.resolution.max(2))?;
    let total = natural.total_length();
    let slack = 1e-12 * total.max(1.0);
    for (lo, hi) in [sub1, sub2] {
        if !(hi - lo >= 1e-12) {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        if lo < -slack || hi > total + slack {
            return Err(Error::param("subinterval", format!("[{lo}, {hi}] is not inside [0, {total}]")));
        }
    }
    let base = core(seq, gamma0, opts, budget, budget.epsilon)?;
    let mut image = gamma0.clone();
    for map in seq.iter() {
        image = image.pushforward(Arc::clone(map))?;
    }
    let arc = |(lo, hi): (f64, f64)| -> Result<(f64, f64)> {
        let t0 = natural.param_at(lo.clamp(0.0, total))?;
        let t1 = natural.param_at(hi.clamp(0.0, total))?;
        length_with_error(&image.restrict(t0, t1)?, opts.resolution)
    };
    let (first, e1) = arc(sub1)?;
    let (second, e2) = arc(sub2)?;
    let check = RatioCheck {
        ratio: first / second,
        r: (sub1.1 - sub1.0) / (sub2.1 - sub2.0),
        lower: 0.0,
        upper: 0.0,
        first_length: first,
        second_length: second,
    };
    let tol = opts.tolerance + e1 / first + e2 / second;
    Ok(into_ratio_report(base, EngineKind::ArcRatio, check, tol))
}
