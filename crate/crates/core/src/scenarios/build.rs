use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_params, sturmian_word, CurveSpec, Initial, Scenario, ScenarioSpec, SturmianParams};
use crate::curves::ParamCurve;
use crate::distortion::{Constant, HypothesisBudget};
use crate::maps::{AffineMap, FramedShear, MapSequence, PolynomialMap, Quadratic1d, Region, SmoothMap, TraceMap, TraceVariant};
use crate::{Error, Matrix, Result};

type Maps = Vec<Arc<dyn SmoothMap>>;

/// Family-provided budget values before user overrides.
#[derive(Default)]
struct Annotations {
    c: Option<f64>,
    l: Option<f64>,
    alpha: Option<f64>,
}

struct Built {
    maps: Maps,
    initial: Initial,
    budget: Annotations,
    word: Option<Vec<u8>>,
    notes: Vec<String>,
}

/// Maps, initial object and budget for `spec`. Identical specs give
/// bit-identical results.
pub fn build_sequence(spec: &ScenarioSpec) -> Result<Scenario> {
    let info = check_params(spec)?;
    if let Some(e) = spec.epsilon {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::param("epsilon", "must lie in (0, 1)"));
        }
    }
    let built = match info.name {
        "identity" => identity(spec)?,
        "1d-quadratic-contraction" => {
            let q = Quadratic1d::new(spec.param("a", 0.5), spec.param("b", 0.125), 0.0, 0.0, 1.0)?;
            quadratic_family(spec, vec![q], vec![0; spec.n])?
        }
        "1d-random-contraction" => random_contraction(spec)?,
        "1d-affine" => affine_1d(spec)?,
        "planar-rotations" => rotations(spec)?,
        "planar-contraction-shear" => contraction_shear(spec)?,
        "sturmian-two-maps" => sturmian(spec)?,
        "fibonacci-trace-map" => {
            let f = TraceMap::new(TraceVariant::Fibonacci, trace_region()?);
            trace_family(spec, vec![f], vec![0; spec.n])?
        }
        "polynomial" => polynomial(spec)?,
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    let sequence = MapSequence::new(built.maps)?;
    if let Some(d) = spec.dimension {
        if d != sequence.dim() {
            return Err(Error::DimensionMismatch {
                expected: sequence.dim(),
                got: d,
            });
        }
    }
    let mut notes = built.notes;
    let user = spec.budget;
    let pick = |name: &str, user: Option<f64>, family: Option<f64>, notes: &mut Vec<String>| -> Result<Option<Constant>> {
        if let Some(v) = user {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("budget.{name}"), "must be finite and nonnegative"));
            }
            notes.push(format!("{name} = {v:e} supplied by the user"));
            return Ok(Some(Constant::analytic(v)));
        }
        Ok(family.filter(|v| v.is_finite()).map(Constant::analytic))
    };
    let budget = HypothesisBudget {
        c: pick("c", user.c, built.budget.c, &mut notes)?,
        l: pick("l", user.l, built.budget.l, &mut notes)?,
        alpha: pick("alpha", user.alpha, built.budget.alpha, &mut notes)?,
        epsilon: spec.epsilon,
    };
    Ok(Scenario {
        spec: spec.clone(),
        sequence,
        initial: built.initial,
        budget,
        word: built.word,
        notes,
    })
}

fn draw(rng: &mut ChaCha8Rng, name: &str, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::param(name, format!("empty range [{lo}, {hi}]")));
    }
    Ok(if lo == hi { lo } else { rng.gen_range(lo..hi) })
}

fn interval(spec: &ScenarioSpec) -> Result<(f64, f64)> {
    if spec.curve.is_some() {
        return Err(Error::param("curve", "one-dimensional families take an interval"));
    }
    if spec.epsilon.is_some() {
        return Err(Error::param("epsilon", "the Hölder variant needs a curve scenario"));
    }
    let [lo, hi] = spec.interval.unwrap_or([0.0, 1.0]);
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    Ok((lo, hi))
}

fn curve(spec: &ScenarioSpec, default: CurveSpec, dim: usize) -> Result<(CurveSpec, ParamCurve)> {
    if spec.interval.is_some() {
        return Err(Error::param("interval", "curve families take a curve"));
    }
    let cs = spec.curve.clone().unwrap_or(default);
    if cs.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cs.dim(),
        });
    }
    let c = cs.build()?;
    Ok((cs, c))
}

/// `Σ L_i` (or `Σ L_i^ε`) when every map contracts lengths by at most `q < 1`.
fn contraction_length(l0: Option<f64>, q: f64, eps: Option<f64>) -> Option<f64> {
    let l0 = l0?;
    Some(match eps {
        None => l0 / (1.0 - q),
        Some(e) => l0.powf(e) / (1.0 - q.powf(e)),
    })
}

fn require_contraction(q: f64) -> Result<()> {
    if q < 1.0 {
        Ok(())
    } else {
        Err(Error::param("family", format!("maps must contract: max ‖Df‖ = {q} ≥ 1")))
    }
}

/// Largest `C` over the maps: `|f''|/|f'|` in dimension one, otherwise the
/// seminorm constant of the plain or Hölder variant.
fn max_constant(maps: &[Arc<dyn SmoothMap>], one_dim: bool, eps: Option<f64>) -> Option<f64> {
    let mut c: f64 = 0.0;
    for m in maps {
        let b = m.analytic_bounds()?;
        c = c.max(match (one_dim, eps) {
            (true, _) => b.log_derivative?,
            (false, None) => b.constant(),
            (false, Some(e)) => b.holder_constant(e),
        });
    }
    Some(c)
}

fn max_c1(maps: &[Arc<dyn SmoothMap>]) -> Option<f64> {
    maps.iter()
        .map(|m| m.analytic_bounds().map(|b| b.c1))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

fn select(pool: &[Arc<dyn SmoothMap>], picks: &[usize]) -> Maps {
    picks.iter().map(|&k| pool[k].clone()).collect()
}

fn letters(word: &[u8]) -> Vec<usize> {
    word.iter().map(|&b| b as usize).collect()
}

fn identity(spec: &ScenarioSpec) -> Result<Built> {
    let d = spec.param("dim", 2.0);
    if !(d >= 1.0 && d.fract() == 0.0 && d <= 16.0) {
        return Err(Error::param("dim", "must be an integer in 1..=16"));
    }
    let d = d as usize;
    let map: Arc<dyn SmoothMap> = Arc::new(AffineMap::identity(d));
    let n = spec.n as f64;
    let (initial, budget) = if d == 1 {
        let (lo, hi) = interval(spec)?;
        let budget = Annotations {
            c: Some(0.0),
            l: Some(n * (hi - lo)),
            alpha: None,
        };
        (Initial::Interval(lo, hi), budget)
    } else {
        let mut to = vec![0.0; d];
        to[0] = 1.0;
        let (cs, c) = curve(spec, CurveSpec::Segment { from: vec![0.0; d], to }, d)?;
        (Initial::Curve(c.clone()), isometry_budget(spec, &cs, &c))
    };
    Ok(Built {
        maps: vec![map; spec.n],
        initial,
        budget,
        word: None,
        notes: vec![],
    })
}

fn isometry_budget(spec: &ScenarioSpec, cs: &CurveSpec, c: &ParamCurve) -> Annotations {
    let n = spec.n as f64;
    Annotations {
        c: Some(1.0),
        l: cs.exact_length().map(|l| n * spec.epsilon.map_or(l, |e| l.powf(e))),
        alpha: c.angle_bound().map(|a| n * a),
    }
}

/// Maps `pool[picks[i]]` on `[0, 1]`; the budget covers every map of the pool.
fn quadratic_family(spec: &ScenarioSpec, pool: Vec<Quadratic1d>, picks: Vec<usize>) -> Result<Built> {
    let (lo, hi) = interval(spec)?;
    for q in &pool {
        let (dmin, _) = q.derivative_range();
        if !(dmin > 0.0) {
            return Err(Error::param("family", "f' must stay positive on [0, 1]"));
        }
        let (f0, f1) = (q.c, q.a + q.b + q.c);
        if !(0.0..=1.0).contains(&f0) || !(0.0..=1.0).contains(&f1) {
            return Err(Error::param("family", "maps must send [0, 1] into itself"));
        }
    }
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::param("interval", "must lie inside [0, 1]"));
    }
    let pool: Maps = pool.into_iter().map(|q| Arc::new(q) as Arc<dyn SmoothMap>).collect();
    let maps = select(&pool, &picks);
    let q = max_c1(&pool).unwrap_or(f64::INFINITY);
    require_contraction(q)?;
    Ok(Built {
        budget: Annotations {
            c: max_constant(&pool, true, None),
            l: contraction_length(Some(hi - lo), q, None),
            alpha: None,
        },
        maps,
        initial: Initial::Interval(lo, hi),
        word: None,
        notes: vec![],
    })
}

fn random_contraction(spec: &ScenarioSpec) -> Result<Built> {
    let p = |k: &str, d: f64| spec.param(k, d);
    let (a_min, a_max, b_min, b_max, c_min, c_max) = (
        p("a_min", 0.3),
        p("a_max", 0.5),
        p("b_min", -0.1),
        p("b_max", 0.15),
        p("c_min", 0.0),
        p("c_max", 0.2),
    );
    if !(a_min + 2.0 * b_min.min(0.0) > 0.0) {
        return Err(Error::param("a_min", "f' = a + 2 b x must stay positive on [0, 1]"));
    }
    if !(c_min >= 0.0 && a_max + b_max + c_max <= 1.0) {
        return Err(Error::param("c_max", "maps must send [0, 1] into itself"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut maps = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = draw(&mut rng, "a", a_min, a_max)?;
        let b = draw(&mut rng, "b", b_min, b_max)?;
        let c = draw(&mut rng, "c", c_min, c_max)?;
        maps.push(Quadratic1d::new(a, b, c, 0.0, 1.0)?);
    }
    quadratic_family(spec, maps, (0..spec.n).collect())
}

fn affine_1d(spec: &ScenarioSpec) -> Result<Built> {
    let slope = spec.param("slope", 0.5);
    if !(slope != 0.0 && slope.abs() < 1.0) {
        return Err(Error::param("slope", "must satisfy 0 < |slope| < 1"));
    }
    let (lo, hi) = interval(spec)?;
    let map = AffineMap::new(Matrix::from_element(1, 1, slope), crate::vector(&[spec.param("offset", 0.25)]))?;
    Ok(Built {
        maps: vec![Arc::new(map); spec.n],
        initial: Initial::Interval(lo, hi),
        budget: Annotations {
            c: Some(0.0),
            l: contraction_length(Some(hi - lo), slope.abs(), None),
            alpha: None,
        },
        word: None,
        notes: vec![],
    })
}

fn rotations(spec: &ScenarioSpec) -> Result<Built> {
    let map = AffineMap::rotation(spec.param("angle", 0.1));
    let default = CurveSpec::Segment {
        from: vec![0.0, 0.0],
        to: vec![0.6, 0.8],
    };
    let (cs, c) = curve(spec, default, 2)?;
    Ok(Built {
        maps: vec![Arc::new(map); spec.n],
        budget: isometry_budget(spec, &cs, &c),
        initial: Initial::Curve(c),
        word: None,
        notes: vec![],
    })
}

fn quarter_circle() -> CurveSpec {
    CurveSpec::CircleArc {
        center: [0.0, 0.0],
        radius: 1.0,
        start: 0.0,
        end: FRAC_PI_2,
    }
}

/// Box invariance of a framed shear on `[-R, R]²`: frame coordinates of the
/// box are bounded by `R√2`, so the image stays inside when
/// `(|a| R√2 + |s| 2R² + |c₁| + |b| R√2 + |c₂|) max(|cos θ|, |sin θ|) ≤ R`.
fn shear_keeps_box(m: &FramedShear, r: f64) -> bool {
    let (sn, cs) = m.frame.sin_cos();
    let reach = (m.a.abs() + m.b.abs()) * r * SQRT_2 + 2.0 * m.s.abs() * r * r + m.shift[0].abs() + m.shift[1].abs();
    reach * sn.abs().max(cs.abs()) <= r
}

/// Analytic budget for framed shears sharing one frame. The angle budget
/// follows the tangent cone `|dη| ≤ τ |dξ|`, which each map sends to
/// `τ' = b τ / (a − σ τ)` with `σ` the shear bound.
fn shear_budget(spec: &ScenarioSpec, shears: &[FramedShear], cs: &CurveSpec, c: &ParamCurve) -> Result<Annotations> {
    let maps: Maps = shears.iter().map(|m| Arc::new(m.clone()) as Arc<dyn SmoothMap>).collect();
    let q = max_c1(&maps).unwrap_or(f64::INFINITY);
    require_contraction(q)?;
    let frame = shears[0].frame;
    let alpha = cs.deviation_from(frame).and_then(|dev| {
        let mut tau = dev.tan();
        let mut total = 0.0;
        for (i, m) in shears.iter().enumerate() {
            let cone = (2.0 * tau.atan()).min(PI);
            total += if i == 0 { cone.min(c.angle_bound().unwrap_or(PI)) } else { cone };
            let denom = m.a - m.shear_bound() * tau;
            if !(denom > 0.0 && m.frame == frame) {
                return None;
            }
            tau = m.b.abs() * tau / denom;
        }
        Some(total)
    });
    Ok(Annotations {
        c: max_constant(&maps, false, spec.epsilon),
        l: contraction_length(cs.exact_length(), q, spec.epsilon),
        alpha,
    })
}

fn contraction_shear(spec: &ScenarioSpec) -> Result<Built> {
    let p = |k: &str, d: f64| spec.param(k, d);
    let frame = p("frame", 0.75 * PI);
    let r = p("radius", 1.5);
    if !(r > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    let (a_min, a_max, b_min, b_max) = (p("a_min", 0.5), p("a_max", 0.6), p("b_min", 0.2), p("b_max", 0.3));
    let (s_max, shift_max) = (p("s_max", 0.03), p("shift_max", 0.03));
    if !(a_min > 0.0 && b_min > 0.0 && s_max >= 0.0 && shift_max >= 0.0) {
        return Err(Error::param("family", "need a_min, b_min > 0 and nonnegative s_max, shift_max"));
    }
    let region = Region::cube(2, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut shears = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = draw(&mut rng, "a", a_min, a_max)?;
        let b = draw(&mut rng, "b", b_min, b_max)?;
        let s = draw(&mut rng, "s", -s_max, s_max)?;
        let c1 = draw(&mut rng, "shift", -shift_max, shift_max)?;
        let c2 = draw(&mut rng, "shift", -shift_max, shift_max)?;
        let m = FramedShear::new(frame, a, b, s, [c1, c2], region.clone())?;
        if !shear_keeps_box(&m, r) {
            return Err(Error::param("radius", "parameter ranges do not keep [-R, R]^2 invariant"));
        }
        shears.push(m);
    }
    let (cs, c) = curve(spec, quarter_circle(), 2)?;
    let budget = shear_budget(spec, &shears, &cs, &c)?;
    Ok(Built {
        maps: shears.into_iter().map(|m| Arc::new(m) as Arc<dyn SmoothMap>).collect(),
        initial: Initial::Curve(c),
        budget,
        word: None,
        notes: vec![],
    })
}

fn trace_region() -> Result<Region> {
    Region::cube(3, 1.05)
}

fn torus_line() -> CurveSpec {
    CurveSpec::TorusLine {
        angles: [0.4, 1.3],
        direction: [1.0, 0.5],
        domain: [0.0, 1.0],
    }
}

fn trace_family(spec: &ScenarioSpec, pool: Vec<TraceMap>, picks: Vec<usize>) -> Result<Built> {
    let (_, c) = curve(spec, torus_line(), 3)?;
    let pool: Maps = pool.into_iter().map(|m| Arc::new(m) as Arc<dyn SmoothMap>).collect();
    Ok(Built {
        maps: select(&pool, &picks),
        initial: Initial::Curve(c),
        budget: Annotations::default(),
        word: None,
        notes: vec!["trace maps carry no analytic seminorm bounds; C and alpha are sampled".to_string()],
    })
}

fn sturmian(spec: &ScenarioSpec) -> Result<Built> {
    let golden = (3.0 - 5f64.sqrt()) / 2.0;
    let params = SturmianParams::new(spec.param("slope", golden), spec.param("intercept", 0.0), spec.n)?;
    let word = sturmian_word(&params);
    let mut built = match spec.variant.as_deref().unwrap_or("planar") {
        "planar" => {
            let region = Region::cube(2, 1.5)?;
            let frame = 0.75 * PI;
            let pair = [
                FramedShear::new(frame, 0.55, 0.25, 0.02, [0.01, 0.0], region.clone())?,
                FramedShear::new(frame, 0.5, 0.3, -0.02, [0.0, 0.01], region)?,
            ];
            let shears: Vec<FramedShear> = word.iter().map(|&b| pair[b as usize].clone()).collect();
            let (cs, c) = curve(spec, quarter_circle(), 2)?;
            let budget = shear_budget(spec, &shears, &cs, &c)?;
            Built {
                maps: shears.into_iter().map(|m| Arc::new(m) as Arc<dyn SmoothMap>).collect(),
                initial: Initial::Curve(c),
                budget,
                word: None,
                notes: vec![],
            }
        }
        "quadratic-1d" => {
            let pair = vec![
                Quadratic1d::new(0.5, 0.125, 0.0, 0.0, 1.0)?,
                Quadratic1d::new(0.4, 0.2, 0.05, 0.0, 1.0)?,
            ];
            quadratic_family(spec, pair, letters(&word))?
        }
        "trace" => trace_family(
            spec,
            vec![
                TraceMap::new(TraceVariant::Fibonacci, trace_region()?),
                TraceMap::new(TraceVariant::Swapped, trace_region()?),
            ],
            letters(&word),
        )?,
        other => return Err(Error::param("variant", format!("unknown variant `{other}`"))),
    };
    built.word = Some(word);
    Ok(built)
}

fn polynomial(spec: &ScenarioSpec) -> Result<Built> {
    let comps = spec
        .components
        .as_ref()
        .ok_or_else(|| Error::param("components", "required by the polynomial family"))?;
    let dim = comps.len();
    let terms = comps
        .iter()
        .map(|c| c.iter().map(|t| (t.coeff, t.exps.clone())).collect())
        .collect();
    let map: Arc<dyn SmoothMap> = Arc::new(PolynomialMap::from_terms(dim, terms)?);
    let initial = if dim == 1 {
        let (lo, hi) = interval(spec)?;
        Initial::Interval(lo, hi)
    } else {
        let cs = spec
            .curve
            .clone()
            .ok_or_else(|| Error::param("curve", "required for polynomial maps of dimension > 1"))?;
        Initial::Curve(curve(spec, cs, dim)?.1)
    };
    Ok(Built {
        maps: vec![map; spec.n],
        initial,
        budget: Annotations::default(),
        word: None,
        notes: vec!["polynomial maps carry no analytic bounds unless supplied in [budget]".to_string()],
    })
}
