//! Reproducible map sequences for the distortion engines.
//!
//! A [`ScenarioSpec`] names a builtin family, its numeric parameters, the
//! sequence length and a seed; [`build_sequence`] turns it into maps, an
//! initial interval or curve, and a hypothesis budget whose constants are
//! analytic wherever the family admits closed-form bounds.

mod build;
mod sturmian;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::curves::ParamCurve;
use crate::distortion::HypothesisBudget;
use crate::maps::MapSequence;
use crate::{vector, Error, Result};

pub use build::build_sequence;
pub use sturmian::{sturmian_word, SturmianParams};

/// Initial curve of a curve scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    Segment {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    CircleArc {
        center: [f64; 2],
        radius: f64,
        start: f64,
        end: f64,
    },
    /// One coefficient list per component, lowest degree first.
    Polynomial {
        coeffs: Vec<Vec<f64>>,
        domain: [f64; 2],
    },
    /// `t ↦ (cos A, cos B, cos(A − B))` with `(A, B)` moving linearly.
    TorusLine {
        angles: [f64; 2],
        direction: [f64; 2],
        domain: [f64; 2],
    },
}

impl CurveSpec {
    pub fn build(&self) -> Result<ParamCurve> {
        match self {
            CurveSpec::Segment { from, to } => ParamCurve::segment(vector(from), vector(to)),
            CurveSpec::CircleArc {
                center,
                radius,
                start,
                end,
            } => ParamCurve::circle_arc(*center, *radius, *start, *end),
            CurveSpec::Polynomial { coeffs, domain } => ParamCurve::polynomial(coeffs.clone(), (domain[0], domain[1])),
            CurveSpec::TorusLine {
                angles,
                direction,
                domain,
            } => ParamCurve::torus_line(*angles, *direction, (domain[0], domain[1])),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CurveSpec::Segment { from, .. } => from.len(),
            CurveSpec::CircleArc { .. } => 2,
            CurveSpec::Polynomial { coeffs, .. } => coeffs.len(),
            CurveSpec::TorusLine { .. } => 3,
        }
    }

    /// Exact length when it has a closed form.
    pub fn exact_length(&self) -> Option<f64> {
        match self {
            CurveSpec::Segment { from, to } => Some((vector(to) - vector(from)).norm()),
            CurveSpec::CircleArc { radius, start, end, .. } => Some(radius.abs() * (end - start).abs()),
            _ => None,
        }
    }

    /// Largest angle between a tangent and the line at angle `frame`, when
    /// it is known in closed form and stays below `π/2`.
    pub fn deviation_from(&self, frame: f64) -> Option<f64> {
        let dist = |phi: f64| {
            let r = (phi - frame).rem_euclid(std::f64::consts::PI);
            r.min(std::f64::consts::PI - r)
        };
        let dev = match self {
            CurveSpec::Segment { from, to } if from.len() == 2 => dist((to[1] - from[1]).atan2(to[0] - from[0])),
            CurveSpec::CircleArc { start, end, .. } => {
                let (lo, hi) = (start.min(*end) + FRAC_PI_2, start.max(*end) + FRAC_PI_2);
                // The deviation peaks at `π/2` where the tangent is orthogonal to the frame.
                let k = ((lo - frame - FRAC_PI_2) / std::f64::consts::PI).ceil();
                if frame + FRAC_PI_2 + k * std::f64::consts::PI <= hi {
                    return None;
                }
                dist(lo).max(dist(hi))
            }
            _ => return None,
        };
        (dev < FRAC_PI_2).then_some(dev)
    }
}

/// User-asserted budget constants; they override family annotations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub c: Option<f64>,
    pub l: Option<f64>,
    pub alpha: Option<f64>,
}

/// One monomial `coeff · x^exps` of a custom polynomial map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

/// Declarative description of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub family: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub dimension: Option<usize>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Numeric family parameters; keys are checked against the family schema.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Map pair of `sturmian-two-maps`: `planar`, `quadratic-1d` or `trace`.
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    /// Hölder exponent; the budget then follows the Hölder variant.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub budget: BudgetSpec,
    /// Components of the `polynomial` family.
    #[serde(default)]
    pub components: Option<Vec<Vec<TermSpec>>>,
}

impl ScenarioSpec {
    pub fn new(family: &str, n: usize) -> Self {
        ScenarioSpec {
            family: family.to_string(),
            name: None,
            dimension: None,
            n,
            seed: 0,
            params: BTreeMap::new(),
            variant: None,
            interval: None,
            curve: None,
            epsilon: None,
            budget: BudgetSpec::default(),
            components: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_curve(mut self, curve: CurveSpec) -> Self {
        self.curve = Some(curve);
        self
    }

    pub fn with_variant(mut self, variant: &str) -> Self {
        self.variant = Some(variant.to_string());
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub(crate) fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

/// Interval or curve fed to the engines.
#[derive(Debug, Clone)]
pub enum Initial {
    Interval(f64, f64),
    Curve(ParamCurve),
}

/// Output of [`build_sequence`].
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub sequence: MapSequence,
    pub initial: Initial,
    pub budget: HypothesisBudget,
    /// Driving word of the Sturmian family.
    pub word: Option<Vec<u8>>,
    /// Remarks on how the budget was obtained.
    pub notes: Vec<String>,
}

/// Schema entry of a builtin family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyInfo {
    pub name: &'static str,
    /// `None` when set by the `dim` parameter or the components.
    pub dimension: Option<usize>,
    pub description: &'static str,
    /// Parameter names with defaults.
    pub params: Vec<(&'static str, f64)>,
}

/// The builtin families with their parameter schemas.
pub fn families() -> Vec<FamilyInfo> {
    let golden = (3.0 - 5f64.sqrt()) / 2.0;
    vec![
        FamilyInfo {
            name: "identity",
            dimension: None,
            description: "n copies of the identity map",
            params: vec![("dim", 2.0)],
        },
        FamilyInfo {
            name: "1d-quadratic-contraction",
            dimension: Some(1),
            description: "n copies of x -> a x + b x^2 on [0, 1]",
            params: vec![("a", 0.5), ("b", 0.125)],
        },
        FamilyInfo {
            name: "1d-random-contraction",
            dimension: Some(1),
            description: "seeded quadratics x -> a x + b x^2 + c mapping [0, 1] into itself",
            params: vec![
                ("a_min", 0.3),
                ("a_max", 0.5),
                ("b_min", -0.1),
                ("b_max", 0.15),
                ("c_min", 0.0),
                ("c_max", 0.2),
            ],
        },
        FamilyInfo {
            name: "1d-affine",
            dimension: Some(1),
            description: "n copies of x -> slope x + offset",
            params: vec![("slope", 0.5), ("offset", 0.25)],
        },
        FamilyInfo {
            name: "planar-rotations",
            dimension: Some(2),
            description: "n copies of the rotation by `angle`",
            params: vec![("angle", 0.1)],
        },
        FamilyInfo {
            name: "planar-contraction-shear",
            dimension: Some(2),
            description: "seeded framed shears with analytic C, L and alpha on the box [-R, R]^2",
            params: vec![
                ("frame", 0.75 * std::f64::consts::PI),
                ("a_min", 0.5),
                ("a_max", 0.6),
                ("b_min", 0.2),
                ("b_max", 0.3),
                ("s_max", 0.03),
                ("shift_max", 0.03),
                ("radius", 1.5),
            ],
        },
        FamilyInfo {
            name: "sturmian-two-maps",
            dimension: None,
            description: "map A where a mechanical word reads 0, map B where it reads 1 (variant planar, quadratic-1d or trace)",
            params: vec![("slope", golden), ("intercept", 0.0)],
        },
        FamilyInfo {
            name: "fibonacci-trace-map",
            dimension: Some(3),
            description: "n copies of (x, y, z) -> (2xy - z, x, y) along a curve on the invariant surface G = 0",
            params: vec![],
        },
        FamilyInfo {
            name: "polynomial",
            dimension: None,
            description: "n copies of a user-defined polynomial map given by `components`",
            params: vec![],
        },
    ]
}

pub(crate) fn check_params(spec: &ScenarioSpec) -> Result<FamilyInfo> {
    let info = families()
        .into_iter()
        .find(|f| f.name == spec.family)
        .ok_or_else(|| Error::UnknownFamily(spec.family.clone()))?;
    for (key, value) in &spec.params {
        if !info.params.iter().any(|(k, _)| k == key) {
            return Err(Error::param(key.clone(), format!("not a parameter of `{}`", info.name)));
        }
        if !value.is_finite() {
            return Err(Error::param(key.clone(), "must be finite"));
        }
    }
    if spec.n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    Ok(info)
}
