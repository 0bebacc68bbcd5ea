//! Regular C¹ curves, their length and maximal tangent angle, arc-length
//! reparameterization and pushforward under maps.
//!
//! Tangents of pushed-forward curves always come from the chain rule,
//! never from differencing positions.

mod natural;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use crate::jets::{push_jet1, Jet1};
use crate::maps::{uniform_grid, SmoothMap};
use crate::{Error, Result, Vector};

pub use natural::{reparameterize_natural, NaturalCurve};

/// Default number of sample intervals for curve functionals.
pub const DEFAULT_RESOLUTION: usize = 512;

/// Position and velocity access for a curve on a closed parameter interval.
pub trait Curve: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    /// `(γ(t), γ'(t))`.
    fn jet(&self, t: f64) -> Result<Jet1>;
    fn label(&self) -> String;
}

/// Shared handle to a curve plus an optional analytic upper bound on its
/// maximal tangent angle.
#[derive(Clone, Debug)]
pub struct ParamCurve {
    inner: Arc<dyn Curve>,
    angle_bound: Option<f64>,
    resolution: usize,
}

type PosFn = dyn Fn(f64) -> Vector + Send + Sync;

struct FnCurve {
    dim: usize,
    domain: (f64, f64),
    label: String,
    pos: Arc<PosFn>,
    vel: Arc<PosFn>,
}

impl fmt::Debug for FnCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCurve")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Curve for FnCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn jet(&self, t: f64) -> Result<Jet1> {
        Ok(Jet1 {
            value: (self.pos)(t),
            deriv: (self.vel)(t),
        })
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

#[derive(Debug)]
struct Pushed {
    base: ParamCurve,
    map: Arc<dyn SmoothMap>,
}

impl Curve for Pushed {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn domain(&self) -> (f64, f64) {
        self.base.domain()
    }

    fn jet(&self, t: f64) -> Result<Jet1> {
        let Jet1 { value, deriv } = self.base.jet(t)?;
        let out = push_jet1(self.map.as_ref(), &value, &deriv)?;
        if out.deriv.norm() == 0.0 && deriv.norm() > 0.0 {
            return Err(Error::SingularJacobian {
                point: value.iter().copied().collect(),
                rel_det: 0.0,
            });
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("{} ∘ {}", self.map.label(), self.base.label())
    }
}

#[derive(Debug)]
struct Restricted {
    base: ParamCurve,
    domain: (f64, f64),
}

impl Curve for Restricted {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn jet(&self, t: f64) -> Result<Jet1> {
        self.base.jet(t)
    }

    fn label(&self) -> String {
        format!("{}|[{}, {}]", self.base.label(), self.domain.0, self.domain.1)
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::DegenerateInterval { lo: a, hi: b })
    }
}

impl ParamCurve {
    pub fn new(curve: Arc<dyn Curve>) -> Result<Self> {
        let (a, b) = curve.domain();
        check_domain(a, b)?;
        Ok(ParamCurve {
            inner: curve,
            angle_bound: None,
            resolution: DEFAULT_RESOLUTION,
        })
    }

    /// Curve from position and velocity closures.
    pub fn from_fn(
        dim: usize,
        domain: (f64, f64),
        label: &str,
        pos: impl Fn(f64) -> Vector + Send + Sync + 'static,
        vel: impl Fn(f64) -> Vector + Send + Sync + 'static,
    ) -> Result<Self> {
        ParamCurve::new(Arc::new(FnCurve {
            dim,
            domain,
            label: label.to_string(),
            pos: Arc::new(pos),
            vel: Arc::new(vel),
        }))
    }

    /// `t ↦ origin + t · velocity` on `domain`.
    pub fn line(origin: Vector, velocity: Vector, domain: (f64, f64)) -> Result<Self> {
        if origin.len() != velocity.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                got: velocity.len(),
            });
        }
        if velocity.norm() == 0.0 {
            return Err(Error::Irregular { t: domain.0 });
        }
        let d = origin.len();
        let v = velocity.clone();
        Ok(ParamCurve::from_fn(d, domain, "line", move |t| &origin + &velocity * t, move |_| v.clone())?
            .with_angle_bound(0.0))
    }

    /// Segment from `from` to `to` on `[0, 1]`.
    pub fn segment(from: Vector, to: Vector) -> Result<Self> {
        let v = &to - &from;
        ParamCurve::line(from, v, (0.0, 1.0))
    }

    /// `t ↦ center + r (cos t, sin t)` for `t ∈ [start, end]`.
    pub fn circle_arc(center: [f64; 2], radius: f64, start: f64, end: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", "must be positive"));
        }
        let [cx, cy] = center;
        let c = ParamCurve::from_fn(
            2,
            (start, end),
            "circle-arc",
            move |t| Vector::from_column_slice(&[cx + radius * t.cos(), cy + radius * t.sin()]),
            move |t| Vector::from_column_slice(&[-radius * t.sin(), radius * t.cos()]),
        )?;
        Ok(c.with_angle_bound((end - start).min(std::f64::consts::PI)))
    }

    /// Component `k` is `Σ_j coeffs[k][j] t^j`.
    pub fn polynomial(coeffs: Vec<Vec<f64>>, domain: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| c.is_empty()) {
            return Err(Error::param("coefficients", "need at least one coefficient per component"));
        }
        let d = coeffs.len();
        let deriv: Vec<Vec<f64>> = coeffs
            .iter()
            .map(|c| c.iter().enumerate().skip(1).map(|(j, a)| a * j as f64).collect())
            .collect();
        let horner = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, a| acc * t + a);
        ParamCurve::from_fn(
            d,
            domain,
            "polynomial",
            move |t| Vector::from_iterator(d, coeffs.iter().map(|c| horner(c, t))),
            move |t| Vector::from_iterator(d, deriv.iter().map(|c| horner(c, t))),
        )
    }

    /// Image of the torus line `(A, B) = angles + t · direction` under
    /// `(A, B) ↦ (cos A, cos B, cos(A − B))`.
    pub fn torus_line(angles: [f64; 2], direction: [f64; 2], domain: (f64, f64)) -> Result<Self> {
        let [a0, b0] = angles;
        let [da, db] = direction;
        ParamCurve::from_fn(
            3,
            domain,
            "torus-line",
            move |t| {
                let (a, b) = (a0 + t * da, b0 + t * db);
                Vector::from_column_slice(&[a.cos(), b.cos(), (a - b).cos()])
            },
            move |t| {
                let (a, b) = (a0 + t * da, b0 + t * db);
                Vector::from_column_slice(&[-a.sin() * da, -b.sin() * db, -(a - b).sin() * (da - db)])
            },
        )
    }

    /// Attach an analytic upper bound for the maximal tangent angle.
    pub fn with_angle_bound(mut self, alpha: f64) -> Self {
        self.angle_bound = Some(alpha);
        self
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution.max(2);
        self
    }

    pub fn angle_bound(&self) -> Option<f64> {
        self.angle_bound
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    /// `(γ(t), γ'(t))`, no regularity check.
    pub fn jet(&self, t: f64) -> Result<Jet1> {
        let j = self.inner.jet(t)?;
        if j.value.iter().chain(j.deriv.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(self.label()));
        }
        Ok(j)
    }

    pub fn position(&self, t: f64) -> Result<Vector> {
        Ok(self.jet(t)?.value)
    }

    /// `(γ(t), γ'(t))` with `γ'(t) ≠ 0` enforced.
    pub fn regular_jet(&self, t: f64) -> Result<Jet1> {
        let j = self.jet(t)?;
        if j.deriv.norm() == 0.0 {
            return Err(Error::Irregular { t });
        }
        Ok(j)
    }

    /// `t ↦ f(γ(t))`, tangent by the chain rule.
    pub fn pushforward(&self, map: Arc<dyn SmoothMap>) -> Result<Self> {
        if map.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                got: self.dim(),
            });
        }
        Ok(ParamCurve {
            inner: Arc::new(Pushed {
                base: self.clone(),
                map,
            }),
            angle_bound: None,
            resolution: self.resolution,
        })
    }

    /// Same curve on the subinterval `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let (lo, hi) = self.domain();
        check_domain(a, b)?;
        if a < lo || b > hi {
            return Err(Error::param("domain", format!("[{a}, {b}] is not inside [{lo}, {hi}]")));
        }
        Ok(ParamCurve {
            inner: Arc::new(Restricted {
                base: self.clone(),
                domain: (a, b),
            }),
            angle_bound: self.angle_bound,
            resolution: self.resolution,
        })
    }

    /// Parameters `a + (b − a) k / m`, `k = 0..=m`.
    pub fn sample_params(&self, m: usize) -> Vec<f64> {
        let (a, b) = self.domain();
        uniform_grid(a, b, m)
    }
}

fn even_at_least(n: usize, min: usize) -> usize {
    let n = n.max(min);
    n + n % 2
}

/// Length with the Richardson error estimate, from `2N + 1` speed samples
/// where `N` is `resolution` rounded up to even.
pub fn length_with_error(curve: &ParamCurve, resolution: usize) -> Result<(f64, f64)> {
    let n = even_at_least(resolution, 2);
    let (a, b) = curve.domain();
    let speeds = curve
        .sample_params(2 * n)
        .into_iter()
        .map(|t| Ok(curve.regular_jet(t)?.deriv.norm()))
        .collect::<Result<Vec<f64>>>()?;
    quadrature::simpson_richardson(&speeds, a, b)
}

/// `∫_a^b ‖γ'(t)‖ dt`.
pub fn length(curve: &ParamCurve, resolution: usize) -> Result<f64> {
    Ok(length_with_error(curve, resolution)?.0)
}

/// Angle between two nonzero vectors, `2 atan2(‖û − v̂‖, ‖û + v̂‖)`;
/// accurate near `0` and `π` and exactly `0` for parallel inputs.
pub fn angle_between(u: &Vector, v: &Vector) -> f64 {
    let (uh, vh) = (u / u.norm(), v / v.norm());
    2.0 * (&uh - &vh).norm().atan2((&uh + &vh).norm())
}

/// Largest angle between tangent directions at the `resolution + 1` grid
/// parameters. A lower bound for the supremum over the continuum.
pub fn max_angle(curve: &ParamCurve, resolution: usize) -> Result<f64> {
    let dirs = curve
        .sample_params(resolution.max(1))
        .into_iter()
        .map(|t| {
            let d = curve.regular_jet(t)?.deriv;
            let n = d.norm();
            Ok(d / n)
        })
        .collect::<Result<Vec<Vector>>>()?;
    Ok(max_pairwise_angle(&dirs))
}

/// Largest pairwise angle among unit vectors.
pub fn max_pairwise_angle(units: &[Vector]) -> f64 {
    let mut best = 0.0f64;
    for (i, u) in units.iter().enumerate() {
        for v in &units[i + 1..] {
            let (mut minus, mut plus) = (0.0, 0.0);
            for (a, b) in u.iter().zip(v.iter()) {
                minus += (a - b) * (a - b);
                plus += (a + b) * (a + b);
            }
            best = best.max(2.0 * minus.sqrt().atan2(plus.sqrt()));
        }
    }
    best
}

#[cfg(test)]
mod tests;
