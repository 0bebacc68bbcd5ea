//! Smooth maps, map sequences and the seminorms that bound them.

mod families;
mod seminorms;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

pub use families::{AffineMap, Composed, FnMap, FramedShear, Monomial, PolynomialMap, Quadratic1d, TraceMap, TraceVariant};
pub(crate) use seminorms::inverse_norm_of;
pub use seminorms::{
    direction_pairs, estimate_seminorms, inverse_jacobian_norm, min_singular_value, operator_norm, sample_seminorms,
    SeminormEstimate, SINGULAR_REL_DET,
};

/// Where a constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed-form bound (or a user assertion treated as one).
    Analytic,
    /// Computed directly from the run, accurate up to rounding or quadrature.
    Measured,
    /// Maximum over a finite sample; a lower bound of the true supremum.
    Sampled { resolution: usize },
}

impl Provenance {
    /// Whether a bound built on this constant can certify a verdict.
    pub fn is_upper_bound(&self) -> bool {
        !matches!(self, Provenance::Sampled { .. })
    }
}

/// Validity region of a map: all of space or a closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Everywhere,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

static EVERYWHERE: Region = Region::Everywhere;

impl Region {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::param("region", "lo and hi must have equal, nonzero length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::param("region", "need finite bounds with lo <= hi"));
        }
        Ok(Region::Box { lo, hi })
    }

    /// The cube `[-r, r]^d`.
    pub fn cube(d: usize, r: f64) -> Result<Self> {
        Region::new_box(vec![-r; d], vec![r; d])
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Region::Everywhere => true,
            Region::Box { lo, hi } => {
                x.len() == lo.len()
                    && x.iter().zip(lo.iter().zip(hi)).all(|(c, (a, b))| {
                        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
                        *c >= a - slack && *c <= b + slack
                    })
            }
        }
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        match (self, other) {
            (Region::Everywhere, _) => true,
            (Region::Box { .. }, Region::Everywhere) => false,
            (Region::Box { lo, hi }, Region::Box { lo: l2, hi: h2 }) => {
                lo.len() == l2.len()
                    && lo.iter().zip(l2).all(|(a, b)| a <= b)
                    && hi.iter().zip(h2).all(|(a, b)| a >= b)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Region::Everywhere => f64::INFINITY,
            Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Smallest box holding all points, padded by `pad` on every side.
    pub fn bounding(points: &[Vector], pad: f64) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::param("points", "empty point set"))?;
        let mut lo: Vec<f64> = first.iter().copied().collect();
        let mut hi = lo.clone();
        for p in points {
            for (k, c) in p.iter().enumerate() {
                lo[k] = lo[k].min(*c);
                hi[k] = hi[k].max(*c);
            }
        }
        Region::new_box(lo.iter().map(|c| c - pad).collect(), hi.iter().map(|c| c + pad).collect())
    }

    /// Tensor grid with `resolution` points per axis, endpoints included.
    /// Refining `r -> 2r - 1` yields a superset of points, bit for bit.
    pub fn grid(&self, resolution: usize) -> Result<Vec<Vector>> {
        let (lo, hi) = match self {
            Region::Everywhere => return Err(Error::param("region", "cannot sample an unbounded region")),
            Region::Box { lo, hi } => (lo, hi),
        };
        if resolution < 2 {
            return Err(Error::param("resolution", "need at least 2 points per axis"));
        }
        if lo.iter().zip(hi).any(|(a, b)| a >= b) {
            return Err(Error::param("region", "degenerate box"));
        }
        let d = lo.len();
        let axes: Vec<Vec<f64>> = (0..d).map(|k| uniform_grid(lo[k], hi[k], resolution - 1)).collect();
        let total = resolution.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = Vector::zeros(d);
            for (k, axis) in axes.iter().enumerate() {
                p[k] = axis[rem % resolution];
                rem /= resolution;
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Smallest per-axis grid spacing at the given resolution.
    pub fn spacing(&self, resolution: usize) -> f64 {
        match self {
            Region::Everywhere => f64::INFINITY,
            Region::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| (b - a) / (resolution.max(2) - 1) as f64)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// `m + 1` points from `a` to `b`; point `k` is `a + (b - a) k / m`, the last is exactly `b`.
pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    let m = m.max(1);
    (0..=m)
        .map(|k| if k == m { b } else { a + ((b - a) * k as f64) / m as f64 })
        .collect()
}

/// Closed-form seminorm bounds carried by a map, valid on `region`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    /// Upper bound of `‖D_x f‖`.
    pub c1: f64,
    /// Upper bound of `‖(D_x f)^{-1}‖`.
    pub c1_inv: f64,
    /// Upper bound of `‖D²_x f(u, v)‖` over unit `u, v`.
    pub c2: f64,
    /// One-dimensional maps only: upper bound of `|f''| / |f'|`.
    pub log_derivative: Option<f64>,
    pub region: Region,
}

impl AnalyticBounds {
    /// Hölder bound of `Df` with exponent `eps`: on a convex region `Df` is
    /// `c2`-Lipschitz, so `‖D_x f − D_y f‖ / ‖x − y‖^eps ≤ c2 · diam^(1 − eps)`.
    pub fn holder(&self, eps: f64) -> f64 {
        if self.c2 == 0.0 {
            0.0
        } else {
            self.c2 * self.region.diameter().powf(1.0 - eps)
        }
    }

    /// `max(c1, c1_inv, c2)`.
    pub fn constant(&self) -> f64 {
        self.c1.max(self.c1_inv).max(self.c2)
    }

    /// `max(c1, c1_inv, holder(eps))`.
    pub fn holder_constant(&self, eps: f64) -> f64 {
        self.c1.max(self.c1_inv).max(self.holder(eps))
    }
}

/// A map `R^d -> R^d` with optional analytic derivative data.
pub trait SmoothMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Raw evaluation; no region or finiteness checks.
    fn eval(&self, x: &Vector) -> Vector;

    fn label(&self) -> String;

    fn region(&self) -> &Region {
        &EVERYWHERE
    }

    fn jacobian_exact(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    /// `D²_x f(u, v)`.
    fn second_exact(&self, _x: &Vector, _u: &Vector, _v: &Vector) -> Option<Vector> {
        None
    }

    fn inverse(&self, _y: &Vector) -> Option<Vector> {
        None
    }

    fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        None
    }

    /// Checked evaluation: dimension, region membership and finiteness.
    fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(self.label()));
        }
        if !self.region().contains(x) {
            return Err(Error::OutOfRegion {
                map: self.label(),
                point: x.iter().copied().collect(),
            });
        }
        let y = self.eval(x);
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(self.label()));
        }
        Ok(y)
    }
}

/// Nonempty list of maps of one dimension, applied in order `f_1, f_2, ...`.
#[derive(Debug, Clone)]
pub struct MapSequence {
    maps: Vec<Arc<dyn SmoothMap>>,
}

impl MapSequence {
    pub fn new(maps: Vec<Arc<dyn SmoothMap>>) -> Result<Self> {
        let d = maps.first().ok_or(Error::EmptySequence)?.dim();
        if let Some(bad) = maps.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(MapSequence { maps })
    }

    /// `n` copies of one map.
    pub fn repeat(map: Arc<dyn SmoothMap>, n: usize) -> Result<Self> {
        MapSequence::new(vec![map; n])
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn maps(&self) -> &[Arc<dyn SmoothMap>] {
        &self.maps
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn SmoothMap>> {
        self.maps.iter()
    }

    /// First `n` maps.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        MapSequence::new(self.maps[..n.min(self.maps.len())].to_vec())
    }

    /// Orbit `[x, F_1(x), ..., F_n(x)]`. Failures carry the 1-based step index.
    pub fn apply_sequence(&self, x: &Vector) -> Result<Vec<Vector>> {
        let mut orbit = Vec::with_capacity(self.maps.len() + 1);
        orbit.push(x.clone());
        for (i, map) in self.maps.iter().enumerate() {
            let next = map.apply(orbit.last().unwrap()).map_err(|e| Error::at_step(i + 1, e))?;
            orbit.push(next);
        }
        Ok(orbit)
    }

    /// `F_n(x)`.
    pub fn apply_all(&self, x: &Vector) -> Result<Vector> {
        Ok(self.apply_sequence(x)?.pop().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_orbit_is_constant() {
        let seq = MapSequence::repeat(Arc::new(AffineMap::identity(2)), 3).unwrap();
        let orbit = seq.apply_sequence(&vector(&[0.5, 0.5])).unwrap();
        assert_eq!(orbit.len(), 4);
        assert!(orbit.iter().all(|p| *p == vector(&[0.5, 0.5])));
    }

    #[test]
    fn halving_orbit() {
        let half = AffineMap::linear(Matrix::from_element(1, 1, 0.5));
        let seq = MapSequence::repeat(Arc::new(half), 3).unwrap();
        let orbit: Vec<f64> = seq.apply_sequence(&vector(&[1.0])).unwrap().iter().map(|p| p[0]).collect();
        assert_eq!(orbit, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn random_affine_orbit_matches_stepwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut mats = Vec::new();
        let mut maps: Vec<Arc<dyn SmoothMap>> = Vec::new();
        for _ in 0..10 {
            let a = Matrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
            let b = Vector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            mats.push((a.clone(), b.clone()));
            maps.push(Arc::new(AffineMap::new(a, b).unwrap()));
        }
        let seq = MapSequence::new(maps).unwrap();
        let x0 = vector(&[0.3, -0.7]);
        let orbit = seq.apply_sequence(&x0).unwrap();
        let mut x = x0;
        for (i, (a, b)) in mats.iter().enumerate() {
            let mut y = Vector::zeros(2);
            for r in 0..2 {
                y[r] = a[(r, 0)] * x[0] + a[(r, 1)] * x[1] + b[r];
            }
            x = y;
            assert!((&orbit[i + 1] - &x).norm() <= 1e-15 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn failing_step_is_reported() {
        let boxed = AffineMap::linear(Matrix::from_element(1, 1, 2.0))
            .with_region(Region::new_box(vec![-1.0], vec![1.0]).unwrap());
        let seq = MapSequence::repeat(Arc::new(boxed), 3).unwrap();
        let err = seq.apply_sequence(&vector(&[0.6])).unwrap_err();
        assert_eq!(err.step(), Some(2));
        assert!(matches!(err.root(), Error::OutOfRegion { .. }));
    }

    #[test]
    fn sequences_reject_mixed_dimensions() {
        let maps: Vec<Arc<dyn SmoothMap>> = vec![Arc::new(AffineMap::identity(1)), Arc::new(AffineMap::identity(2))];
        assert!(MapSequence::new(maps).is_err());
        assert_eq!(MapSequence::new(vec![]).unwrap_err(), Error::EmptySequence);
    }

    #[test]
    fn grid_refinement_is_superset() {
        let r = Region::new_box(vec![-0.3, 0.0], vec![1.7, 2.5]).unwrap();
        let coarse = r.grid(5).unwrap();
        let fine = r.grid(9).unwrap();
        assert!(coarse.iter().all(|p| fine.contains(p)));
    }
}
