use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{min_singular_value, operator_norm, AnalyticBounds, Region, SmoothMap};
use crate::{Error, Matrix, Result, Vector};

/// `x ↦ A x + b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    matrix: Matrix,
    offset: Vector,
    region: Region,
    label: String,
}

impl AffineMap {
    pub fn new(matrix: Matrix, offset: Vector) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::param("matrix", "must be square"));
        }
        if offset.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: offset.len(),
            });
        }
        Ok(AffineMap {
            matrix,
            offset,
            region: Region::Everywhere,
            label: "affine".into(),
        })
    }

    pub fn linear(matrix: Matrix) -> Self {
        let d = matrix.nrows();
        AffineMap::new(matrix, Vector::zeros(d)).expect("square matrix")
    }

    pub fn identity(d: usize) -> Self {
        AffineMap::linear(Matrix::identity(d, d)).with_label("identity")
    }

    /// Planar rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        AffineMap::linear(Matrix::from_row_slice(2, 2, &[c, -s, s, c])).with_label(&format!("rotation({angle})"))
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

impl SmoothMap for AffineMap {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eval(&self, x: &Vector) -> Vector {
        &self.matrix * x + &self.offset
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.matrix.clone())
    }

    fn second_exact(&self, _x: &Vector, _u: &Vector, _v: &Vector) -> Option<Vector> {
        Some(Vector::zeros(self.dim()))
    }

    fn inverse(&self, y: &Vector) -> Option<Vector> {
        self.matrix.clone().lu().solve(&(y - &self.offset))
    }

    fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        let smin = min_singular_value(&self.matrix);
        Some(AnalyticBounds {
            c1: operator_norm(&self.matrix),
            c1_inv: if smin > 0.0 { 1.0 / smin } else { f64::INFINITY },
            c2: 0.0,
            log_derivative: (self.dim() == 1).then_some(0.0),
            region: self.region.clone(),
        })
    }
}

/// `x ↦ c + a x + b x²` on an interval.
#[derive(Debug, Clone)]
pub struct Quadratic1d {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    region: Region,
}

impl Quadratic1d {
    pub fn new(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Result<Self> {
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::param("coefficients", "must be finite"));
        }
        Ok(Quadratic1d {
            a,
            b,
            c,
            region: Region::new_box(vec![lo], vec![hi])?,
        })
    }

    fn derivative(&self, x: f64) -> f64 {
        self.a + 2.0 * self.b * x
    }

    fn bounds_1d(&self) -> (f64, f64) {
        match &self.region {
            Region::Box { lo, hi } => (lo[0], hi[0]),
            Region::Everywhere => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Smallest and largest `|f'|` on the region; `f'` is affine so the
    /// extremes sit at the endpoints unless it changes sign in between.
    pub fn derivative_range(&self) -> (f64, f64) {
        let (lo, hi) = self.bounds_1d();
        let (dl, dh) = (self.derivative(lo), self.derivative(hi));
        let max = dl.abs().max(dh.abs());
        let min = if dl.signum() != dh.signum() || dl == 0.0 || dh == 0.0 {
            0.0
        } else {
            dl.abs().min(dh.abs())
        };
        (min, max)
    }
}

impl SmoothMap for Quadratic1d {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector) -> Vector {
        let t = x[0];
        Vector::from_element(1, self.c + t * (self.a + self.b * t))
    }

    fn label(&self) -> String {
        format!("quadratic({} + {} x + {} x^2)", self.c, self.a, self.b)
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_element(1, 1, self.derivative(x[0])))
    }

    fn second_exact(&self, _x: &Vector, u: &Vector, v: &Vector) -> Option<Vector> {
        Some(Vector::from_element(1, 2.0 * self.b * u[0] * v[0]))
    }

    // Root on the branch where f' has the sign of `a`.
    fn inverse(&self, y: &Vector) -> Option<Vector> {
        let rhs = y[0] - self.c;
        if self.b == 0.0 {
            return (self.a != 0.0).then(|| Vector::from_element(1, rhs / self.a));
        }
        let disc = self.a * self.a + 4.0 * self.b * rhs;
        if disc < 0.0 {
            return None;
        }
        let denom = self.a + self.a.signum() * disc.sqrt();
        (denom != 0.0).then(|| Vector::from_element(1, 2.0 * rhs / denom))
    }

    fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        let (min, max) = self.derivative_range();
        let c2 = 2.0 * self.b.abs();
        let (c1_inv, log_derivative) = if min > 0.0 {
            (1.0 / min, c2 / min)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        Some(AnalyticBounds {
            c1: max,
            c1_inv,
            c2,
            log_derivative: Some(log_derivative),
            region: self.region.clone(),
        })
    }
}

/// Planar contraction with a quadratic shear, written in a rotated frame.
///
/// With `e1 = (cos θ, sin θ)`, `e2 = (−sin θ, cos θ)` and frame coordinates
/// `ξ = e1·x`, `η = e2·x`, the map is
/// `ξ' = a ξ + s η² + c₁`, `η' = b η + c₂`, `x' = ξ' e1 + η' e2`.
/// The frame Jacobian `[[a, 2 s η], [0, b]]` is triangular, so `det = a b`
/// everywhere and the inverse is explicit.
#[derive(Debug, Clone)]
pub struct FramedShear {
    pub frame: f64,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub shift: [f64; 2],
    region: Region,
}

impl FramedShear {
    pub fn new(frame: f64, a: f64, b: f64, s: f64, shift: [f64; 2], region: Region) -> Result<Self> {
        if a == 0.0 || b == 0.0 || ![frame, a, b, s, shift[0], shift[1]].iter().all(|v| v.is_finite()) {
            return Err(Error::param("shear", "need finite parameters with a, b nonzero"));
        }
        Ok(FramedShear {
            frame,
            a,
            b,
            s,
            shift,
            region,
        })
    }

    fn axes(&self) -> ([f64; 2], [f64; 2]) {
        let (sn, cs) = self.frame.sin_cos();
        ([cs, sn], [-sn, cs])
    }

    fn to_frame(&self, x: &Vector) -> (f64, f64) {
        let (e1, e2) = self.axes();
        (e1[0] * x[0] + e1[1] * x[1], e2[0] * x[0] + e2[1] * x[1])
    }

    fn from_frame(&self, xi: f64, eta: f64) -> Vector {
        let (e1, e2) = self.axes();
        Vector::from_column_slice(&[xi * e1[0] + eta * e2[0], xi * e1[1] + eta * e2[1]])
    }

    fn frame_matrix(&self) -> Matrix {
        let (e1, e2) = self.axes();
        Matrix::from_row_slice(2, 2, &[e1[0], e2[0], e1[1], e2[1]])
    }

    /// Largest `|η|` over the region (attained at a corner of the box).
    pub fn eta_radius(&self) -> f64 {
        match &self.region {
            Region::Everywhere => f64::INFINITY,
            Region::Box { lo, hi } => {
                let (_, e2) = self.axes();
                let mut best: f64 = 0.0;
                for x in [lo[0], hi[0]] {
                    for y in [lo[1], hi[1]] {
                        best = best.max((e2[0] * x + e2[1] * y).abs());
                    }
                }
                best
            }
        }
    }

    /// Bound `σ ≥ |2 s η|` on the region.
    pub fn shear_bound(&self) -> f64 {
        if self.s == 0.0 {
            0.0
        } else {
            2.0 * self.s.abs() * self.eta_radius()
        }
    }
}

impl SmoothMap for FramedShear {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &Vector) -> Vector {
        let (xi, eta) = self.to_frame(x);
        self.from_frame(
            self.a * xi + self.s * eta * eta + self.shift[0],
            self.b * eta + self.shift[1],
        )
    }

    fn label(&self) -> String {
        format!("shear(a={}, b={}, s={}, frame={})", self.a, self.b, self.s, self.frame)
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, x: &Vector) -> Option<Matrix> {
        let (_, eta) = self.to_frame(x);
        let q = self.frame_matrix();
        let inner = Matrix::from_row_slice(2, 2, &[self.a, 2.0 * self.s * eta, 0.0, self.b]);
        Some(&q * inner * q.transpose())
    }

    fn second_exact(&self, _x: &Vector, u: &Vector, v: &Vector) -> Option<Vector> {
        let (_, e2) = self.axes();
        let eu = e2[0] * u[0] + e2[1] * u[1];
        let ev = e2[0] * v[0] + e2[1] * v[1];
        Some(self.from_frame(2.0 * self.s * eu * ev, 0.0))
    }

    fn inverse(&self, y: &Vector) -> Option<Vector> {
        let (xi1, eta1) = self.to_frame(y);
        let eta = (eta1 - self.shift[1]) / self.b;
        let xi = (xi1 - self.shift[0] - self.s * eta * eta) / self.a;
        Some(self.from_frame(xi, eta))
    }

    fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        // σ_max and σ_min of [[a, σ], [0, b]] are monotone in |σ|, so the
        // extremes over the region sit at the largest |η|.
        let worst = Matrix::from_row_slice(2, 2, &[self.a, self.shear_bound(), 0.0, self.b]);
        let smin = min_singular_value(&worst);
        Some(AnalyticBounds {
            c1: operator_norm(&worst),
            c1_inv: if smin > 0.0 { 1.0 / smin } else { f64::INFINITY },
            c2: 2.0 * self.s.abs(),
            log_derivative: None,
            region: self.region.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceVariant {
    /// `(x, y, z) ↦ (2xy − z, x, y)`.
    Fibonacci,
    /// `(x, y, z) ↦ (2xy − z, y, x)`.
    Swapped,
}

/// Polynomial trace maps preserving `G = x² + y² + z² − 2xyz − 1`.
#[derive(Debug, Clone)]
pub struct TraceMap {
    pub variant: TraceVariant,
    region: Region,
}

impl TraceMap {
    pub fn new(variant: TraceVariant, region: Region) -> Self {
        TraceMap { variant, region }
    }

    /// The invariant `x² + y² + z² − 2xyz − 1`.
    pub fn invariant(p: &Vector) -> f64 {
        p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 2.0 * p[0] * p[1] * p[2] - 1.0
    }
}

impl SmoothMap for TraceMap {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, p: &Vector) -> Vector {
        let head = 2.0 * p[0] * p[1] - p[2];
        match self.variant {
            TraceVariant::Fibonacci => Vector::from_column_slice(&[head, p[0], p[1]]),
            TraceVariant::Swapped => Vector::from_column_slice(&[head, p[1], p[0]]),
        }
    }

    fn label(&self) -> String {
        match self.variant {
            TraceVariant::Fibonacci => "trace-map".into(),
            TraceVariant::Swapped => "trace-map-swapped".into(),
        }
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, p: &Vector) -> Option<Matrix> {
        let (x, y) = (p[0], p[1]);
        Some(match self.variant {
            TraceVariant::Fibonacci => {
                Matrix::from_row_slice(3, 3, &[2.0 * y, 2.0 * x, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
            }
            TraceVariant::Swapped => {
                Matrix::from_row_slice(3, 3, &[2.0 * y, 2.0 * x, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0])
            }
        })
    }

    fn second_exact(&self, _p: &Vector, u: &Vector, v: &Vector) -> Option<Vector> {
        Some(Vector::from_column_slice(&[2.0 * (u[0] * v[1] + u[1] * v[0]), 0.0, 0.0]))
    }

    fn inverse(&self, q: &Vector) -> Option<Vector> {
        let (x, y) = match self.variant {
            TraceVariant::Fibonacci => (q[1], q[2]),
            TraceVariant::Swapped => (q[2], q[1]),
        };
        Some(Vector::from_column_slice(&[x, y, 2.0 * x * y - q[0]]))
    }
}

/// `coeff · Π x_k^{exps[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

impl Monomial {
    fn eval(&self, x: &Vector) -> f64 {
        self.exps
            .iter()
            .enumerate()
            .fold(self.coeff, |acc, (k, &e)| acc * x[k].powi(e as i32))
    }

    /// `∂/∂x_k` as a new monomial (zero coefficient when the exponent is zero).
    fn partial(&self, k: usize) -> Monomial {
        let e = self.exps[k];
        let mut exps = self.exps.clone();
        if e == 0 {
            return Monomial { coeff: 0.0, exps };
        }
        exps[k] = e - 1;
        Monomial {
            coeff: self.coeff * e as f64,
            exps,
        }
    }
}

/// Polynomial map given by one list of monomials per output component.
#[derive(Debug, Clone)]
pub struct PolynomialMap {
    dim: usize,
    components: Vec<Vec<Monomial>>,
    region: Region,
    bounds: Option<AnalyticBounds>,
    label: String,
}

impl PolynomialMap {
    pub fn new(dim: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        if dim == 0 || components.len() != dim {
            return Err(Error::param("components", format!("need exactly {dim} output components")));
        }
        for m in components.iter().flatten() {
            if m.exps.len() != dim {
                return Err(Error::param("exponents", format!("each monomial needs {dim} exponents")));
            }
            if !m.coeff.is_finite() {
                return Err(Error::param("coefficient", "must be finite"));
            }
        }
        Ok(PolynomialMap {
            dim,
            components,
            region: Region::Everywhere,
            bounds: None,
            label: "polynomial".into(),
        })
    }

    pub fn from_terms(dim: usize, components: Vec<Vec<(f64, Vec<u32>)>>) -> Result<Self> {
        PolynomialMap::new(
            dim,
            components
                .into_iter()
                .map(|c| c.into_iter().map(|(coeff, exps)| Monomial { coeff, exps }).collect())
                .collect(),
        )
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    /// Attach asserted seminorm bounds.
    pub fn with_bounds(mut self, bounds: AnalyticBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(|m| m.exps.iter().sum())
            .max()
            .unwrap_or(0)
    }
}

impl SmoothMap for PolynomialMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.dim, self.components.iter().map(|c| c.iter().map(|m| m.eval(x)).sum()))
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, x: &Vector) -> Option<Matrix> {
        let mut j = Matrix::zeros(self.dim, self.dim);
        for (r, comp) in self.components.iter().enumerate() {
            for c in 0..self.dim {
                j[(r, c)] = comp.iter().map(|m| m.partial(c).eval(x)).sum();
            }
        }
        Some(j)
    }

    fn second_exact(&self, x: &Vector, u: &Vector, v: &Vector) -> Option<Vector> {
        let d = self.dim;
        let mut out = Vector::zeros(d);
        for (r, comp) in self.components.iter().enumerate() {
            let mut acc = 0.0;
            for m in comp {
                for i in 0..d {
                    if u[i] == 0.0 {
                        continue;
                    }
                    let mi = m.partial(i);
                    if mi.coeff == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        if v[j] != 0.0 {
                            acc += mi.partial(j).eval(x) * u[i] * v[j];
                        }
                    }
                }
            }
            out[r] = acc;
        }
        Some(out)
    }

    fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        self.bounds.clone()
    }
}

type VecFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type MatFn = dyn Fn(&Vector) -> Matrix + Send + Sync;

/// Map from closures; derivatives by finite differences unless a Jacobian
/// closure is supplied.
#[derive(Clone)]
pub struct FnMap {
    dim: usize,
    label: String,
    f: Arc<VecFn>,
    jac: Option<Arc<MatFn>>,
    inv: Option<Arc<VecFn>>,
    region: Region,
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMap")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("analytic_jacobian", &self.jac.is_some())
            .finish()
    }
}

impl FnMap {
    pub fn new(dim: usize, label: &str, f: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        FnMap {
            dim,
            label: label.to_string(),
            f: Arc::new(f),
            jac: None,
            inv: None,
            region: Region::Everywhere,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_inverse(mut self, inv: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        self.inv = Some(Arc::new(inv));
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }
}

impl SmoothMap for FnMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn region(&self) -> &Region {
        &self.region
    }

    fn jacobian_exact(&self, x: &Vector) -> Option<Matrix> {
        self.jac.as_ref().map(|j| j(x))
    }

    fn inverse(&self, y: &Vector) -> Option<Vector> {
        self.inv.as_ref().map(|i| i(y))
    }
}

/// `outer ∘ inner`.
#[derive(Debug, Clone)]
pub struct Composed {
    inner: Arc<dyn SmoothMap>,
    outer: Arc<dyn SmoothMap>,
}

impl Composed {
    pub fn new(inner: Arc<dyn SmoothMap>, outer: Arc<dyn SmoothMap>) -> Result<Self> {
        if inner.dim() != outer.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                got: outer.dim(),
            });
        }
        Ok(Composed { inner, outer })
    }
}

impl SmoothMap for Composed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Vector) -> Vector {
        self.outer.eval(&self.inner.eval(x))
    }

    fn label(&self) -> String {
        format!("{} ∘ {}", self.outer.label(), self.inner.label())
    }

    fn region(&self) -> &Region {
        self.inner.region()
    }

    fn jacobian_exact(&self, x: &Vector) -> Option<Matrix> {
        let ji = self.inner.jacobian_exact(x)?;
        let jo = self.outer.jacobian_exact(&self.inner.eval(x))?;
        Some(jo * ji)
    }

    // D²(g∘f)(u, v) = D²g(Df u, Df v) + Dg · D²f(u, v)
    fn second_exact(&self, x: &Vector, u: &Vector, v: &Vector) -> Option<Vector> {
        let y = self.inner.eval(x);
        let ji = self.inner.jacobian_exact(x)?;
        let jo = self.outer.jacobian_exact(&y)?;
        let outer2 = self.outer.second_exact(&y, &(&ji * u), &(&ji * v))?;
        let inner2 = self.inner.second_exact(x, u, v)?;
        Some(outer2 + jo * inner2)
    }

    fn inverse(&self, y: &Vector) -> Option<Vector> {
        self.inner.inverse(&self.outer.inverse(y)?)
    }
}
