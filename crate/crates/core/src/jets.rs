//! First and second directional derivatives of maps.
//!
//! Every map exposes `f(x)`. When it also carries an analytic Jacobian or
//! bilinear second derivative those are used; otherwise central finite
//! differences take over. [`fd_oracle`] always differences and is the
//! independent check used in tests.

use crate::maps::SmoothMap;
use crate::{Error, Matrix, Result, Vector};

/// Finite-difference step scales. The actual step is `scale * max(1, ‖x‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Scale for first derivatives (default: cube root of machine epsilon).
    pub first_step: f64,
    /// Scale for second derivatives (default: fourth root of machine epsilon).
    pub second_step: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            first_step: f64::EPSILON.cbrt(),
            second_step: f64::EPSILON.powf(0.25),
        }
    }
}

impl FdConfig {
    pub fn new(first_step: f64, second_step: f64) -> Result<Self> {
        for (name, h) in [("first_step", first_step), ("second_step", second_step)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::param(name, "finite-difference step must be positive"));
            }
        }
        Ok(FdConfig {
            first_step,
            second_step,
        })
    }
}

/// Value and first directional derivative `D_x f · v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: Vector,
    pub deriv: Vector,
}

/// Value, `D_x f · v` and `D²_x f(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: Vector,
    pub first: Vector,
    pub second: Vector,
}

fn check_dim(map: &dyn SmoothMap, v: &Vector) -> Result<()> {
    if v.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_finite(map: &dyn SmoothMap, v: &Vector) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(map.label()))
    }
}

/// Evaluate without the region check; used for difference probes that may
/// straddle the region boundary.
fn probe(map: &dyn SmoothMap, x: &Vector) -> Result<Vector> {
    let y = map.eval(x);
    check_finite(map, &y)?;
    Ok(y)
}

fn step(scale: f64, x: &Vector) -> f64 {
    scale * x.norm().max(1.0)
}

fn fd_first(map: &dyn SmoothMap, x: &Vector, v: &Vector, scale: f64) -> Result<Vector> {
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(Vector::zeros(map.dim()));
    }
    let dir = v / vn;
    let h = step(scale, x);
    let plus = probe(map, &(x + &dir * h))?;
    let minus = probe(map, &(x - &dir * h))?;
    Ok((plus - minus) * (vn / (2.0 * h)))
}

// Nested central difference: the outer difference along v of the inner
// central difference along u, four evaluations in total.
fn fd_second(map: &dyn SmoothMap, x: &Vector, u: &Vector, v: &Vector, scale: f64) -> Result<Vector> {
    let (un, vn) = (u.norm(), v.norm());
    if un == 0.0 || vn == 0.0 {
        return Ok(Vector::zeros(map.dim()));
    }
    let du = u * (step(scale, x) / un);
    let dv = v * (step(scale, x) / vn);
    let h = step(scale, x);
    let pp = probe(map, &(x + &du + &dv))?;
    let pm = probe(map, &(x + &du - &dv))?;
    let mp = probe(map, &(x - &du + &dv))?;
    let mm = probe(map, &(x - &du - &dv))?;
    Ok((pp - pm - mp + mm) * (un * vn / (4.0 * h * h)))
}

/// Jacobian matrix `D_x f`, analytic when available, otherwise by columns of
/// central differences.
pub fn jacobian(map: &dyn SmoothMap, x: &Vector) -> Result<Matrix> {
    check_dim(map, x)?;
    if let Some(j) = map.jacobian_exact(x) {
        return Ok(j);
    }
    let d = map.dim();
    let scale = FdConfig::default().first_step;
    let mut j = Matrix::zeros(d, d);
    for c in 0..d {
        let e = Vector::from_fn(d, |r, _| if r == c { 1.0 } else { 0.0 });
        j.set_column(c, &fd_first(map, x, &e, scale)?);
    }
    Ok(j)
}

/// `(f(x), D_x f · v)`.
pub fn push_jet1(map: &dyn SmoothMap, x: &Vector, v: &Vector) -> Result<Jet1> {
    check_dim(map, x)?;
    check_dim(map, v)?;
    let value = map.apply(x)?;
    let deriv = match map.jacobian_exact(x) {
        Some(j) => j * v,
        None => fd_first(map, x, v, FdConfig::default().first_step)?,
    };
    check_finite(map, &deriv)?;
    Ok(Jet1 { value, deriv })
}

/// `(f(x), D_x f · v, D²_x f(u, v))`.
pub fn push_jet2(map: &dyn SmoothMap, x: &Vector, u: &Vector, v: &Vector) -> Result<Jet2> {
    check_dim(map, u)?;
    let Jet1 { value, deriv } = push_jet1(map, x, v)?;
    let second = match map.second_exact(x, u, v) {
        Some(s) => s,
        None => fd_second(map, x, u, v, FdConfig::default().second_step)?,
    };
    check_finite(map, &second)?;
    Ok(Jet2 {
        value,
        first: deriv,
        second,
    })
}

/// Same contract as [`push_jet2`] but never consults analytic callbacks.
/// The second derivative is Richardson-extrapolated from steps `h` and `2h`.
pub fn fd_oracle(map: &dyn SmoothMap, x: &Vector, u: &Vector, v: &Vector, cfg: &FdConfig) -> Result<Jet2> {
    check_dim(map, x)?;
    check_dim(map, u)?;
    check_dim(map, v)?;
    let value = map.apply(x)?;
    let first = fd_first(map, x, v, cfg.first_step)?;
    // One Richardson step on the nested difference cancels the O(h²) term.
    let fine = fd_second(map, x, u, v, cfg.second_step)?;
    let coarse = fd_second(map, x, u, v, 2.0 * cfg.second_step)?;
    let second = (fine * 4.0 - coarse) / 3.0;
    check_finite(map, &first)?;
    check_finite(map, &second)?;
    Ok(Jet2 { value, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{AffineMap, FnMap, PolynomialMap};
    use crate::vector;
    use std::sync::Arc;

    fn rel_err(a: &Vector, b: &Vector) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn linear_map_jet1() {
        let a = AffineMap::linear(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        let j = push_jet1(&a, &vector(&[1.0, 1.0]), &vector(&[1.0, 0.0])).unwrap();
        assert_eq!(j.value, vector(&[2.0, 3.0]));
        assert_eq!(j.deriv, vector(&[2.0, 0.0]));
    }

    #[test]
    fn square_map() {
        let sq = PolynomialMap::from_terms(1, vec![vec![(1.0, vec![2])]]).unwrap();
        let j = push_jet1(&sq, &vector(&[3.0]), &vector(&[1.0])).unwrap();
        assert_eq!(j.value[0], 9.0);
        assert_eq!(j.deriv[0], 6.0);
        for x in [-2.0, 0.0, 5.5] {
            let j2 = push_jet2(&sq, &vector(&[x]), &vector(&[1.0]), &vector(&[1.0])).unwrap();
            assert_eq!(j2.second[0], 2.0);
        }
    }

    #[test]
    fn affine_second_vanishes() {
        let a = AffineMap::new(
            Matrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 0.3]),
            vector(&[0.1, -4.0]),
        )
        .unwrap();
        let j = push_jet2(&a, &vector(&[0.3, 9.0]), &vector(&[1.0, 2.0]), &vector(&[-3.0, 0.5])).unwrap();
        assert_eq!(j.second, Vector::zeros(2));
    }

    #[test]
    fn mixed_second_of_quadratic_pair() {
        // f(x, y) = (x², xy); D²f(e1, e2) = (0, 1)
        let f = PolynomialMap::from_terms(2, vec![vec![(1.0, vec![2, 0])], vec![(1.0, vec![1, 1])]]).unwrap();
        let x = vector(&[1.0, 2.0]);
        let (u, v) = (vector(&[1.0, 0.0]), vector(&[0.0, 1.0]));
        let j = push_jet2(&f, &x, &u, &v).unwrap();
        assert_eq!(j.second, vector(&[0.0, 1.0]));
        let fd = fd_oracle(&f, &x, &u, &v, &FdConfig::default()).unwrap();
        assert!((fd.second - vector(&[0.0, 1.0])).norm() < 1e-6);
    }

    fn sin_exp_map() -> FnMap {
        FnMap::new(2, "sin-exp", |x: &Vector| vector(&[x[0].sin() * x[1], x[0].exp()]))
    }

    #[test]
    fn fd_first_matches_richardson_oracle() {
        // f(x, y) = (sin x · y, e^x) has no analytic callbacks: push_jet1 differences.
        let f = sin_exp_map();
        let x = vector(&[0.3, 1.2]);
        let v = vector(&[0.7, -0.4]);
        let got = push_jet1(&f, &x, &v).unwrap().deriv;
        // Richardson-extrapolated central differences at h and h/2.
        let g = |t: f64| f.eval(&(&x + &v * t));
        let cd = |h: f64| (g(h) - g(-h)) / (2.0 * h);
        let h = 1e-3;
        let rich = (cd(h / 2.0) * 4.0 - cd(h)) / 3.0;
        assert!(rel_err(&got, &rich) < 1e-6, "{got} vs {rich}");
        let exact = vector(&[0.3f64.cos() * 1.2 * 0.7 + 0.3f64.sin() * -0.4, 0.3f64.exp() * 0.7]);
        assert!(rel_err(&got, &exact) < 1e-8);
    }

    #[test]
    fn oracle_identity_and_cube() {
        let id = AffineMap::identity(3);
        let x = vector(&[0.2, -1.0, 4.0]);
        let u = vector(&[1.0, 2.0, 3.0]);
        let v = vector(&[0.5, 0.0, -1.0]);
        let j = fd_oracle(&id, &x, &u, &v, &FdConfig::default()).unwrap();
        assert!((j.first - &v).norm() < 1e-9);
        assert!(j.second.norm() < 1e-6);

        let cube = FnMap::new(1, "cube", |x: &Vector| vector(&[x[0].powi(3)]));
        let j = fd_oracle(&cube, &vector(&[1.0]), &vector(&[1.0]), &vector(&[1.0]), &FdConfig::default()).unwrap();
        assert!((j.second[0] - 6.0).abs() < 1e-5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let id = AffineMap::identity(2);
        let err = push_jet1(&id, &vector(&[1.0]), &vector(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn out_of_region_is_explicit() {
        let f = FnMap::new(1, "log", |x: &Vector| vector(&[x[0].ln()]))
            .with_region(crate::Region::new_box(vec![0.1], vec![10.0]).unwrap());
        let err = push_jet1(&f, &vector(&[-1.0]), &vector(&[1.0])).unwrap_err();
        assert!(matches!(err, Error::OutOfRegion { .. }));
    }

    #[test]
    fn chain_rule_through_composition() {
        let f: Arc<dyn SmoothMap> = Arc::new(sin_exp_map());
        let g: Arc<dyn SmoothMap> = Arc::new(
            PolynomialMap::from_terms(2, vec![vec![(1.0, vec![1, 1])], vec![(2.0, vec![0, 2]), (1.0, vec![1, 0])]])
                .unwrap(),
        );
        let x = vector(&[0.4, -0.3]);
        let v = vector(&[1.0, 0.25]);
        let inner = push_jet1(f.as_ref(), &x, &v).unwrap();
        let chained = push_jet1(g.as_ref(), &inner.value, &inner.deriv).unwrap();
        let comp = crate::maps::Composed::new(f, g).unwrap();
        let direct = push_jet1(&comp, &x, &v).unwrap();
        assert!((chained.deriv - direct.deriv).norm() < 1e-8);
    }
}
