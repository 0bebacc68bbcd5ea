use serde::{Deserialize, Serialize};

use super::{Provenance, Region, SmoothMap};
use crate::jets::{jacobian, push_jet2};
use crate::{Error, Matrix, Result, Vector};

/// Relative determinant `|det J| / σ_max^d` below which a Jacobian counts as singular.
pub const SINGULAR_REL_DET: f64 = 1e-14;

const HOLDER_PAIR_CAP: usize = 100_000;
const LOW_DISCREPANCY_PAIRS: usize = 32;

/// Largest singular value.
pub fn operator_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Smallest singular value.
pub fn min_singular_value(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().min()
}

pub(crate) fn inverse_norm_of(j: &Matrix, x: &Vector) -> Result<f64> {
    let sv = j.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let rel_det = if smax > 0.0 {
        j.determinant().abs() / smax.powi(j.nrows() as i32)
    } else {
        0.0
    };
    if !(rel_det >= SINGULAR_REL_DET) || smin == 0.0 {
        return Err(Error::SingularJacobian {
            point: x.iter().copied().collect(),
            rel_det,
        });
    }
    Ok(1.0 / smin)
}

/// `‖(D_x f)^{-1}‖`.
pub fn inverse_jacobian_norm(map: &dyn SmoothMap, x: &Vector) -> Result<f64> {
    inverse_norm_of(&jacobian(map, x)?, x)
}

fn unit(d: usize, k: usize) -> Vector {
    Vector::from_fn(d, |r, _| if r == k { 1.0 } else { 0.0 })
}

/// Deterministic unit-vector pairs for sampling `‖D² f(u, v)‖`: axis pairs,
/// diagonals, and a fixed Kronecker sequence.
pub fn direction_pairs(d: usize) -> Vec<(Vector, Vector)> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            out.push((unit(d, i), unit(d, j)));
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let plus = (unit(d, i) + unit(d, j)) / 2f64.sqrt();
            let minus = (unit(d, i) - unit(d, j)) / 2f64.sqrt();
            out.push((plus.clone(), plus));
            out.push((minus.clone(), minus));
        }
    }
    // Additive recurrence with irrational steps sqrt(p) for the first primes.
    let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    let coord = |k: usize, c: usize| {
        let step = primes[c % primes.len()].sqrt() * (1 + c / primes.len()) as f64;
        2.0 * ((k as f64 * step).fract()) - 1.0
    };
    let mut k = 1;
    while out.len() < d * (d + 1) / 2 + d * (d - 1) + LOW_DISCREPANCY_PAIRS {
        let u = Vector::from_fn(d, |r, _| coord(k, r));
        let v = Vector::from_fn(d, |r, _| coord(k, r + d));
        k += 1;
        let (un, vn) = (u.norm(), v.norm());
        if un > 1e-3 && vn > 1e-3 {
            out.push((u / un, v / vn));
        }
    }
    out
}

/// Seminorm bounds of one map over a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    /// `‖f‖₁`
    pub c1: f64,
    /// `‖f⁻¹‖₁`
    pub c1_inv: f64,
    /// `‖f‖₂`
    pub c2: f64,
    /// `(ε, ‖Df‖_ε)` when requested.
    pub holder: Option<(f64, f64)>,
    pub region: Region,
    pub provenance: Provenance,
    /// A singular Jacobian was met on the grid; `c1_inv` is then infinite.
    pub singular: bool,
}

impl SeminormEstimate {
    /// `max(c1, c1_inv, c2)`.
    pub fn constant(&self) -> f64 {
        self.c1.max(self.c1_inv).max(self.c2)
    }

    /// `max(c1, c1_inv, ‖Df‖_ε)`; `None` without a Hölder estimate.
    pub fn holder_constant(&self) -> Option<f64> {
        self.holder.map(|(_, h)| self.c1.max(self.c1_inv).max(h))
    }
}

fn check_epsilon(epsilon: Option<f64>) -> Result<()> {
    match epsilon {
        Some(e) if !(e > 0.0 && e < 1.0) => Err(Error::param("epsilon", "must lie in (0, 1)")),
        _ => Ok(()),
    }
}

/// Grid maxima of the seminorms. These are lower bounds of the suprema.
pub fn sample_seminorms(
    map: &dyn SmoothMap,
    region: &Region,
    resolution: usize,
    epsilon: Option<f64>,
) -> Result<SeminormEstimate> {
    check_epsilon(epsilon)?;
    if let Region::Box { lo, .. } = region {
        if lo.len() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                got: lo.len(),
            });
        }
    }
    let points = region.grid(resolution)?;
    let dirs = direction_pairs(map.dim());
    let (mut c1, mut c1_inv, mut c2) = (0.0f64, 0.0f64, 0.0f64);
    let mut singular = false;
    let mut jacs = Vec::with_capacity(points.len());
    for x in &points {
        let j = jacobian(map, x)?;
        c1 = c1.max(operator_norm(&j));
        match inverse_norm_of(&j, x) {
            Ok(n) => c1_inv = c1_inv.max(n),
            Err(Error::SingularJacobian { .. }) => singular = true,
            Err(e) => return Err(e),
        }
        for (u, v) in &dirs {
            c2 = c2.max(push_jet2(map, x, u, v)?.second.norm());
        }
        jacs.push(j);
    }
    if singular {
        c1_inv = f64::INFINITY;
    }
    let holder = epsilon.map(|eps| (eps, holder_max(&points, &jacs, region.spacing(resolution), eps)));
    Ok(SeminormEstimate {
        c1,
        c1_inv,
        c2,
        holder,
        region: region.clone(),
        provenance: Provenance::Sampled { resolution },
        singular,
    })
}

fn holder_max(points: &[Vector], jacs: &[Matrix], spacing: f64, eps: f64) -> f64 {
    let n = points.len();
    let total = n * (n - 1) / 2;
    let stride = total.div_ceil(HOLDER_PAIR_CAP).max(1);
    let min_dist = spacing * (1.0 - 1e-12);
    let mut best = 0.0f64;
    let mut k = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if k % stride == 0 {
                let dist = (&points[i] - &points[j]).norm();
                if dist >= min_dist {
                    let diff = &jacs[i] - &jacs[j];
                    if diff.iter().any(|c| *c != 0.0) {
                        best = best.max(operator_norm(&diff) / dist.powf(eps));
                    }
                }
            }
            k += 1;
        }
    }
    best
}

/// Analytic bounds when the map carries annotations valid on `region`,
/// otherwise grid maxima.
pub fn estimate_seminorms(
    map: &dyn SmoothMap,
    region: &Region,
    resolution: usize,
    epsilon: Option<f64>,
) -> Result<SeminormEstimate> {
    check_epsilon(epsilon)?;
    if let Some(b) = map.analytic_bounds() {
        if b.region.contains_region(region) {
            // The Hölder bound uses the diameter of the annotated region, which
            // contains `region`, so it stays valid there.
            return Ok(SeminormEstimate {
                c1: b.c1,
                c1_inv: b.c1_inv,
                c2: b.c2,
                holder: epsilon.map(|e| (e, b.holder(e))),
                region: region.clone(),
                provenance: Provenance::Analytic,
                singular: b.c1_inv.is_infinite(),
            });
        }
    }
    sample_seminorms(map, region, resolution, epsilon)
}
