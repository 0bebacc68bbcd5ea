//! Composite Simpson with one Richardson step, and 5-point Gauss–Legendre.

use crate::{Error, Result};

/// Composite Simpson over equally spaced samples on `[a, b]`.
/// Needs an even number of intervals.
pub fn simpson(values: &[f64], a: f64, b: f64) -> Result<f64> {
    let m = values.len().saturating_sub(1);
    if m < 2 || m % 2 != 0 {
        return Err(Error::param("samples", "Simpson needs an even, positive number of intervals"));
    }
    let h = (b - a) / m as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(m).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[m] + 4.0 * odd + 2.0 * even))
}

/// Richardson-extrapolated Simpson from samples at `2N` intervals (`N` even).
/// Returns `(estimate, |S_2N − S_N| / 15)`.
pub fn simpson_richardson(fine: &[f64], a: f64, b: f64) -> Result<(f64, f64)> {
    let m = fine.len().saturating_sub(1);
    if m < 4 || m % 4 != 0 {
        return Err(Error::param("samples", "need a multiple of 4 intervals"));
    }
    let coarse: Vec<f64> = fine.iter().step_by(2).copied().collect();
    let s2 = simpson(fine, a, b)?;
    let s1 = simpson(&coarse, a, b)?;
    let corr = (s2 - s1) / 15.0;
    Ok((s2 + corr, corr.abs()))
}

const GL5_NODES: [f64; 5] = [
    0.0,
    0.538_469_310_105_683_1,
    -0.538_469_310_105_683_1,
    0.906_179_845_938_664,
    -0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// 5-point Gauss–Legendre rule on `[a, b]`; exact for degree ≤ 9.
pub fn gauss_legendre5(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}
