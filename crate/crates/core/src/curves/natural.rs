use std::sync::Arc;

use super::quadrature::gauss_legendre5;
use super::{Curve, ParamCurve};
use crate::jets::Jet1;
use crate::{Error, Result};

/// Unit-speed reparameterization `s ↦ γ(t(s))` on `[0, L]`.
///
/// The arc table holds `s_k = ∫_{t_0}^{t_k} ‖γ'‖` at uniform knots `t_k`,
/// each interval integrated by 5-point Gauss–Legendre. Inversion starts
/// from linear interpolation of the table and is polished by Newton steps.
#[derive(Debug, Clone)]
pub struct NaturalCurve {
    base: ParamCurve,
    knots: Vec<f64>,
    arc: Vec<f64>,
}

const NEWTON_STEPS: usize = 6;

impl NaturalCurve {
    fn speed(&self, t: f64) -> Result<f64> {
        Ok(self.base.regular_jet(t)?.deriv.norm())
    }

    pub fn base(&self) -> &ParamCurve {
        &self.base
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// `(t_k, s_k)` pairs.
    pub fn arc_table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().copied().zip(self.arc.iter().copied())
    }

    /// Arc length from the start to the original parameter `t`.
    pub fn locate(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.knots[0], *self.knots.last().unwrap());
        if !(a..=b).contains(&t) {
            return Err(Error::param("t", format!("{t} is outside [{a}, {b}]")));
        }
        let k = self.knots.partition_point(|&x| x <= t).saturating_sub(1).min(self.knots.len() - 2);
        if t == self.knots[k] {
            return Ok(self.arc[k]);
        }
        Ok(self.arc[k] + gauss_legendre5(|x| self.speed(x), self.knots[k], t)?)
    }

    /// Original parameter at arc length `s`.
    pub fn param_at(&self, s: f64) -> Result<f64> {
        let total = self.total_length();
        if !(0.0..=total).contains(&s) {
            return Err(Error::param("s", format!("{s} is outside [0, {total}]")));
        }
        let k = self.arc.partition_point(|&x| x <= s).saturating_sub(1).min(self.arc.len() - 2);
        let (t0, t1, s0, s1) = (self.knots[k], self.knots[k + 1], self.arc[k], self.arc[k + 1]);
        if s == s0 {
            return Ok(t0);
        }
        let mut t = t0 + (t1 - t0) * ((s - s0) / (s1 - s0));
        for _ in 0..NEWTON_STEPS {
            let g = s0 + gauss_legendre5(|x| self.speed(x), t0, t)? - s;
            let next = (t - g / self.speed(t)?).clamp(t0, t1);
            let done = (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0);
            t = next;
            if done {
                break;
            }
        }
        Ok(t)
    }

    /// Back to a [`ParamCurve`] over `[0, L]`.
    pub fn to_param(&self) -> ParamCurve {
        let bound = self.base.angle_bound();
        let c = ParamCurve::new(Arc::new(self.clone())).expect("positive length");
        match bound {
            Some(a) => c.with_angle_bound(a),
            None => c,
        }
    }
}

impl Curve for NaturalCurve {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.total_length())
    }

    fn jet(&self, s: f64) -> Result<Jet1> {
        let t = self.param_at(s)?;
        let Jet1 { value, deriv } = self.base.regular_jet(t)?;
        let n = deriv.norm();
        Ok(Jet1 {
            value,
            deriv: deriv / n,
        })
    }

    fn label(&self) -> String {
        format!("natural({})", self.base.label())
    }
}

/// Arc-length reparameterization with `resolution` table intervals.
pub fn reparameterize_natural(curve: &ParamCurve, resolution: usize) -> Result<NaturalCurve> {
    let knots = curve.sample_params(resolution.max(1));
    let mut arc = Vec::with_capacity(knots.len());
    arc.push(0.0);
    for w in knots.windows(2) {
        let piece = gauss_legendre5(|t| Ok(curve.regular_jet(t)?.deriv.norm()), w[0], w[1])?;
        arc.push(arc.last().unwrap() + piece);
    }
    for w in arc.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Irregular { t: knots[0] });
        }
    }
    Ok(NaturalCurve {
        base: curve.clone(),
        knots,
        arc,
    })
}
