//! Co-area formulas for integer-valued functionals.

use serde::{Deserialize, Serialize};

use crate::calculus::{gradient_values, Functional, Gradient, GradientValues, NormMeasure, Part};
use crate::error::{Error, Result};
use crate::estimate::{IdentityReport, Relation};
use crate::space::{PointSpace, QuadSpec};

use super::engine::{accumulate, draw, intensity_space};
use super::McSpec;

/// `L¹` under `σ`, `ω` or `(σ+ω)/2`, or `L^∞(σ+ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoareaMeasure {
    Sigma,
    Omega,
    Sym,
    Sup,
}

impl CoareaMeasure {
    fn l1(self) -> Option<NormMeasure> {
        match self {
            CoareaMeasure::Sigma => Some(NormMeasure::Sigma),
            CoareaMeasure::Omega => Some(NormMeasure::Omega),
            CoareaMeasure::Sym => Some(NormMeasure::Sym),
            CoareaMeasure::Sup => None,
        }
    }
}

fn sup_norm(g: &Gradient, part: Part) -> f64 {
    match part {
        Part::Signed => g.sup(NormMeasure::Sym, Part::Plus) + g.sup(NormMeasure::Sym, Part::Minus),
        p => g.sup(NormMeasure::Sym, p),
    }
}

fn norm(g: &Gradient, measure: CoareaMeasure, part: Part) -> f64 {
    match measure.l1() {
        Some(m) => g.norm_pow(1.0, m, part),
        None => sup_norm(g, part),
    }
}

fn integer(v: f64, label: &str) -> Result<i64> {
    let r = v.round();
    if (v - r).abs() > 1e-9 || !v.is_finite() {
        return Err(Error::NonInteger {
            label: label.to_string(),
            value: v,
        });
    }
    Ok(r as i64)
}

/// `E[‖D^part F‖]` against `Σ_k E[‖D^part 1_{F > k+½}‖]`.
///
/// With `L^∞` and the signed part both sides are `‖D⁺·‖_∞ + ‖D⁻·‖_∞`. Level
/// sets registered on `F` are evaluated through their kernel closed forms;
/// otherwise they are read off the neighbor values of `F` on the same nodes,
/// in which case the identity holds sample by sample.
pub fn coarea_check(
    f: &Functional,
    part: Part,
    measure: CoareaMeasure,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let g = gradient_values(f, &w, &nodes)?;
        let f0 = integer(f.eval(&w), f.label())?;
        let mut lo = f0;
        let mut hi = f0;
        for d in g.sigma.iter().chain(&g.omega) {
            let v = integer(*d, f.label())?;
            lo = lo.min(f0 - v);
            hi = hi.max(f0 - v);
        }
        let left = norm(&Gradient::Pointwise(g.clone()), measure, part);
        let mut right = 0.0;
        for k in lo..hi {
            let level = if f.has_level_sets() {
                Gradient::of(&Functional::indicator(&f.level_set(k)?), &w, &nodes)?
            } else {
                let step = |d: &f64| -> f64 {
                    let above = (f0 > k) as i64 as f64;
                    let nb_above = ((f0 as f64 - d).round() as i64 > k) as i64 as f64;
                    above - nb_above
                };
                Gradient::Pointwise(GradientValues {
                    sigma: g.sigma.iter().map(step).collect(),
                    omega: g.omega.iter().map(step).collect(),
                    weight: g.weight,
                })
            };
            right += norm(&level, measure, part);
        }
        Ok([left, right])
    })?;
    Ok(IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, mc.ci_level))
}
