//! Poincaré, Gaussian-type isoperimetric, modified log-Sobolev and Cheeger
//! inequalities.

use serde::Serialize;

use crate::calculus::{Functional, Gradient, NormMeasure, Part};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Relation};
use crate::space::{PointSpace, QuadSpec};

use super::engine::{accumulate, collect, draw, intensity_space};
use super::{lower_median, GaussianKit, McSpec, YoungFunction};
use super::orlicz::orlicz_norm_of_samples;

/// Lower bound on `h₁` substituted in the power-mode Cheeger inequality.
pub const H1_LOWER: f64 = 0.5;
/// Lower bound on `k⁺₁ = h⁺₁`.
pub const K1_PLUS_LOWER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReport {
    pub variance: Estimate,
    /// `E[|DF|²_{L²(σ)}]`
    pub dirichlet_l2: Estimate,
    /// `E[|DF|²_{L^∞(σ+ω)}]`
    pub dirichlet_linf: Estimate,
    pub ratio_l2: Estimate,
    pub ratio_linf: Estimate,
}

/// `E[|DF|²_{L²(σ)}] / Var F` and `E[|DF|²_{L^∞(σ+ω)}] / Var F`.
pub fn poincare_ratio(
    f: &Functional,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<PoincareReport> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let g = Gradient::of(f, &w, &nodes)?;
        let v = f.eval(&w);
        Ok([
            v,
            v * v,
            g.norm_pow(2.0, NormMeasure::Sigma, Part::Signed),
            g.sup(NormMeasure::Sym, Part::Signed).powi(2),
        ])
    })?;
    let ci = mc.ci_level;
    let variance = m.function(|x| x[1] - x[0] * x[0], ci);
    if variance.mean <= 1e-12 * (1.0 + m.means()[1].abs()) {
        return Err(Error::Degenerate(format!("{} has zero variance", f.label())));
    }
    Ok(PoincareReport {
        variance,
        dirichlet_l2: m.estimate(2, ci),
        dirichlet_linf: m.estimate(3, ci),
        ratio_l2: m.function(|x| x[2] / (x[1] - x[0] * x[0]), ci),
        ratio_linf: m.function(|x| x[3] / (x[1] - x[0] * x[0]), ci),
    })
}

fn unit_range(v: f64, label: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::OutOfRange {
            label: label.to_string(),
            detail: format!("value {v} outside [0, 1]"),
        })
    }
}

/// `I(E[F]) <= E[√(I(F)² + 2|DF|²_{L²(σ)})]` for `F` with values in `[0, 1]`.
pub fn gaussian_iso_check(
    f: &Functional,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let kit = GaussianKit::new();
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let v = unit_range(f.eval(&w), f.label())?;
        let g = Gradient::of(f, &w, &nodes)?;
        let d2 = g.norm_pow(2.0, NormMeasure::Sigma, Part::Signed);
        Ok([v, (kit.iso(v).powi(2) + 2.0 * d2).sqrt()])
    })?;
    let ci = mc.ci_level;
    Ok(IdentityReport::new(
        m.function(|x| kit.iso(x[0]), ci),
        m.estimate(1, ci),
        m.function(|x| kit.iso(x[0]) - x[1], ci),
        Relation::AtMost,
    ))
}

/// `Ent F <= ½ E[|DF|²_{L²(σ)} / F]` for strictly positive `F`.
pub fn mod_lsi_check(
    f: &Functional,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let v = f.eval(&w);
        if !(v > 0.0) {
            return Err(Error::OutOfRange {
                label: f.label().to_string(),
                detail: format!("value {v} is not strictly positive"),
            });
        }
        let d2 = Gradient::of(f, &w, &nodes)?.norm_pow(2.0, NormMeasure::Sigma, Part::Signed);
        Ok([v, v * v.ln(), 0.5 * d2 / v])
    })?;
    let ci = mc.ci_level;
    let ent = |x: &[f64; 3]| x[1] - x[0] * x[0].ln();
    Ok(IdentityReport::new(
        m.function(ent, ci),
        m.estimate(2, ci),
        m.function(|x| ent(x) - x[2], ci),
        Relation::AtMost,
    ))
}

#[derive(Debug, Clone)]
pub enum CheegerMode {
    /// `E|F|^p <= E[(p/h₁ · |DF|_{L¹((σ+ω)/2)})^p]` with `h₁ >= ½`
    Power { p: f64 },
    /// `‖F‖_N <= (C_N/k⁺₁) ‖|DF|_{L¹((σ+ω)/2)}‖_N` and
    /// `E[N(F)] <= E[N(C_N/k⁺₁ · |DF|_{L¹((σ+ω)/2)})]` with `k⁺₁ >= ¼`
    Young(YoungFunction),
    /// `I_var(E[F]) <= E[√(I_var(F)² + |DF|²_{L²((σ+ω)/2)}/b̃)]` with
    /// `b̃ >= (1 - 1/√2) k⁺₁`
    Variance,
}

impl CheegerMode {
    pub fn name(&self) -> String {
        match self {
            CheegerMode::Power { p } => format!("power(p={p})"),
            CheegerMode::Young(n) => format!("young({})", n.label()),
            CheegerMode::Variance => "variance".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub mode: String,
    /// the lower bound substituted for the unknown constant
    pub constant: f64,
    pub expectation: IdentityReport,
    pub norm: Option<IdentityReport>,
}

fn sample_pair(
    f: &Functional,
    space: &PointSpace,
    quad: &QuadSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<(f64, Gradient)> {
    let (w, nodes) = draw(space, quad, rng)?;
    let g = Gradient::of(f, &w, &nodes)?;
    Ok((f.eval(&w), g))
}

/// Cheeger-type inequalities with known lower bounds in place of the optimal
/// constants. The power and Young modes require the lower empirical median
/// of `F` to vanish on the stream.
pub fn cheeger_check(
    f: &Functional,
    mode: &CheegerMode,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<CheegerReport> {
    let space = intensity_space(space, intensity)?;
    let ci = mc.ci_level;
    let values = || collect(mc, |rng| Ok(sample_pair(f, &space, quad, rng)?.0));
    if !matches!(mode, CheegerMode::Variance) {
        let med = lower_median(&mut values()?);
        if med.abs() > 1e-12 {
            return Err(Error::OutOfRange {
                label: f.label().to_string(),
                detail: format!("median {med} is not 0; recentre F first"),
            });
        }
    }
    let l1 = |g: &Gradient| g.norm(1.0, NormMeasure::Sym, Part::Signed);
    match mode {
        CheegerMode::Power { p } => {
            let p = *p;
            crate::calculus::check_exponent(p)?;
            if p.is_infinite() {
                return Err(Error::InvalidExponent(p));
            }
            let c = p / H1_LOWER;
            let m = accumulate(mc, |rng| {
                let (v, g) = sample_pair(f, &space, quad, rng)?;
                Ok([v.abs().powf(p), (c * l1(&g)).powf(p)])
            })?;
            let expectation = IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::AtMost, ci);
            let norm = IdentityReport::new(
                m.function(|x| x[0].powf(1.0 / p), ci),
                m.function(|x| x[1].powf(1.0 / p), ci),
                m.function(|x| x[0].powf(1.0 / p) - x[1].powf(1.0 / p), ci),
                Relation::AtMost,
            );
            Ok(CheegerReport {
                mode: mode.name(),
                constant: H1_LOWER,
                expectation,
                norm: Some(norm),
            })
        }
        CheegerMode::Young(n) => {
            let c = n.c_n() / K1_PLUS_LOWER;
            let m = accumulate(mc, |rng| {
                let (v, g) = sample_pair(f, &space, quad, rng)?;
                Ok([n.eval(v), n.eval(c * l1(&g))])
            })?;
            let expectation = IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::AtMost, ci);
            let grads = collect(mc, |rng| Ok(l1(&sample_pair(f, &space, quad, rng)?.1)))?;
            let left = orlicz_norm_of_samples(&values()?, n, ci)?;
            let norm = match orlicz_norm_of_samples(&grads, n, ci) {
                Ok(g) => {
                    let right = Estimate::new(c * g.mean, c * g.stderr, g.n, ci);
                    let se = left.stderr.hypot(right.stderr);
                    Some(IdentityReport::new(
                        left,
                        right,
                        Estimate::new(left.mean - right.mean, se, g.n, ci),
                        Relation::AtMost,
                    ))
                }
                Err(Error::Degenerate(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(CheegerReport {
                mode: mode.name(),
                constant: K1_PLUS_LOWER,
                expectation,
                norm,
            })
        }
        CheegerMode::Variance => {
            let kit = GaussianKit::new();
            let b = (1.0 - 1.0 / 2f64.sqrt()) * K1_PLUS_LOWER;
            let m = accumulate(mc, |rng| {
                let (v, g) = sample_pair(f, &space, quad, rng)?;
                let v = unit_range(v, f.label())?;
                let d2 = g.norm_pow(2.0, NormMeasure::Sym, Part::Signed);
                Ok([v, (kit.iso_var(v).powi(2) + d2 / b).sqrt()])
            })?;
            let expectation = IdentityReport::new(
                m.function(|x| kit.iso_var(x[0]), ci),
                m.estimate(1, ci),
                m.function(|x| kit.iso_var(x[0]) - x[1], ci),
                Relation::AtMost,
            );
            Ok(CheegerReport {
                mode: mode.name(),
                constant: b,
                expectation,
                norm: None,
            })
        }
    }
}
