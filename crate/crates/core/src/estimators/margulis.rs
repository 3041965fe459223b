//! Margulis-Russo derivative and deviation bounds for monotone events.

use serde::{Deserialize, Serialize};

use crate::configuration::sample_configuration;
use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Relation};
use crate::events::{EventSet, Monotonicity};
use crate::space::{PointSpace, QuadSpec, SigmaSample};

use super::engine::accumulate;
use super::{GaussianKit, McSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MargulisReport {
    pub lambda: f64,
    pub d_lambda: f64,
    /// `(π_{λ+dλ}(A) - π_{λ-dλ}(A)) / 2dλ` on superposition-coupled samples
    pub deriv_fd: Estimate,
    /// `E_λ[∫ D⁻_x 1_A σ(dx)]`, or `-E_λ[∫ D⁺_x 1_A σ(dx)]` for decreasing `A`
    pub deriv_formula: Estimate,
    pub exact: Option<f64>,
    /// `deriv_fd` against `deriv_formula` on the shared stream
    pub paired: IdentityReport,
}

fn monotone_sign(event: &EventSet) -> Result<f64> {
    match event.monotonicity() {
        Monotonicity::Increasing => Ok(1.0),
        Monotonicity::Decreasing => Ok(-1.0),
        m => Err(Error::NotMonotone {
            label: event.label().to_string(),
            tag: m.to_string(),
        }),
    }
}

/// `d/dλ π_λ(A)` by a fourth-order central difference of the closed-form law.
pub fn exact_derivative(event: &EventSet, space: &PointSpace, lambda: f64) -> Option<f64> {
    let mass = space.total_mass();
    let p = |l: f64| event.exact_probability(l * mass);
    let h = 1e-3 * lambda.min(1.0);
    let d1 = p(lambda + h)? - p(lambda - h)?;
    let d2 = p(lambda + 2.0 * h)? - p(lambda - 2.0 * h)?;
    Some((8.0 * d1 - d2) / (12.0 * h))
}

/// The intensity measure of `π_λ` is `λσ`; gradients integrate against the
/// unscaled `σ`.
pub fn margulis_russo(
    event: &EventSet,
    space: &PointSpace,
    lambda: f64,
    d_lambda: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<MargulisReport> {
    let sign = monotone_sign(event)?;
    if !(d_lambda > 0.0 && d_lambda.is_finite()) {
        return Err(Error::InvalidIntensity(d_lambda));
    }
    if !(lambda - d_lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidIntensity(lambda - d_lambda));
    }
    let m = accumulate(mc, |rng| {
        let low = sample_configuration(space, lambda - d_lambda, rng)?;
        let mid = low.union(&sample_configuration(space, d_lambda, rng)?)?;
        let high = mid.union(&sample_configuration(space, d_lambda, rng)?)?;
        let nodes = SigmaSample::draw(space, quad, rng)?;
        let ind = |w| if event.contains(w) { 1.0 } else { 0.0 };
        let fd = (ind(&high) - ind(&low)) / (2.0 * d_lambda);
        let inside = event.contains(&mid);
        let formula = if sign > 0.0 {
            if inside {
                0.0
            } else {
                event.forward_mass(&mid, &nodes)?
            }
        } else if inside {
            -event.forward_mass_complement(&mid, &nodes)?
        } else {
            0.0
        };
        Ok([fd, formula])
    })?;
    let ci = mc.ci_level;
    Ok(MargulisReport {
        lambda,
        d_lambda,
        deriv_fd: m.estimate(0, ci),
        deriv_formula: m.estimate(1, ci),
        exact: exact_derivative(event, space, lambda),
        paired: IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, ci),
    })
}

/// Inequality direction between `π_λ(A)` and the `Φ`-bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `π_λ(A) <= bound`
    AtMost,
    /// `π_λ(A) >= bound`
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationRow {
    pub lambda: f64,
    pub probability: f64,
    pub bound: f64,
    pub stated: Direction,
    pub observed: Direction,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub label: String,
    pub theta: f64,
    pub delta: f64,
    pub rows: Vec<DeviationRow>,
}

/// Solves `π_θ(A) = ½`, then tabulates the exact `π_λ(A)` against
/// `Φ(√(2λΔ) - √(2θΔ))` (increasing `A`) or `Φ(√(2θΔ) - √(2λΔ))`
/// (decreasing `A`) over `lambdas`.
pub fn deviation_profile(event: &EventSet, space: &PointSpace, lambdas: &[f64]) -> Result<DeviationReport> {
    let sign = monotone_sign(event)?;
    let mass = space.total_mass();
    let no_closed = || Error::NoClosedForm {
        label: event.label().to_string(),
    };
    let delta = event.deviation_delta(mass).ok_or_else(no_closed)?;
    let prob = |l: f64| event.exact_probability(l * mass).ok_or_else(no_closed);
    let theta = solve_half(|l| prob(l).map(|p| sign * (p - 0.5)), event.label())?;
    let kit = GaussianKit::new();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidIntensity(l));
        }
        let p = prob(l)?;
        let gap = (2.0 * l * delta).sqrt() - (2.0 * theta * delta).sqrt();
        let bound = kit.cdf(sign * gap);
        let stated = if (l - theta).abs() <= 1e-9 * theta {
            Direction::Equal
        } else if l > theta {
            Direction::AtMost
        } else {
            Direction::AtLeast
        };
        let tol = 1e-9;
        let observed = if p > bound + tol {
            Direction::AtLeast
        } else if p < bound - tol {
            Direction::AtMost
        } else {
            Direction::Equal
        };
        rows.push(DeviationRow {
            lambda: l,
            probability: p,
            bound,
            stated,
            observed,
            agrees: observed == Direction::Equal || observed == stated,
        });
    }
    Ok(DeviationReport {
        label: event.label().to_string(),
        theta,
        delta,
        rows,
    })
}

/// Root of an increasing function on `[1e-12, 1e6]` by bisection in `log λ`.
fn solve_half<G: Fn(f64) -> Result<f64>>(g: G, label: &str) -> Result<f64> {
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e6f64.ln());
    if !(g(lo.exp())? < 0.0 && g(hi.exp())? > 0.0) {
        return Err(Error::NoRoot(format!("no θ with π_θ(A) = 1/2 for {label}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid.exp())? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{count_event, CountRelation};

    #[test]
    fn theta_for_at_least_one_point() {
        let s = PointSpace::unit_interval();
        let a = count_event(&s, &s.full_region(), CountRelation::Ge, 1).unwrap();
        let r = deviation_profile(&a, &s, &[0.5, 2.0_f64.ln(), 2.0]).unwrap();
        assert!((r.theta - 2.0_f64.ln()).abs() < 1e-10);
        assert_eq!(r.rows[1].observed, Direction::Equal);
        assert!((r.rows[2].probability - (1.0 - (-2.0f64).exp())).abs() < 1e-14);
        assert!((r.rows[2].bound - 0.79463).abs() < 1e-4);
        assert_eq!(r.rows[2].observed, Direction::AtLeast);
    }

    #[test]
    fn decreasing_event_profile() {
        let s = PointSpace::unit_interval();
        let a = count_event(&s, &s.full_region(), CountRelation::Le, 0).unwrap();
        let r = deviation_profile(&a, &s, &[1.0]).unwrap();
        assert!((r.theta - 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn non_monotone_rejected() {
        let s = PointSpace::unit_interval();
        let a = count_event(&s, &s.full_region(), CountRelation::Eq, 2).unwrap();
        let mc = McSpec::new(10, 1).unwrap();
        assert!(margulis_russo(&a, &s, 1.0, 0.05, &mc, &QuadSpec::default()).is_err());
        assert!(deviation_profile(&a, &s, &[1.0]).is_err());
    }

    #[test]
    fn exact_derivative_of_tail() {
        let s = PointSpace::unit_interval();
        let a = count_event(&s, &s.full_region(), CountRelation::Ge, 1).unwrap();
        let d = exact_derivative(&a, &s, 1.0).unwrap();
        assert!((d - (-1.0f64).exp()).abs() < 1e-10);
    }
}
