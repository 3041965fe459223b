//! Isoperimetric ratio profiles over event families.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{Functional, Gradient, NormMeasure, Part};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Moments, Relation, TOLERANCE_SIGMAS};
use crate::events::EventSet;
use crate::poisson_law;
use crate::space::{PointSpace, QuadSpec};

use super::engine::{accumulate, draw, intensity_space};
use super::McSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `E[|D⁺1_A|] / π(A)`
    Plus,
    /// `E[|D⁻1_A|] / π(A)`
    Minus,
    /// `E[|D1_A|] / π(A)`
    Full,
    /// `E[|D1_A|] / (π(A)π(A^c))`
    Tilde,
}

impl Variant {
    fn slot(self) -> usize {
        match self {
            Variant::Plus => 1,
            Variant::Minus => 2,
            Variant::Full | Variant::Tilde => 3,
        }
    }
}

/// Known lower bounds on the per-event ratios: `h₁ >= ½`, `h₁^± >= ¼`,
/// `h₂ >= 1/√(2π)`, `h_∞ >= max(1/√(πσ(X)), 1/(2σ(X)))`; the tilde ratios
/// dominate the full ones.
pub fn lower_bound(p: f64, variant: Variant, total_mass: f64) -> Option<f64> {
    let full = if p == 1.0 {
        Some(0.5)
    } else if p == 2.0 {
        Some(1.0 / (2.0 * PI).sqrt())
    } else if p.is_infinite() {
        Some((1.0 / (PI * total_mass).sqrt()).max(1.0 / (2.0 * total_mass)))
    } else {
        None
    };
    match variant {
        Variant::Full | Variant::Tilde => full,
        Variant::Plus | Variant::Minus if p == 1.0 => Some(0.25),
        _ => None,
    }
}

fn norm_of_mass(mass: f64, p: f64) -> f64 {
    if p.is_infinite() {
        if mass > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        mass.powf(1.0 / p)
    }
}

/// `π(A)` and `E[|D^{±}1_A|_{L^p((σ+ω)/2)}]` estimated on one stream.
#[derive(Debug, Clone)]
pub struct EventProfile {
    pub label: String,
    pub p: f64,
    moments: Moments<4>,
    ci_level: f64,
    exact: Option<[f64; 4]>,
}

impl EventProfile {
    pub fn probability(&self) -> Estimate {
        self.moments.estimate(0, self.ci_level)
    }

    pub fn numerator(&self, variant: Variant) -> Estimate {
        self.moments.estimate(variant.slot(), self.ci_level)
    }

    pub fn ratio(&self, variant: Variant) -> Estimate {
        let k = variant.slot();
        if variant == Variant::Tilde {
            self.moments.function(|m| m[k] / (m[0] * (1.0 - m[0])), self.ci_level)
        } else {
            self.moments.function(|m| m[k] / m[0], self.ci_level)
        }
    }

    /// `[π(A), plus, minus, full]` from the exact law, for count events.
    pub fn exact(&self) -> Option<[f64; 4]> {
        self.exact
    }

    pub fn exact_ratio(&self, variant: Variant) -> Option<f64> {
        self.exact.map(|e| {
            let k = variant.slot();
            if variant == Variant::Tilde {
                e[k] / (e[0] * (1.0 - e[0]))
            } else {
                e[k] / e[0]
            }
        })
    }

    /// Full numerator against twice the plus numerator, paired.
    pub fn full_vs_twice_plus(&self) -> IdentityReport {
        IdentityReport::from_moments(
            &self.moments,
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 2.0, 0.0, 0.0],
            Relation::Equal,
            self.ci_level,
        )
    }
}

/// Exact `[π(A), plus, minus, full]` numerators for a count event.
pub fn exact_numerators(event: &EventSet, p: f64, total_intensity: f64) -> Option<[f64; 4]> {
    let c = event.count_structure()?;
    let part = |want_inside: Option<bool>| {
        c.expect(total_intensity, |n_b| {
            let (inside, fwd, bwd) = c.exit_masses(n_b, total_intensity);
            if want_inside.is_some_and(|w| w != inside) {
                0.0
            } else {
                norm_of_mass(0.5 * (fwd + bwd), p)
            }
        })
    };
    Some([
        c.probability(total_intensity),
        part(Some(true)),
        part(Some(false)),
        part(None),
    ])
}

pub fn profile_event(
    event: &EventSet,
    p: f64,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<EventProfile> {
    crate::calculus::check_exponent(p)?;
    let space = intensity_space(space, intensity)?;
    let f = Functional::indicator(event);
    let moments = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let g = Gradient::of(&f, &w, &nodes)?;
        let inside = event.contains(&w);
        Ok([
            inside as u8 as f64,
            g.norm(p, NormMeasure::Sym, Part::Plus),
            g.norm(p, NormMeasure::Sym, Part::Minus),
            g.norm(p, NormMeasure::Sym, Part::Signed),
        ])
    })?;
    Ok(EventProfile {
        label: event.label().to_string(),
        p,
        moments,
        ci_level: mc.ci_level,
        exact: exact_numerators(event, p, space.total_mass()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub label: String,
    pub probability: Estimate,
    pub numerator: Estimate,
    pub ratio: Estimate,
    pub exact_ratio: Option<f64>,
    /// `π(A)` confidence interval not strictly inside the admissible range
    pub excluded: bool,
    /// ratio confidence interval lies entirely below the lower bound
    pub below_bound: bool,
    /// `full - 2·plus` on the shared stream
    pub full_vs_twice_plus: IdentityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileTable {
    pub p: f64,
    pub variant: Variant,
    pub lower_bound: Option<f64>,
    pub rows: Vec<ProfileRow>,
    /// smallest ratio among admitted events: an upper bound on the constant
    pub minimum: f64,
    pub argmin: String,
}

impl ProfileTable {
    /// Every admitted ratio is at least `lower_bound - TOLERANCE_SIGMAS·stderr`.
    pub fn respects_lower_bound(&self) -> bool {
        match self.lower_bound {
            None => true,
            Some(b) => self
                .rows
                .iter()
                .filter(|r| !r.excluded)
                .all(|r| r.ratio.mean >= b - TOLERANCE_SIGMAS * r.ratio.stderr),
        }
    }
}

/// Ratio table for a family; events whose `π(A)` interval is not strictly
/// inside `(0, ½)` (or `(0, 1)` for the tilde variant) are kept but excluded
/// from the minimum.
pub fn isoperimetric_profile(
    events: &[EventSet],
    p: f64,
    variant: Variant,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<ProfileTable> {
    let upper = if variant == Variant::Tilde { 1.0 } else { 0.5 };
    let bound = lower_bound(p, variant, intensity_space(space, intensity)?.total_mass());
    let mut rows = Vec::with_capacity(events.len());
    for ev in events {
        let prof = profile_event(ev, p, space, intensity, mc, quad)?;
        let prob = prof.probability();
        let (lo, hi) = prob.ci();
        let excluded = !(lo > 0.0 && hi < upper);
        let ratio = prof.ratio(variant);
        let below = bound.is_some_and(|b| ratio.ci().1 < b);
        rows.push(ProfileRow {
            label: prof.label.clone(),
            probability: prob,
            numerator: prof.numerator(variant),
            ratio,
            exact_ratio: prof.exact_ratio(variant),
            excluded,
            below_bound: below,
            full_vs_twice_plus: prof.full_vs_twice_plus(),
        });
    }
    let (minimum, argmin) = rows
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| (r.ratio.mean, r.label.clone()))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::EmptyFamily)?;
    Ok(ProfileTable {
        p,
        variant,
        lower_bound: bound,
        rows,
        minimum,
        argmin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsiRow {
    pub k: i64,
    pub probability: f64,
    pub boundary_probability: f64,
    pub ratio: f64,
    /// `π(A_k) < ½`
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsiWitness {
    pub mean: f64,
    pub rows: Vec<LsiRow>,
    pub strictly_decreasing: bool,
}

/// `π(∂A_k) / (-π(A_k) log π(A_k))` for `A_k = {ω(B) >= k}`, `k = 1..=k_max`,
/// where `ω(B) ~ Poisson(mean)` and `∂A_k = {k-1 <= ω(B) <= k}`.
pub fn lsi_constant_witness(mean: f64, k_max: i64) -> Result<LsiWitness> {
    if k_max < 2 {
        return Err(Error::OutOfRange {
            label: "k_max".into(),
            detail: format!("must be >= 2, got {k_max}"),
        });
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidIntensity(mean));
    }
    let rows: Vec<LsiRow> = (1..=k_max)
        .map(|k| {
            let pa = poisson_law::upper_tail(k, mean);
            let pb = poisson_law::pmf(k - 1, mean) + poisson_law::pmf(k, mean);
            LsiRow {
                k,
                probability: pa,
                boundary_probability: pb,
                ratio: pb / (-pa * pa.ln()),
                admissible: pa < 0.5,
            }
        })
        .collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(LsiWitness {
        mean,
        rows,
        strictly_decreasing,
    })
}
