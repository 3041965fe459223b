//! Event sets `A ⊂ Ω`, their kernel masses, boundaries and monotonicity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::estimators::engine::{accumulate, batch_rng, draw, intensity_space, McSpec};
use crate::poisson_law;
use crate::space::{Point, PointSpace, QuadSpec, Region, SigmaSample};

type Predicate = Arc<dyn Fn(&Configuration) -> bool + Send + Sync>;
type ForwardMass = Arc<dyn Fn(&Configuration, f64) -> f64 + Send + Sync>;
type BackwardMass = Arc<dyn Fn(&Configuration) -> f64 + Send + Sync>;
type Probability = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    None,
    Unknown,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::None => "none",
            Monotonicity::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Inner,
    Outer,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountRelation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl CountRelation {
    fn holds(self, n: i64, k: i64) -> bool {
        match self {
            CountRelation::Eq => n == k,
            CountRelation::Ge => n >= k,
            CountRelation::Le => n <= k,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CountRelation::Eq => "=",
            CountRelation::Ge => ">=",
            CountRelation::Le => "<=",
        }
    }
}

/// Structure of `{ω(B) rel k}` (or its complement), enough to evaluate every
/// kernel mass as a function of `ω(B)` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct CountEvent {
    pub region: Region,
    /// `σ(B) / σ(X)`
    pub fraction: f64,
    pub relation: CountRelation,
    pub k: i64,
    pub negated: bool,
}

impl CountEvent {
    pub fn holds(&self, n_b: i64) -> bool {
        self.relation.holds(n_b, self.k) != self.negated
    }

    /// `K⁺(ω, A)` for `ω(B) = n_b`.
    pub fn forward_mass(&self, n_b: i64, total_mass: f64) -> f64 {
        let inside = if self.holds(n_b + 1) { self.fraction } else { 0.0 };
        let outside = if self.holds(n_b) { 1.0 - self.fraction } else { 0.0 };
        total_mass * (inside + outside)
    }

    /// `K⁻(A, ω)` for `ω(B) = n_b`, `ω(X) = n`.
    pub fn backward_mass(&self, n_b: i64, n: i64) -> f64 {
        let inside = if n_b > 0 && self.holds(n_b - 1) { n_b } else { 0 };
        let outside = if self.holds(n_b) { n - n_b } else { 0 };
        (inside + outside) as f64
    }

    /// `π(A)` when `ω(B) ~ Poisson(total_intensity · fraction)`.
    pub fn probability(&self, total_intensity: f64) -> f64 {
        let m = total_intensity * self.fraction;
        let k = self.k;
        let p = match self.relation {
            CountRelation::Eq => poisson_law::pmf(k, m),
            CountRelation::Ge => poisson_law::upper_tail(k, m),
            CountRelation::Le => poisson_law::cdf(k, m),
        };
        if self.negated {
            1.0 - p
        } else {
            p
        }
    }

    /// `Δ = σ(B)` normalized by `σ(X)`, for the monotone relations.
    pub fn deviation_fraction(&self) -> Option<f64> {
        match (self.relation, self.negated) {
            (CountRelation::Ge, false) | (CountRelation::Le, false) => Some(self.fraction),
            _ => None,
        }
    }

    /// `(ω ∈ A, K⁺(ω, ·), K⁻(·, ω))` towards the other side of `A`; removals
    /// outside `B` never cross, so the masses depend on `ω(B)` alone.
    pub fn exit_masses(&self, n_b: i64, total_mass: f64) -> (bool, f64, f64) {
        let inside = self.holds(n_b);
        let crosses_down = n_b > 0 && self.holds(n_b - 1) != inside;
        let crosses_up = self.holds(n_b + 1) != inside;
        let fwd = if crosses_up { total_mass * self.fraction } else { 0.0 };
        let bwd = if crosses_down { n_b as f64 } else { 0.0 };
        (inside, fwd, bwd)
    }

    /// `E[g(ω(B))]` under a Poisson measure of total intensity mass `m`.
    pub fn expect<G: Fn(i64) -> f64>(&self, total_intensity: f64, g: G) -> f64 {
        poisson_law::expect(total_intensity * self.fraction, g)
    }

    /// Boundary membership as a function of `ω(B)` alone; additions inside
    /// `B` have positive `σ`-mass whenever `σ(B) > 0`.
    pub fn on_boundary(&self, n_b: i64, kind: BoundaryKind) -> bool {
        let here = self.holds(n_b);
        let up = self.fraction > 0.0 && self.holds(n_b + 1) != here;
        let down = n_b > 0 && self.holds(n_b - 1) != here;
        let edge = up || down;
        match kind {
            BoundaryKind::Inner => here && edge,
            BoundaryKind::Outer => !here && edge,
            BoundaryKind::Full => edge,
        }
    }
}

#[derive(Clone)]
struct ClosedForms {
    forward: ForwardMass,
    backward: BackwardMass,
    probability: Option<Probability>,
}

/// A measurable set of configurations.
#[derive(Clone)]
pub struct EventSet {
    label: String,
    predicate: Predicate,
    closed: Option<ClosedForms>,
    monotone: Monotonicity,
    count: Option<CountEvent>,
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSet")
            .field("label", &self.label)
            .field("monotone", &self.monotone)
            .field("closed_forms", &self.closed.is_some())
            .finish()
    }
}

impl EventSet {
    /// Event defined by a bare predicate; all kernel masses are evaluated
    /// generically.
    pub fn from_predicate<P>(label: impl Into<String>, monotone: Monotonicity, predicate: P) -> Self
    where
        P: Fn(&Configuration) -> bool + Send + Sync + 'static,
    {
        EventSet {
            label: label.into(),
            predicate: Arc::new(predicate),
            closed: None,
            monotone,
            count: None,
        }
    }

    /// `Ω`
    pub fn whole() -> Self {
        EventSet {
            label: "Omega".into(),
            predicate: Arc::new(|_| true),
            closed: Some(ClosedForms {
                forward: Arc::new(|_, mass| mass),
                backward: Arc::new(|w| w.len() as f64),
                probability: Some(Arc::new(|_| 1.0)),
            }),
            monotone: Monotonicity::Increasing,
            count: None,
        }
    }

    /// `∅`
    pub fn empty() -> Self {
        EventSet {
            label: "empty".into(),
            predicate: Arc::new(|_| false),
            closed: Some(ClosedForms {
                forward: Arc::new(|_, _| 0.0),
                backward: Arc::new(|_| 0.0),
                probability: Some(Arc::new(|_| 0.0)),
            }),
            monotone: Monotonicity::Decreasing,
            count: None,
        }
    }

    fn from_count(label: String, ev: CountEvent, monotone: Monotonicity) -> Self {
        let region = ev.region.clone();
        let pred_ev = ev.clone();
        let pred_region = region.clone();
        let fwd_ev = ev.clone();
        let fwd_region = region.clone();
        let bwd_ev = ev.clone();
        let bwd_region = region;
        let prob_ev = ev.clone();
        EventSet {
            label,
            predicate: Arc::new(move |w| pred_ev.holds(w.count(&pred_region) as i64)),
            closed: Some(ClosedForms {
                forward: Arc::new(move |w, mass| {
                    fwd_ev.forward_mass(w.count(&fwd_region) as i64, mass)
                }),
                backward: Arc::new(move |w| {
                    bwd_ev.backward_mass(w.count(&bwd_region) as i64, w.len() as i64)
                }),
                probability: Some(Arc::new(move |m| prob_ev.probability(m))),
            }),
            monotone,
            count: Some(ev),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotone
    }

    pub fn has_closed_forms(&self) -> bool {
        self.closed.is_some()
    }

    pub fn count_structure(&self) -> Option<&CountEvent> {
        self.count.as_ref()
    }

    /// Same predicate with closed forms and count structure dropped.
    pub fn generic(&self) -> Self {
        EventSet {
            label: format!("{} [generic]", self.label),
            predicate: self.predicate.clone(),
            closed: None,
            monotone: self.monotone,
            count: None,
        }
    }

    pub fn contains(&self, w: &Configuration) -> bool {
        (self.predicate)(w)
    }

    /// `A^c`, carrying complementary closed forms.
    pub fn complement(&self) -> Self {
        let pred = self.predicate.clone();
        let monotone = match self.monotone {
            Monotonicity::Decreasing => Monotonicity::Increasing,
            Monotonicity::Increasing => match &self.count {
                // {ω(B) >= n}^c = {ω(B) <= n-1}
                Some(c) if c.relation == CountRelation::Ge && !c.negated => {
                    Monotonicity::Decreasing
                }
                _ if self.label == "Omega" => Monotonicity::Decreasing,
                _ => Monotonicity::Unknown,
            },
            m => m,
        };
        let closed = self.closed.as_ref().map(|c| {
            let fwd = c.forward.clone();
            let bwd = c.backward.clone();
            ClosedForms {
                forward: Arc::new(move |w, mass| mass - fwd(w, mass)),
                backward: Arc::new(move |w| w.len() as f64 - bwd(w)),
                probability: c.probability.clone().map(|p| -> Probability {
                    Arc::new(move |m| 1.0 - p(m))
                }),
            }
        });
        let count = self.count.clone().map(|mut c| {
            c.negated = !c.negated;
            c
        });
        EventSet {
            label: format!("not({})", self.label),
            predicate: Arc::new(move |w| !pred(w)),
            closed,
            monotone,
            count,
        }
    }

    /// `K⁺(ω, A) = ∫ 1_A(ω + δ_x) σ(dx)`.
    pub fn forward_mass(&self, w: &Configuration, nodes: &SigmaSample) -> Result<f64> {
        if let Some(c) = &self.closed {
            return Ok((c.forward)(w, nodes.total_mass()));
        }
        let mut hits = 0usize;
        for x in nodes.points() {
            if self.contains(&add_node(w, x)?) {
                hits += 1;
            }
        }
        Ok(hits as f64 * nodes.weight())
    }

    /// `K⁻(A, ω) = Σ_{x∈ω} 1_A(ω - δ_x)`.
    pub fn backward_mass(&self, w: &Configuration) -> f64 {
        if let Some(c) = &self.closed {
            return (c.backward)(w);
        }
        (0..w.len())
            .filter(|&i| self.contains(&w.without_index(i)))
            .count() as f64
    }

    /// `K⁺(ω, A^c)`
    pub fn forward_mass_complement(&self, w: &Configuration, nodes: &SigmaSample) -> Result<f64> {
        Ok(nodes.total_mass() - self.forward_mass(w, nodes)?)
    }

    /// `K⁻(A^c, ω)`
    pub fn backward_mass_complement(&self, w: &Configuration) -> f64 {
        w.len() as f64 - self.backward_mass(w)
    }

    /// Kernel masses leading from `ω` to the other side of `A`:
    /// `(K⁺(ω, ·), K⁻(·, ω))` evaluated on `A^c` if `ω ∈ A`, else on `A`.
    pub fn exit_masses(&self, w: &Configuration, nodes: &SigmaSample) -> Result<(bool, f64, f64)> {
        let inside = self.contains(w);
        if inside {
            Ok((
                true,
                self.forward_mass_complement(w, nodes)?,
                self.backward_mass_complement(w),
            ))
        } else {
            Ok((false, self.forward_mass(w, nodes)?, self.backward_mass(w)))
        }
    }

    /// Boundary membership via `K̄(ω, ·) > 0`.
    ///
    /// Without closed forms the removal side is exact and the addition side is
    /// witnessed by the `σ`-nodes; a node exiting `A` proves positivity, while
    /// a miss can be a false negative.
    pub fn on_boundary(&self, w: &Configuration, kind: BoundaryKind, nodes: &SigmaSample) -> Result<bool> {
        if let Some(c) = &self.count {
            let b = c.on_boundary(w.count(&c.region) as i64, kind);
            return Ok(b);
        }
        let (inside, fwd, bwd) = self.exit_masses(w, nodes)?;
        let edge = fwd > 0.0 || bwd > 0.0;
        Ok(match kind {
            BoundaryKind::Inner => inside && edge,
            BoundaryKind::Outer => !inside && edge,
            BoundaryKind::Full => edge,
        })
    }

    /// `A° = A \ ∂_in A`
    pub fn in_interior(&self, w: &Configuration, nodes: &SigmaSample) -> Result<bool> {
        Ok(self.contains(w) && !self.on_boundary(w, BoundaryKind::Inner, nodes)?)
    }

    /// `Ā = A ∪ ∂_out A`
    pub fn in_closure(&self, w: &Configuration, nodes: &SigmaSample) -> Result<bool> {
        Ok(self.contains(w) || self.on_boundary(w, BoundaryKind::Outer, nodes)?)
    }

    /// Exact `π(A)` under a Poisson measure of total intensity mass `m`.
    pub fn exact_probability(&self, total_intensity: f64) -> Option<f64> {
        self.closed
            .as_ref()
            .and_then(|c| c.probability.as_ref())
            .map(|p| p(total_intensity))
    }

    /// `Δ⁻` (increasing) or `Δ⁺` (decreasing) for a space of mass `σ(X)`.
    pub fn deviation_delta(&self, total_mass: f64) -> Option<f64> {
        self.count
            .as_ref()
            .and_then(|c| c.deviation_fraction())
            .map(|f| f * total_mass)
    }
}

fn add_node(w: &Configuration, x: &Point) -> Result<Configuration> {
    w.with_point(x)
}

/// `{ω(B) rel k}` with exact kernel closed forms.
pub fn count_event(space: &PointSpace, region: &Region, relation: CountRelation, k: i64) -> Result<EventSet> {
    if k < 0 {
        return Err(Error::InvalidEvent(format!("count threshold must be >= 0, got {k}")));
    }
    let fraction = space.region_fraction(region)?;
    let monotone = match relation {
        CountRelation::Ge => Monotonicity::Increasing,
        CountRelation::Le => Monotonicity::Decreasing,
        CountRelation::Eq if k == 0 => Monotonicity::Decreasing,
        CountRelation::Eq => Monotonicity::None,
    };
    let label = format!("w({region}) {} {k}", relation.symbol());
    Ok(EventSet::from_count(
        label,
        CountEvent {
            region: region.clone(),
            fraction,
            relation,
            k,
            negated: false,
        },
        monotone,
    ))
}

/// Weight functions available to linear events and config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LinearWeight {
    One,
    NegOne,
    /// `f(x) = x_axis`
    Coordinate { axis: usize },
    /// `f = 1_B`
    Indicator { lower: Vec<f64>, upper: Vec<f64> },
}

impl LinearWeight {
    fn function(&self) -> Result<Arc<dyn Fn(&Point) -> f64 + Send + Sync>> {
        Ok(match self {
            LinearWeight::One => Arc::new(|_| 1.0),
            LinearWeight::NegOne => Arc::new(|_| -1.0),
            LinearWeight::Coordinate { axis } => {
                let a = *axis;
                Arc::new(move |x: &Point| x.coords().get(a).copied().unwrap_or(f64::NAN))
            }
            LinearWeight::Indicator { lower, upper } => {
                let r = Region::new(lower.clone(), upper.clone())?;
                Arc::new(move |x: &Point| if r.contains(x) { 1.0 } else { 0.0 })
            }
        })
    }

    /// Sign of `f` on a box anchored at the origin.
    fn sign(&self) -> Monotonicity {
        match self {
            LinearWeight::One | LinearWeight::Coordinate { .. } | LinearWeight::Indicator { .. } => {
                Monotonicity::Increasing
            }
            LinearWeight::NegOne => Monotonicity::Decreasing,
        }
    }
}

/// `{ω : Σ_{x∈ω} f(x) > K}` for a catalogued weight.
pub fn linear_event(weight: &LinearWeight, threshold: f64) -> Result<EventSet> {
    let f = weight.function()?;
    let label = format!("sum {weight:?}(x) > {threshold}");
    let mut ev = linear_event_fn(label, weight.sign(), threshold, move |x| f(x));
    // Constant weights make the event a count event on X.
    if let LinearWeight::One = weight {
        let kmin = (threshold.floor() + 1.0).max(0.0) as i64;
        let closed = ClosedForms {
            forward: Arc::new(move |w, mass| if w.len() as i64 + 1 >= kmin { mass } else { 0.0 }),
            backward: Arc::new(move |w| {
                let n = w.len() as i64;
                if n >= 1 && n - 1 >= kmin {
                    n as f64
                } else {
                    0.0
                }
            }),
            probability: Some(Arc::new(move |m| poisson_law::upper_tail(kmin, m))),
        };
        ev.closed = Some(closed);
    }
    Ok(ev)
}

/// Linear event for an arbitrary weight whose sign the caller declares.
pub fn linear_event_fn<F>(label: impl Into<String>, monotone: Monotonicity, threshold: f64, f: F) -> EventSet
where
    F: Fn(&Point) -> f64 + Send + Sync + 'static,
{
    EventSet::from_predicate(label, monotone, move |w| {
        w.points().iter().map(&f).sum::<f64>() > threshold
    })
}

/// Intensity `λ` is realized by rescaling `σ` to `λσ`, so kernel masses are
/// taken with respect to the intensity measure of `π_λ`.
///
/// `π_s` of the inner, outer or full boundary:
/// `E[1_A K̄(ω,A^c)^{1/2}]`, `E[1_{A^c} K̄(ω,A)^{1/2}]`, or their sum.
pub fn surface_measure(
    event: &EventSet,
    kind: BoundaryKind,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<Estimate> {
    let m = boundary_moments(event, space, intensity, mc, quad)?;
    Ok(pick_kind(&m, kind, 2, mc.ci_level))
}

/// `π(∂_in A)`, `π(∂_out A)` or `π(∂A)`.
pub fn boundary_probability(
    event: &EventSet,
    kind: BoundaryKind,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<Estimate> {
    let m = boundary_moments(event, space, intensity, mc, quad)?;
    Ok(pick_kind(&m, kind, 0, mc.ci_level))
}

/// Inner/outer boundary probabilities and surface measures from one stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryEstimates {
    pub prob_inner: Estimate,
    pub prob_outer: Estimate,
    pub prob_full: Estimate,
    pub surface_inner: Estimate,
    pub surface_outer: Estimate,
    pub surface_full: Estimate,
}

pub fn boundary_estimates(
    event: &EventSet,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<BoundaryEstimates> {
    let m = boundary_moments(event, space, intensity, mc, quad)?;
    let ci = mc.ci_level;
    Ok(BoundaryEstimates {
        prob_inner: pick_kind(&m, BoundaryKind::Inner, 0, ci),
        prob_outer: pick_kind(&m, BoundaryKind::Outer, 0, ci),
        prob_full: pick_kind(&m, BoundaryKind::Full, 0, ci),
        surface_inner: pick_kind(&m, BoundaryKind::Inner, 2, ci),
        surface_outer: pick_kind(&m, BoundaryKind::Outer, 2, ci),
        surface_full: pick_kind(&m, BoundaryKind::Full, 2, ci),
    })
}

fn pick_kind(m: &Moments<4>, kind: BoundaryKind, offset: usize, ci: f64) -> Estimate {
    let mut c = [0.0; 4];
    match kind {
        BoundaryKind::Inner => c[offset] = 1.0,
        BoundaryKind::Outer => c[offset + 1] = 1.0,
        BoundaryKind::Full => {
            c[offset] = 1.0;
            c[offset + 1] = 1.0;
        }
    }
    m.combination(&c, ci)
}

// Components: [1_{∂in}, 1_{∂out}, π_s inner, π_s outer].
fn boundary_moments(
    event: &EventSet,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<Moments<4>> {
    let space = intensity_space(space, intensity)?;
    accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let (inside, fwd, bwd) = event.exit_masses(&w, &nodes)?;
        let inner = event.on_boundary(&w, BoundaryKind::Inner, &nodes)?;
        let outer = event.on_boundary(&w, BoundaryKind::Outer, &nodes)?;
        let surface = (0.5 * (fwd + bwd)).sqrt();
        Ok([
            inner as u8 as f64,
            outer as u8 as f64,
            if inside { surface } else { 0.0 },
            if inside { 0.0 } else { surface },
        ])
    })
}

/// Violation counts from probing additions and removals on configurations of
/// `A`. A zero rate is consistent with monotonicity, not a proof of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub probes: usize,
    pub addition_trials: usize,
    pub addition_exits: usize,
    pub removal_trials: usize,
    pub removal_exits: usize,
}

impl MonotonicityReport {
    /// Fraction of additions leaving `A` (violations of "increasing").
    pub fn increasing_violation_rate(&self) -> f64 {
        ratio(self.addition_exits, self.addition_trials)
    }

    /// Fraction of removals leaving `A` (violations of "decreasing").
    pub fn decreasing_violation_rate(&self) -> f64 {
        ratio(self.removal_exits, self.removal_trials)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Samples `mc.n_outer` configurations of `A` (rejection from `π_λ`, capped at
/// 100 attempts per probe) and tests `σ`-sampled additions and all removals.
pub fn monotonicity_probe(
    event: &EventSet,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<MonotonicityReport> {
    mc.validate()?;
    let space = intensity_space(space, intensity)?;
    let mut rng = batch_rng(mc.seed, 0);
    let mut report = MonotonicityReport {
        probes: 0,
        addition_trials: 0,
        addition_exits: 0,
        removal_trials: 0,
        removal_exits: 0,
    };
    let max_attempts = mc.n_outer.saturating_mul(100);
    let mut attempts = 0;
    while report.probes < mc.n_outer && attempts < max_attempts {
        attempts += 1;
        let (w, nodes) = draw(&space, quad, &mut rng)?;
        if !event.contains(&w) {
            continue;
        }
        report.probes += 1;
        for x in nodes.points() {
            report.addition_trials += 1;
            if !event.contains(&add_node(&w, x)?) {
                report.addition_exits += 1;
            }
        }
        for i in 0..w.len() {
            report.removal_trials += 1;
            if !event.contains(&w.without_index(i)) {
                report.removal_exits += 1;
            }
        }
    }
    Ok(report)
}
