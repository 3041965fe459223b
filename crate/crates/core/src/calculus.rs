//! Gradient, divergences, Laplacian and carré du champ on configuration space.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::events::{count_event, CountRelation, EventSet};
use crate::space::{Point, PointSpace, Region, SigmaSample};

type EvalFn = Arc<dyn Fn(&Configuration) -> f64 + Send + Sync>;
type DiffFn = Arc<dyn Fn(&Configuration, &Point) -> f64 + Send + Sync>;
type LevelFn = Arc<dyn Fn(i64) -> Result<EventSet> + Send + Sync>;
type ProcessFn = Arc<dyn Fn(&Point, &Configuration) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Signed,
    Plus,
    Minus,
}

impl Part {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Part::Signed => v,
            Part::Plus => v.max(0.0),
            Part::Minus => (-v).max(0.0),
        }
    }
}

/// Measure in `x` used for gradient norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMeasure {
    Sigma,
    Omega,
    /// `(σ + ω)/2`
    Sym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceFlavor {
    Sigma,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn part(self) -> Part {
        match self {
            Sign::Plus => Part::Plus,
            Sign::Minus => Part::Minus,
        }
    }
}

/// A real functional `F : Ω → ℝ`, optionally carrying a closed-form gradient,
/// the event it indicates, and its integer level sets `{F > k}`.
#[derive(Clone)]
pub struct Functional {
    label: String,
    eval: EvalFn,
    closed_diff: Option<DiffFn>,
    indicator_of: Option<EventSet>,
    level_sets: Option<LevelFn>,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("label", &self.label)
            .field("closed_diff", &self.closed_diff.is_some())
            .field("indicator", &self.indicator_of.as_ref().map(|e| e.label().to_string()))
            .finish()
    }
}

impl Functional {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Configuration) -> f64 + Send + Sync + 'static,
    {
        Functional {
            label: label.into(),
            eval: Arc::new(f),
            closed_diff: None,
            indicator_of: None,
            level_sets: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut f = Functional::new(format!("{c}"), move |_| c);
        f.closed_diff = Some(Arc::new(|_, _| 0.0));
        f
    }

    /// `ω(B)`
    pub fn count(space: &PointSpace, region: &Region) -> Result<Self> {
        space.check_region(region)?;
        let r = region.clone();
        let rd = region.clone();
        let space = space.clone();
        let rl = region.clone();
        Ok(Functional {
            label: format!("w({region})"),
            eval: Arc::new(move |w| w.count(&r) as f64),
            closed_diff: Some(Arc::new(move |w, x| {
                if !rd.contains(x) {
                    0.0
                } else if w.contains(x) {
                    1.0
                } else {
                    -1.0
                }
            })),
            indicator_of: None,
            level_sets: Some(Arc::new(move |k| {
                if k < 0 {
                    Ok(EventSet::whole())
                } else {
                    count_event(&space, &rl, CountRelation::Ge, k + 1)
                }
            })),
        })
    }

    /// `ω(X)`
    pub fn total_count(space: &PointSpace) -> Self {
        Functional::count(space, &space.full_region())
            .expect("full region lies in the space")
            .with_label("N")
    }

    /// `1_A`
    pub fn indicator(event: &EventSet) -> Self {
        let e = event.clone();
        let el = event.clone();
        Functional {
            label: format!("1[{}]", event.label()),
            eval: Arc::new(move |w| if e.contains(w) { 1.0 } else { 0.0 }),
            closed_diff: None,
            indicator_of: Some(event.clone()),
            level_sets: Some(Arc::new(move |k| {
                Ok(match k {
                    k if k < 0 => EventSet::whole(),
                    0 => el.clone(),
                    _ => EventSet::empty(),
                })
            })),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, w: &Configuration) -> f64 {
        (self.eval)(w)
    }

    pub fn indicated_event(&self) -> Option<&EventSet> {
        self.indicator_of.as_ref()
    }

    pub fn has_level_sets(&self) -> bool {
        self.level_sets.is_some()
    }

    /// `{F > k}` for integer `k`.
    pub fn level_set(&self, k: i64) -> Result<EventSet> {
        match &self.level_sets {
            Some(l) => l(k),
            None => Err(Error::Unsupported(format!(
                "{} has no integer level sets",
                self.label
            ))),
        }
    }

    /// Same values, every shortcut dropped.
    pub fn without_closed_forms(&self) -> Self {
        Functional::new(format!("{} [generic]", self.label), {
            let e = self.eval.clone();
            move |w| e(w)
        })
    }

    /// `F + b`; level sets survive integer shifts.
    pub fn shifted(&self, b: f64) -> Self {
        let e = self.eval.clone();
        let levels = match (&self.level_sets, b.fract() == 0.0) {
            (Some(l), true) => {
                let l = l.clone();
                let shift = b as i64;
                Some(Arc::new(move |k: i64| l(k - shift)) as LevelFn)
            }
            _ => None,
        };
        Functional {
            label: format!("{} + {b}", self.label),
            eval: Arc::new(move |w| e(w) + b),
            closed_diff: self.closed_diff.clone(),
            indicator_of: None,
            level_sets: levels,
        }
    }

    /// `a·F`
    pub fn scaled(&self, a: f64) -> Self {
        let e = self.eval.clone();
        let d = self.closed_diff.clone();
        Functional {
            label: format!("{a}*{}", self.label),
            eval: Arc::new(move |w| a * e(w)),
            closed_diff: d.map(|d| Arc::new(move |w: &Configuration, x: &Point| a * d(w, x)) as DiffFn),
            indicator_of: None,
            level_sets: None,
        }
    }

    /// `g ∘ F`
    pub fn map<G>(&self, label: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let e = self.eval.clone();
        Functional::new(label, move |w| g(e(w)))
    }

    /// `F·G`
    pub fn product(&self, other: &Functional) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        Functional::new(format!("({})*({})", self.label, other.label), move |w| a(w) * b(w))
    }

    /// `F + G`
    pub fn sum(&self, other: &Functional) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        let closed = match (&self.closed_diff, &other.closed_diff) {
            (Some(da), Some(db)) => {
                let (da, db) = (da.clone(), db.clone());
                Some(Arc::new(move |w: &Configuration, x: &Point| da(w, x) + db(w, x)) as DiffFn)
            }
            _ => None,
        };
        Functional {
            label: format!("({})+({})", self.label, other.label),
            eval: Arc::new(move |w| a(w) + b(w)),
            closed_diff: closed,
            indicator_of: None,
            level_sets: None,
        }
    }
}

/// `D_x F(ω)`: `F(ω) - F(ω + δ_x)` if `x ∉ ω`, `F(ω) - F(ω - δ_x)` if `x ∈ ω`.
pub fn diff(f: &Functional, w: &Configuration, x: &Point, part: Part) -> Result<f64> {
    let v = match &f.closed_diff {
        Some(d) => d(w, x),
        None => raw_diff(f, f.eval(w), w, x)?,
    };
    finite(part.apply(v), "D_x F", f.label())
}

fn raw_diff(f: &Functional, fw: f64, w: &Configuration, x: &Point) -> Result<f64> {
    let other = if w.contains(x) {
        w.without_point(x)?
    } else {
        w.with_point(x)?
    };
    Ok(fw - f.eval(&other))
}

fn finite(v: f64, what: &str, context: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            value: v,
            context: context.to_string(),
        })
    }
}

/// Signed gradient of `F` at `ω` on the `σ`-nodes and on the points of `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientValues {
    pub sigma: Vec<f64>,
    pub omega: Vec<f64>,
    pub weight: f64,
}

impl GradientValues {
    pub fn norm_pow(&self, p: f64, measure: NormMeasure, part: Part) -> f64 {
        let s = || -> f64 {
            self.weight * self.sigma.iter().map(|&v| part.apply(v).abs().powf(p)).sum::<f64>()
        };
        let o = || -> f64 { self.omega.iter().map(|&v| part.apply(v).abs().powf(p)).sum() };
        match measure {
            NormMeasure::Sigma => s(),
            NormMeasure::Omega => o(),
            NormMeasure::Sym => 0.5 * (s() + o()),
        }
    }

    pub fn sup(&self, measure: NormMeasure, part: Part) -> f64 {
        let m = |xs: &[f64]| xs.iter().map(|&v| part.apply(v).abs()).fold(0.0, f64::max);
        match measure {
            NormMeasure::Sigma => m(&self.sigma),
            NormMeasure::Omega => m(&self.omega),
            NormMeasure::Sym => m(&self.sigma).max(m(&self.omega)),
        }
    }
}

/// Gradient of an indicator `1_A`, summarized by the kernel masses leading to
/// the other side of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorGradient {
    /// `ω ∈ A`: the gradient is nonnegative, otherwise nonpositive.
    pub inside: bool,
    pub forward: f64,
    pub backward: f64,
}

impl IndicatorGradient {
    fn active(&self, part: Part) -> bool {
        match part {
            Part::Signed => true,
            Part::Plus => self.inside,
            Part::Minus => !self.inside,
        }
    }

    /// Every nonzero value of `|D 1_A|` equals one, so the `p`-th power
    /// integrates to the exit mass for every finite `p`.
    pub fn norm_pow(&self, measure: NormMeasure, part: Part) -> f64 {
        if !self.active(part) {
            return 0.0;
        }
        match measure {
            NormMeasure::Sigma => self.forward,
            NormMeasure::Omega => self.backward,
            NormMeasure::Sym => 0.5 * (self.forward + self.backward),
        }
    }

    pub fn sup(&self, measure: NormMeasure, part: Part) -> f64 {
        let pos = self.norm_pow(measure, part) > 0.0;
        if pos {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gradient {
    Pointwise(GradientValues),
    Indicator(IndicatorGradient),
}

impl Gradient {
    /// Evaluates `F(ω)` once and every `D_x F(ω)` needed by the norms.
    pub fn of(f: &Functional, w: &Configuration, nodes: &SigmaSample) -> Result<Self> {
        if let Some(ev) = &f.indicator_of {
            let (inside, forward, backward) = ev.exit_masses(w, nodes)?;
            return Ok(Gradient::Indicator(IndicatorGradient {
                inside,
                forward,
                backward,
            }));
        }
        Ok(Gradient::Pointwise(gradient_values(f, w, nodes)?))
    }

    /// `‖D^part F‖^p_{L^p(measure)}` for finite `p`, `‖·‖_∞` for infinite `p`.
    pub fn norm_pow(&self, p: f64, measure: NormMeasure, part: Part) -> f64 {
        if p.is_infinite() {
            return self.sup(measure, part);
        }
        match self {
            Gradient::Pointwise(g) => g.norm_pow(p, measure, part),
            Gradient::Indicator(g) => g.norm_pow(measure, part),
        }
    }

    pub fn norm(&self, p: f64, measure: NormMeasure, part: Part) -> f64 {
        if p.is_infinite() {
            self.sup(measure, part)
        } else {
            self.norm_pow(p, measure, part).powf(1.0 / p)
        }
    }

    pub fn sup(&self, measure: NormMeasure, part: Part) -> f64 {
        match self {
            Gradient::Pointwise(g) => g.sup(measure, part),
            Gradient::Indicator(g) => g.sup(measure, part),
        }
    }
}

/// Pointwise gradient values, bypassing the indicator shortcut.
pub fn gradient_values(f: &Functional, w: &Configuration, nodes: &SigmaSample) -> Result<GradientValues> {
    let fw = finite(f.eval(w), "F", f.label())?;
    let one = |x: &Point| -> Result<f64> {
        let v = match &f.closed_diff {
            Some(d) => d(w, x),
            None => raw_diff(f, fw, w, x)?,
        };
        finite(v, "D_x F", f.label())
    };
    let sigma = nodes.points().iter().map(one).collect::<Result<Vec<_>>>()?;
    let omega = w.points().iter().map(one).collect::<Result<Vec<_>>>()?;
    Ok(GradientValues {
        sigma,
        omega,
        weight: nodes.weight(),
    })
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(p))
    } else {
        Ok(())
    }
}

/// `|D^part F(ω)|^p_{L^p(measure)}` for `1 <= p < ∞`, and the sup for `p = ∞`.
pub fn grad_norm_pow(
    f: &Functional,
    w: &Configuration,
    p: f64,
    measure: NormMeasure,
    part: Part,
    nodes: &SigmaSample,
) -> Result<f64> {
    check_exponent(p)?;
    Ok(Gradient::of(f, w, nodes)?.norm_pow(p, measure, part))
}

/// `|D^part F(ω)|_{L^p(measure)}`
pub fn grad_norm(
    f: &Functional,
    w: &Configuration,
    p: f64,
    measure: NormMeasure,
    part: Part,
    nodes: &SigmaSample,
) -> Result<f64> {
    check_exponent(p)?;
    Ok(Gradient::of(f, w, nodes)?.norm(p, measure, part))
}

/// A two-variable process `u(x, ω)`.
#[derive(Clone)]
pub struct Process {
    label: String,
    f: ProcessFn,
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Process").field("label", &self.label).finish()
    }
}

impl Process {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point, &Configuration) -> f64 + Send + Sync + 'static,
    {
        Process {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Process::new(format!("{c}"), move |_, _| c)
    }

    /// `u(x, ω) = D_x F(ω)`; evaluation errors surface as NaN and are caught
    /// by the finiteness checks of the callers.
    pub fn gradient(f: &Functional, part: Part) -> Self {
        let f = f.clone();
        Process::new(format!("D{:?}[{}]", part, f.label()), move |x, w| {
            diff(&f, w, x, part).unwrap_or(f64::NAN)
        })
    }

    /// `u(x, ω) = v(x, ω)·F(ω)`
    pub fn times(&self, f: &Functional) -> Self {
        let u = self.f.clone();
        let f = f.clone();
        Process::new(format!("{}*{}", self.label, f.label()), move |x, w| u(x, w) * f.eval(w))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &Point, w: &Configuration) -> f64 {
        (self.f)(x, w)
    }
}

/// `δ_σ(u) = ∫ u(x, ω) σ(dx) - Σ_{x∈ω} u(x, ω - δ_x)` or
/// `δ_ω(u) = Σ_{x∈ω} u(x, ω) - ∫ u(x, ω + δ_x) σ(dx)`.
pub fn divergence(u: &Process, w: &Configuration, flavor: DivergenceFlavor, nodes: &SigmaSample) -> Result<f64> {
    let mut integral = 0.0;
    let mut sum = 0.0;
    match flavor {
        DivergenceFlavor::Sigma => {
            for x in nodes.points() {
                integral += u.eval(x, w);
            }
            for (i, x) in w.points().iter().enumerate() {
                sum += u.eval(x, &w.without_index(i));
            }
            finite(nodes.weight() * integral - sum, "divergence", u.label())
        }
        DivergenceFlavor::Omega => {
            for x in nodes.points() {
                integral += u.eval(x, &w.with_point(x)?);
            }
            for x in w.points() {
                sum += u.eval(x, w);
            }
            finite(sum - nodes.weight() * integral, "divergence", u.label())
        }
    }
}

/// `LF(ω) = ½[(σ(X) + ω(X)) F(ω) - ∫ F(ω + δ_x) σ(dx) - Σ_{x∈ω} F(ω - δ_x)]`
pub fn laplacian(f: &Functional, w: &Configuration, nodes: &SigmaSample) -> Result<f64> {
    let fw = f.eval(w);
    let mut up = 0.0;
    for x in nodes.points() {
        up += f.eval(&w.with_point(x)?);
    }
    let down: f64 = (0..w.len()).map(|i| f.eval(&w.without_index(i))).sum();
    let v = 0.5 * ((nodes.total_mass() + w.len() as f64) * fw - nodes.weight() * up - down);
    finite(v, "laplacian", f.label())
}

/// `Γ^±(F, G)(ω) = ½ ∫ D^±_x F · D^±_x G  ½(σ + ω)(dx)`
pub fn carre_du_champ(
    f: &Functional,
    g: &Functional,
    w: &Configuration,
    sign: Sign,
    nodes: &SigmaSample,
) -> Result<f64> {
    let df = gradient_values(f, w, nodes)?;
    let dg = gradient_values(g, w, nodes)?;
    let part = sign.part();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(&x, &y)| part.apply(x) * part.apply(y)).sum()
    };
    let s = nodes.weight() * dot(&df.sigma, &dg.sigma);
    let o = dot(&df.omega, &dg.omega);
    finite(0.25 * (s + o), "carre du champ", f.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::sample_configuration;
    use crate::space::QuadSpec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> PointSpace {
        PointSpace::unit_interval()
    }

    fn cfg(xs: &[f64]) -> Configuration {
        Configuration::from_scalars(xs).unwrap()
    }

    fn nodes(seed: u64, n: usize) -> SigmaSample {
        SigmaSample::from_spec(&unit(), &QuadSpec::new(n, seed).unwrap()).unwrap()
    }

    fn square() -> Functional {
        let n = Functional::total_count(&unit());
        n.map("N^2", |v| v * v)
    }

    fn first_coord_sum() -> Functional {
        Functional::new("sum x", |w| w.points().iter().map(|p| p.coords()[0]).sum())
    }

    #[test]
    fn count_gradient_signs() {
        let n = Functional::total_count(&unit());
        let w = cfg(&[0.2, 0.7]);
        assert_eq!(diff(&n, &w, &Point::scalar(0.2), Part::Signed).unwrap(), 1.0);
        assert_eq!(diff(&n, &w, &Point::scalar(0.5), Part::Signed).unwrap(), -1.0);
        let g = n.without_closed_forms();
        assert_eq!(diff(&g, &w, &Point::scalar(0.2), Part::Signed).unwrap(), 1.0);
        assert_eq!(diff(&g, &w, &Point::scalar(0.5), Part::Signed).unwrap(), -1.0);
    }

    #[test]
    fn count_norms() {
        let n = Functional::total_count(&unit());
        let w = cfg(&[0.2, 0.7, 0.9]);
        let nd = nodes(3, 10);
        let g = Gradient::of(&n, &w, &nd).unwrap();
        assert!((g.norm_pow(1.0, NormMeasure::Sigma, Part::Minus) - 1.0).abs() < 1e-12);
        assert_eq!(g.norm_pow(1.0, NormMeasure::Sigma, Part::Plus), 0.0);
        assert_eq!(g.norm_pow(2.0, NormMeasure::Omega, Part::Plus), 3.0);
        assert!((g.norm_pow(1.0, NormMeasure::Sym, Part::Signed) - 2.0).abs() < 1e-12);
        assert_eq!(g.sup(NormMeasure::Sym, Part::Signed), 1.0);
        assert!(grad_norm(&n, &w, 0.5, NormMeasure::Sym, Part::Signed, &nd).is_err());
    }

    #[test]
    fn indicator_shortcut_matches_generic() {
        let s = unit();
        let b = Region::interval(0.0, 0.5).unwrap();
        let ev = count_event(&s, &b, CountRelation::Eq, 1).unwrap().generic();
        let f = Functional::indicator(&ev);
        let g = f.without_closed_forms();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let w = sample_configuration(&s, 2.0, &mut rng).unwrap();
            let nd = SigmaSample::draw(&s, &QuadSpec::new(12, 0).unwrap(), &mut rng).unwrap();
            let a = Gradient::of(&f, &w, &nd).unwrap();
            let c = Gradient::of(&g, &w, &nd).unwrap();
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                for m in [NormMeasure::Sigma, NormMeasure::Omega, NormMeasure::Sym] {
                    for part in [Part::Signed, Part::Plus, Part::Minus] {
                        let x = a.norm_pow(p, m, part);
                        let y = c.norm_pow(p, m, part);
                        assert!((x - y).abs() < 1e-12, "{p} {m:?} {part:?} {x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn laplacian_of_count() {
        // L N = ½[(σ(X)+n)n - σ(X)(n+1) - n(n-1)] = (n - σ(X))/2
        let n = Functional::total_count(&unit());
        let nd = nodes(0, 5);
        for xs in [vec![], vec![0.3], vec![0.1, 0.4, 0.8]] {
            let l = laplacian(&n, &cfg(&xs), &nd).unwrap();
            assert!((l - (xs.len() as f64 - 1.0) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn carre_du_champ_of_count() {
        let n = Functional::total_count(&unit());
        let w = cfg(&[0.1, 0.4]);
        let nd = nodes(1, 7);
        // Γ⁺(N,N) = ½·½·ω(X), Γ⁻(N,N) = ½·½·σ(X)
        assert!((carre_du_champ(&n, &n, &w, Sign::Plus, &nd).unwrap() - 0.5).abs() < 1e-12);
        assert!((carre_du_champ(&n, &n, &w, Sign::Minus, &nd).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn divergence_flavors_on_constants() {
        let u = Process::constant(1.0);
        let nd = nodes(2, 9);
        let w = cfg(&[0.5, 0.6]);
        assert!((divergence(&u, &w, DivergenceFlavor::Sigma, &nd).unwrap() - (1.0 - 2.0)).abs() < 1e-12);
        assert!((divergence(&u, &w, DivergenceFlavor::Omega, &nd).unwrap() - (2.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn level_sets_of_shifted_count() {
        let n = Functional::total_count(&unit()).shifted(-1.0);
        let w = cfg(&[0.1, 0.2, 0.3]);
        for k in -3..4 {
            let a = n.level_set(k).unwrap();
            assert_eq!(a.contains(&w), n.eval(&w) > k as f64, "k={k}");
        }
        assert!(n.scaled(2.0).level_set(0).is_err());
    }

    fn arb_configuration() -> impl Strategy<Value = Configuration> {
        prop::collection::btree_set(0u32..10_000, 0..6).prop_map(|s| {
            let xs: Vec<f64> = s.into_iter().map(|i| i as f64 / 10_000.0).collect();
            Configuration::from_scalars(&xs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sign_flip_and_decomposition(w in arb_configuration(), x in 0.00005f64..0.99995, pick in any::<bool>()) {
            let fs = [square(), first_coord_sum(), Functional::total_count(&unit())];
            let x = if pick && !w.is_empty() { w.points()[0].clone() } else { Point::scalar(x) };
            for f in &fs {
                let d = diff(f, &w, &x, Part::Signed).unwrap();
                let p = diff(f, &w, &x, Part::Plus).unwrap();
                let m = diff(f, &w, &x, Part::Minus).unwrap();
                prop_assert!(p >= 0.0 && m >= 0.0);
                prop_assert!(p * m == 0.0);
                prop_assert!((d - (p - m)).abs() <= 1e-12 * (1.0 + d.abs()));
                let neg = f.scaled(-1.0).without_closed_forms();
                let pn = diff(&neg, &w, &x, Part::Plus).unwrap();
                let mn = diff(&neg, &w, &x, Part::Minus).unwrap();
                prop_assert!((pn - m).abs() <= 1e-12 * (1.0 + m.abs()));
                prop_assert!((mn - p).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }

        #[test]
        fn antisymmetry(w in arb_configuration(), x in 0.00005f64..0.99995) {
            let f = square();
            let x = Point::scalar(x);
            prop_assume!(!w.contains(&x));
            let wx = w.with_point(&x).unwrap();
            let a = diff(&f, &w, &x, Part::Signed).unwrap();
            let b = diff(&f, &wx, &x, Part::Signed).unwrap();
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn product_rule(w in arb_configuration(), x in 0.00005f64..0.99995) {
            // D(FG) = F·DG + G·DF - DF·DG
            let f = square();
            let g = first_coord_sum();
            let fg = f.product(&g);
            let x = Point::scalar(x);
            let dfg = diff(&fg, &w, &x, Part::Signed).unwrap();
            let df = diff(&f, &w, &x, Part::Signed).unwrap();
            let dg = diff(&g, &w, &x, Part::Signed).unwrap();
            let rhs = f.eval(&w) * dg + g.eval(&w) * df - df * dg;
            prop_assert!((dfg - rhs).abs() <= 1e-9 * (1.0 + dfg.abs()));
        }

        #[test]
        fn carre_du_champ_symmetric_nonnegative(w in arb_configuration(), seed in 0u64..1000) {
            let f = square();
            let g = first_coord_sum();
            let nd = nodes(seed, 8);
            for s in [Sign::Plus, Sign::Minus] {
                let a = carre_du_champ(&f, &g, &w, s, &nd).unwrap();
                let b = carre_du_champ(&g, &f, &w, s, &nd).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                prop_assert!(carre_du_champ(&f, &f, &w, s, &nd).unwrap() >= 0.0);
            }
        }

        #[test]
        fn norm_monotone_in_measure(w in arb_configuration(), seed in 0u64..1000) {
            let f = square();
            let nd = nodes(seed, 8);
            let g = Gradient::of(&f, &w, &nd).unwrap();
            let s = g.norm_pow(2.0, NormMeasure::Sigma, Part::Signed);
            let o = g.norm_pow(2.0, NormMeasure::Omega, Part::Signed);
            let y = g.norm_pow(2.0, NormMeasure::Sym, Part::Signed);
            prop_assert!((y - 0.5 * (s + o)).abs() <= 1e-12 * (1.0 + y));
            let sup = g.sup(NormMeasure::Sym, Part::Signed);
            prop_assert!(sup >= g.sup(NormMeasure::Omega, Part::Signed));
        }
    }
}
