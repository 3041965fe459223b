//! Clark predictable representation on `X = [0, 1]` with Lebesgue `σ`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{diff, Functional, Part};
use crate::configuration::{sample_configuration, Configuration};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Moments, Relation};
use crate::estimators::engine::{accumulate, McSpec};
use crate::space::{Point, PointSpace};

/// `t_j = j/m`, `j = 0..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathGrid {
    m: usize,
}

impl PathGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange {
                label: "grid".into(),
                detail: "m must be >= 1".into(),
            });
        }
        Ok(PathGrid { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Left endpoints `t_0, …, t_{m-1}`.
    pub fn left_points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| j as f64 / self.m as f64)
    }
}

/// `ω ∩ [0, t)` together with `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationCut {
    pub t: f64,
    pub past: Configuration,
}

impl FiltrationCut {
    /// Strict past of `ω` before `t`.
    pub fn of(w: &Configuration, t: f64) -> Self {
        FiltrationCut {
            t,
            past: w.restrict(|x| x.coords()[0] < t),
        }
    }
}

type ProjectionFn = Arc<dyn Fn(&FiltrationCut) -> f64 + Send + Sync>;

/// How `E[D_tF | F_t]` is obtained.
#[derive(Clone)]
pub enum Projection {
    /// Average of `D_tF(past ∪ future)` over independent futures on `(t, 1]`.
    Nested { n_inner: usize },
    Closed { label: String, f: ProjectionFn },
}

impl fmt::Debug for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::Nested { n_inner } => write!(f, "Nested({n_inner})"),
            Projection::Closed { label, .. } => write!(f, "Closed({label})"),
        }
    }
}

impl Projection {
    pub fn closed<G>(label: impl Into<String>, g: G) -> Self
    where
        G: Fn(&FiltrationCut) -> f64 + Send + Sync + 'static,
    {
        Projection::Closed {
            label: label.into(),
            f: Arc::new(g),
        }
    }

    /// For `F = ω([0, s])`: `-1_{[0,s]}(t)`.
    pub fn linear(s: f64) -> Self {
        Projection::closed(format!("-1[0,{s}](t)"), move |c| if c.t <= s { -1.0 } else { 0.0 })
    }

    /// For `F = N₁²`: `-(2N_t + 2(1-t) + 1)`.
    pub fn square() -> Self {
        Projection::closed("-(2N_t + 2(1-t) + 1)", |c| {
            -(2.0 * c.past.len() as f64 + 2.0 * (1.0 - c.t) + 1.0)
        })
    }

    fn eval(&self, f: &Functional, cut: &FiltrationCut, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self {
            Projection::Closed { f: g, .. } => Ok(g(cut)),
            Projection::Nested { n_inner } => Ok(predictable_projection(f, cut, *n_inner, rng)?.mean),
        }
    }
}

fn unit() -> PointSpace {
    PointSpace::unit_interval()
}

/// Poisson points of unit rate on `(t, 1]`.
fn future(t: f64, rng: &mut ChaCha8Rng) -> Result<Configuration> {
    let len = 1.0 - t;
    if len <= 0.0 {
        return Ok(Configuration::empty());
    }
    let w = sample_configuration(&PointSpace::new_box(1, &[len], len)?, 1.0, rng)?;
    Configuration::from_points(
        w.points()
            .iter()
            .map(|p| Point::scalar(1.0 - p.coords()[0]))
            .collect(),
    )
}

/// `E[D_tF | F_t]` by averaging over `n_inner` independent futures.
pub fn predictable_projection(
    f: &Functional,
    cut: &FiltrationCut,
    n_inner: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&cut.t) {
        return Err(Error::OutOfRange {
            label: "t".into(),
            detail: format!("{} outside [0, 1]", cut.t),
        });
    }
    if n_inner == 0 {
        return Err(Error::InvalidMc("n_inner must be >= 1".into()));
    }
    let x = Point::scalar(cut.t);
    let mut m = Moments::<1>::default();
    for _ in 0..n_inner {
        let w = cut.past.union(&future(cut.t, rng)?)?;
        m.push(&[diff(f, &w, &x, Part::Signed)?]);
    }
    Ok(m.estimate(0, 0.95))
}

/// `∫₀¹ u(t, ω∩[0,t)) dÑ_t`: jumps at the exact points of `ω` with the strict
/// past, compensator by the left-point rule on `grid`.
pub fn compensated_integral<U>(integrand: U, w: &Configuration, grid: &PathGrid) -> Result<f64>
where
    U: FnMut(&FiltrationCut) -> Result<f64>,
{
    let mut integrand = integrand;
    let mut jumps = 0.0;
    for p in w.points() {
        jumps += integrand(&FiltrationCut::of(w, p.coords()[0]))?;
    }
    let mut comp = 0.0;
    for t in grid.left_points() {
        comp += integrand(&FiltrationCut::of(w, t))?;
    }
    Ok(jumps - grid.step() * comp)
}

/// `E[(F - E[F] + ∫ E[D_tF | F_t] dÑ_t)²]`; `E[F]` defaults to the sample
/// mean over the same stream.
pub fn clark_residual(
    f: &Functional,
    projection: &Projection,
    known_mean: Option<f64>,
    mc: &McSpec,
    grid: &PathGrid,
) -> Result<Estimate> {
    let space = unit();
    let mean = match known_mean {
        Some(m) => m,
        None => {
            accumulate(mc, |rng| Ok([f.eval(&sample_configuration(&space, 1.0, rng)?)]))?.means()[0]
        }
    };
    let m = accumulate(mc, |rng| {
        let w = sample_configuration(&space, 1.0, rng)?;
        let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
        let integral = compensated_integral(|c| projection.eval(f, c, &mut inner), &w, grid)?;
        Ok([(f.eval(&w) - mean + integral).powi(2)])
    })?;
    Ok(m.estimate(0, mc.ci_level))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClarkPoincare {
    pub variance: Estimate,
    /// `E[∫₀¹ E[D_tF | F_t]² dt]`, midpoint rule on the grid
    pub projected: Estimate,
    /// `E[|DF|²_{L²(σ)}]`, same nodes
    pub dirichlet: Estimate,
    pub variance_vs_projected: IdentityReport,
    pub projected_vs_dirichlet: IdentityReport,
}

/// `Var F <= E[∫ E[D_tF | F_t]² dt] <= E[|DF|²_{L²(σ)}]`.
pub fn poincare_from_clark(
    f: &Functional,
    projection: &Projection,
    mc: &McSpec,
    grid: &PathGrid,
) -> Result<ClarkPoincare> {
    let space = unit();
    let h = grid.step();
    let m = accumulate(mc, |rng| {
        let w = sample_configuration(&space, 1.0, rng)?;
        let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
        let v = f.eval(&w);
        let mut proj2 = 0.0;
        let mut dir = 0.0;
        for t in grid.left_points() {
            let mid = t + 0.5 * h;
            proj2 += projection.eval(f, &FiltrationCut::of(&w, mid), &mut inner)?.powi(2);
            let x = Point::scalar(mid);
            if !w.contains(&x) {
                dir += diff(f, &w, &x, Part::Signed)?.powi(2);
            }
        }
        Ok([v, v * v, h * proj2, h * dir])
    })?;
    let ci = mc.ci_level;
    let variance = m.function(|x| x[1] - x[0] * x[0], ci);
    let projected = m.estimate(2, ci);
    let dirichlet = m.estimate(3, ci);
    Ok(ClarkPoincare {
        variance,
        projected,
        dirichlet,
        variance_vs_projected: IdentityReport::new(
            variance,
            projected,
            m.function(|x| x[1] - x[0] * x[0] - x[2], ci),
            Relation::AtMost,
        ),
        projected_vs_dirichlet: IdentityReport::from_moments(
            &m,
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            Relation::AtMost,
            ci,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::engine::batch_rng;
    use crate::space::Region;

    fn cfg(xs: &[f64]) -> Configuration {
        Configuration::from_scalars(xs).unwrap()
    }

    #[test]
    fn constant_integrand_telescopes() {
        let grid = PathGrid::new(7).unwrap();
        let w = cfg(&[0.1, 0.5, 0.8]);
        let v = compensated_integral(|_| Ok(2.0), &w, &grid).unwrap();
        assert!((v - 2.0 * (3.0 - 1.0)).abs() < 1e-12);
        assert_eq!(compensated_integral(|_| Ok(0.0), &w, &grid).unwrap(), 0.0);
        assert!(PathGrid::new(0).is_err());
    }

    #[test]
    fn strict_past_at_jumps() {
        let grid = PathGrid::new(4).unwrap();
        let w = cfg(&[0.3, 0.6]);
        let mut seen = Vec::new();
        compensated_integral(
            |c| {
                seen.push((c.t, c.past.len()));
                Ok(0.0)
            },
            &w,
            &grid,
        )
        .unwrap();
        assert_eq!(&seen[..2], &[(0.3, 0), (0.6, 1)]);
    }

    #[test]
    fn nested_projection_of_counts() {
        let mut rng = batch_rng(1, 0);
        let n = Functional::total_count(&unit());
        let cut = FiltrationCut::of(&cfg(&[0.2]), 0.4);
        let e = predictable_projection(&n, &cut, 50, &mut rng).unwrap();
        assert_eq!((e.mean, e.stderr), (-1.0, 0.0));
        let half = Functional::count(&unit(), &Region::interval(0.0, 0.25).unwrap()).unwrap();
        let e = predictable_projection(&half, &cut, 50, &mut rng).unwrap();
        assert_eq!(e.mean, 0.0);
        let c = predictable_projection(&Functional::constant(3.0), &cut, 10, &mut rng).unwrap();
        assert_eq!(c.mean, 0.0);
        let bad = FiltrationCut { t: 1.5, past: Configuration::empty() };
        assert!(predictable_projection(&n, &bad, 10, &mut rng).is_err());
    }

    #[test]
    fn nested_square_projection_matches_closed_form() {
        let mut rng = batch_rng(2, 0);
        let n = Functional::total_count(&unit());
        let sq = n.map("N^2", |v| v * v);
        let cut = FiltrationCut::of(&cfg(&[0.1, 0.2]), 0.5);
        let e = predictable_projection(&sq, &cut, 20_000, &mut rng).unwrap();
        let exact = -(2.0 * 2.0 + 2.0 * 0.5 + 1.0);
        assert!(e.within(exact, 4.0), "{e:?}");
    }

    #[test]
    fn linear_case_is_exact() {
        let mc = McSpec::new(2000, 3).unwrap();
        let grid = PathGrid::new(32).unwrap();
        let n = Functional::total_count(&unit());
        let r = clark_residual(&n, &Projection::linear(1.0), Some(1.0), &mc, &grid).unwrap();
        assert!(r.mean < 1e-20, "{r:?}");
        let c = clark_residual(&Functional::constant(2.0), &Projection::Nested { n_inner: 5 }, None, &mc, &grid).unwrap();
        assert_eq!(c.mean, 0.0);
        let p = poincare_from_clark(&n, &Projection::linear(1.0), &mc, &grid).unwrap();
        assert_eq!(p.projected.mean, 1.0);
        assert_eq!(p.dirichlet.mean, 1.0);
        assert!(p.variance_vs_projected.passed() && p.projected_vs_dirichlet.passed());
    }
}
