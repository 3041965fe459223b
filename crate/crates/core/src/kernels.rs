//! Forward, backward and symmetrized kernels on `Ω`.

use serde::{Deserialize, Serialize};

use crate::calculus::Functional;
use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::estimate::{IdentityReport, Relation};
use crate::estimators::engine::{accumulate, draw, intensity_space, McSpec};
use crate::events::EventSet;
use crate::space::{PointSpace, QuadSpec, SigmaSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelDirection {
    /// `K⁺(ω, ·)`
    Forward,
    /// `K⁻(·, ω)`
    Backward,
    /// `K̄ = (K⁺ + K⁻)/2`
    Symmetrized,
}

/// `K⁺(ω, A)`, `K⁻(A, ω)` or `K̄(ω, A)`.
pub fn kernel_measure(
    w: &Configuration,
    event: &EventSet,
    direction: KernelDirection,
    nodes: &SigmaSample,
) -> Result<f64> {
    let v = match direction {
        KernelDirection::Forward => event.forward_mass(w, nodes)?,
        KernelDirection::Backward => event.backward_mass(w),
        KernelDirection::Symmetrized => 0.5 * (event.forward_mass(w, nodes)? + event.backward_mass(w)),
    };
    checked(v, event.label())
}

/// `K⁺F(ω) = ∫ F(ω + δ_x) σ(dx)`, `K⁻F(ω) = Σ_{x∈ω} F(ω - δ_x)`, or their average.
pub fn apply_kernel(
    f: &Functional,
    w: &Configuration,
    direction: KernelDirection,
    nodes: &SigmaSample,
) -> Result<f64> {
    let forward = || -> Result<f64> {
        let mut s = 0.0;
        for x in nodes.points() {
            s += f.eval(&w.with_point(x)?);
        }
        Ok(nodes.weight() * s)
    };
    let backward = || -> f64 { (0..w.len()).map(|i| f.eval(&w.without_index(i))).sum() };
    let v = match direction {
        KernelDirection::Forward => forward()?,
        KernelDirection::Backward => backward(),
        KernelDirection::Symmetrized => 0.5 * (forward()? + backward()),
    };
    checked(v, f.label())
}

fn checked(v: f64, context: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            what: "kernel".into(),
            value: v,
            context: context.to_string(),
        })
    }
}

/// `E[F · K⁺G]` against `E[G · K⁻F]` on one configuration stream.
pub fn reversibility_check(
    f: &Functional,
    g: &Functional,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let left = f.eval(&w) * apply_kernel(g, &w, KernelDirection::Forward, &nodes)?;
        let right = g.eval(&w) * apply_kernel(f, &w, KernelDirection::Backward, &nodes)?;
        Ok([left, right])
    })?;
    Ok(IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, mc.ci_level))
}

/// Mecke-type identities `E[K⁻F] = σ(X)E[F]` and `E[K⁺F] = E[ω(X)F]`.
pub fn mecke_check(
    f: &Functional,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<(IdentityReport, IdentityReport)> {
    let space = intensity_space(space, intensity)?;
    let mass = space.total_mass();
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let fw = f.eval(&w);
        Ok([
            apply_kernel(f, &w, KernelDirection::Backward, &nodes)?,
            mass * fw,
            apply_kernel(f, &w, KernelDirection::Forward, &nodes)?,
            w.len() as f64 * fw,
        ])
    })?;
    let ci = mc.ci_level;
    Ok((
        IdentityReport::from_moments(&m, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], Relation::Equal, ci),
        IdentityReport::from_moments(&m, &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0], Relation::Equal, ci),
    ))
}

/// Stationarity of `π` for the symmetrized kernel normalized at the target,
/// `P(ω, dω̃) = K̄(ω, dω̃) / K̄(ω̃, Ω)`:
/// `E[K⁺(ω, A)/(σ(X)+ω(X)+1) + K⁻(A, ω)/(σ(X)+ω(X)-1)]` against `π(A)`.
pub fn stationarity_check(
    event: &EventSet,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let space = intensity_space(space, intensity)?;
    let mass = space.total_mass();
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let n = w.len() as f64;
        let up = event.forward_mass(&w, &nodes)? / (mass + n + 1.0);
        let down = if w.is_empty() {
            0.0
        } else {
            event.backward_mass(&w) / (mass + n - 1.0)
        };
        Ok([up + down, if event.contains(&w) { 1.0 } else { 0.0 }])
    })?;
    Ok(IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, mc.ci_level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{count_event, CountRelation};
    use crate::space::Region;

    fn unit() -> PointSpace {
        PointSpace::unit_interval()
    }

    fn cfg(xs: &[f64]) -> Configuration {
        Configuration::from_scalars(xs).unwrap()
    }

    #[test]
    fn count_kernels() {
        let s = unit();
        let x = s.full_region();
        let nd = SigmaSample::from_spec(&s, &QuadSpec::default()).unwrap();
        for k in 0..4i64 {
            let a = count_event(&s, &x, CountRelation::Eq, k).unwrap();
            for n in 0..5usize {
                let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / 5.0).collect();
                let w = cfg(&xs);
                let fwd = kernel_measure(&w, &a, KernelDirection::Forward, &nd).unwrap();
                let bwd = kernel_measure(&w, &a, KernelDirection::Backward, &nd).unwrap();
                assert_eq!(fwd, if n as i64 == k - 1 { 1.0 } else { 0.0 });
                assert_eq!(bwd, if n as i64 == k + 1 { n as f64 } else { 0.0 });
                let whole = kernel_measure(&w, &EventSet::whole(), KernelDirection::Symmetrized, &nd).unwrap();
                assert_eq!(whole, (1.0 + n as f64) / 2.0);
                let split = kernel_measure(&w, &a, KernelDirection::Symmetrized, &nd).unwrap()
                    + kernel_measure(&w, &a.complement(), KernelDirection::Symmetrized, &nd).unwrap();
                assert!((split - whole).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn applied_kernels() {
        let s = unit();
        let nd = SigmaSample::from_spec(&s, &QuadSpec::new(7, 3).unwrap()).unwrap();
        let w = cfg(&[0.1, 0.5]);
        let one = Functional::constant(1.0);
        assert!((apply_kernel(&one, &w, KernelDirection::Forward, &nd).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(apply_kernel(&one, &w, KernelDirection::Backward, &nd).unwrap(), 2.0);
        let n = Functional::total_count(&s);
        assert!((apply_kernel(&n, &w, KernelDirection::Forward, &nd).unwrap() - 3.0).abs() < 1e-12);
        let l = crate::calculus::laplacian(&n, &w, &nd).unwrap();
        let rhs = 1.5 * n.eval(&w) - apply_kernel(&n, &w, KernelDirection::Symmetrized, &nd).unwrap();
        assert!((l - rhs).abs() < 1e-12);
    }

    #[test]
    fn indicator_link_to_gradient() {
        use crate::calculus::{grad_norm_pow, NormMeasure, Part};
        let s = unit();
        let b = Region::interval(0.0, 0.4).unwrap();
        let a = count_event(&s, &b, CountRelation::Ge, 1).unwrap().generic();
        let f = Functional::indicator(&a).without_closed_forms();
        let nd = SigmaSample::from_spec(&s, &QuadSpec::new(50, 8).unwrap()).unwrap();
        for xs in [vec![], vec![0.2], vec![0.6], vec![0.1, 0.9]] {
            let w = cfg(&xs);
            let lhs = if a.contains(&w) {
                kernel_measure(&w, &a.complement(), KernelDirection::Forward, &nd).unwrap()
            } else {
                0.0
            };
            let rhs = grad_norm_pow(&f, &w, 1.0, NormMeasure::Sigma, Part::Plus, &nd).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{xs:?}");
        }
    }
}
