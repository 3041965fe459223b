//! Paired checks of the adjointness, exchange, Mecke and Dirichlet-form
//! identities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    divergence, gradient_values, DivergenceFlavor, Functional, Gradient, NormMeasure, Part, Process, Sign,
};
use crate::error::{Error, Result};
use crate::estimate::{IdentityReport, Relation};
use crate::kernels::{apply_kernel, KernelDirection};
use crate::space::{PointSpace, QuadSpec};

use super::engine::{accumulate, draw, intensity_space};
use super::McSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    /// `E[F δ_σ(v)] = E[⟨DF, v⟩_{L²(σ)}]`
    AdjointSigma,
    /// `E[F δ_ω(v)] = E[⟨DF, v⟩_{L²(ω)}]`
    AdjointOmega,
    /// `E[|D^±F|^p_{L^p(σ)}] = E[|D^∓F|^p_{L^p(ω)}]`
    Exchange,
    /// `E[K⁺F] = E[ω(X) F]`
    Mecke,
    /// `E[δ_σ DF] = E[δ_ω DF]`, pathwise on shared nodes
    DeltaEqual,
    /// `E[∫ D_xF σ(dx)] = -E[∫ D_xF ω(dx)]`
    GradMeanFlip,
    /// `E[|DF|²_{L²(σ)}] = E[|DF|²_{L²(ω)}]`
    DirichletEqual,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::AdjointSigma,
        IdentityId::AdjointOmega,
        IdentityId::Exchange,
        IdentityId::Mecke,
        IdentityId::DeltaEqual,
        IdentityId::GradMeanFlip,
        IdentityId::DirichletEqual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::AdjointSigma => "adjoint_sigma",
            IdentityId::AdjointOmega => "adjoint_omega",
            IdentityId::Exchange => "exchange",
            IdentityId::Mecke => "mecke",
            IdentityId::DeltaEqual => "delta_equal",
            IdentityId::GradMeanFlip => "grad_mean_flip",
            IdentityId::DirichletEqual => "dirichlet_equal",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown identity '{s}'")))
    }
}

/// Inputs of [`verify_identity`]; `v` defaults to the constant process 1.
#[derive(Debug, Clone)]
pub struct IdentityInputs {
    pub f: Functional,
    pub v: Option<Process>,
    pub p: f64,
    pub sign: Sign,
}

impl IdentityInputs {
    pub fn new(f: Functional) -> Self {
        IdentityInputs {
            f,
            v: None,
            p: 1.0,
            sign: Sign::Plus,
        }
    }

    pub fn with_process(mut self, v: Process) -> Self {
        self.v = Some(v);
        self
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }
}

/// Both sides of identity `id` on one configuration stream and one set of
/// `σ`-nodes per configuration.
pub fn verify_identity(
    id: IdentityId,
    inputs: &IdentityInputs,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    crate::calculus::check_exponent(inputs.p)?;
    let space = intensity_space(space, intensity)?;
    let f = &inputs.f;
    let one = Process::constant(1.0);
    let v = inputs.v.as_ref().unwrap_or(&one);
    let p = inputs.p;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        let pair = match id {
            IdentityId::AdjointSigma | IdentityId::AdjointOmega => {
                let g = gradient_values(f, &w, &nodes)?;
                if id == IdentityId::AdjointSigma {
                    let inner: f64 = nodes
                        .points()
                        .iter()
                        .zip(&g.sigma)
                        .map(|(x, d)| d * v.eval(x, &w))
                        .sum::<f64>()
                        * nodes.weight();
                    [f.eval(&w) * divergence(v, &w, DivergenceFlavor::Sigma, &nodes)?, inner]
                } else {
                    let inner: f64 = w.points().iter().zip(&g.omega).map(|(x, d)| d * v.eval(x, &w)).sum();
                    [f.eval(&w) * divergence(v, &w, DivergenceFlavor::Omega, &nodes)?, inner]
                }
            }
            IdentityId::Exchange => {
                let g = Gradient::of(f, &w, &nodes)?;
                let (a, b) = match inputs.sign {
                    Sign::Plus => (Part::Plus, Part::Minus),
                    Sign::Minus => (Part::Minus, Part::Plus),
                };
                [g.norm_pow(p, NormMeasure::Sigma, a), g.norm_pow(p, NormMeasure::Omega, b)]
            }
            IdentityId::Mecke => [
                apply_kernel(f, &w, KernelDirection::Forward, &nodes)?,
                w.len() as f64 * f.eval(&w),
            ],
            IdentityId::DeltaEqual => {
                let u = Process::gradient(f, Part::Signed);
                [
                    divergence(&u, &w, DivergenceFlavor::Sigma, &nodes)?,
                    divergence(&u, &w, DivergenceFlavor::Omega, &nodes)?,
                ]
            }
            IdentityId::GradMeanFlip => {
                let g = gradient_values(f, &w, &nodes)?;
                [
                    nodes.weight() * g.sigma.iter().sum::<f64>(),
                    -g.omega.iter().sum::<f64>(),
                ]
            }
            IdentityId::DirichletEqual => {
                let g = Gradient::of(f, &w, &nodes)?;
                [
                    g.norm_pow(2.0, NormMeasure::Sigma, Part::Signed),
                    g.norm_pow(2.0, NormMeasure::Omega, Part::Signed),
                ]
            }
        };
        Ok(pair)
    })?;
    Ok(IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, mc.ci_level))
}

/// `E[δ(v)] = 0` for the chosen divergence; `right` is the exact zero.
pub fn divergence_mean_check(
    v: &Process,
    flavor: DivergenceFlavor,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
    quad: &QuadSpec,
) -> Result<IdentityReport> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| {
        let (w, nodes) = draw(&space, quad, rng)?;
        Ok([divergence(v, &w, flavor, &nodes)?, 0.0])
    })?;
    Ok(IdentityReport::from_moments(&m, &[1.0, 0.0], &[0.0, 1.0], Relation::Equal, mc.ci_level))
}
