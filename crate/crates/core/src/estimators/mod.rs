//! Monte Carlo estimators for identities and inequalities.

pub mod coarea;
pub mod engine;
pub mod gaussian;
pub mod identities;
pub mod inequalities;
pub mod margulis;
pub mod orlicz;
pub mod profile;

pub use coarea::{coarea_check, CoareaMeasure};
pub use engine::{Exec, McSpec};
pub use gaussian::GaussianKit;
pub use identities::{divergence_mean_check, verify_identity, IdentityId, IdentityInputs};
pub use inequalities::{
    cheeger_check, gaussian_iso_check, mod_lsi_check, poincare_ratio, CheegerMode, CheegerReport,
    PoincareReport,
};
pub use margulis::{deviation_profile, margulis_russo, DeviationReport, MargulisReport};
pub use orlicz::{orlicz_norm, orlicz_norm_of_samples, YoungFunction};
pub use profile::{isoperimetric_profile, lsi_constant_witness, ProfileTable, Variant};

use crate::calculus::Functional;
use crate::configuration::sample_configuration;
use crate::error::Result;
use crate::estimate::Estimate;
use crate::space::PointSpace;

use engine::{accumulate, collect, intensity_space};

/// `E_λ[F]`
pub fn expect(f: &Functional, space: &PointSpace, intensity: f64, mc: &McSpec) -> Result<Estimate> {
    let space = intensity_space(space, intensity)?;
    let m = accumulate(mc, |rng| Ok([f.eval(&sample_configuration(&space, 1.0, rng)?)]))?;
    Ok(m.estimate(0, mc.ci_level))
}

/// Ordered samples of `F` under `π_λ`, on the same stream as [`expect`].
pub fn samples(f: &Functional, space: &PointSpace, intensity: f64, mc: &McSpec) -> Result<Vec<f64>> {
    let space = intensity_space(space, intensity)?;
    collect(mc, |rng| Ok(f.eval(&sample_configuration(&space, 1.0, rng)?)))
}

/// Lower empirical median of `F`.
pub fn median(f: &Functional, space: &PointSpace, intensity: f64, mc: &McSpec) -> Result<f64> {
    let mut xs = samples(f, space, intensity, mc)?;
    Ok(lower_median(&mut xs))
}

pub fn lower_median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[(xs.len() - 1) / 2]
}
